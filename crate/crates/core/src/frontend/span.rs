use std::fmt;
use std::sync::Arc;

/// Source location. `line` and `column` are 1-based; `column` and `length`
/// count characters. `offset` is the byte offset of the first character and
/// `char_offset` the same position counted in characters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub file: Arc<str>,
    pub line: u32,
    pub column: u32,
    pub offset: usize,
    pub char_offset: usize,
    pub length: u32,
}

impl Span {
    /// Span from the start of `self` through the end of `end` (same file, `end` not before `self`).
    pub fn to(&self, end: &Span) -> Span {
        let end_char = end.char_offset + end.length as usize;
        let length = end_char.saturating_sub(self.char_offset) as u32;
        Span { length, ..self.clone() }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}
