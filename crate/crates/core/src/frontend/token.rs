//! Tokenizer for the Move-like source subset.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::span::Span;

pub const KEYWORDS: &[&str] = &[
    "module", "struct", "has", "public", "fun", "entry", "fallback", "let", "mut", "if", "else", "while", "return",
    "assert", "emit", "use", "true", "false",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Keyword,
    IntLiteral,
    StringLiteral,
    Punct,
    Comment,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TokenKind::Identifier => "identifier",
            TokenKind::Keyword => "keyword",
            TokenKind::IntLiteral => "integer literal",
            TokenKind::StringLiteral => "string literal",
            TokenKind::Punct => "punctuation",
            TokenKind::Comment => "comment",
            TokenKind::Eof => "end of file",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_punct(&self, text: &str) -> bool {
        self.is(TokenKind::Punct, text)
    }

    pub fn is_keyword(&self, text: &str) -> bool {
        self.is(TokenKind::Keyword, text)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{span}: {message}")]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

const MULTI_PUNCT: &[&str] = &["::", "==", "!=", "<=", ">=", "&&", "||", "->"];
const SINGLE_PUNCT: &str = "{}()[]<>;:,.=+-*/%!&|@^";

struct Cursor<'a> {
    src: &'a str,
    file: Arc<str>,
    pos: usize,
    char_pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        self.char_pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn mark(&self) -> Span {
        Span {
            file: self.file.clone(),
            line: self.line,
            column: self.column,
            offset: self.pos,
            char_offset: self.char_pos,
            length: 0,
        }
    }

    fn finish(&self, mut start: Span) -> (Span, String) {
        start.length = (self.char_pos - start.char_offset) as u32;
        let text = self.src[start.offset..self.pos].to_string();
        (start, text)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `source` into tokens. The result always ends with an `Eof` token;
/// comments are kept as `Comment` tokens.
pub fn tokenize(source: &str, file: &str) -> Result<Vec<Token>, Vec<LexError>> {
    let mut cur = Cursor { src: source, file: Arc::from(file), pos: 0, char_pos: 0, line: 1, column: 1 };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let start = cur.mark();
        let kind = if c == '/' && cur.peek_at(1) == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            TokenKind::Comment
        } else if c == '/' && cur.peek_at(1) == Some('*') {
            cur.bump();
            cur.bump();
            let mut closed = false;
            while let Some(c) = cur.bump() {
                if c == '*' && cur.peek() == Some('/') {
                    cur.bump();
                    closed = true;
                    break;
                }
            }
            if !closed {
                errors.push(LexError { span: start.clone(), message: "unterminated block comment".into() });
            }
            TokenKind::Comment
        } else if c == '"' || ((c == 'b' || c == 'x') && cur.peek_at(1) == Some('"')) {
            if c != '"' {
                cur.bump();
            }
            cur.bump();
            let mut closed = false;
            while let Some(c) = cur.bump() {
                match c {
                    '\\' => {
                        cur.bump();
                    }
                    '"' => {
                        closed = true;
                        break;
                    }
                    _ => {}
                }
            }
            if !closed {
                errors.push(LexError { span: start.clone(), message: "unterminated string literal".into() });
            }
            TokenKind::StringLiteral
        } else if c.is_ascii_digit() {
            while cur.peek().is_some_and(is_ident_continue) {
                cur.bump();
            }
            TokenKind::IntLiteral
        } else if is_ident_start(c) {
            while cur.peek().is_some_and(is_ident_continue) {
                cur.bump();
            }
            let word = &source[start.offset..cur.pos];
            if KEYWORDS.contains(&word) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else {
            let rest = &source[cur.pos..];
            if let Some(p) = MULTI_PUNCT.iter().find(|p| rest.starts_with(**p)) {
                for _ in 0..p.len() {
                    cur.bump();
                }
                TokenKind::Punct
            } else if SINGLE_PUNCT.contains(c) {
                cur.bump();
                TokenKind::Punct
            } else {
                cur.bump();
                let (span, text) = cur.finish(start);
                errors.push(LexError { span, message: format!("unexpected character `{text}`") });
                continue;
            }
        };
        let (span, text) = cur.finish(start);
        tokens.push(Token { kind, text, span });
    }

    let eof = cur.mark();
    tokens.push(Token { kind: TokenKind::Eof, text: String::new(), span: eof });
    if errors.is_empty() {
        Ok(tokens)
    } else {
        Err(errors)
    }
}
