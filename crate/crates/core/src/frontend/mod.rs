//! Lexing, parsing and printing of MoveEVM-lite source.

pub mod ast;
pub mod parser;
pub mod printer;
pub mod span;
pub mod token;

use thiserror::Error;

pub use ast::Ast;
pub use parser::{parse, ParseError};
pub use printer::pretty_print;
pub use span::Span;
pub use token::{tokenize, LexError, Token, TokenKind};

/// A source file that lexed and parsed cleanly.
#[derive(Clone, Debug)]
pub struct ParsedFile {
    pub path: String,
    pub source: String,
    pub ast: Ast,
    /// Comment tokens in source order.
    pub comments: Vec<Token>,
}

impl ParsedFile {
    /// The text of 1-based line `line`, without its terminator.
    pub fn line_text(&self, line: u32) -> &str {
        self.source.lines().nth(line.saturating_sub(1) as usize).unwrap_or("")
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{0}")]
    Lex(LexError),
    #[error("{0}")]
    Parse(ParseError),
}

impl SyntaxError {
    pub fn span(&self) -> &Span {
        match self {
            SyntaxError::Lex(e) => &e.span,
            SyntaxError::Parse(e) => &e.span,
        }
    }
}

/// Tokenizes and parses one file.
pub fn parse_source(path: &str, source: &str) -> Result<ParsedFile, Vec<SyntaxError>> {
    let tokens = tokenize(source, path).map_err(|es| es.into_iter().map(SyntaxError::Lex).collect::<Vec<_>>())?;
    let ast = parse(&tokens).map_err(|es| es.into_iter().map(SyntaxError::Parse).collect::<Vec<_>>())?;
    let comments = tokens.into_iter().filter(|t| t.kind == TokenKind::Comment).collect();
    Ok(ParsedFile { path: path.to_string(), source: source.to_string(), ast, comments })
}
