// SPDX-License-Identifier: Apache-2.0

//! Verilog subset: syntax tree, parser, printer and identifier table.

pub mod ast;
pub mod gen;
mod idents;
mod keywords;
mod lexer;
mod linemap;
mod parser;
mod printer;
pub mod visit;

use std::path::{Path, PathBuf};

pub use ast::*;
pub use idents::{collect_identifiers, IdentSites, IdentifierTable};
pub use keywords::{is_reserved, RESERVED};
pub use linemap::LineMap;
pub use parser::count_lines;
pub(crate) use parser::parse_number;
pub use printer::{expr_to_string, print, print_with_map};

/// Default upper bound on accepted source size.
pub const DEFAULT_MAX_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}, col {col}: syntax error, expected {}", expected.join(" or "))]
    Syntax {
        line: u32,
        col: u32,
        expected: Vec<String>,
    },
    #[error("line {line}: unsupported construct: {construct}")]
    Unsupported { line: u32, construct: String },
    #[error("line {line}: undeclared identifier `{name}`")]
    Undeclared { line: u32, name: String },
    #[error("line {line}: duplicate declaration of `{name}`")]
    Duplicate { line: u32, name: String },
    #[error("source is {bytes} bytes, limit is {limit}")]
    TooLarge { bytes: usize, limit: usize },
}

impl ParseError {
    pub fn line(&self) -> Option<u32> {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::Unsupported { line, .. }
            | ParseError::Undeclared { line, .. }
            | ParseError::Duplicate { line, .. } => Some(*line),
            ParseError::TooLarge { .. } => None,
        }
    }
}

/// A source file held in memory. `lines` counts newline-delimited physical
/// lines; indexing is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub path: PathBuf,
    pub text: String,
    pub lines: u32,
}

impl SourceFile {
    pub fn new(path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        let text = text.into();
        SourceFile {
            path: path.into(),
            lines: count_lines(&text),
            text,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Ok(SourceFile::new(path, text))
    }

    pub fn store(&self) -> std::io::Result<()> {
        std::fs::write(&self.path, &self.text)
    }

    /// Physical line `n` (1-based) without its terminator.
    pub fn line(&self, n: u32) -> Option<&str> {
        if n == 0 {
            return None;
        }
        self.text
            .split('\n')
            .nth(n as usize - 1)
            .filter(|_| n <= self.lines)
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
    }
}

pub fn parse(src: &SourceFile) -> Result<SyntaxTree, ParseError> {
    parse_with_limit(&src.text, DEFAULT_MAX_BYTES)
}

pub fn parse_str(text: &str) -> Result<SyntaxTree, ParseError> {
    parse_with_limit(text, DEFAULT_MAX_BYTES)
}

pub fn parse_with_limit(text: &str, limit: usize) -> Result<SyntaxTree, ParseError> {
    if text.len() > limit {
        return Err(ParseError::TooLarge {
            bytes: text.len(),
            limit,
        });
    }
    parser::parse_text(text)
}

#[cfg(test)]
mod tests;
