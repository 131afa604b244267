// SPDX-License-Identifier: Apache-2.0

//! Tokenizer for the Verilog subset. Comments are not tokens; they ride on
//! the token that follows them.

use super::ast::Comment;
use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokKind {
    Ident(String),
    /// A literal in written form: `8'hAB`, `'b0`, `12`.
    Number(String),
    /// `$name` system identifiers; always rejected by the parser.
    System(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokKind,
    pub line: u32,
    pub col: u32,
    pub comments: Vec<Comment>,
}

impl Token {
    pub fn is_punct(&self, p: &str) -> bool {
        matches!(&self.kind, TokKind::Punct(q) if *q == p)
    }

    pub fn is_ident(&self, name: &str) -> bool {
        matches!(&self.kind, TokKind::Ident(n) if n == name)
    }
}

// Longest first so that maximal munch works by linear scan.
const PUNCT: &[&str] = &[
    "<<<", ">>>", "===", "!==", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "~&", "~|", "~^",
    "^~", "+:", "-:", "(", ")", "[", "]", "{", "}", ",", ";", ":", "=", "<", ">", "+", "-", "*",
    "/", "%", "&", "|", "^", "~", "!", "?", "@", "#", ".",
];

pub fn tokenize(src: &str) -> Result<(Vec<Token>, Vec<Comment>), ParseError> {
    let bytes = src.as_bytes();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut line_start = 0usize;
    let mut out = Vec::new();
    let mut pending: Vec<Comment> = Vec::new();

    while i < bytes.len() {
        let c = bytes[i];
        let col = (i - line_start) as u32 + 1;
        match c {
            b'\n' => {
                line += 1;
                i += 1;
                line_start = i;
            }
            b' ' | b'\t' | b'\r' | 0x0c => i += 1,
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                let start = i;
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                let text = src[start..i].trim_end_matches('\r').trim_end().to_string();
                pending.push(Comment { text, line });
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                let start = i;
                let start_line = line;
                i += 2;
                loop {
                    if i + 1 >= bytes.len() {
                        return Err(ParseError::Syntax {
                            line: start_line,
                            col,
                            expected: vec!["`*/`".into()],
                        });
                    }
                    if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                        i += 2;
                        break;
                    }
                    if bytes[i] == b'\n' {
                        line += 1;
                        line_start = i + 1;
                    }
                    i += 1;
                }
                let text = src[start..i].replace("\r\n", "\n");
                pending.push(Comment {
                    text,
                    line: start_line,
                });
            }
            b'`' => {
                let start = i + 1;
                let mut j = start;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                return Err(ParseError::Unsupported {
                    line,
                    construct: format!("compiler directive `{}", &src[start..j]),
                });
            }
            b'\\' => {
                return Err(ParseError::Unsupported {
                    line,
                    construct: "escaped identifier".into(),
                })
            }
            b'"' => {
                return Err(ParseError::Unsupported {
                    line,
                    construct: "string literal".into(),
                })
            }
            b'$' => {
                let start = i;
                i += 1;
                while i < bytes.len() && is_ident_char(bytes[i]) {
                    i += 1;
                }
                out.push(Token {
                    kind: TokKind::System(src[start..i].to_string()),
                    line,
                    col,
                    comments: std::mem::take(&mut pending),
                });
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && is_ident_char(bytes[i]) {
                    i += 1;
                }
                out.push(Token {
                    kind: TokKind::Ident(src[start..i].to_string()),
                    line,
                    col,
                    comments: std::mem::take(&mut pending),
                });
            }
            c if c.is_ascii_digit() || c == b'\'' => {
                let start = i;
                let text = lex_number(bytes, &mut i).ok_or(ParseError::Syntax {
                    line,
                    col,
                    expected: vec!["numeric literal".into()],
                })?;
                debug_assert!(i > start);
                out.push(Token {
                    kind: TokKind::Number(text),
                    line,
                    col,
                    comments: std::mem::take(&mut pending),
                });
            }
            _ => {
                let rest = &src[i..];
                let Some(p) = PUNCT.iter().find(|p| rest.starts_with(**p)) else {
                    return Err(ParseError::Syntax {
                        line,
                        col,
                        expected: vec!["token".into()],
                    });
                };
                i += p.len();
                out.push(Token {
                    kind: TokKind::Punct(p),
                    line,
                    col,
                    comments: std::mem::take(&mut pending),
                });
            }
        }
    }
    let col = (i - line_start) as u32 + 1;
    out.push(Token {
        kind: TokKind::Eof,
        line,
        col,
        comments: Vec::new(),
    });
    Ok((out, pending))
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'$'
}

/// Lex `[size]'[s]<base><digits>` or a plain decimal. Whitespace between
/// the parts is not accepted.
fn lex_number(bytes: &[u8], i: &mut usize) -> Option<String> {
    let start = *i;
    while *i < bytes.len() && (bytes[*i].is_ascii_digit() || bytes[*i] == b'_') {
        *i += 1;
    }
    if *i < bytes.len() && bytes[*i] == b'\'' {
        *i += 1;
        if *i < bytes.len() && matches!(bytes[*i], b's' | b'S') {
            *i += 1;
        }
        if *i >= bytes.len() || !matches!(bytes[*i].to_ascii_lowercase(), b'b' | b'o' | b'd' | b'h')
        {
            return None;
        }
        *i += 1;
        let digits_start = *i;
        while *i < bytes.len()
            && (bytes[*i].is_ascii_hexdigit()
                || matches!(bytes[*i].to_ascii_lowercase(), b'x' | b'z' | b'?' | b'_'))
        {
            *i += 1;
        }
        if *i == digits_start {
            return None;
        }
    }
    if *i == start {
        return None;
    }
    Some(String::from_utf8_lossy(&bytes[start..*i]).into_owned())
}
