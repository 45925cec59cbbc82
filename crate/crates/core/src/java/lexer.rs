//! Tokenizer for Java source.
//!
//! `>` is always emitted as a single-character token so that nested type
//! arguments close cleanly; the parser re-joins adjacent `>` and `=` tokens
//! into shift and comparison operators.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Char,
    Op,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: usize,
    pub column: usize,
    /// Last line the token touches (text blocks span several).
    pub end_line: usize,
    /// Byte offset just past the token; used to detect adjacency.
    pub end: usize,
    pub start: usize,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.kind != TokenKind::Str && self.kind != TokenKind::Char && self.text == text
    }
}

/// A comment's inclusive line range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommentSpan {
    pub start_line: usize,
    pub end_line: usize,
}

pub struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<CommentSpan>,
    pub line_count: usize,
}

const OPERATORS: &[&str] = &[
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=",
    "<<", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@", "=", ">", "<", "!", "~", "?", ":", "+", "-", "*", "/", "&",
    "|", "^", "%",
];

pub fn tokenize(text: &str, path: &str) -> Result<Lexed> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut comments = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut line_start = 0;

    let err = |line: usize, column: usize, message: &str| Error::Parse {
        file: path.to_string(),
        line,
        column,
        message: message.to_string(),
    };

    while i < bytes.len() {
        let c = bytes[i];
        let column = i - line_start + 1;
        match c {
            b'\n' => {
                line += 1;
                i += 1;
                line_start = i;
            }
            b' ' | b'\t' | b'\r' | 0x0c => i += 1,
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                comments.push(CommentSpan {
                    start_line: line,
                    end_line: line,
                });
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                let start_line = line;
                i += 2;
                loop {
                    if i + 1 >= bytes.len() {
                        return Err(err(start_line, column, "unterminated block comment"));
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
                comments.push(CommentSpan {
                    start_line,
                    end_line: line,
                });
            }
            b'"' => {
                let start = i;
                let start_line = line;
                if text[i..].starts_with("\"\"\"") {
                    i += 3;
                    loop {
                        if i >= bytes.len() {
                            return Err(err(start_line, column, "unterminated text block"));
                        }
                        if bytes[i] == b'\\' {
                            i += 2;
                            continue;
                        }
                        if text[i..].starts_with("\"\"\"") {
                            i += 3;
                            break;
                        }
                        if bytes[i] == b'\n' {
                            line += 1;
                            line_start = i + 1;
                        }
                        i += 1;
                    }
                } else {
                    i += 1;
                    loop {
                        match bytes.get(i) {
                            None | Some(b'\n') => return Err(err(start_line, column, "unterminated string literal")),
                            Some(b'\\') => i += 2,
                            Some(b'"') => {
                                i += 1;
                                break;
                            }
                            _ => i += 1,
                        }
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Str,
                    text: text[start..i].to_string(),
                    line: start_line,
                    column,
                    end_line: line,
                    start,
                    end: i,
                });
            }
            b'\'' => {
                let start = i;
                i += 1;
                loop {
                    match bytes.get(i) {
                        None | Some(b'\n') => return Err(err(line, column, "unterminated character literal")),
                        Some(b'\\') => i += 2,
                        Some(b'\'') => {
                            i += 1;
                            break;
                        }
                        _ => i += 1,
                    }
                }
                tokens.push(simple(TokenKind::Char, text, start, i, line, column));
            }
            b'0'..=b'9' => {
                let start = i;
                i = scan_number(bytes, i);
                tokens.push(simple(TokenKind::Number, text, start, i, line, column));
            }
            b'.' if bytes.get(i + 1).is_some_and(u8::is_ascii_digit) => {
                let start = i;
                i = scan_number(bytes, i);
                tokens.push(simple(TokenKind::Number, text, start, i, line, column));
            }
            c if c == b'_' || c == b'$' || c.is_ascii_alphabetic() || c >= 0x80 => {
                let start = i;
                while i < bytes.len() {
                    let b = bytes[i];
                    if b == b'_' || b == b'$' || b.is_ascii_alphanumeric() {
                        i += 1;
                    } else if b >= 0x80 {
                        // Non-ASCII identifier characters; step over the whole code point.
                        let ch = text[i..].chars().next().unwrap();
                        if !ch.is_alphanumeric() {
                            break;
                        }
                        i += ch.len_utf8();
                    } else {
                        break;
                    }
                }
                if i == start {
                    return Err(err(line, column, "unexpected character"));
                }
                tokens.push(simple(TokenKind::Ident, text, start, i, line, column));
            }
            _ => {
                let rest = &text[i..];
                let op = OPERATORS.iter().find(|op| rest.starts_with(**op)).ok_or_else(|| {
                    err(
                        line,
                        column,
                        &format!("unexpected character `{}`", rest.chars().next().unwrap()),
                    )
                })?;
                tokens.push(simple(TokenKind::Op, text, i, i + op.len(), line, column));
                i += op.len();
            }
        }
    }
    let line_count = if text.is_empty() {
        0
    } else if text.ends_with('\n') {
        line - 1
    } else {
        line
    };
    tokens.push(Token {
        kind: TokenKind::Eof,
        text: String::new(),
        line,
        column: i - line_start + 1,
        end_line: line,
        start: i,
        end: i,
    });
    Ok(Lexed {
        tokens,
        comments,
        line_count,
    })
}

fn simple(kind: TokenKind, text: &str, start: usize, end: usize, line: usize, column: usize) -> Token {
    Token {
        kind,
        text: text[start..end].to_string(),
        line,
        column,
        end_line: line,
        start,
        end,
    }
}

fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    let hex = bytes[i] == b'0' && matches!(bytes.get(i + 1), Some(b'x' | b'X'));
    if hex {
        i += 2;
    }
    while i < bytes.len() {
        let b = bytes[i];
        let prev = bytes[i - 1];
        let ok = b.is_ascii_alphanumeric()
            || b == b'_'
            || b == b'.'
            || ((b == b'+' || b == b'-')
                && if hex {
                    matches!(prev, b'p' | b'P')
                } else {
                    matches!(prev, b'e' | b'E')
                });
        if !ok {
            break;
        }
        // `1..2` does not occur in Java, but `x.length` after a number cannot either;
        // stop at a dot that is followed by an identifier start other than an exponent.
        if b == b'.'
            && bytes
                .get(i + 1)
                .is_some_and(|n| n.is_ascii_alphabetic() && !matches!(n, b'e' | b'E' | b'f' | b'F' | b'd' | b'D'))
        {
            break;
        }
        i += 1;
    }
    i
}
