//! Byte-level Java tokenizer.
//!
//! Produces a flat token stream with comments and whitespace dropped, string
//! and character literals kept as single tokens with their exact source text,
//! and multi-character operators munched greedily. No grammar is involved;
//! the extractor works from brace/paren structure over these tokens.
//!
//! Any byte >= 0x80 is treated as an identifier character. UTF-8
//! continuation bytes never collide with ASCII terminators, so scanning for
//! quotes, newlines and comment markers on raw bytes is safe, and token
//! slices always fall on character boundaries.

/// Lexical class of a token. `Word` covers identifiers and keywords alike;
/// the extractor distinguishes them by text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Number,
    Str,
    Char,
    Punct,
}

#[derive(Debug, Clone, Copy)]
pub struct Token<'a> {
    pub text: &'a str,
    pub kind: TokenKind,
    /// 1-based source line of the token's first character.
    pub line: usize,
    /// Byte offset of the token's first character.
    pub offset: usize,
}

const OPERATORS: &[&str] = &[
    ">>>=", ">>>", ">>=", "<<=", "...", "->", "::", "==", "!=", "<=", ">=", "&&", "||", "++",
    "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
];

fn is_word_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_' || b == b'$' || b >= 0x80
}

fn is_word_continue(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$' || b >= 0x80
}

pub fn tokenize(source: &str) -> Vec<Token<'_>> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;

    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b'\n' => {
                line += 1;
                i += 1;
            }
            b' ' | b'\t' | b'\r' | 0x0c => i += 1,
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                i += 2;
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'*' => {
                i += 2;
                while i < bytes.len() {
                    if bytes[i] == b'\n' {
                        line += 1;
                        i += 1;
                    } else if bytes[i] == b'*' && i + 1 < bytes.len() && bytes[i + 1] == b'/' {
                        i += 2;
                        break;
                    } else {
                        i += 1;
                    }
                }
            }
            b'"' => {
                let start = i;
                let start_line = line;
                if bytes[i..].starts_with(b"\"\"\"") {
                    // Text block: scan to the closing triple quote.
                    i += 3;
                    while i < bytes.len() && !bytes[i..].starts_with(b"\"\"\"") {
                        if bytes[i] == b'\n' {
                            line += 1;
                        }
                        if bytes[i] == b'\\' {
                            i += 1;
                        }
                        i += 1;
                    }
                    i = (i + 3).min(bytes.len());
                } else {
                    i += 1;
                    while i < bytes.len() {
                        match bytes[i] {
                            b'\\' => i += 2,
                            b'"' => {
                                i += 1;
                                break;
                            }
                            b'\n' => break, // unterminated; tolerate
                            _ => i += 1,
                        }
                    }
                    i = i.min(bytes.len());
                }
                tokens.push(Token { text: &source[start..i.min(bytes.len())], kind: TokenKind::Str, line: start_line, offset: start });
            }
            b'\'' => {
                let start = i;
                i += 1;
                while i < bytes.len() {
                    match bytes[i] {
                        b'\\' => i += 2,
                        b'\'' => {
                            i += 1;
                            break;
                        }
                        b'\n' => break, // unterminated; tolerate
                        _ => i += 1,
                    }
                }
                i = i.min(bytes.len());
                tokens.push(Token { text: &source[start..i.min(bytes.len())], kind: TokenKind::Char, line, offset: start });
            }
            _ if is_word_start(b) => {
                let start = i;
                while i < bytes.len() && is_word_continue(bytes[i]) {
                    i += 1;
                }
                tokens.push(Token { text: &source[start..i], kind: TokenKind::Word, line, offset: start });
            }
            _ if b.is_ascii_digit() || (b == b'.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit()) => {
                let start = i;
                i += 1;
                while i < bytes.len() {
                    let c = bytes[i];
                    if c.is_ascii_alphanumeric() || c == b'_' || c == b'.' {
                        i += 1;
                    } else if (c == b'+' || c == b'-')
                        && matches!(bytes[i - 1], b'e' | b'E' | b'p' | b'P')
                    {
                        i += 1;
                    } else {
                        break;
                    }
                }
                tokens.push(Token { text: &source[start..i], kind: TokenKind::Number, line, offset: start });
            }
            _ => {
                let rest = &source[i..];
                let op = OPERATORS.iter().find(|op| rest.starts_with(**op));
                let len = op.map_or(1, |op| op.len());
                tokens.push(Token { text: &source[i..i + len], kind: TokenKind::Punct, line, offset: i });
                i += len;
            }
        }
    }
    tokens
}
