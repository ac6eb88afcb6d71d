//! Tokenizer for problem files. Every token carries its line and column for
//! diagnostics.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Number(usize),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    At,
    Turnstile,   // |-
    Arrow,       // ->
    BindArrow,   // <-
    And,         // &
    Or,          // |
    Not,         // !
    Eq,          // =
    Gt,          // >
    Lt,          // <
    Conj,        // /\
    Plus,        // +
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "{}", s),
            TokenKind::Number(n) => write!(f, "{}", n),
            TokenKind::LBrace => write!(f, "{{"),
            TokenKind::RBrace => write!(f, "}}"),
            TokenKind::LParen => write!(f, "("),
            TokenKind::RParen => write!(f, ")"),
            TokenKind::LBracket => write!(f, "["),
            TokenKind::RBracket => write!(f, "]"),
            TokenKind::Comma => write!(f, ","),
            TokenKind::Semi => write!(f, ";"),
            TokenKind::Colon => write!(f, ":"),
            TokenKind::At => write!(f, "@"),
            TokenKind::Turnstile => write!(f, "|-"),
            TokenKind::Arrow => write!(f, "->"),
            TokenKind::BindArrow => write!(f, "<-"),
            TokenKind::And => write!(f, "&"),
            TokenKind::Or => write!(f, "|"),
            TokenKind::Not => write!(f, "!"),
            TokenKind::Eq => write!(f, "="),
            TokenKind::Gt => write!(f, ">"),
            TokenKind::Lt => write!(f, "<"),
            TokenKind::Conj => write!(f, "/\\"),
            TokenKind::Plus => write!(f, "+"),
            TokenKind::Eof => write!(f, "<eof>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("lex error at {line}:{col}: {message}")]
pub struct LexError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

pub fn lex(input: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump(&mut chars);
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            '{' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::LBrace,
                    line: tline,
                    col: tcol,
                });
            }
            '}' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::RBrace,
                    line: tline,
                    col: tcol,
                });
            }
            '(' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::LParen,
                    line: tline,
                    col: tcol,
                });
            }
            ')' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::RParen,
                    line: tline,
                    col: tcol,
                });
            }
            '[' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::LBracket,
                    line: tline,
                    col: tcol,
                });
            }
            ']' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::RBracket,
                    line: tline,
                    col: tcol,
                });
            }
            ',' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::Comma,
                    line: tline,
                    col: tcol,
                });
            }
            ';' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::Semi,
                    line: tline,
                    col: tcol,
                });
            }
            ':' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::Colon,
                    line: tline,
                    col: tcol,
                });
            }
            '@' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::At,
                    line: tline,
                    col: tcol,
                });
            }
            '&' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::And,
                    line: tline,
                    col: tcol,
                });
            }
            '!' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::Not,
                    line: tline,
                    col: tcol,
                });
            }
            '=' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::Eq,
                    line: tline,
                    col: tcol,
                });
            }
            '>' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::Gt,
                    line: tline,
                    col: tcol,
                });
            }
            '+' => {
                bump(&mut chars);
                tokens.push(Token {
                    kind: TokenKind::Plus,
                    line: tline,
                    col: tcol,
                });
            }
            '/' => {
                bump(&mut chars);
                if chars.peek() == Some(&'\\') {
                    bump(&mut chars);
                    tokens.push(Token {
                        kind: TokenKind::Conj,
                        line: tline,
                        col: tcol,
                    });
                } else {
                    return Err(LexError {
                        line: tline,
                        col: tcol,
                        message: "expected /\\".into(),
                    });
                }
            }
            '|' => {
                bump(&mut chars);
                if chars.peek() == Some(&'-') {
                    bump(&mut chars);
                    tokens.push(Token {
                        kind: TokenKind::Turnstile,
                        line: tline,
                        col: tcol,
                    });
                } else {
                    tokens.push(Token {
                        kind: TokenKind::Or,
                        line: tline,
                        col: tcol,
                    });
                }
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    tokens.push(Token {
                        kind: TokenKind::Arrow,
                        line: tline,
                        col: tcol,
                    });
                } else {
                    return Err(LexError {
                        line: tline,
                        col: tcol,
                        message: "expected ->".into(),
                    });
                }
            }
            '<' => {
                bump(&mut chars);
                if chars.peek() == Some(&'-') {
                    bump(&mut chars);
                    tokens.push(Token {
                        kind: TokenKind::BindArrow,
                        line: tline,
                        col: tcol,
                    });
                } else {
                    tokens.push(Token {
                        kind: TokenKind::Lt,
                        line: tline,
                        col: tcol,
                    });
                }
            }
            c if c.is_ascii_digit() => {
                let mut n = 0usize;
                while let Some(&d) = chars.peek() {
                    if let Some(v) = d.to_digit(10) {
                        n = n * 10 + v as usize;
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Number(n),
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' || d == '\'' {
                        s.push(d);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(s),
                    line: tline,
                    col: tcol,
                });
            }
            other => {
                return Err(LexError {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character {:?}", other),
                });
            }
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        line,
        col,
    });
    Ok(tokens)
}
