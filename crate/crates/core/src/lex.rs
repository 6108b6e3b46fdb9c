//! Lexer shared by the `.rec` and `.tgt` grammars.
//!
//! `#` starts a line comment unless immediately followed by a digit, in
//! which case it is a heap location `#N` (locations only occur in the
//! target grammar; the source parser rejects them).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Nat(u64),
    Loc(u32),
    Backslash,
    Dot,
    LParen,
    RParen,
    LBrace,
    RBrace,
    RBracket,
    Comma,
    Semi,
    Wildcard,
    EqQuestion,
    EqBracket,
    Eq,
    Plus,
    Minus,
    Gt,
    // keywords
    Rec,
    In,
    If,
    Then,
    Else,
    True,
    False,
    And,
    Or,
    Let,
    Alloc,
    Update,
    Heap,
    Expr,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Nat(n) => write!(f, "{n}"),
            Tok::Loc(l) => write!(f, "#{l}"),
            Tok::Backslash => f.write_str("\\"),
            Tok::Dot => f.write_str("."),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::LBrace => f.write_str("{"),
            Tok::RBrace => f.write_str("}"),
            Tok::RBracket => f.write_str("]"),
            Tok::Comma => f.write_str(","),
            Tok::Semi => f.write_str(";"),
            Tok::Wildcard => f.write_str("_"),
            Tok::EqQuestion => f.write_str("=?"),
            Tok::EqBracket => f.write_str("=["),
            Tok::Eq => f.write_str("="),
            Tok::Plus => f.write_str("+"),
            Tok::Minus => f.write_str("-"),
            Tok::Gt => f.write_str(">"),
            Tok::Rec => f.write_str("rec"),
            Tok::In => f.write_str("in"),
            Tok::If => f.write_str("if"),
            Tok::Then => f.write_str("then"),
            Tok::Else => f.write_str("else"),
            Tok::True => f.write_str("true"),
            Tok::False => f.write_str("false"),
            Tok::And => f.write_str("and"),
            Tok::Or => f.write_str("or"),
            Tok::Let => f.write_str("let"),
            Tok::Alloc => f.write_str("alloc"),
            Tok::Update => f.write_str("update"),
            Tok::Heap => f.write_str("heap"),
            Tok::Expr => f.write_str("expr"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone)]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

pub fn lex(input: &str) -> Result<Vec<(Tok, Pos)>, LexError> {
    let mut out = Vec::new();
    let mut chars = input.char_indices().peekable();
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some((_, ch)) = c {
                if ch == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    while let Some(&(_, c)) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '#' => {
                bump!();
                match chars.peek() {
                    Some(&(_, d)) if d.is_ascii_digit() => {
                        let mut n: u64 = 0;
                        while let Some(&(_, d)) = chars.peek() {
                            if d.is_ascii_digit() {
                                n = n * 10 + (d as u64 - '0' as u64);
                                bump!();
                            } else {
                                break;
                            }
                        }
                        if n > u32::MAX as u64 {
                            return Err(LexError {
                                pos,
                                message: format!("location index {n} too large"),
                            });
                        }
                        out.push((Tok::Loc(n as u32), pos));
                    }
                    _ => {
                        // line comment
                        while let Some(&(_, d)) = chars.peek() {
                            if d == '\n' {
                                break;
                            }
                            bump!();
                        }
                    }
                }
            }
            '\\' => {
                bump!();
                out.push((Tok::Backslash, pos));
            }
            '.' => {
                bump!();
                out.push((Tok::Dot, pos));
            }
            '(' => {
                bump!();
                out.push((Tok::LParen, pos));
            }
            ')' => {
                bump!();
                out.push((Tok::RParen, pos));
            }
            '{' => {
                bump!();
                out.push((Tok::LBrace, pos));
            }
            '}' => {
                bump!();
                out.push((Tok::RBrace, pos));
            }
            ']' => {
                bump!();
                out.push((Tok::RBracket, pos));
            }
            ',' => {
                bump!();
                out.push((Tok::Comma, pos));
            }
            ';' => {
                bump!();
                out.push((Tok::Semi, pos));
            }
            '+' => {
                bump!();
                out.push((Tok::Plus, pos));
            }
            '-' => {
                bump!();
                out.push((Tok::Minus, pos));
            }
            '>' => {
                bump!();
                out.push((Tok::Gt, pos));
            }
            '=' => {
                bump!();
                match chars.peek() {
                    Some(&(_, '?')) => {
                        bump!();
                        out.push((Tok::EqQuestion, pos));
                    }
                    Some(&(_, '[')) => {
                        bump!();
                        out.push((Tok::EqBracket, pos));
                    }
                    _ => out.push((Tok::Eq, pos)),
                }
            }
            d if d.is_ascii_digit() => {
                let mut n: u64 = 0;
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_ascii_digit() {
                        n = n
                            .checked_mul(10)
                            .and_then(|m| m.checked_add(d as u64 - '0' as u64))
                            .ok_or_else(|| LexError {
                                pos,
                                message: "numeric literal too large".into(),
                            })?;
                        bump!();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Nat(n), pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' || d == '\'' {
                        s.push(d);
                        bump!();
                    } else {
                        break;
                    }
                }
                let tok = match s.as_str() {
                    "_" => Tok::Wildcard,
                    "rec" => Tok::Rec,
                    "in" => Tok::In,
                    "if" => Tok::If,
                    "then" => Tok::Then,
                    "else" => Tok::Else,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "let" => Tok::Let,
                    "alloc" => Tok::Alloc,
                    "update" => Tok::Update,
                    "heap" => Tok::Heap,
                    "expr" => Tok::Expr,
                    _ => Tok::Ident(s),
                };
                out.push((tok, pos));
            }
            other => {
                return Err(LexError {
                    pos,
                    message: format!("unexpected character {other:?}"),
                });
            }
        }
    }
    Ok(out)
}
