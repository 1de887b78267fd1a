//! S-expression reader for PDDL sources.
//!
//! Identifiers are folded to lower case while reading. `;` starts a comment
//! that runs to the end of the line.

use std::fmt;

use thiserror::Error;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sexpr {
    Atom { text: String, pos: Pos },
    List { items: Vec<Sexpr>, pos: Pos },
}

impl Sexpr {
    pub fn pos(&self) -> Pos {
        match self {
            Sexpr::Atom { pos, .. } | Sexpr::List { pos, .. } => *pos,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom { text, .. } => Some(text),
            Sexpr::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List { items, .. } => Some(items),
            Sexpr::Atom { .. } => None,
        }
    }

    /// Head symbol of a list, if it is an atom.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|items| items.first()).and_then(Sexpr::as_atom)
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom { text, .. } => f.write_str(text),
            Sexpr::List { items, .. } => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("{pos}: unexpected character {ch:?}")]
    BadChar { ch: char, pos: Pos },
    #[error("{pos}: unbalanced ')'")]
    UnexpectedClose { pos: Pos },
    #[error("{pos}: '(' is never closed")]
    Unclosed { pos: Pos },
    #[error("{pos}: trailing input after the top-level expression")]
    Trailing { pos: Pos },
    #[error("empty input")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open(Pos),
    Close(Pos),
    Atom(String, Pos),
}

fn is_symbol_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '-' | '_' | '?' | ':' | '.' | '/' | '<' | '>' | '=' | '+' | '*' | '!')
}

fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                col += 1;
                tokens.push(Token::Open(pos));
            }
            ')' => {
                chars.next();
                col += 1;
                tokens.push(Token::Close(pos));
            }
            c if is_symbol_char(c) => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_symbol_char(c) {
                        break;
                    }
                    text.extend(c.to_lowercase());
                    chars.next();
                    col += 1;
                }
                tokens.push(Token::Atom(text, pos));
            }
            other => return Err(LexError::BadChar { ch: other, pos }),
        }
    }
    Ok(tokens)
}

/// Reads exactly one top-level expression.
pub fn parse_one(src: &str) -> Result<Sexpr, LexError> {
    let tokens = tokenize(src)?;
    let mut iter = tokens.into_iter().peekable();
    let first = iter.next().ok_or(LexError::Empty)?;
    let expr = read(first, &mut iter)?;
    if let Some(tok) = iter.next() {
        let pos = match tok {
            Token::Open(p) | Token::Close(p) | Token::Atom(_, p) => p,
        };
        return Err(match tok {
            Token::Close(_) => LexError::UnexpectedClose { pos },
            _ => LexError::Trailing { pos },
        });
    }
    Ok(expr)
}

fn read(tok: Token, rest: &mut impl Iterator<Item = Token>) -> Result<Sexpr, LexError> {
    match tok {
        Token::Atom(text, pos) => Ok(Sexpr::Atom { text, pos }),
        Token::Close(pos) => Err(LexError::UnexpectedClose { pos }),
        Token::Open(pos) => {
            let mut items = Vec::new();
            loop {
                match rest.next() {
                    None => return Err(LexError::Unclosed { pos }),
                    Some(Token::Close(_)) => return Ok(Sexpr::List { items, pos }),
                    Some(t) => items.push(read(t, rest)?),
                }
            }
        }
    }
}
