//! Tokenizer shared by the rule, fact, schema and mapping formats.

use crate::error::{Error, Result};
use crate::relational::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Lowercase- or digit-initial word: symbol or constant.
    Ident(String),
    /// Uppercase- or underscore-initial word.
    Var(String),
    Quoted(String),
    Null(u64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    ColonDash,
    Colon,
    Eq,
    Arrow,
    DoubleArrow,
    LeftArrow,
    Slash,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Quoted(s) => format!("\"{s}\""),
            Tok::Null(n) => format!("`#{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::ColonDash => "`:-`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DoubleArrow => "`=>`".into(),
            Tok::LeftArrow => "`<-`".into(),
            Tok::Slash => "`/`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
    /// Byte offset of the first character.
    pub start: usize,
    /// Byte offset one past the last character.
    pub end: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    let mut line = 1;
    let mut line_start = 0;

    while let Some(&(start, c)) = chars.peek() {
        let column = src[line_start..start].chars().count() + 1;
        let push = |out: &mut Vec<Spanned>, tok, end| {
            out.push(Spanned {
                tok,
                line,
                column,
                start,
                end,
            })
        };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                line_start = start + 1;
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '%' => {
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' | ')' | '[' | ']' | ',' | '.' | '/' => {
                chars.next();
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    _ => Tok::Slash,
                };
                push(&mut out, tok, start + 1);
            }
            ':' => {
                chars.next();
                if matches!(chars.peek(), Some(&(_, '-'))) {
                    chars.next();
                    push(&mut out, Tok::ColonDash, start + 2);
                } else {
                    push(&mut out, Tok::Colon, start + 1);
                }
            }
            '=' => {
                chars.next();
                if matches!(chars.peek(), Some(&(_, '>'))) {
                    chars.next();
                    push(&mut out, Tok::DoubleArrow, start + 2);
                } else {
                    push(&mut out, Tok::Eq, start + 1);
                }
            }
            '-' => {
                chars.next();
                if matches!(chars.peek(), Some(&(_, '>'))) {
                    chars.next();
                    push(&mut out, Tok::Arrow, start + 2);
                } else {
                    return Err(Error::syntax(line, column, "expected `->`"));
                }
            }
            '<' => {
                chars.next();
                if matches!(chars.peek(), Some(&(_, '-'))) {
                    chars.next();
                    push(&mut out, Tok::LeftArrow, start + 2);
                } else {
                    return Err(Error::syntax(line, column, "expected `<-`"));
                }
            }
            '#' => {
                chars.next();
                let mut end = start + 1;
                while let Some(&(i, d)) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    end = i + 1;
                    chars.next();
                }
                let digits = &src[start + 1..end];
                let id: u64 = digits
                    .parse()
                    .map_err(|_| Error::syntax(line, column, "expected null id after `#`"))?;
                if id == 0 {
                    return Err(Error::syntax(line, column, "null ids start at 1"));
                }
                push(&mut out, Tok::Null(id), end);
            }
            '"' => {
                chars.next();
                let mut text = String::new();
                let mut end = None;
                while let Some((i, c)) = chars.next() {
                    match c {
                        '"' => {
                            end = Some(i + 1);
                            break;
                        }
                        '\\' => match chars.next() {
                            Some((_, 'n')) => text.push('\n'),
                            Some((_, '"')) => text.push('"'),
                            Some((_, '\\')) => text.push('\\'),
                            _ => return Err(Error::syntax(line, column, "bad escape in string")),
                        },
                        '\n' => break,
                        c => text.push(c),
                    }
                }
                let end = end.ok_or_else(|| Error::syntax(line, column, "unterminated string"))?;
                push(&mut out, Tok::Quoted(text), end);
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut end = start;
                while let Some(&(i, d)) = chars.peek() {
                    if !(d.is_alphanumeric() || d == '_') {
                        break;
                    }
                    end = i + d.len_utf8();
                    chars.next();
                }
                let word = src[start..end].to_string();
                let tok = if c.is_uppercase() || c == '_' {
                    Tok::Var(word)
                } else {
                    Tok::Ident(word)
                };
                push(&mut out, tok, end);
            }
            other => {
                return Err(Error::syntax(
                    line,
                    column,
                    format!("unexpected character `{other}`"),
                ))
            }
        }
    }
    Ok(out)
}

/// Cursor over a token stream with error helpers.
pub(crate) struct Cursor<'a> {
    toks: &'a [Spanned],
    pos: usize,
    /// Position reported for errors at end of input.
    eof: (usize, usize),
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(toks: &'a [Spanned], src: &str) -> Self {
        let line = src.lines().count().max(1);
        let column = src.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
        Cursor {
            toks,
            pos: 0,
            eof: (line, column),
        }
    }

    pub(crate) fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    pub(crate) fn peek_at(&self, offset: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + offset).map(|s| &s.tok)
    }

    pub(crate) fn spanned(&self) -> Option<&'a Spanned> {
        self.toks.get(self.pos)
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub(crate) fn next(&mut self) -> Option<&'a Tok> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {}", tok.describe())))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => Err(self.error("expected a lowercase identifier")),
        }
    }

    pub(crate) fn number(&mut self) -> Result<usize> {
        match self.peek() {
            Some(Tok::Ident(s)) if s.chars().all(|c| c.is_ascii_digit()) => {
                let n = s.parse().map_err(|_| self.error("number out of range"))?;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.error("expected a number")),
        }
    }

    /// A ground value: constant word, quoted string or marked null.
    pub(crate) fn value(&mut self) -> Result<Value> {
        let v = match self.peek() {
            Some(Tok::Ident(s)) | Some(Tok::Quoted(s)) => Value::constant(s),
            Some(Tok::Null(n)) => Value::null(*n),
            _ => return Err(self.error("expected a constant or `#n`")),
        };
        self.pos += 1;
        Ok(v)
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> Error {
        let message = message.into();
        match self.spanned() {
            Some(s) => Error::syntax(
                s.line,
                s.column,
                format!("{message}, found {}", s.tok.describe()),
            ),
            None => Error::syntax(self.eof.0, self.eof.1, format!("{message}, found end of input")),
        }
    }

    pub(crate) fn position(&self) -> usize {
        self.pos
    }

    pub(crate) fn reset(&mut self, pos: usize) {
        self.pos = pos;
    }
}
