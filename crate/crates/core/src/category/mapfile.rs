//! The `.map` morphism format, one component per line:
//!
//! ```text
//! % comment
//! component t <- q(X) :- r(X, Y). variant=exact
//! s <- p(X) :- r(X, X). translate=table.tr
//! _ <- :- r(X, X).
//! ```
//!
//! The leading `component` keyword is optional, `_` targets ⊥ and the
//! variant defaults to `sound`. Option values cannot contain spaces.

use std::collections::BTreeMap;

use super::component::{MappingComponent, Variant};
use crate::error::{Error, Result};
use crate::query::rule_at;
use crate::relational::Value;
use crate::syntax::{tokenize, Cursor, Tok};

/// Parses a morphism file. `read` loads translation tables named by
/// `translate=` options.
pub fn parse_map(
    src: &str,
    mut read: impl FnMut(&str) -> Result<String>,
) -> Result<Vec<MappingComponent>> {
    let mut out = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        out.push(component_line(line, &mut read).map_err(|e| on_line(e, i + 1))?);
    }
    Ok(out)
}

fn component_line(
    line: &str,
    read: &mut impl FnMut(&str) -> Result<String>,
) -> Result<MappingComponent> {
    let (body, options) = split_options(line);
    let toks = tokenize(body)?;
    let mut cur = Cursor::new(&toks, body);
    if cur.peek() == Some(&Tok::Ident("component".into()))
        && matches!(cur.peek_at(1), Some(Tok::Ident(_)) | Some(Tok::Var(_)))
    {
        cur.next();
    }
    let target = match cur.next() {
        Some(Tok::Ident(t)) => Some(t.clone()),
        Some(Tok::Var(v)) if v == "_" => None,
        _ => {
            cur.reset(cur.position().saturating_sub(1));
            return Err(cur.error("expected a target relation or `_`"));
        }
    };
    cur.expect(&Tok::LeftArrow)?;
    let query = rule_at(&mut cur, true)?;
    if !cur.at_end() {
        return Err(cur.error("expected end of line"));
    }

    let mut variant = Variant::Inclusion;
    let mut translation = None;
    for opt in options {
        match opt.split_once('=') {
            Some(("variant", v)) => {
                variant = Variant::from_keyword(v)
                    .ok_or_else(|| Error::InvalidMapping(format!("unknown variant `{v}`")))?;
            }
            Some(("translate", path)) => translation = Some(parse_translation(&read(path)?)?),
            _ => return Err(Error::InvalidMapping(format!("unknown option `{opt}`"))),
        }
    }
    Ok(MappingComponent {
        query,
        translation,
        variant,
        target,
    })
}

/// Peels trailing `key=value` words off the line.
fn split_options(line: &str) -> (&str, Vec<&str>) {
    let mut body = line.trim_end();
    let mut options = Vec::new();
    while let Some((rest, last)) = body.rsplit_once(char::is_whitespace) {
        if !(last.starts_with("variant=") || last.starts_with("translate=")) {
            break;
        }
        options.push(last);
        body = rest.trim_end();
    }
    options.reverse();
    (body, options)
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '%' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn on_line(e: Error, line: usize) -> Error {
    match e {
        Error::Syntax { column, message, .. } => Error::syntax(line, column, message),
        other => Error::syntax(line, 1, other.to_string()),
    }
}

/// A constant table, one `a -> b` pair per line.
pub fn parse_translation(src: &str) -> Result<BTreeMap<Value, Value>> {
    let toks = tokenize(src)?;
    let mut cur = Cursor::new(&toks, src);
    let mut table = BTreeMap::new();
    while !cur.at_end() {
        let from = cur.value()?;
        cur.expect(&Tok::Arrow)?;
        let to = cur.value()?;
        if from.is_null() || to.is_null() {
            return Err(Error::InvalidMapping("translations relate constants only".into()));
        }
        if table.insert(from.clone(), to).is_some() {
            return Err(Error::InvalidMapping(format!("`{from}` is translated twice")));
        }
        cur.eat(&Tok::Comma);
        cur.eat(&Tok::Dot);
    }
    Ok(table)
}
