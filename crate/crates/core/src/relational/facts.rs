//! Fact files: one ground atom per line, `r(a, #3, "Text").`

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Instance, Relation, Tuple};
use crate::error::{Error, Result};
use crate::syntax::{tokenize, Cursor, Tok};

/// Parses a fact file into a named instance.
pub fn parse_facts(src: &str) -> Result<Instance> {
    let toks = tokenize(src)?;
    let mut cur = Cursor::new(&toks, src);
    let mut rels: BTreeMap<String, Relation> = BTreeMap::new();

    while !cur.at_end() {
        let start = cur.spanned().map(|s| (s.line, s.column));
        let name = cur.ident()?;
        cur.expect(&Tok::LParen)?;
        let mut values = vec![cur.value()?];
        while cur.eat(&Tok::Comma) {
            values.push(cur.value()?);
        }
        cur.expect(&Tok::RParen)?;
        cur.expect(&Tok::Dot)?;

        let tuple = Tuple::new(values);
        let rel = rels
            .entry(name.clone())
            .or_insert_with(|| Relation::empty(tuple.arity()));
        if rel.arity() != tuple.arity() {
            let (line, column) = start.unwrap_or((0, 0));
            return Err(Error::syntax(
                line,
                column,
                format!(
                    "`{name}` used with arity {} and {}",
                    rel.arity(),
                    tuple.arity()
                ),
            ));
        }
        rel.insert(tuple)?;
    }
    Ok(Instance::from_named(rels))
}

/// Serializes the named relations of `instance`, sorted by name then tuple.
/// Unnamed relations get generated `vN` names first.
pub fn write_facts(instance: &Instance) -> String {
    let named = instance.with_view_names();
    let mut out = String::new();
    for (name, rel) in named.names() {
        for t in rel.relation.iter() {
            let args: Vec<String> = t.values().iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "{name}({}).", args.join(", "));
        }
    }
    out
}
