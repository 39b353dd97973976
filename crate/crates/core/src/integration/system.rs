//! GLAV systems and the `.glav` mapping format:
//!
//! ```text
//! map: qs(X) :- s1(X, Y). => qg(X) :- g1(X, Z).
//! gav: g1(X, Y) :- s1(X, Y).
//! ```

use std::fmt;

use super::schema::Schema;
use crate::error::{Error, Result};
use crate::query::{rule_at, Atom, GavDefinitionSet, Rule};
use crate::syntax::{tokenize, Cursor, Tok};

/// `source ⇒ target`: every answer of the source query over the source
/// database is an answer of the target query over the global one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub source: Rule,
    pub target: Rule,
}

impl Assertion {
    pub fn new(source: Rule, target: Rule) -> Result<Self> {
        if source.arity() != target.arity() {
            return Err(Error::ArityMismatch {
                symbol: target.name().unwrap_or("=>").to_string(),
                expected: source.arity(),
                found: target.arity(),
            });
        }
        if let Some(a) = target.body().iter().find(|a| a.symbol().is_none()) {
            return Err(Error::InvalidMapping(format!(
                "target queries hold relational atoms only, found `{a}`"
            )));
        }
        Ok(Assertion { source, target })
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "map: {} => {}", self.source, self.target)
    }
}

/// Source and target schemas plus the assertions relating them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GlavSystem {
    pub source: Schema,
    pub target: Schema,
    pub assertions: Vec<Assertion>,
    pub gav: GavDefinitionSet,
}

impl GlavSystem {
    pub fn new(source: Schema, target: Schema) -> Self {
        GlavSystem {
            source,
            target,
            ..Default::default()
        }
    }

    /// Global relations with their arities: the target schema's, then any
    /// symbol only the mapping mentions.
    pub(crate) fn global_arities(&self) -> Result<Vec<(String, usize)>> {
        let mut out: std::collections::BTreeMap<String, usize> = self
            .target
            .relations()
            .map(|(n, a)| (n.to_string(), a))
            .collect();
        let mut note = |symbol: &str, arity: usize| -> Result<()> {
            match out.get(symbol) {
                Some(&a) if a != arity => Err(Error::ArityMismatch {
                    symbol: symbol.to_string(),
                    expected: a,
                    found: arity,
                }),
                Some(_) => Ok(()),
                None => {
                    out.insert(symbol.to_string(), arity);
                    Ok(())
                }
            }
        };
        for (name, def) in self.gav.definitions() {
            note(name, def.arity())?;
        }
        for a in &self.assertions {
            for (symbol, args) in a.target.relational_atoms() {
                note(symbol, args.len())?;
            }
        }
        Ok(out.into_iter().collect())
    }
}

/// Parses a `.glav` file into a system over the given schemas.
pub fn parse_glav(src: &str, source: Schema, target: Schema) -> Result<GlavSystem> {
    let toks = tokenize(src)?;
    let mut cur = Cursor::new(&toks, src);
    let mut system = GlavSystem::new(source, target);
    while !cur.at_end() {
        let start = cur.spanned().map_or((1, 1), |s| (s.line, s.column));
        let here = |e: Error| match e {
            Error::Syntax { .. } => e,
            other => Error::syntax(start.0, start.1, other.to_string()),
        };
        let word = cur.ident()?;
        cur.expect(&Tok::Colon)?;
        match word.as_str() {
            "map" => {
                let source = rule_at(&mut cur, false)?;
                cur.expect(&Tok::DoubleArrow)?;
                let target = rule_at(&mut cur, false)?;
                system
                    .assertions
                    .push(Assertion::new(source, target).map_err(here)?);
            }
            "gav" => {
                let def = rule_at(&mut cur, false)?;
                if def.body().iter().any(|a| matches!(a, Atom::Val(_))) {
                    return Err(here(Error::InvalidMapping("definitions cannot use Val".into())));
                }
                system.gav.insert(def).map_err(here)?;
            }
            _ => {
                return Err(Error::syntax(start.0, start.1, "expected `map:` or `gav:`"));
            }
        }
    }
    Ok(system)
}
