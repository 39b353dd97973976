//! Schemas with keys, foreign keys, tgds and egds, and the `.schema` format:
//!
//! ```text
//! relation r/2 key(1).
//! relation s/2.
//! fk r[2] -> s[1].
//! tgd: p(X, Y) -> exists Z q(X, Z).
//! egd: q(X, Y), q(X, Z) -> Y = Z.
//! ```
//!
//! Column positions in files are 1-based; in memory they are 0-based.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::query::{atoms_at, Atom, Fresh, Term};
use crate::syntax::{tokenize, Cursor, Tok};

/// `r1[from_cols] ⊆ r2[to_cols]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ForeignKey {
    pub from: String,
    pub from_cols: Vec<usize>,
    pub to: String,
    pub to_cols: Vec<usize>,
}

impl fmt::Display for ForeignKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols = |c: &[usize]| {
            c.iter()
                .map(|i| (i + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "fk {}[{}] -> {}[{}].",
            self.from,
            cols(&self.from_cols),
            self.to,
            cols(&self.to_cols)
        )
    }
}

/// `premise -> exists Z.. conclusion`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tgd {
    pub premise: Vec<Atom>,
    pub conclusion: Vec<Atom>,
    pub existentials: BTreeSet<String>,
}

impl Tgd {
    pub fn new(premise: Vec<Atom>, conclusion: Vec<Atom>, existentials: BTreeSet<String>) -> Result<Self> {
        let tgd = Tgd {
            premise,
            conclusion,
            existentials,
        };
        let bound: BTreeSet<&str> = tgd.premise.iter().flat_map(Atom::vars).collect();
        if !tgd.premise.iter().any(|a| a.symbol().is_some()) {
            return Err(Error::InvalidSchema(format!("tgd `{tgd}` has no premise atom")));
        }
        if let Some(a) = tgd.conclusion.iter().find(|a| a.symbol().is_none()) {
            return Err(Error::InvalidSchema(format!(
                "tgd conclusions hold relational atoms only, found `{a}`"
            )));
        }
        for v in tgd.conclusion.iter().flat_map(Atom::vars) {
            let existential = tgd.existentials.contains(v);
            if existential == bound.contains(v) {
                return Err(Error::InvalidSchema(format!(
                    "variable {v} of tgd `{tgd}` must occur in the premise or be existential, not both"
                )));
            }
        }
        Ok(tgd)
    }

    /// Universal variables shared with the conclusion, in order of first
    /// use there.
    pub fn frontier(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for v in self.conclusion.iter().flat_map(Atom::vars) {
            if !self.existentials.contains(v) && !out.iter().any(|o| o == v) {
                out.push(v.to_string());
            }
        }
        out
    }

    /// No existentials, and no frontier variable repeated in the premise.
    pub fn is_weakly_full(&self) -> bool {
        if !self.existentials.is_empty() {
            return false;
        }
        self.frontier().iter().all(|y| {
            self.premise
                .iter()
                .flat_map(Atom::terms)
                .filter(|t| t.as_var() == Some(y))
                .count()
                <= 1
        })
    }
}

impl fmt::Display for Tgd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tgd: {} -> ", join(&self.premise))?;
        if !self.existentials.is_empty() {
            let vars: Vec<&str> = self.existentials.iter().map(String::as_str).collect();
            write!(f, "exists {} ", vars.join(", "))?;
        }
        write!(f, "{}.", join(&self.conclusion))
    }
}

/// `premise -> left = right`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Egd {
    pub premise: Vec<Atom>,
    pub left: String,
    pub right: String,
}

impl Egd {
    pub fn new(premise: Vec<Atom>, left: String, right: String) -> Result<Self> {
        let egd = Egd {
            premise,
            left,
            right,
        };
        let bound: BTreeSet<&str> = egd.premise.iter().flat_map(Atom::vars).collect();
        if !bound.contains(egd.left.as_str()) || !bound.contains(egd.right.as_str()) {
            return Err(Error::InvalidSchema(format!(
                "egd `{egd}` equates a variable missing from its premise"
            )));
        }
        Ok(egd)
    }
}

impl fmt::Display for Egd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "egd: {} -> {} = {}.", join(&self.premise), self.left, self.right)
    }
}

fn join(atoms: &[Atom]) -> String {
    atoms
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schema {
    relations: BTreeMap<String, usize>,
    keys: BTreeMap<String, BTreeSet<usize>>,
    fks: Vec<ForeignKey>,
    tgds: Vec<Tgd>,
    egds: Vec<Egd>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: impl Into<String>, arity: usize) -> Result<()> {
        let name = name.into();
        if arity == 0 {
            return Err(Error::InvalidSchema(format!("`{name}` needs arity >= 1")));
        }
        if self.relations.insert(name.clone(), arity).is_some() {
            return Err(Error::InvalidSchema(format!("`{name}` declared twice")));
        }
        Ok(())
    }

    /// At most one key per relation; columns are 0-based.
    pub fn set_key(&mut self, name: &str, cols: BTreeSet<usize>) -> Result<()> {
        let arity = self.arity(name)?;
        if cols.is_empty() || cols.iter().any(|&c| c >= arity) {
            return Err(Error::InvalidSchema(format!("bad key columns for `{name}`")));
        }
        if self.keys.insert(name.to_string(), cols).is_some() {
            return Err(Error::InvalidSchema(format!("`{name}` has two keys")));
        }
        Ok(())
    }

    /// The target columns must be the target's key, when it has one.
    pub fn add_fk(&mut self, fk: ForeignKey) -> Result<()> {
        let (fa, ta) = (self.arity(&fk.from)?, self.arity(&fk.to)?);
        if fk.from_cols.is_empty()
            || fk.from_cols.len() != fk.to_cols.len()
            || fk.from_cols.iter().any(|&c| c >= fa)
            || fk.to_cols.iter().any(|&c| c >= ta)
        {
            return Err(Error::InvalidSchema(format!("bad columns in `{fk}`")));
        }
        let distinct: BTreeSet<usize> = fk.to_cols.iter().copied().collect();
        if distinct.len() != fk.to_cols.len() {
            return Err(Error::InvalidSchema(format!("repeated target column in `{fk}`")));
        }
        if let Some(key) = self.keys.get(&fk.to) {
            if *key != distinct {
                return Err(Error::InvalidSchema(format!(
                    "`{fk}` must reference the key of `{}`",
                    fk.to
                )));
            }
        }
        self.fks.push(fk);
        Ok(())
    }

    pub fn add_tgd(&mut self, tgd: Tgd) -> Result<()> {
        for a in tgd.premise.iter().chain(&tgd.conclusion) {
            self.check_atom(a)?;
        }
        self.tgds.push(tgd);
        Ok(())
    }

    pub fn add_egd(&mut self, egd: Egd) -> Result<()> {
        for a in &egd.premise {
            self.check_atom(a)?;
        }
        self.egds.push(egd);
        Ok(())
    }

    fn check_atom(&self, atom: &Atom) -> Result<()> {
        if let Atom::Relational { symbol, args } = atom {
            let arity = self.arity(symbol)?;
            if arity != args.len() {
                return Err(Error::ArityMismatch {
                    symbol: symbol.clone(),
                    expected: arity,
                    found: args.len(),
                });
            }
        }
        Ok(())
    }

    pub fn arity(&self, name: &str) -> Result<usize> {
        self.relations
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidSchema(format!("`{name}` is not declared")))
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, usize)> {
        self.relations.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn key(&self, name: &str) -> Option<&BTreeSet<usize>> {
        self.keys.get(name)
    }

    pub fn keys(&self) -> impl Iterator<Item = (&str, &BTreeSet<usize>)> {
        self.keys.iter().map(|(n, k)| (n.as_str(), k))
    }

    pub fn fks(&self) -> &[ForeignKey] {
        &self.fks
    }

    pub fn tgds(&self) -> &[Tgd] {
        &self.tgds
    }

    pub fn egds(&self) -> &[Egd] {
        &self.egds
    }

    pub fn has_constraints(&self) -> bool {
        !(self.keys.is_empty() && self.fks.is_empty() && self.tgds.is_empty() && self.egds.is_empty())
    }

    /// A foreign key as a tgd: `r1(..) -> exists .. r2(..)`.
    pub fn fk_as_tgd(&self, fk: &ForeignKey) -> Result<Tgd> {
        let (fa, ta) = (self.arity(&fk.from)?, self.arity(&fk.to)?);
        let x: Vec<Term> = (0..fa).map(|i| Term::var(format!("X{}", i + 1))).collect();
        let mut existentials = BTreeSet::new();
        let y: Vec<Term> = (0..ta)
            .map(|j| match fk.to_cols.iter().position(|&c| c == j) {
                Some(p) => x[fk.from_cols[p]].clone(),
                None => {
                    let v = format!("Y{}", j + 1);
                    existentials.insert(v.clone());
                    Term::var(v)
                }
            })
            .collect();
        Tgd::new(
            vec![Atom::rel(fk.from.clone(), x)],
            vec![Atom::rel(fk.to.clone(), y)],
            existentials,
        )
    }

    /// One egd per non-key column of every keyed relation.
    pub fn key_egds(&self) -> Vec<(String, Egd)> {
        let mut out = Vec::new();
        for (name, key) in &self.keys {
            let arity = self.relations[name];
            let left: Vec<Term> = (0..arity).map(|i| Term::var(format!("X{}", i + 1))).collect();
            let right: Vec<Term> = (0..arity)
                .map(|i| {
                    if key.contains(&i) {
                        left[i].clone()
                    } else {
                        Term::var(format!("Y{}", i + 1))
                    }
                })
                .collect();
            for i in (0..arity).filter(|i| !key.contains(i)) {
                let egd = Egd::new(
                    vec![Atom::rel(name.clone(), left.clone()), Atom::rel(name.clone(), right.clone())],
                    format!("X{}", i + 1),
                    format!("Y{}", i + 1),
                )
                .expect("key egd variables occur in the premise");
                out.push((name.clone(), egd));
            }
        }
        out
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, arity) in &self.relations {
            write!(f, "relation {name}/{arity}")?;
            if let Some(k) = self.keys.get(name) {
                let cols: Vec<String> = k.iter().map(|c| (c + 1).to_string()).collect();
                write!(f, " key({})", cols.join(","))?;
            }
            writeln!(f, ".")?;
        }
        for fk in &self.fks {
            writeln!(f, "{fk}")?;
        }
        for t in &self.tgds {
            writeln!(f, "{t}")?;
        }
        for e in &self.egds {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Parses a `.schema` file. Declarations must precede their use.
pub fn parse_schema(src: &str) -> Result<Schema> {
    let toks = tokenize(src)?;
    let mut cur = Cursor::new(&toks, src);
    let mut schema = Schema::new();
    while !cur.at_end() {
        let start = cur.spanned().map_or((1, 1), |s| (s.line, s.column));
        let here = |e: Error| match e {
            Error::Syntax { .. } => e,
            other => Error::syntax(start.0, start.1, other.to_string()),
        };
        let word = cur.ident()?;
        match word.as_str() {
            "relation" => {
                let name = cur.ident()?;
                cur.expect(&Tok::Slash)?;
                let arity = cur.number()?;
                schema.declare(name.clone(), arity).map_err(here)?;
                if cur.eat(&Tok::Ident("key".into())) {
                    cur.expect(&Tok::LParen)?;
                    let cols = columns(&mut cur, &Tok::RParen)?;
                    schema.set_key(&name, cols.into_iter().collect()).map_err(here)?;
                }
            }
            "fk" => {
                let from = cur.ident()?;
                cur.expect(&Tok::LBracket)?;
                let from_cols = columns(&mut cur, &Tok::RBracket)?;
                cur.expect(&Tok::Arrow)?;
                let to = cur.ident()?;
                cur.expect(&Tok::LBracket)?;
                let to_cols = columns(&mut cur, &Tok::RBracket)?;
                schema
                    .add_fk(ForeignKey {
                        from,
                        from_cols,
                        to,
                        to_cols,
                    })
                    .map_err(here)?;
            }
            "tgd" => {
                cur.expect(&Tok::Colon)?;
                let tgd = tgd_at(&mut cur).map_err(here)?;
                schema.add_tgd(tgd).map_err(here)?;
            }
            "egd" => {
                cur.expect(&Tok::Colon)?;
                let egd = egd_at(&mut cur).map_err(here)?;
                schema.add_egd(egd).map_err(here)?;
            }
            _ => {
                cur.reset(cur.position() - 1);
                return Err(cur.error("expected `relation`, `fk`, `tgd` or `egd`"));
            }
        }
        cur.expect(&Tok::Dot)?;
    }
    Ok(schema)
}

/// Comma-separated 1-based positions up to `close`, returned 0-based.
fn columns(cur: &mut Cursor<'_>, close: &Tok) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    loop {
        let n = cur.number()?;
        if n == 0 {
            cur.reset(cur.position() - 1);
            return Err(cur.error("column positions start at 1"));
        }
        out.push(n - 1);
        if cur.eat(close) {
            return Ok(out);
        }
        cur.expect(&Tok::Comma)?;
    }
}

fn premise_at(cur: &mut Cursor<'_>) -> Result<Vec<Atom>> {
    let mut fresh = Fresh::default();
    let mut atoms = atoms_at(cur, &mut fresh)?;
    fresh.finish(&[], &mut atoms);
    Ok(atoms)
}

fn tgd_at(cur: &mut Cursor<'_>) -> Result<Tgd> {
    let premise = premise_at(cur)?;
    cur.expect(&Tok::Arrow)?;
    let mut existentials = BTreeSet::new();
    if cur.eat(&Tok::Ident("exists".into())) {
        loop {
            match cur.next() {
                Some(Tok::Var(v)) if v != "_" => existentials.insert(v.clone()),
                _ => {
                    cur.reset(cur.position() - 1);
                    return Err(cur.error("expected an existential variable"));
                }
            };
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
        cur.eat(&Tok::Colon);
    }
    let universal: Vec<String> = premise
        .iter()
        .flat_map(Atom::vars)
        .map(String::from)
        .collect();
    let mut fresh = Fresh::default();
    let mut conclusion = atoms_at(cur, &mut fresh)?;
    fresh.finish(&universal, &mut conclusion);
    // `_` in a conclusion stands for a fresh existential
    for v in conclusion.iter().flat_map(Atom::vars) {
        if v.starts_with('_') && !universal.iter().any(|u| u == v) {
            existentials.insert(v.to_string());
        }
    }
    Tgd::new(premise, conclusion, existentials)
}

fn egd_at(cur: &mut Cursor<'_>) -> Result<Egd> {
    let premise = premise_at(cur)?;
    cur.expect(&Tok::Arrow)?;
    let var = |cur: &mut Cursor<'_>| match cur.next() {
        Some(Tok::Var(v)) if v != "_" => Ok(v.clone()),
        _ => {
            cur.reset(cur.position() - 1);
            Err(cur.error("expected a variable"))
        }
    };
    let left = var(cur)?;
    cur.expect(&Tok::Eq)?;
    let right = var(cur)?;
    Egd::new(premise, left, right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_statement() {
        let s = parse_schema(
            "% example\nrelation r/2 key(1).\nrelation s/2.\nrelation p/1.\nfk s[2] -> r[1].\n\
             tgd: s(X, Y) -> exists Z r(X, Z).\ntgd: s(X, _) -> p(X).\negd: s(X, Y), s(X, Z) -> Y = Z.\n",
        )
        .unwrap();
        assert_eq!(s.arity("r").unwrap(), 2);
        assert_eq!(s.key("r"), Some(&BTreeSet::from([0])));
        assert_eq!(s.fks()[0].to_string(), "fk s[2] -> r[1].");
        assert_eq!(s.tgds().len(), 2);
        assert!(!s.tgds()[0].is_weakly_full());
        assert!(s.tgds()[1].is_weakly_full());
        assert_eq!(s.egds()[0].to_string(), "egd: s(X, Y), s(X, Z) -> Y = Z.");
        assert_eq!(parse_schema(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_declarations() {
        for src in [
            "relation r/2. relation r/1.",
            "relation r/2. fk r[3] -> r[1].",
            "relation r/2 key(1). relation s/2. fk s[2] -> r[2].",
            "relation r/2. tgd: r(X, Y) -> r(X, Z).",
            "relation r/2. egd: r(X, Y) -> Y = Z.",
            "fk r[1] -> s[1].",
            "relation r/2. tgd: r(X, Y) -> q(X).",
            "relation r/2 key(0).",
        ] {
            assert!(parse_schema(src).is_err(), "{src}");
        }
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_schema("relation r/2.\nrelaton s/1.") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn derived_constraints() {
        let s = parse_schema("relation r/3 key(1). relation s/2. fk s[2] -> r[1].").unwrap();
        let t = s.fk_as_tgd(&s.fks()[0]).unwrap();
        assert_eq!(t.to_string(), "tgd: s(X1, X2) -> exists Y2, Y3 r(X2, Y2, Y3).");
        let egds: Vec<String> = s.key_egds().iter().map(|(_, e)| e.to_string()).collect();
        assert_eq!(
            egds,
            [
                "egd: r(X1, X2, X3), r(X1, Y2, Y3) -> X2 = Y2.",
                "egd: r(X1, X2, X3), r(X1, Y2, Y3) -> X3 = Y3."
            ]
        );
    }
}
