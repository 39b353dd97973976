use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::relational::Value;
use crate::syntax::{tokenize, Cursor, Tok};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(Value),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(token: &str) -> Self {
        Term::Const(Value::constant(token))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Relational { symbol: String, args: Vec<Term> },
    Eq(Term, Term),
    Val(Term),
}

impl Atom {
    pub fn rel(symbol: impl Into<String>, args: Vec<Term>) -> Self {
        Atom::Relational {
            symbol: symbol.into(),
            args,
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Relational { args, .. } => args.iter().collect(),
            Atom::Eq(a, b) => vec![a, b],
            Atom::Val(t) => vec![t],
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.terms().into_iter().filter_map(Term::as_var)
    }

    pub fn symbol(&self) -> Option<&str> {
        match self {
            Atom::Relational { symbol, .. } => Some(symbol),
            _ => None,
        }
    }

    pub(crate) fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Atom {
        match self {
            Atom::Relational { symbol, args } => Atom::Relational {
                symbol: symbol.clone(),
                args: args.iter().map(&mut f).collect(),
            },
            Atom::Eq(a, b) => Atom::Eq(f(a), f(b)),
            Atom::Val(t) => Atom::Val(f(t)),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Relational { symbol, args } => {
                write!(f, "{symbol}(")?;
                write_list(f, args)?;
                f.write_str(")")
            }
            Atom::Eq(a, b) => write!(f, "{a} = {b}"),
            Atom::Val(t) => write!(f, "Val({t})"),
        }
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

/// Rule head. A missing name with no variables is a Yes/No query.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Head {
    pub name: Option<String>,
    pub vars: Vec<String>,
}

/// A conjunctive rule `q(X) :- body.`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    head: Head,
    body: Vec<Atom>,
}

impl Rule {
    /// Builds and checks a rule: at least one relational atom, head
    /// variables in the body, and every variable range-restricted.
    pub fn new(head: Head, body: Vec<Atom>) -> Result<Self> {
        let rule = Rule { head, body };
        rule.check()?;
        Ok(rule)
    }

    pub fn head(&self) -> &Head {
        &self.head
    }

    pub fn name(&self) -> Option<&str> {
        self.head.name.as_deref()
    }

    pub fn head_vars(&self) -> &[String] {
        &self.head.vars
    }

    pub fn arity(&self) -> usize {
        self.head.vars.len()
    }

    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    pub fn is_yes_no(&self) -> bool {
        self.head.name.is_none() && self.head.vars.is_empty()
    }

    /// Relation symbols used in the body, sorted.
    pub fn body_symbols(&self) -> BTreeSet<&str> {
        self.body.iter().filter_map(Atom::symbol).collect()
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        self.body
            .iter()
            .flat_map(Atom::vars)
            .chain(self.head.vars.iter().map(String::as_str))
            .collect()
    }

    pub fn relational_atoms(&self) -> impl Iterator<Item = (&str, &[Term])> {
        self.body.iter().filter_map(|a| match a {
            Atom::Relational { symbol, args } => Some((symbol.as_str(), args.as_slice())),
            _ => None,
        })
    }

    fn check(&self) -> Result<()> {
        if !self.body.iter().any(|a| a.symbol().is_some()) {
            return Err(Error::NoRelationalAtom(self.to_string()));
        }
        let all: BTreeSet<&str> = self.body.iter().flat_map(Atom::vars).collect();
        for v in &self.head.vars {
            if !all.contains(v.as_str()) {
                return Err(Error::HeadVariableNotInBody {
                    rule: self.to_string(),
                    variable: v.clone(),
                });
            }
        }
        let bound = range_restricted(&self.body);
        if let Some(v) = all.iter().find(|v| !bound.contains(**v)) {
            return Err(Error::UnsafeVariable {
                rule: self.to_string(),
                variable: v.to_string(),
            });
        }
        Ok(())
    }
}

/// Variables bound by relational atoms, closed under equalities with bound
/// variables or constants.
pub(crate) fn range_restricted(body: &[Atom]) -> BTreeSet<&str> {
    let mut bound: BTreeSet<&str> = body
        .iter()
        .filter(|a| a.symbol().is_some())
        .flat_map(Atom::vars)
        .collect();
    loop {
        let mut changed = false;
        for atom in body {
            if let Atom::Eq(a, b) = atom {
                let known = |t: &Term| match t {
                    Term::Const(_) => true,
                    Term::Var(v) => bound.contains(v.as_str()),
                };
                let (ka, kb) = (known(a), known(b));
                for (t, other_known) in [(a, kb), (b, ka)] {
                    if let Term::Var(v) = t {
                        if other_known && bound.insert(v.as_str()) {
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return bound;
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = &self.head.name {
            f.write_str(name)?;
            if !self.head.vars.is_empty() {
                f.write_str("(")?;
                write_list(f, &self.head.vars)?;
                f.write_str(")")?;
            }
            f.write_str(" ")?;
        }
        f.write_str(":- ")?;
        write_list(f, &self.body)?;
        f.write_str(".")
    }
}

impl std::str::FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_rule(s)
    }
}

/// Parses a single rule; the final `.` is optional.
pub fn parse_rule(src: &str) -> Result<Rule> {
    let toks = tokenize(src)?;
    let mut cur = Cursor::new(&toks, src);
    let rule = rule_at(&mut cur, true)?;
    if !cur.at_end() {
        return Err(cur.error("expected end of rule"));
    }
    Ok(rule)
}

/// Parses every rule of a file.
pub fn parse_rules(src: &str) -> Result<Vec<Rule>> {
    let toks = tokenize(src)?;
    let mut cur = Cursor::new(&toks, src);
    let mut rules = Vec::new();
    while !cur.at_end() {
        rules.push(rule_at(&mut cur, false)?);
    }
    Ok(rules)
}

/// Parses `head :- body.` at the cursor.
pub(crate) fn rule_at(cur: &mut Cursor<'_>, dot_optional: bool) -> Result<Rule> {
    let start = cur.spanned().map(|s| (s.line, s.column)).unwrap_or((1, 1));
    let head = head_at(cur)?;
    cur.expect(&Tok::ColonDash)?;
    let mut fresh = Fresh::default();
    let mut body = atoms_at(cur, &mut fresh)?;
    if !cur.eat(&Tok::Dot) && !(dot_optional && cur.at_end()) {
        return Err(cur.error("expected `.` or `,`"));
    }
    fresh.finish(&head.vars, &mut body);
    Rule::new(head, body).map_err(|e| locate(e, start))
}

fn locate(e: Error, (line, column): (usize, usize)) -> Error {
    match e {
        Error::Syntax { .. } => e,
        other => Error::syntax(line, column, other.to_string()),
    }
}

fn head_at(cur: &mut Cursor<'_>) -> Result<Head> {
    if cur.peek() == Some(&Tok::ColonDash) {
        return Ok(Head {
            name: None,
            vars: Vec::new(),
        });
    }
    let name = cur.ident()?;
    let mut vars = Vec::new();
    if cur.eat(&Tok::LParen) && !cur.eat(&Tok::RParen) {
        loop {
            match cur.next() {
                Some(Tok::Var(v)) if v != "_" => vars.push(v.clone()),
                _ => {
                    cur.reset(cur.position().saturating_sub(1));
                    return Err(cur.error("expected a head variable"));
                }
            }
            if cur.eat(&Tok::RParen) {
                break;
            }
            cur.expect(&Tok::Comma)?;
        }
    }
    Ok(Head {
        name: Some(name),
        vars,
    })
}

/// Hands out names for `_` occurrences. Placeholders are rewritten once the
/// whole rule is known so that generated names never collide.
#[derive(Default)]
pub(crate) struct Fresh {
    count: usize,
}

const PLACEHOLDER: &str = "\u{0}anon";

impl Fresh {
    fn next(&mut self) -> Term {
        self.count += 1;
        Term::Var(format!("{PLACEHOLDER}{}", self.count - 1))
    }

    pub(crate) fn finish(self, head: &[String], atoms: &mut [Atom]) {
        if self.count == 0 {
            return;
        }
        let taken: BTreeSet<String> = atoms
            .iter()
            .flat_map(|a| a.vars().map(str::to_string).collect::<Vec<_>>())
            .chain(head.iter().cloned())
            .collect();
        let mut next = 0usize;
        let mut names = Vec::with_capacity(self.count);
        while names.len() < self.count {
            let n = format!("_{next}");
            next += 1;
            if !taken.contains(&n) {
                names.push(n);
            }
        }
        for atom in atoms.iter_mut() {
            *atom = atom.map_terms(|t| match t {
                Term::Var(v) if v.starts_with(PLACEHOLDER) => {
                    let i: usize = v[PLACEHOLDER.len()..].parse().expect("placeholder index");
                    Term::Var(names[i].clone())
                }
                other => other.clone(),
            });
        }
    }
}

/// Comma-separated body atoms, up to (not including) the first token that
/// cannot continue the list.
pub(crate) fn atoms_at(cur: &mut Cursor<'_>, fresh: &mut Fresh) -> Result<Vec<Atom>> {
    let mut atoms = vec![atom_at(cur, fresh)?];
    while cur.eat(&Tok::Comma) {
        atoms.push(atom_at(cur, fresh)?);
    }
    Ok(atoms)
}

fn atom_at(cur: &mut Cursor<'_>, fresh: &mut Fresh) -> Result<Atom> {
    match (cur.peek(), cur.peek_at(1)) {
        (Some(Tok::Var(v)), Some(Tok::LParen)) if v == "Val" => {
            cur.next();
            cur.next();
            let t = term_at(cur, fresh)?;
            cur.expect(&Tok::RParen)?;
            Ok(Atom::Val(t))
        }
        (Some(Tok::Ident(symbol)), Some(Tok::LParen)) => {
            let symbol = symbol.clone();
            cur.next();
            cur.next();
            let mut args = Vec::new();
            if !cur.eat(&Tok::RParen) {
                loop {
                    args.push(term_at(cur, fresh)?);
                    if cur.eat(&Tok::RParen) {
                        break;
                    }
                    cur.expect(&Tok::Comma)?;
                }
            }
            Ok(Atom::Relational { symbol, args })
        }
        (Some(_), Some(Tok::Eq)) => {
            let a = term_at(cur, fresh)?;
            cur.expect(&Tok::Eq)?;
            let b = term_at(cur, fresh)?;
            Ok(Atom::Eq(a, b))
        }
        _ => Err(cur.error("expected an atom")),
    }
}

fn term_at(cur: &mut Cursor<'_>, fresh: &mut Fresh) -> Result<Term> {
    match cur.peek() {
        Some(Tok::Var(v)) if v == "_" => {
            cur.next();
            Ok(fresh.next())
        }
        Some(Tok::Var(v)) => {
            cur.next();
            Ok(Term::Var(v.clone()))
        }
        _ => Ok(Term::Const(cur.value()?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_rule() {
        let r = parse_rule("q(X) :- r(X,Y).").unwrap();
        assert_eq!(r.name(), Some("q"));
        assert_eq!(r.arity(), 1);
        assert_eq!(r.body().len(), 1);
        assert_eq!(r.to_string(), "q(X) :- r(X, Y).");
    }

    #[test]
    fn constants_in_body() {
        let r = parse_rule("q(X) :- r(X,Y), s(Y,b).").unwrap();
        assert_eq!(r.body().len(), 2);
        assert_eq!(
            r.body()[1],
            Atom::rel("s", vec![Term::var("Y"), Term::constant("b")])
        );
    }

    #[test]
    fn head_variable_must_occur_in_body() {
        match parse_rule("q(X) :- r(Y,Z).") {
            Err(Error::Syntax { message, .. }) => assert!(message.contains("X")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Rule::new(
                Head {
                    name: Some("q".into()),
                    vars: vec!["X".into()]
                },
                vec![Atom::rel("r", vec![Term::var("Y")])]
            ),
            Err(Error::HeadVariableNotInBody { .. })
        ));
    }

    #[test]
    fn safety_and_relational_atom() {
        assert!(parse_rule("q(X) :- r(Y), Val(X).").is_err());
        assert!(parse_rule("q(X) :- r(Y), X = Y.").is_ok());
        assert!(parse_rule("q(X) :- r(Y), X = b.").is_ok());
        assert!(parse_rule("q(X) :- X = b.").is_err());
    }

    #[test]
    fn yes_no_and_anonymous() {
        let r = parse_rule(":- r(X, X)").unwrap();
        assert!(r.is_yes_no());
        let r = parse_rule("q(X) :- r(X, _), s(_, _0).").unwrap();
        let vars = r.variables();
        assert_eq!(vars.len(), 4, "{r}");
        assert_eq!(r.to_string(), "q(X) :- r(X, _1), s(_2, _0).");
    }

    #[test]
    fn display_reparses() {
        for src in [
            "q(X, Y) :- r(X, Y), Val(X), Y = \"Big\".",
            ":- r(X, #3).",
            "q :- r(a).",
        ] {
            let r = parse_rule(src).unwrap();
            assert_eq!(parse_rule(&r.to_string()).unwrap(), r);
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_rule("q(X) :-\n  r(X,, Y).") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 7)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn several_rules() {
        let rules = parse_rules("% two\na(X) :- r(X).\nb(X) :- s(X).").unwrap();
        assert_eq!(rules.len(), 2);
    }
}
