use std::collections::BTreeMap;
use std::fmt;

use super::{eval::resolve, Atom, Rule, Term};
use crate::error::{Error, Result};
use crate::relational::{Instance, Relation, Tuple, Value};

/// Selection condition over 0-based column positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cond {
    ColEq(usize, usize),
    ColConst(usize, Value),
    Val(usize),
}

impl Cond {
    fn max_col(&self) -> usize {
        match self {
            Cond::ColEq(a, b) => *a.max(b),
            Cond::ColConst(a, _) | Cond::Val(a) => *a,
        }
    }

    pub(crate) fn test(&self, t: &Tuple) -> bool {
        let v = t.values();
        match self {
            Cond::ColEq(a, b) => v[*a] == v[*b],
            Cond::ColConst(a, c) => v[*a] == *c,
            Cond::Val(a) => v[*a].is_const(),
        }
    }
}

/// An SPJRU term. Columns are positional and 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AlgebraTerm {
    Base(String),
    Select(Box<AlgebraTerm>, Cond),
    /// Keeps the listed columns; indices must be strictly increasing.
    Project(Box<AlgebraTerm>, Vec<usize>),
    Product(Box<AlgebraTerm>, Box<AlgebraTerm>),
    Union(Box<AlgebraTerm>, Box<AlgebraTerm>),
}

impl AlgebraTerm {
    pub fn base(symbol: impl Into<String>) -> Self {
        AlgebraTerm::Base(symbol.into())
    }

    pub fn select(self, cond: Cond) -> Self {
        AlgebraTerm::Select(Box::new(self), cond)
    }

    pub fn project(self, cols: Vec<usize>) -> Self {
        AlgebraTerm::Project(Box::new(self), cols)
    }

    pub fn product(self, other: AlgebraTerm) -> Self {
        AlgebraTerm::Product(Box::new(self), Box::new(other))
    }

    pub fn union(self, other: AlgebraTerm) -> Self {
        AlgebraTerm::Union(Box::new(self), Box::new(other))
    }
}

impl fmt::Display for AlgebraTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraTerm::Base(s) => f.write_str(s),
            AlgebraTerm::Select(t, c) => match c {
                Cond::ColEq(a, b) => write!(f, "σ[{a}={b}]({t})"),
                Cond::ColConst(a, v) => write!(f, "σ[{a}={v}]({t})"),
                Cond::Val(a) => write!(f, "σ[Val {a}]({t})"),
            },
            AlgebraTerm::Project(t, cols) => {
                let cols: Vec<String> = cols.iter().map(ToString::to_string).collect();
                write!(f, "π[{}]({t})", cols.join(","))
            }
            AlgebraTerm::Product(a, b) => write!(f, "({a} × {b})"),
            AlgebraTerm::Union(a, b) => write!(f, "({a} ∪ {b})"),
        }
    }
}

/// Output arity of `term`, checking every index against the instance's
/// declared arities.
pub fn term_arity(term: &AlgebraTerm, instance: &Instance) -> Result<usize> {
    match term {
        AlgebraTerm::Base(s) => instance
            .get(s)
            .map(Relation::arity)
            .ok_or_else(|| Error::UnboundSymbol(s.clone())),
        AlgebraTerm::Select(t, c) => {
            let n = term_arity(t, instance)?;
            if c.max_col() >= n {
                return Err(Error::InvalidTerm(format!(
                    "selection column {} out of range for arity {n}",
                    c.max_col()
                )));
            }
            Ok(n)
        }
        AlgebraTerm::Project(t, cols) => {
            let n = term_arity(t, instance)?;
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidTerm(format!(
                    "projection indices {cols:?} are not strictly increasing"
                )));
            }
            if let Some(&c) = cols.last() {
                if c >= n {
                    return Err(Error::InvalidTerm(format!(
                        "projection column {c} out of range for arity {n}"
                    )));
                }
            }
            Ok(cols.len())
        }
        AlgebraTerm::Product(a, b) => Ok(term_arity(a, instance)? + term_arity(b, instance)?),
        AlgebraTerm::Union(a, b) => {
            let (x, y) = (term_arity(a, instance)?, term_arity(b, instance)?);
            if x != y {
                return Err(Error::InvalidTerm(format!(
                    "union of arities {x} and {y}"
                )));
            }
            Ok(x)
        }
    }
}

/// Standard set semantics for SPJRU terms.
pub fn eval_algebra(term: &AlgebraTerm, instance: &Instance) -> Result<Relation> {
    let arity = term_arity(term, instance)?;
    let rel = eval_checked(term, instance)?;
    // keep the declared arity even when the result is ⊥
    Ok(if rel.is_empty() {
        Relation::empty(arity)
    } else {
        rel
    })
}

fn eval_checked(term: &AlgebraTerm, instance: &Instance) -> Result<Relation> {
    Ok(match term {
        AlgebraTerm::Base(s) => {
            let rel = instance
                .get(s)
                .ok_or_else(|| Error::UnboundSymbol(s.clone()))?;
            rel.clone()
        }
        AlgebraTerm::Select(t, c) => {
            let r = eval_checked(t, instance)?;
            Relation::new(r.arity(), r.iter().filter(|t| c.test(t)).cloned())?
        }
        AlgebraTerm::Project(t, cols) => eval_checked(t, instance)?.project(cols)?,
        AlgebraTerm::Product(a, b) => {
            let (x, y) = (eval_checked(a, instance)?, eval_checked(b, instance)?);
            let arity = term_arity(a, instance)? + term_arity(b, instance)?;
            let mut out = Relation::empty(arity);
            for s in x.iter() {
                for t in y.iter() {
                    let mut v = s.values().to_vec();
                    v.extend_from_slice(t.values());
                    out.insert(Tuple::new(v))?;
                }
            }
            out
        }
        AlgebraTerm::Union(a, b) => eval_checked(a, instance)?.union(&eval_checked(b, instance)?)?,
    })
}

/// Translates a rule into an equivalent select-project-product term.
///
/// Bodies become a product of their relational atoms filtered by
/// selections. A head that repeats or reorders variables is produced from
/// one copy of the filtered product per head position, all copies equated
/// column-wise, so the final projection stays strictly increasing.
pub fn compile(rule: &Rule, instance: &Instance) -> Result<AlgebraTerm> {
    let mut product: Option<AlgebraTerm> = None;
    let mut width = 0usize;
    let mut column: BTreeMap<&str, usize> = BTreeMap::new();
    let mut conds = Vec::new();

    for (symbol, args) in rule.relational_atoms() {
        let base = instance
            .get(symbol)
            .ok_or_else(|| Error::UnboundSymbol(symbol.to_string()))?;
        super::eval::check_arity(symbol, base, args.len())?;
        if base.arity() != args.len() {
            // bare ⊥: the whole body is empty
            return Err(Error::InvalidTerm(format!(
                "`{symbol}` has no declared arity"
            )));
        }
        for (i, term) in args.iter().enumerate() {
            let col = width + i;
            match term {
                Term::Const(c) => conds.push(Cond::ColConst(col, c.clone())),
                Term::Var(v) => match column.get(v.as_str()) {
                    Some(&first) => conds.push(Cond::ColEq(first, col)),
                    None => {
                        column.insert(v, col);
                    }
                },
            }
        }
        width += args.len();
        let base = AlgebraTerm::base(symbol);
        product = Some(match product {
            None => base,
            Some(p) => p.product(base),
        });
    }
    let product = product.ok_or_else(|| Error::NoRelationalAtom(rule.to_string()))?;

    // variables reached only through equalities take a column or a constant
    let mut constant: BTreeMap<&str, Value> = BTreeMap::new();
    let mut pending: Vec<&Atom> = rule
        .body()
        .iter()
        .filter(|a| a.symbol().is_none())
        .collect();
    loop {
        let before = pending.len();
        let mut rest = Vec::new();
        for atom in pending {
            let placed = match atom {
                Atom::Eq(a, b) => {
                    match (resolve_term(a, &column, &constant), resolve_term(b, &column, &constant)) {
                        (Some(x), Some(y)) => {
                            conds.extend(eq_cond(x, y, width)?);
                            true
                        }
                        (Some(x), None) => {
                            bind(b, x, &mut column, &mut constant);
                            true
                        }
                        (None, Some(y)) => {
                            bind(a, y, &mut column, &mut constant);
                            true
                        }
                        (None, None) => false,
                    }
                }
                Atom::Val(t) => match resolve_term(t, &column, &constant) {
                    Some(Place::Col(c)) => {
                        conds.push(Cond::Val(c));
                        true
                    }
                    Some(Place::Lit(v)) => {
                        if !v.is_const() {
                            conds.extend(never(width)?);
                        }
                        true
                    }
                    None => false,
                },
                Atom::Relational { .. } => true,
            };
            if !placed {
                rest.push(atom);
            }
        }
        pending = rest;
        if pending.is_empty() {
            break;
        }
        if pending.len() == before {
            return Err(Error::UnsafeVariable {
                rule: rule.to_string(),
                variable: pending[0].vars().next().unwrap_or("?").to_string(),
            });
        }
    }

    let mut filtered = product;
    for c in conds {
        filtered = filtered.select(c);
    }

    let mut cols = Vec::new();
    for v in rule.head_vars() {
        match column.get(v.as_str()) {
            Some(&c) => cols.push(c),
            None => {
                return Err(Error::InvalidTerm(format!(
                    "head variable {v} is fixed to a constant and has no column"
                )))
            }
        }
    }
    if cols.windows(2).all(|w| w[0] < w[1]) {
        return Ok(filtered.project(cols));
    }
    let mut copies = filtered.clone();
    for _ in 1..cols.len() {
        copies = copies.product(filtered.clone());
    }
    for copy in 1..cols.len() {
        for j in 0..width {
            copies = copies.select(Cond::ColEq(j, copy * width + j));
        }
    }
    let picked = cols
        .iter()
        .enumerate()
        .map(|(copy, c)| copy * width + c)
        .collect();
    Ok(copies.project(picked))
}

enum Place {
    Col(usize),
    Lit(Value),
}

fn resolve_term(
    t: &Term,
    column: &BTreeMap<&str, usize>,
    constant: &BTreeMap<&str, Value>,
) -> Option<Place> {
    match t {
        Term::Const(c) => Some(Place::Lit(c.clone())),
        Term::Var(v) => column
            .get(v.as_str())
            .map(|&c| Place::Col(c))
            .or_else(|| constant.get(v.as_str()).cloned().map(Place::Lit)),
    }
}

fn bind<'r>(
    t: &'r Term,
    place: Place,
    column: &mut BTreeMap<&'r str, usize>,
    constant: &mut BTreeMap<&'r str, Value>,
) {
    let v = t.as_var().expect("unresolved term is a variable");
    match place {
        Place::Col(c) => {
            column.insert(v, c);
        }
        Place::Lit(c) => {
            constant.insert(v, c);
        }
    }
}

fn eq_cond(x: Place, y: Place, width: usize) -> Result<Vec<Cond>> {
    Ok(match (x, y) {
        (Place::Col(a), Place::Col(b)) => vec![Cond::ColEq(a, b)],
        (Place::Col(a), Place::Lit(v)) | (Place::Lit(v), Place::Col(a)) => {
            vec![Cond::ColConst(a, v)]
        }
        (Place::Lit(a), Place::Lit(b)) if a == b => Vec::new(),
        (Place::Lit(_), Place::Lit(_)) => never(width)?,
    })
}

/// A pair of selections no tuple passes.
fn never(width: usize) -> Result<Vec<Cond>> {
    if width == 0 {
        return Err(Error::InvalidTerm(
            "unsatisfiable condition over a 0-ary body".into(),
        ));
    }
    Ok(vec![
        Cond::ColConst(0, Value::constant("")),
        Cond::ColConst(0, Value::constant("\u{0}")),
    ])
}

/// Convenience: evaluate a term given as a rule through its compiled form.
pub fn eval_compiled(rule: &Rule, instance: &Instance) -> Result<Relation> {
    for (s, args) in rule.relational_atoms() {
        resolve(instance, s, args.len())?;
    }
    eval_algebra(&compile(rule, instance)?, instance)
}
