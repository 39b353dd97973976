use std::collections::{BTreeMap, BTreeSet};

use super::{Atom, Rule, Term};
use crate::error::{Error, Result};
use crate::relational::{Instance, Relation, Tuple, Value};

/// A variable assignment produced by [`for_each_match`].
pub(crate) type Binding = BTreeMap<String, Value>;

/// Resolves a body symbol to its extension, checking arity.
pub(crate) fn resolve<'a>(
    instance: &'a Instance,
    symbol: &str,
    arity: usize,
) -> Result<&'a Relation> {
    let rel = instance
        .get(symbol)
        .ok_or_else(|| Error::UnboundSymbol(symbol.to_string()))?;
    check_arity(symbol, rel, arity)?;
    Ok(rel)
}

pub(crate) fn check_arity(symbol: &str, rel: &Relation, arity: usize) -> Result<()> {
    // a bare ⊥ carries no arity and matches any use
    let bare_bottom = rel.is_empty() && rel.arity() == 0;
    if rel.arity() != arity && !bare_bottom {
        return Err(Error::ArityMismatch {
            symbol: symbol.to_string(),
            expected: rel.arity(),
            found: arity,
        });
    }
    Ok(())
}

/// Calls `visit` once per valuation of `atoms` (relational atoms joined left
/// to right, then equalities and `Val` guards). Stops early when `visit`
/// returns `false`.
pub(crate) fn for_each_match<'a>(
    atoms: &[Atom],
    mut lookup: impl FnMut(&str, usize) -> Result<&'a Relation>,
    mut visit: impl FnMut(&Binding) -> Result<bool>,
) -> Result<()> {
    let mut rels = Vec::new();
    let mut guards = Vec::new();
    for atom in atoms {
        match atom {
            Atom::Relational { symbol, args } => rels.push((lookup(symbol, args.len())?, args)),
            other => guards.push(other),
        }
    }

    // guards whose variables are all bound by relational atoms get checked
    // as soon as the last of them is bound
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut level_of = vec![None; guards.len()];
    for (i, (_, args)) in rels.iter().enumerate() {
        seen.extend(args.iter().filter_map(Term::as_var));
        for (g, guard) in guards.iter().enumerate() {
            if level_of[g].is_none() && guard.vars().all(|v| seen.contains(v)) {
                level_of[g] = Some(i);
            }
        }
    }
    let mut early: Vec<Vec<&Atom>> = vec![Vec::new(); rels.len()];
    let mut late = Vec::new();
    for (g, guard) in guards.iter().enumerate() {
        match level_of[g] {
            Some(i) => early[i].push(*guard),
            None => late.push(*guard),
        }
    }

    let mut binding = Binding::new();
    let mut stop = false;
    search(&rels, &early, &late, 0, &mut binding, &mut visit, &mut stop)
}

fn search(
    rels: &[(&Relation, &Vec<Term>)],
    early: &[Vec<&Atom>],
    late: &[&Atom],
    depth: usize,
    binding: &mut Binding,
    visit: &mut impl FnMut(&Binding) -> Result<bool>,
    stop: &mut bool,
) -> Result<()> {
    if depth == rels.len() {
        let mut extended = binding.clone();
        if settle(late, &mut extended) && !visit(&extended)? {
            *stop = true;
        }
        return Ok(());
    }
    let (rel, args) = rels[depth];
    for tuple in rel.iter() {
        if tuple.arity() != args.len() {
            continue;
        }
        let mut added = Vec::new();
        let mut ok = true;
        for (term, value) in args.iter().zip(tuple.values()) {
            match term {
                Term::Const(c) => {
                    if c != value {
                        ok = false;
                        break;
                    }
                }
                Term::Var(v) => match binding.get(v) {
                    Some(bound) if bound != value => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        binding.insert(v.clone(), value.clone());
                        added.push(v);
                    }
                },
            }
        }
        if ok && early[depth].iter().all(|g| holds(g, binding) == Some(true)) {
            search(rels, early, late, depth + 1, binding, visit, stop)?;
        }
        for v in added {
            binding.remove(v);
        }
        if *stop {
            break;
        }
    }
    Ok(())
}

fn term_value<'b>(t: &'b Term, binding: &'b Binding) -> Option<&'b Value> {
    match t {
        Term::Const(c) => Some(c),
        Term::Var(v) => binding.get(v),
    }
}

/// `None` when a variable is still unbound.
fn holds(atom: &Atom, binding: &Binding) -> Option<bool> {
    match atom {
        Atom::Eq(a, b) => Some(term_value(a, binding)? == term_value(b, binding)?),
        Atom::Val(t) => Some(term_value(t, binding)?.is_const()),
        Atom::Relational { .. } => unreachable!("guards only"),
    }
}

/// Binds variables through equalities, then checks every guard.
fn settle(guards: &[&Atom], binding: &mut Binding) -> bool {
    loop {
        let mut changed = false;
        for g in guards {
            if let Atom::Eq(a, b) = g {
                match (term_value(a, binding).cloned(), term_value(b, binding).cloned()) {
                    (Some(v), None) => {
                        binding.insert(b.as_var().unwrap().to_string(), v);
                        changed = true;
                    }
                    (None, Some(v)) => {
                        binding.insert(a.as_var().unwrap().to_string(), v);
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        if !changed {
            break;
        }
    }
    guards.iter().all(|g| holds(g, binding) == Some(true))
}

/// Evaluates a rule: the set of head tuples over all satisfying valuations.
///
/// Yes/No rules answer ⊥ (No) or the one-tuple 0-ary relation (Yes).
pub fn eval_rule(rule: &Rule, instance: &Instance) -> Result<Relation> {
    let head = rule.head_vars();
    let mut out = Relation::empty(head.len());
    let zero_ary = head.is_empty();
    for_each_match(
        rule.body(),
        |s, n| resolve(instance, s, n),
        |b| {
            let t = Tuple::new(head.iter().map(|v| b[v].clone()).collect());
            out.insert(t)?;
            Ok(!zero_ary)
        },
    )?;
    Ok(out)
}

/// Evaluates a Yes/No (or any) rule as a boolean.
pub fn holds_in(rule: &Rule, instance: &Instance) -> Result<bool> {
    let mut found = false;
    for_each_match(
        rule.body(),
        |s, n| resolve(instance, s, n),
        |_| {
            found = true;
            Ok(false)
        },
    )?;
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_rule;
    use crate::relational::parse_facts;

    fn eval(rule: &str, facts: &str) -> Relation {
        eval_rule(&parse_rule(rule).unwrap(), &parse_facts(facts).unwrap()).unwrap()
    }

    #[test]
    fn projection_over_two_tuples() {
        assert_eq!(
            eval("q(X) :- r(X,Y).", "r(a,b). r(c,d)."),
            Relation::from_rows(&[["a"], ["c"]])
        );
    }

    #[test]
    fn val_rejects_nulls() {
        assert_eq!(
            eval("q(X) :- r(X,Y), Val(Y).", "r(a,#1). r(c,d)."),
            Relation::from_rows(&[["c"]])
        );
    }

    #[test]
    fn yes_no() {
        let yes = eval(":- r(X,X).", "r(a,a).");
        assert_eq!(yes.len(), 1);
        assert_eq!(yes.arity(), 0);
        assert!(eval(":- r(X,X).", "r(a,b).").is_bottom());
    }

    #[test]
    fn nulls_join_only_with_themselves() {
        assert_eq!(
            eval("q(X, Z) :- r(X,Y), s(Y,Z).", "r(a,#1). r(b,#2). s(#1,c). s(#3,d)."),
            Relation::from_rows(&[["a", "c"]])
        );
    }

    #[test]
    fn equalities_bind_and_filter() {
        assert_eq!(
            eval("q(X, W) :- r(X,Y), W = Y, Y = b.", "r(a,b). r(c,d)."),
            Relation::from_rows(&[["a", "b"]])
        );
        assert_eq!(
            eval("q(X) :- r(X,Y), X = Y.", "r(a,b). r(c,c)."),
            Relation::from_rows(&[["c"]])
        );
    }

    #[test]
    fn errors() {
        let i = parse_facts("r(a,b).").unwrap();
        assert_eq!(
            eval_rule(&parse_rule("q(X) :- s(X).").unwrap(), &i),
            Err(Error::UnboundSymbol("s".into()))
        );
        assert!(matches!(
            eval_rule(&parse_rule("q(X) :- r(X).").unwrap(), &i),
            Err(Error::ArityMismatch { .. })
        ));
        let bottom = Instance::new().with("r", Relation::bottom());
        assert!(eval_rule(&parse_rule("q(X) :- r(X, Y).").unwrap(), &bottom)
            .unwrap()
            .is_bottom());
    }
}
