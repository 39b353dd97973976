use std::collections::{BTreeMap, BTreeSet};

use super::{Atom, Rule, Term};
use crate::error::{Error, Result};

/// Appends `Val(X)` for every head variable not already guarded.
pub fn lift_query(rule: &Rule) -> Rule {
    let mut body = rule.body().to_vec();
    let mut seen = BTreeSet::new();
    for v in rule.head_vars() {
        let guard = Atom::Val(Term::var(v.as_str()));
        if seen.insert(v) && !body.contains(&guard) {
            body.push(guard);
        }
    }
    Rule::new(rule.head().clone(), body).expect("adding guards keeps a rule valid")
}

/// One defining rule per global relation symbol.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GavDefinitionSet {
    defs: BTreeMap<String, Rule>,
    globals: BTreeSet<String>,
}

impl GavDefinitionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rules(rules: impl IntoIterator<Item = Rule>) -> Result<Self> {
        let mut set = Self::new();
        for r in rules {
            set.insert(r)?;
        }
        Ok(set)
    }

    /// Adds the definition of the rule's head symbol.
    pub fn insert(&mut self, rule: Rule) -> Result<()> {
        let name = rule
            .name()
            .ok_or_else(|| Error::InvalidMapping(format!("definition `{rule}` has no head")))?
            .to_string();
        if self.defs.contains_key(&name) {
            return Err(Error::DuplicateDefinition(name));
        }
        self.globals.insert(name.clone());
        self.defs.insert(name, rule);
        Ok(())
    }

    /// Marks a symbol as global without defining it; unfolding a query that
    /// uses it fails.
    pub fn declare_global(&mut self, symbol: impl Into<String>) {
        self.globals.insert(symbol.into());
    }

    pub fn get(&self, symbol: &str) -> Option<&Rule> {
        self.defs.get(symbol)
    }

    pub fn is_global(&self, symbol: &str) -> bool {
        self.globals.contains(symbol)
    }

    pub fn definitions(&self) -> impl Iterator<Item = (&str, &Rule)> {
        self.defs.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn globals(&self) -> impl Iterator<Item = &str> {
        self.globals.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }
}

/// Replaces every global atom by the body of its definition.
///
/// Head variables of the definition are unified with the atom's arguments;
/// its other variables get the suffix of the substitution site (`W1`, `W2`,
/// ...). Atoms over non-global symbols, equalities and guards are kept.
pub fn unfold_query(rule: &Rule, defs: &GavDefinitionSet) -> Result<Rule> {
    let mut taken: BTreeSet<String> = rule.variables().into_iter().map(String::from).collect();
    let mut body = Vec::new();
    let mut site = 0usize;

    for atom in rule.body() {
        let (symbol, args) = match atom {
            Atom::Relational { symbol, args } if defs.is_global(symbol) => (symbol, args),
            other => {
                body.push(other.clone());
                continue;
            }
        };
        let def = defs
            .get(symbol)
            .ok_or_else(|| Error::MissingDefinition(symbol.clone()))?;
        if def.arity() != args.len() {
            return Err(Error::ArityMismatch {
                symbol: symbol.clone(),
                expected: def.arity(),
                found: args.len(),
            });
        }
        site += 1;

        let mut subst: BTreeMap<&str, Term> = BTreeMap::new();
        let mut extra = Vec::new();
        for (v, arg) in def.head_vars().iter().zip(args) {
            match subst.get(v.as_str()) {
                Some(first) => extra.push(Atom::Eq(first.clone(), arg.clone())),
                None => {
                    subst.insert(v, arg.clone());
                }
            }
        }
        for v in def.variables() {
            if subst.contains_key(v) {
                continue;
            }
            let mut name = format!("{v}{site}");
            while taken.contains(&name) {
                name.push('_');
            }
            taken.insert(name.clone());
            subst.insert(v, Term::Var(name));
        }
        for a in def.body() {
            body.push(a.map_terms(|t| match t {
                Term::Var(v) => subst[v.as_str()].clone(),
                c => c.clone(),
            }));
        }
        body.extend(extra);
    }
    Rule::new(rule.head().clone(), body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_rule;

    fn rule(s: &str) -> Rule {
        parse_rule(s).unwrap()
    }

    #[test]
    fn lift_adds_guards_once() {
        let l = lift_query(&rule("q(X,Y) :- r(X,Y)."));
        assert_eq!(l, rule("q(X,Y) :- r(X,Y), Val(X), Val(Y)."));
        assert_eq!(lift_query(&l), l);
        let yn = rule(":- r(X,X).");
        assert_eq!(lift_query(&yn), yn);
        assert_eq!(
            lift_query(&rule("q(X,X) :- r(X,Y).")),
            rule("q(X,X) :- r(X,Y), Val(X).")
        );
    }

    #[test]
    fn unfold_freshens_existentials() {
        let defs = GavDefinitionSet::from_rules([rule("g1(U,V) :- s1(U,W), s2(W,V).")]).unwrap();
        assert_eq!(
            unfold_query(&rule("q(X) :- g1(X,Y)."), &defs).unwrap(),
            rule("q(X) :- s1(X,W1), s2(W1,Y).")
        );
    }

    #[test]
    fn unfold_unifies_arguments() {
        let defs = GavDefinitionSet::from_rules([rule("g1(U,V) :- s(U,V).")]).unwrap();
        assert_eq!(
            unfold_query(&rule("q(X) :- g1(X,X)."), &defs).unwrap(),
            rule("q(X) :- s(X,X).")
        );
    }

    #[test]
    fn unfold_repeated_definition_head() {
        let defs = GavDefinitionSet::from_rules([rule("g(U,U) :- s(U).")]).unwrap();
        assert_eq!(
            unfold_query(&rule("q(X,Y) :- g(X,Y)."), &defs).unwrap(),
            rule("q(X,Y) :- s(X), X = Y.")
        );
    }

    #[test]
    fn unfold_edge_cases() {
        let q = rule("q(X) :- s(X,Y), Val(X).");
        assert_eq!(unfold_query(&q, &GavDefinitionSet::new()).unwrap(), q);

        let mut defs = GavDefinitionSet::new();
        defs.declare_global("g");
        assert_eq!(
            unfold_query(&rule("q(X) :- g(X)."), &defs),
            Err(Error::MissingDefinition("g".into()))
        );

        let defs = GavDefinitionSet::from_rules([rule("g(U) :- s(U, W).")]).unwrap();
        assert!(matches!(
            unfold_query(&rule("q(X) :- g(X, Y)."), &defs),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            GavDefinitionSet::from_rules([rule("g(U) :- s(U)."), rule("g(V) :- t(V).")]),
            Err(Error::DuplicateDefinition(_))
        ));
    }

    #[test]
    fn fresh_names_avoid_query_variables() {
        let defs = GavDefinitionSet::from_rules([rule("g(U) :- s(U, W).")]).unwrap();
        assert_eq!(
            unfold_query(&rule("q(W1) :- g(W1), g(W2)."), &defs).unwrap(),
            rule("q(W1) :- s(W1, W1_), s(W2, W2_).")
        );
    }
}
