use std::collections::BTreeMap;

use super::schema::Schema;
use crate::error::{Error, Result};
use crate::query::{eval_rule, lift_query, GavDefinitionSet, Rule};
use crate::relational::{Instance, Relation, Tuple};

/// Evaluates every GAV definition over `source`, then checks the keys the
/// schema declares on the results.
pub fn retrieve_global(defs: &GavDefinitionSet, source: &Instance, schema: &Schema) -> Result<Instance> {
    let mut out = BTreeMap::new();
    for g in defs.globals() {
        let def = defs
            .get(g)
            .ok_or_else(|| Error::MissingDefinition(g.to_string()))?;
        let rel = eval_rule(def, source)?;
        if let Ok(arity) = schema.arity(g) {
            if arity != def.arity() {
                return Err(Error::ArityMismatch {
                    symbol: g.to_string(),
                    expected: arity,
                    found: def.arity(),
                });
            }
        }
        if let Some(key) = schema.key(g) {
            let cols: Vec<usize> = key.iter().copied().collect();
            if let Some(witness) = key_clash(&rel, &cols) {
                return Err(Error::KeyViolation {
                    relation: g.to_string(),
                    witness,
                });
            }
        }
        out.insert(g.to_string(), rel);
    }
    Ok(Instance::from_named(out))
}

/// First pair of distinct tuples agreeing on `cols`, in tuple order.
pub(crate) fn key_clash(rel: &Relation, cols: &[usize]) -> Option<(Tuple, Tuple)> {
    let mut seen: BTreeMap<Tuple, &Tuple> = BTreeMap::new();
    for t in rel.iter() {
        if let Some(first) = seen.insert(t.project(cols), t) {
            return Some((first.clone(), t.clone()));
        }
    }
    None
}

/// Answers of `query` holding in every legal global database, read off
/// the canonical one: the query is lifted so marked nulls never appear.
pub fn certain_answers(query: &Rule, canonical: &Instance) -> Result<Relation> {
    eval_rule(&lift_query(query), canonical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integration::parse_schema;
    use crate::query::parse_rule;
    use crate::relational::parse_facts;

    fn defs(src: &[&str]) -> GavDefinitionSet {
        GavDefinitionSet::from_rules(src.iter().map(|s| parse_rule(s).unwrap())).unwrap()
    }

    #[test]
    fn retrieves_projections() {
        let ret = retrieve_global(
            &defs(&["g1(X) :- s(X, Y)."]),
            &parse_facts("s(a, b).").unwrap(),
            &Schema::new(),
        )
        .unwrap();
        assert_eq!(ret.get("g1"), Some(&Relation::from_rows(&[["a"]])));
    }

    #[test]
    fn empty_source_gives_bottom() {
        let src = Instance::new().with("s", Relation::empty(2));
        let ret = retrieve_global(&defs(&["g1(X) :- s(X, Y)."]), &src, &Schema::new()).unwrap();
        assert!(ret.get("g1").unwrap().is_bottom());
    }

    #[test]
    fn key_conflicts_are_reported() {
        let schema = parse_schema("relation g/2 key(1).").unwrap();
        match retrieve_global(
            &defs(&["g(X, Y) :- s(X, Y)."]),
            &parse_facts("s(a, b). s(a, c).").unwrap(),
            &schema,
        ) {
            Err(Error::KeyViolation { relation, witness }) => {
                assert_eq!(relation, "g");
                assert_eq!(witness, (Tuple::from(["a", "b"]), Tuple::from(["a", "c"])));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn certain_answers_drop_nulls() {
        let can = parse_facts("r(a, b). r(b, #2). r(#2, #4). s(b, #1). s(#2, #3).").unwrap();
        let q = |s: &str| certain_answers(&parse_rule(s).unwrap(), &can).unwrap();
        assert_eq!(q("q(X) :- r(X, Y)."), Relation::from_rows(&[["a"], ["b"]]));
        assert_eq!(q("q(X) :- s(X, Y)."), Relation::from_rows(&[["b"]]));
        let bottom = Instance::new().with("r", Relation::empty(2));
        assert!(certain_answers(&parse_rule("q(X) :- r(X, Y).").unwrap(), &bottom)
            .unwrap()
            .is_bottom());
    }
}
