use proptest::prelude::*;

use viewdb::category::{compose, sum, MappingComponent, Morphism, Variant};
use viewdb::power_view::{closure, compare, power_view, weak_power_view, CompareMode, ViewBound};
use viewdb::query::{eval_rule, lift_query, parse_rule, unfold_query, GavDefinitionSet};
use viewdb::relational::{combine, parse_facts, write_facts, CombineMode, Instance, Relation, Side, Tuple, Value};

fn k() -> ViewBound {
    ViewBound::new(2)
}

fn arb_value() -> impl Strategy<Value = Value> {
    prop_oneof![
        Just(Value::constant("a")),
        Just(Value::constant("b")),
        Just(Value::null(1)),
    ]
}

fn arb_relation() -> impl Strategy<Value = Relation> {
    (1usize..=2).prop_flat_map(|n| {
        prop::collection::btree_set(prop::collection::vec(arb_value(), n), 1..=4)
            .prop_map(move |ts| Relation::new(n, ts.into_iter().map(Tuple::new)).unwrap())
    })
}

fn arb_instance() -> impl Strategy<Value = Instance> {
    prop::collection::vec(arb_relation(), 1..=3).prop_map(|rels| {
        Instance::from_named(rels.into_iter().enumerate().map(|(i, r)| (format!("r{i}"), r)))
    })
}

/// A morphism `A -> A + views` copying each relation and, through an
/// equal component, the first column of the first relation.
fn projecting(a: &Instance) -> Morphism {
    let (name, rel) = a.names().next().unwrap();
    let view = rel.relation.project(&[0]).unwrap();
    let cod = a.clone().with("p", view);
    let mut comps: Vec<_> = Morphism::identity(a).components().into_iter().cloned().collect();
    let vars: Vec<String> = (0..rel.relation.arity()).map(|i| format!("X{i}")).collect();
    let q = parse_rule(&format!("p(X0) :- {name}({}).", vars.join(", "))).unwrap();
    comps.push(MappingComponent::new(q, Variant::Equal, "p"));
    Morphism::atomic(a, &cod, comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closure_is_extensive_and_idempotent(a in arb_instance()) {
        let p = power_view(&a, k()).unwrap().views;
        for r in a.relations() {
            prop_assert!(p.contains(r));
        }
        let again = closure(&p.generator_instance(), k()).unwrap();
        prop_assert!(again.equals(&p).unwrap());
    }

    #[test]
    fn closure_is_monotone(a in arb_instance(), extra in arb_relation()) {
        let b = a.clone().with("extra", extra);
        prop_assert!(closure(&a, k()).unwrap().is_subset(&closure(&b, k()).unwrap()).unwrap());
    }

    #[test]
    fn weak_closure_chain(a in arb_instance()) {
        let p = closure(&a, k()).unwrap();
        let w = weak_power_view(&a, k()).unwrap().views;
        let ww = weak_power_view(&w.generator_instance(), k()).unwrap().views;
        let wp = weak_power_view(&p.generator_instance(), k()).unwrap().views;
        prop_assert!(ww.equals(&w).unwrap());
        prop_assert!(wp.equals(&w).unwrap());
        prop_assert!(w.is_subset(&p).unwrap());
        prop_assert!(w.generators().all(|v| v.relation.is_ground()));
    }

    #[test]
    fn equivalence_is_reflexive_and_coproduct_is_not_idempotent(a in arb_instance()) {
        prop_assert!(compare(&a, &a, k(), CompareMode::Equiv).unwrap());
        prop_assert!(compare(&a, &a, k(), CompareMode::Leq).unwrap());
        let twice = combine(&a, &a, CombineMode::Coproduct).unwrap();
        prop_assert!(!compare(&a, &twice, k(), CompareMode::Equiv).unwrap());
    }

    #[test]
    fn identity_is_iso_and_a_unit(a in arb_instance()) {
        let id = Morphism::identity(&a);
        prop_assert!(id.classify(k()).unwrap().iso);
        let f = projecting(&a);
        prop_assert!(compose(&f, &id).unwrap().equivalent(&f, k()).unwrap());
        let id_b = Morphism::identity(f.cod());
        prop_assert!(compose(&id_b, &f).unwrap().equivalent(&f, k()).unwrap());
    }

    #[test]
    fn flux_laws(a in arb_instance()) {
        let f = projecting(&a);
        let g = Morphism::identity(f.cod());
        let gf = compose(&g, &f).unwrap();
        let meet = g.flux(k()).unwrap().intersection(&f.flux(k()).unwrap()).unwrap();
        prop_assert!(gf.flux(k()).unwrap().equals(&meet).unwrap());
        prop_assert!(f.invert().flux(k()).unwrap().equals(&f.flux(k()).unwrap()).unwrap());
        let (epi, mono) = f.factorize(k()).unwrap();
        prop_assert!(compose(&mono, &epi).unwrap().equivalent(&f, k()).unwrap());
        prop_assert_eq!(f.t_arrow(k()).unwrap().classify(k()).unwrap(), f.classify(k()).unwrap());
        let s = sum(&f, &g).unwrap().flux(k()).unwrap();
        prop_assert!(s.untag(Side::Left).is_subset(&f.flux(k()).unwrap()).unwrap());
    }

    #[test]
    fn gav_unfolding_commutes(a in arb_instance(), pick in 0usize..3) {
        let (name, rel) = a.names().next().unwrap();
        let arity = rel.relation.arity();
        let vars: Vec<String> = (0..arity).map(|i| format!("X{i}")).collect();
        let def = parse_rule(&format!("g({}) :- {name}({}).", vars.join(", "), vars.join(", "))).unwrap();
        let defs = GavDefinitionSet::from_rules([def.clone()]).unwrap();
        let ret = Instance::from_named([("g", eval_rule(&def, &a).unwrap())]);
        let query = if arity == 1 {
            "q(X0) :- g(X0)."
        } else {
            ["q(X0) :- g(X0, X0).", "q(X0) :- g(X0, X1).", "q(X1) :- g(X0, X1), g(X1, X0)."][pick]
        };
        let q = lift_query(&parse_rule(query).unwrap());
        let through = eval_rule(&unfold_query(&q, &defs).unwrap(), &a).unwrap();
        prop_assert_eq!(through, eval_rule(&q, &ret).unwrap());
    }

    #[test]
    fn fact_files_round_trip(a in arb_instance()) {
        let again = parse_facts(&write_facts(&a)).unwrap();
        prop_assert_eq!(write_facts(&again), write_facts(&a));
    }
}
