//! Bounded power-view closures and the orders they induce.

mod engine;
mod viewset;

pub use viewset::ViewSet;

use crate::error::{Error, Result};
use crate::relational::{Instance, Relation, TaggedRelation};

/// How far a closure may go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ViewBound {
    /// Largest arity a generated view may have.
    pub max_arity: usize,
    pub max_new_views: Option<usize>,
    pub max_rounds: Option<usize>,
}

impl ViewBound {
    pub fn new(max_arity: usize) -> Self {
        ViewBound {
            max_arity,
            max_new_views: None,
            max_rounds: None,
        }
    }

    pub fn with_max_new_views(mut self, cap: usize) -> Self {
        self.max_new_views = Some(cap);
        self
    }

    pub fn with_max_rounds(mut self, cap: usize) -> Self {
        self.max_rounds = Some(cap);
        self
    }
}

impl Default for ViewBound {
    fn default() -> Self {
        ViewBound::new(2)
    }
}

/// A closure result together with what produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerView {
    pub base: Instance,
    pub bound: ViewBound,
    pub views: ViewSet,
    /// Only views free of marked nulls were kept.
    pub weak: bool,
}

/// The least set of views containing the instance's relations and closed
/// under selection, order-preserving projection, product (up to the bound)
/// and union. Coproduct components are closed separately and keep their
/// tags.
pub fn power_view(instance: &Instance, bound: ViewBound) -> Result<PowerView> {
    let limits = engine::Limits {
        k: bound.max_arity,
        max_new_views: bound.max_new_views,
        max_rounds: bound.max_rounds,
    };
    let mut generators = Vec::new();
    for (tag, members) in instance.components() {
        let seeds: Vec<Relation> = members.iter().map(|r| r.relation.clone()).collect();
        let closed = engine::close(&seeds, limits)?;
        for rel in closed.irreducible.into_iter().chain(closed.oversized) {
            generators.push(TaggedRelation {
                tag: tag.clone(),
                relation: rel,
            });
        }
    }
    Ok(PowerView {
        base: instance.clone(),
        bound,
        views: ViewSet::from_generators(bound.max_arity, generators),
        weak: false,
    })
}

/// The views of [`power_view`] whose every value is a constant.
pub fn weak_power_view(instance: &Instance, bound: ViewBound) -> Result<PowerView> {
    let full = power_view(instance, bound)?;
    Ok(PowerView {
        views: full.views.ground(),
        weak: true,
        ..full
    })
}

/// Shorthand for `power_view(instance, bound)?.views`.
pub fn closure(instance: &Instance, bound: ViewBound) -> Result<ViewSet> {
    Ok(power_view(instance, bound)?.views)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareMode {
    Leq,
    LeqWeak,
    Equiv,
    EquivWeak,
}

impl CompareMode {
    fn weak(self) -> bool {
        matches!(self, CompareMode::LeqWeak | CompareMode::EquivWeak)
    }
}

/// Compares two instances through their bounded closures.
pub fn compare(a: &Instance, b: &Instance, bound: ViewBound, mode: CompareMode) -> Result<bool> {
    let close = if mode.weak() {
        weak_power_view
    } else {
        power_view
    };
    compare_closures(&close(a, bound)?, &close(b, bound)?, mode)
}

/// Compares precomputed closures; both must use the same arity bound.
pub fn compare_closures(a: &PowerView, b: &PowerView, mode: CompareMode) -> Result<bool> {
    if a.bound.max_arity != b.bound.max_arity {
        return Err(Error::BoundMismatch);
    }
    let (x, y) = if mode.weak() {
        (a.views.ground(), b.views.ground())
    } else {
        (a.views.clone(), b.views.clone())
    };
    match mode {
        CompareMode::Leq | CompareMode::LeqWeak => x.is_subset(&y),
        CompareMode::Equiv | CompareMode::EquivWeak => x.equals(&y),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relational::{combine, parse_facts, CombineMode, Tuple, Value};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn inst(src: &str) -> Instance {
        parse_facts(src).unwrap()
    }

    fn k(n: usize) -> ViewBound {
        ViewBound::new(n)
    }

    #[test]
    fn zero_object_is_closed() {
        assert!(closure(&Instance::new(), k(2)).unwrap().is_zero());
    }

    #[test]
    fn unary_singleton() {
        let v = closure(&inst("r(a)."), k(1)).unwrap();
        assert_eq!(
            v.expand(100).unwrap(),
            Instance::from_relations([Relation::from_rows(&[["a"]])])
        );
    }

    #[test]
    fn weak_drops_null_views() {
        let w = weak_power_view(&inst("r(a, #1)."), k(1)).unwrap().views;
        assert!(w.contains_relation(&Relation::from_rows(&[["a"]])));
        assert!(w.contains_relation(&Relation::bottom()));
        let null = Relation::new(1, [Tuple::new(vec![Value::null(1)])]).unwrap();
        assert!(!w.contains_relation(&null));
        assert!(closure(&inst("r(a, #1)."), k(1))
            .unwrap()
            .contains_relation(&null));
    }

    #[test]
    fn product_recovers_pair() {
        let a = inst("r(a, b).");
        let b = inst("s(a). t(b).");
        assert!(compare(&a, &b, k(2), CompareMode::Equiv).unwrap());
        assert!(!compare(&a, &b, k(1), CompareMode::Equiv).unwrap());
    }

    #[test]
    fn oversized_seeds_are_kept_and_projected() {
        let a = inst("r(a, b, c).");
        let v = closure(&a, k(1)).unwrap();
        assert!(v.contains_relation(a.get("r").unwrap()));
        assert!(v.contains_relation(&Relation::from_rows(&[["b"]])));
        assert!(v
            .generators()
            .all(|r| r.relation.arity() <= 1 || r.relation == *a.get("r").unwrap()));
    }

    #[test]
    fn caps_report_statistics() {
        let a = inst("r(a, b). r(b, c). r(c, a).");
        match power_view(&a, k(2).with_max_new_views(5)) {
            Err(Error::CapExceeded { views, .. }) => assert!(views > 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            power_view(&a, k(2).with_max_rounds(1)),
            Err(Error::CapExceeded { rounds: 1, .. })
        ));
    }

    #[test]
    fn coproduct_closes_per_component() {
        let a = inst("r(a).");
        let b = inst("s(b).");
        let ab = combine(&a, &b, CombineMode::Coproduct).unwrap();
        let lhs = closure(&ab, k(2)).unwrap();
        let rhs = closure(&a, k(2))
            .unwrap()
            .coproduct(&closure(&b, k(2)).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
        let explicit = combine(
            &closure(&a, k(2)).unwrap().expand(100).unwrap(),
            &closure(&b, k(2)).unwrap().expand(100).unwrap(),
            CombineMode::Coproduct,
        )
        .unwrap();
        assert_eq!(lhs.expand(100).unwrap(), explicit);
        // no cross-component product
        assert!(!lhs.contains_relation(&Relation::from_rows(&[["a", "b"]])));
    }

    #[test]
    fn bound_mismatch() {
        let a = inst("r(a).");
        let p1 = power_view(&a, k(1)).unwrap();
        let p2 = power_view(&a, k(2)).unwrap();
        assert_eq!(
            compare_closures(&p1, &p2, CompareMode::Leq),
            Err(Error::BoundMismatch)
        );
    }

    // Set-based reference closure, written independently of the bitset
    // engine: repeat every operation on every view until nothing changes.
    fn naive_closure(seeds: &[Relation], k: usize) -> BTreeSet<Relation> {
        let mut all: BTreeSet<Relation> = seeds.iter().cloned().collect();
        all.insert(Relation::bottom());
        let domain: BTreeSet<Value> = seeds.iter().flat_map(|r| r.values().cloned()).collect();
        loop {
            let current: Vec<Relation> = all.iter().cloned().collect();
            let mut fresh = Vec::new();
            for r in &current {
                let n = r.arity();
                if r.is_empty() {
                    continue;
                }
                let keep = |f: &dyn Fn(&Tuple) -> bool| {
                    Relation::new(n, r.iter().filter(|t| f(t)).cloned()).unwrap()
                };
                for a in 0..n {
                    for b in a + 1..n {
                        fresh.push(keep(&|t| t.values()[a] == t.values()[b]));
                    }
                    for c in &domain {
                        fresh.push(keep(&|t| t.values()[a] == *c));
                    }
                    fresh.push(keep(&|t| t.values()[a].is_const()));
                }
                for mask in 1..(1usize << n).saturating_sub(1) {
                    let cols: Vec<usize> = (0..n).filter(|c| mask & (1 << c) != 0).collect();
                    if cols.len() <= k {
                        fresh.push(r.project(&cols).unwrap());
                    }
                }
                for s in &current {
                    if s.is_empty() {
                        continue;
                    }
                    if s.arity() == n {
                        fresh.push(r.union(s).unwrap());
                    }
                    if n >= 1 && s.arity() >= 1 && n + s.arity() <= k {
                        let tuples = r.iter().flat_map(|x| {
                            s.iter().map(move |y| {
                                let mut v = x.values().to_vec();
                                v.extend_from_slice(y.values());
                                Tuple::new(v)
                            })
                        });
                        fresh.push(Relation::new(n + s.arity(), tuples).unwrap());
                    }
                }
            }
            let before = all.len();
            for f in fresh {
                // generated views above the bound are dropped
                if f.arity() <= k || seeds.contains(&f) {
                    all.insert(f);
                }
            }
            if all.len() == before {
                return all;
            }
        }
    }

    fn arb_value() -> impl Strategy<Value = Value> {
        prop_oneof![
            prop::sample::select(vec!["a", "b"]).prop_map(Value::constant),
            Just(Value::null(1)),
        ]
    }

    fn arb_relation() -> impl Strategy<Value = Relation> {
        (1usize..=2).prop_flat_map(|n| {
            prop::collection::btree_set(prop::collection::vec(arb_value(), n), 0..3)
                .prop_map(move |ts| Relation::new(n, ts.into_iter().map(Tuple::new)).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn bitset_closure_matches_reference(rels in prop::collection::vec(arb_relation(), 1..3)) {
            let a = Instance::from_relations(rels.clone());
            let got: BTreeSet<Relation> = closure(&a, k(2)).unwrap()
                .expand(10_000).unwrap().relations().map(|r| r.relation.clone()).collect();
            prop_assert_eq!(got, naive_closure(&rels, 2));
        }
    }
}
