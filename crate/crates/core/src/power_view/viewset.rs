use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::relational::{Instance, Relation, Side, Tag, TaggedRelation, Tuple};

/// A closed set of views, stored by its union-irreducible members.
///
/// Views of arity up to `bound` form a union-closed family; it is kept as
/// the members that are not a union of smaller members, which identifies
/// the family exactly. Seeds above the bound are kept verbatim. ⊥ is always
/// a member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ViewSet {
    bound: usize,
    irreducible: BTreeSet<TaggedRelation>,
    oversized: BTreeSet<TaggedRelation>,
}

type Group = (Tag, usize);

fn group_of(r: &TaggedRelation) -> Group {
    (r.tag.clone(), r.relation.arity())
}

impl ViewSet {
    /// `{⊥}`.
    pub fn zero(bound: usize) -> Self {
        ViewSet {
            bound,
            irreducible: BTreeSet::new(),
            oversized: BTreeSet::new(),
        }
    }

    /// Builds the union-closed family generated by `views`. The caller is
    /// responsible for the family also being closed under the other
    /// operations.
    pub(crate) fn from_generators(
        bound: usize,
        views: impl IntoIterator<Item = TaggedRelation>,
    ) -> Self {
        let mut irreducible = BTreeSet::new();
        let mut oversized = BTreeSet::new();
        for v in views.into_iter().filter(|v| !v.relation.is_empty()) {
            if v.relation.arity() > bound {
                oversized.insert(v);
            } else {
                irreducible.insert(v);
            }
        }
        ViewSet {
            bound,
            irreducible: reduce(irreducible),
            oversized,
        }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn is_zero(&self) -> bool {
        self.irreducible.is_empty() && self.oversized.is_empty()
    }

    /// Members every other member (except ⊥) is a union of.
    pub fn irreducible(&self) -> impl Iterator<Item = &TaggedRelation> {
        self.irreducible.iter()
    }

    pub fn oversized(&self) -> impl Iterator<Item = &TaggedRelation> {
        self.oversized.iter()
    }

    /// Irreducible and oversized members.
    pub fn generators(&self) -> impl Iterator<Item = &TaggedRelation> {
        self.irreducible.iter().chain(self.oversized.iter())
    }

    /// An instance whose closure is this set: its generators under
    /// generated names `v1, v2, ...`.
    pub fn generator_instance(&self) -> Instance {
        Instance::from_tagged(self.generators().cloned()).with_view_names()
    }

    pub fn contains(&self, view: &TaggedRelation) -> bool {
        if view.relation.is_empty() {
            return true;
        }
        if view.relation.arity() > self.bound {
            return self.oversized.contains(view);
        }
        let g = group_of(view);
        let mut covered: BTreeSet<&Tuple> = BTreeSet::new();
        for j in self.group(&g) {
            if j.relation.is_subset(&view.relation) {
                covered.extend(j.relation.iter());
            }
        }
        covered.len() == view.relation.len()
    }

    pub fn contains_relation(&self, view: &Relation) -> bool {
        self.contains(&TaggedRelation::untagged(view.clone()))
    }

    fn group<'a>(&'a self, g: &'a Group) -> impl Iterator<Item = &'a TaggedRelation> + 'a {
        self.irreducible.iter().filter(move |r| group_of(r) == *g)
    }

    fn check_bound(&self, other: &ViewSet) -> Result<()> {
        if self.bound != other.bound {
            return Err(Error::BoundMismatch);
        }
        Ok(())
    }

    pub fn is_subset(&self, other: &ViewSet) -> Result<bool> {
        self.check_bound(other)?;
        Ok(self.generators().all(|v| other.contains(v)))
    }

    /// Same family; both sides must share the bound.
    pub fn equals(&self, other: &ViewSet) -> Result<bool> {
        self.check_bound(other)?;
        Ok(self == other)
    }

    /// Views of both families.
    pub fn intersection(&self, other: &ViewSet) -> Result<ViewSet> {
        self.check_bound(other)?;
        let groups: BTreeSet<Group> = self.irreducible.iter().map(group_of).collect();
        let mut out = Vec::new();
        for g in groups {
            let a: Vec<&Relation> = self.group(&g).map(|r| &r.relation).collect();
            let b: Vec<&Relation> = other.group(&g).map(|r| &r.relation).collect();
            if b.is_empty() {
                continue;
            }
            for rel in intersect_families(&a, &b) {
                out.push(TaggedRelation {
                    tag: g.0.clone(),
                    relation: rel,
                });
            }
        }
        out.extend(self.oversized.intersection(&other.oversized).cloned());
        Ok(ViewSet::from_generators(self.bound, out))
    }

    /// Members whose every value is a constant.
    pub fn ground(&self) -> ViewSet {
        // a ground view is a union of ground generators only
        ViewSet {
            bound: self.bound,
            irreducible: self
                .irreducible
                .iter()
                .filter(|r| r.relation.is_ground())
                .cloned()
                .collect(),
            oversized: self
                .oversized
                .iter()
                .filter(|r| r.relation.is_ground())
                .cloned()
                .collect(),
        }
    }

    /// Moves every member into the `side` summand.
    pub fn tagged(&self, side: Side) -> ViewSet {
        let move_in = |r: &TaggedRelation| TaggedRelation {
            tag: r.tag.pushed(side),
            relation: r.relation.clone(),
        };
        ViewSet {
            bound: self.bound,
            irreducible: self.irreducible.iter().map(move_in).collect(),
            oversized: self.oversized.iter().map(move_in).collect(),
        }
    }

    /// The `side` summand with its outer tag removed.
    pub fn untag(&self, side: Side) -> ViewSet {
        let strip = |set: &BTreeSet<TaggedRelation>| -> BTreeSet<TaggedRelation> {
            set.iter()
                .filter_map(|r| {
                    r.tag.strip(side).map(|tag| TaggedRelation {
                        tag,
                        relation: r.relation.clone(),
                    })
                })
                .collect()
        };
        ViewSet {
            bound: self.bound,
            irreducible: strip(&self.irreducible),
            oversized: strip(&self.oversized),
        }
    }

    /// Tagged disjoint union.
    pub fn coproduct(&self, other: &ViewSet) -> Result<ViewSet> {
        self.check_bound(other)?;
        let (l, r) = (self.tagged(Side::Left), other.tagged(Side::Right));
        Ok(ViewSet {
            bound: self.bound,
            irreducible: l.irreducible.union(&r.irreducible).cloned().collect(),
            oversized: l.oversized.union(&r.oversized).cloned().collect(),
        })
    }

    /// Lists every member explicitly, failing with `CapExceeded` beyond
    /// `cap` members.
    pub fn expand(&self, cap: usize) -> Result<Instance> {
        let mut out = Instance::new();
        let mut count = 1 + self.oversized.len();
        for r in &self.oversized {
            out.add(r.clone());
        }
        let groups: BTreeSet<Group> = self.irreducible.iter().map(group_of).collect();
        for g in groups {
            let gens: Vec<&Relation> = self.group(&g).map(|r| &r.relation).collect();
            let mut seen: HashSet<Relation> = HashSet::new();
            let mut frontier: Vec<Relation> = Vec::new();
            for j in &gens {
                if seen.insert((*j).clone()) {
                    frontier.push((*j).clone());
                }
            }
            while let Some(cur) = frontier.pop() {
                count += 1;
                if count > cap {
                    return Err(Error::CapExceeded {
                        views: count,
                        rounds: 0,
                    });
                }
                for j in &gens {
                    let u = cur.union(j).expect("same arity");
                    if seen.insert(u.clone()) {
                        frontier.push(u);
                    }
                }
                out.add(TaggedRelation {
                    tag: g.0.clone(),
                    relation: cur,
                });
            }
        }
        Ok(out)
    }

    /// Number of members, when at most `cap`.
    pub fn count(&self, cap: usize) -> Result<usize> {
        Ok(self.expand(cap)?.len())
    }
}

/// Drops members equal to the union of smaller members.
fn reduce(views: BTreeSet<TaggedRelation>) -> BTreeSet<TaggedRelation> {
    let keep: Vec<bool> = views
        .iter()
        .map(|v| {
            let mut covered: BTreeSet<&Tuple> = BTreeSet::new();
            for h in &views {
                if h != v && group_of(h) == group_of(v) && h.relation.is_subset(&v.relation) {
                    covered.extend(h.relation.iter());
                }
            }
            covered.len() != v.relation.len()
        })
        .collect();
    views
        .into_iter()
        .zip(keep)
        .filter_map(|(v, k)| k.then_some(v))
        .collect()
}

/// Irreducible members of `U(a) ∩ U(b)`, where `U(x)` is the union-closure
/// of `x`.
///
/// Each irreducible member is a minimal member containing some tuple, so
/// for every tuple covered by both families a search grows a candidate
/// until both families cover it, branching on the generator used.
fn intersect_families(a: &[&Relation], b: &[&Relation]) -> Vec<Relation> {
    let span = |f: &[&Relation]| -> BTreeSet<Tuple> {
        f.iter().flat_map(|r| r.iter().cloned()).collect()
    };
    let (span_a, span_b) = (span(a), span(b));
    let usable_a: Vec<&Relation> = a
        .iter()
        .copied()
        .filter(|r| r.iter().all(|t| span_b.contains(t)))
        .collect();
    let usable_b: Vec<&Relation> = b
        .iter()
        .copied()
        .filter(|r| r.iter().all(|t| span_a.contains(t)))
        .collect();

    let mut found: BTreeSet<BTreeSet<Tuple>> = BTreeSet::new();
    let seeds: BTreeSet<&Tuple> = usable_a.iter().flat_map(|r| r.iter()).collect();
    for t in seeds {
        let mut minimal: Vec<BTreeSet<Tuple>> = Vec::new();
        let mut visited: HashSet<BTreeSet<Tuple>> = HashSet::new();
        let start = BTreeSet::from([t.clone()]);
        grow(start, &usable_a, &usable_b, &mut visited, &mut minimal);
        found.extend(minimal);
    }

    let arity = a.first().map(|r| r.arity()).unwrap_or(0);
    let members: BTreeSet<TaggedRelation> = found
        .into_iter()
        .map(|ts| TaggedRelation::untagged(Relation::new(arity, ts).expect("uniform arity")))
        .collect();
    reduce(members).into_iter().map(|r| r.relation).collect()
}

fn covered(x: &BTreeSet<Tuple>, family: &[&Relation]) -> Option<Tuple> {
    x.iter()
        .find(|u| {
            !family
                .iter()
                .any(|j| j.contains(u) && j.iter().all(|w| x.contains(w)))
        })
        .cloned()
}

fn grow(
    x: BTreeSet<Tuple>,
    a: &[&Relation],
    b: &[&Relation],
    visited: &mut HashSet<BTreeSet<Tuple>>,
    minimal: &mut Vec<BTreeSet<Tuple>>,
) {
    if minimal.iter().any(|m| m.is_subset(&x)) || !visited.insert(x.clone()) {
        return;
    }
    let pending = covered(&x, a)
        .map(|u| (u, a))
        .or_else(|| covered(&x, b).map(|u| (u, b)));
    match pending {
        None => {
            minimal.retain(|m| !x.is_subset(m));
            minimal.push(x);
        }
        Some((u, family)) => {
            for j in family.iter().filter(|j| j.contains(&u)) {
                let mut next = x.clone();
                next.extend(j.iter().cloned());
                grow(next, a, b, visited, minimal);
            }
        }
    }
}

impl fmt::Display for ViewSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨k={}; ⊥", self.bound)?;
        for r in self.generators() {
            write!(f, ", {r}")?;
        }
        f.write_str("⟩")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn un(vals: &[&str]) -> TaggedRelation {
        TaggedRelation::untagged(Relation::new(1, vals.iter().map(|v| Tuple::from([*v]))).unwrap())
    }

    #[test]
    fn generators_are_reduced() {
        let s = ViewSet::from_generators(1, [un(&["a"]), un(&["b"]), un(&["a", "b"])]);
        assert_eq!(s.irreducible().count(), 2);
        assert!(s.contains(&un(&["a", "b"])));
        assert!(!s.contains(&un(&["c"])));
        assert_eq!(s.count(100).unwrap(), 4);
    }

    #[test]
    fn intersection_finds_shared_unions() {
        // {a},{b},{c} versus {a,b},{c}: common members are ⊥, {a,b}, {c}, {a,b,c}
        let x = ViewSet::from_generators(1, [un(&["a"]), un(&["b"]), un(&["c"])]);
        let y = ViewSet::from_generators(1, [un(&["a", "b"]), un(&["c"])]);
        let i = x.intersection(&y).unwrap();
        assert_eq!(
            i,
            ViewSet::from_generators(1, [un(&["a", "b"]), un(&["c"])])
        );
        // overlapping generators: {a,b},{b,c} versus {a,b,c}
        let p = ViewSet::from_generators(1, [un(&["a", "b"]), un(&["b", "c"])]);
        let q = ViewSet::from_generators(1, [un(&["a", "b", "c"])]);
        assert_eq!(p.intersection(&q).unwrap(), q);
        assert!(x.intersection(&ViewSet::zero(1)).unwrap().is_zero());
        assert_eq!(x.intersection(&ViewSet::zero(2)), Err(Error::BoundMismatch));
    }

    #[test]
    fn subset_by_generators() {
        let x = ViewSet::from_generators(1, [un(&["a"]), un(&["b"])]);
        let y = ViewSet::from_generators(1, [un(&["a", "b"])]);
        assert!(y.is_subset(&x).unwrap());
        assert!(!x.is_subset(&y).unwrap());
    }

    use proptest::prelude::*;

    fn arb_family() -> impl Strategy<Value = ViewSet> {
        let view = prop::collection::btree_set(prop::sample::select(vec!["a", "b", "c", "d"]), 1..4);
        prop::collection::vec(view, 0..5).prop_map(|vs| {
            ViewSet::from_generators(
                1,
                vs.into_iter().map(|v| un(&v.into_iter().collect::<Vec<_>>())),
            )
        })
    }

    proptest! {
        #[test]
        fn intersection_matches_explicit_sets(x in arb_family(), y in arb_family()) {
            let ex = x.expand(100).unwrap();
            let ey = y.expand(100).unwrap();
            let explicit: BTreeSet<&TaggedRelation> =
                ex.relations().filter(|r| ey.contains(r)).collect();
            let got = x.intersection(&y).unwrap().expand(100).unwrap();
            prop_assert_eq!(got.relations().collect::<BTreeSet<_>>(), explicit);
            prop_assert_eq!(x.is_subset(&y).unwrap(), ex.is_subset(&ey));
        }
    }
}
