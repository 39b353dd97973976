use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Relation, Value};
use crate::error::{Error, Result};

/// Which summand of a coproduct a relation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub(crate) fn prefix(self) -> &'static str {
        match self {
            Side::Left => "inl_",
            Side::Right => "inr_",
        }
    }
}

/// Coproduct component path, outermost summand first. The empty tag marks an
/// ordinary (untagged) relation.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(Vec<Side>);

impl Tag {
    pub fn untagged() -> Self {
        Tag(Vec::new())
    }

    pub fn is_untagged(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sides(&self) -> &[Side] {
        &self.0
    }

    pub fn pushed(&self, outer: Side) -> Tag {
        let mut sides = Vec::with_capacity(self.0.len() + 1);
        sides.push(outer);
        sides.extend_from_slice(&self.0);
        Tag(sides)
    }

    pub(crate) fn strip(&self, outer: Side) -> Option<Tag> {
        match self.0.split_first() {
            Some((&first, rest)) if first == outer => Some(Tag(rest.to_vec())),
            _ => None,
        }
    }
}

/// A relation value together with its coproduct component.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaggedRelation {
    pub tag: Tag,
    pub relation: Relation,
}

impl TaggedRelation {
    pub fn untagged(relation: Relation) -> Self {
        TaggedRelation {
            tag: Tag::untagged(),
            relation,
        }
    }

    pub fn bottom() -> Self {
        TaggedRelation::untagged(Relation::bottom())
    }

    /// Empty relations lose their tag: there is one ⊥ for the whole instance.
    fn normalized(self) -> Self {
        if self.relation.is_empty() {
            TaggedRelation::bottom()
        } else {
            self
        }
    }
}

impl fmt::Display for TaggedRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for side in self.tag.sides() {
            f.write_str(match side {
                Side::Left => "inl·",
                Side::Right => "inr·",
            })?;
        }
        write!(f, "{}", self.relation)
    }
}

/// How relation values are organised across coproduct components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Universe {
    /// Only ⊥: compatible with everything.
    Neutral,
    Untagged,
    Tagged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    Union,
    Intersection,
    Coproduct,
}

/// A database instance: a set of relation values that always contains ⊥,
/// plus optional symbol names bound to some of those values.
///
/// Equality and membership are by value; names are presentation only.
#[derive(Debug, Clone)]
pub struct Instance {
    relations: BTreeSet<TaggedRelation>,
    names: BTreeMap<String, TaggedRelation>,
}

impl Default for Instance {
    fn default() -> Self {
        Instance::new()
    }
}

impl Instance {
    /// The zero object `{⊥}`.
    pub fn new() -> Self {
        let mut relations = BTreeSet::new();
        relations.insert(TaggedRelation::bottom());
        Instance {
            relations,
            names: BTreeMap::new(),
        }
    }

    pub fn from_relations(relations: impl IntoIterator<Item = Relation>) -> Self {
        let mut inst = Instance::new();
        for r in relations {
            inst.add(TaggedRelation::untagged(r));
        }
        inst
    }

    pub fn from_tagged(relations: impl IntoIterator<Item = TaggedRelation>) -> Self {
        let mut inst = Instance::new();
        for r in relations {
            inst.add(r);
        }
        inst
    }

    /// Builds an instance from named relations. Several names may share one
    /// value.
    pub fn from_named<S: Into<String>>(named: impl IntoIterator<Item = (S, Relation)>) -> Self {
        let mut inst = Instance::new();
        for (name, rel) in named {
            inst.bind_tagged(name.into(), TaggedRelation::untagged(rel));
        }
        inst
    }

    /// Returns a copy with `name` bound to `relation` (rebinding if present).
    pub fn with(mut self, name: impl Into<String>, relation: Relation) -> Self {
        self.bind_tagged(name.into(), TaggedRelation::untagged(relation));
        self
    }

    pub(crate) fn bind_tagged(&mut self, name: String, relation: TaggedRelation) {
        let stored = if relation.relation.is_empty() {
            // keep the declared arity on the name, the set holds canonical ⊥
            TaggedRelation::untagged(relation.relation)
        } else {
            relation
        };
        self.add(stored.clone());
        self.names.insert(name, stored);
    }

    pub(crate) fn add(&mut self, relation: TaggedRelation) {
        self.relations.insert(relation.normalized());
    }

    pub fn get(&self, name: &str) -> Option<&Relation> {
        self.names.get(name).map(|t| &t.relation)
    }

    pub fn get_tagged(&self, name: &str) -> Option<&TaggedRelation> {
        self.names.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = (&str, &TaggedRelation)> {
        self.names.iter().map(|(n, r)| (n.as_str(), r))
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.names.keys().map(String::as_str)
    }

    /// The smallest name bound to `relation`, if any.
    pub fn name_of(&self, relation: &TaggedRelation) -> Option<&str> {
        self.names
            .iter()
            .find(|(_, r)| *r == relation)
            .map(|(n, _)| n.as_str())
    }

    pub fn relations(&self) -> impl Iterator<Item = &TaggedRelation> {
        self.relations.iter()
    }

    /// Relation values other than ⊥.
    pub fn proper_relations(&self) -> impl Iterator<Item = &TaggedRelation> {
        self.relations.iter().filter(|r| !r.relation.is_empty())
    }

    pub fn contains(&self, relation: &TaggedRelation) -> bool {
        self.relations.contains(&relation.clone().normalized())
    }

    pub fn contains_relation(&self, relation: &Relation) -> bool {
        self.contains(&TaggedRelation::untagged(relation.clone()))
    }

    /// Number of relation values, ⊥ included.
    pub fn len(&self) -> usize {
        self.relations.len()
    }

    /// True for `{⊥}`.
    pub fn is_zero(&self) -> bool {
        self.relations.len() == 1
    }

    pub fn is_subset(&self, other: &Instance) -> bool {
        self.relations.is_subset(&other.relations)
    }

    pub fn max_arity(&self) -> usize {
        self.relations
            .iter()
            .map(|r| r.relation.arity())
            .max()
            .unwrap_or(0)
    }

    /// Every value occurring in some relation.
    pub fn active_domain(&self) -> BTreeSet<Value> {
        self.relations
            .iter()
            .flat_map(|r| r.relation.values().cloned())
            .collect()
    }

    pub fn universe(&self) -> Universe {
        let mut tagged = false;
        let mut untagged = false;
        for r in self.proper_relations() {
            if r.tag.is_untagged() {
                untagged = true;
            } else {
                tagged = true;
            }
        }
        match (untagged, tagged) {
            (false, false) => Universe::Neutral,
            (_, false) => Universe::Untagged,
            _ => Universe::Tagged,
        }
    }

    /// Normal form: duplicate values merged, ⊥ present, empty relations
    /// identified with ⊥, names pointing at members. Idempotent.
    pub fn canonical_form(&self) -> Instance {
        let mut out = Instance::new();
        for r in &self.relations {
            out.add(r.clone());
        }
        for (name, r) in &self.names {
            out.bind_tagged(name.clone(), r.clone());
        }
        out
    }

    /// Binds every unnamed proper relation to a generated `vN` symbol.
    /// Generated names avoid existing ones and follow value order.
    pub fn with_view_names(&self) -> Instance {
        let mut out = self.clone();
        let named: BTreeSet<&TaggedRelation> = self
            .names
            .values()
            .filter(|r| !r.relation.is_empty())
            .collect();
        let mut counter = 0usize;
        for r in self.proper_relations() {
            if named.contains(r) {
                continue;
            }
            let name = loop {
                counter += 1;
                let candidate = format!("v{counter}");
                if !self.names.contains_key(&candidate) {
                    break candidate;
                }
            };
            out.names.insert(name, r.clone());
        }
        out
    }

    /// Keeps the relations whose every value passes `Val`.
    pub fn ground_part(&self) -> Instance {
        let mut out = Instance::new();
        for r in self.relations.iter().filter(|r| r.relation.is_ground()) {
            out.add(r.clone());
        }
        for (name, r) in &self.names {
            if r.relation.is_ground() {
                out.bind_tagged(name.clone(), r.clone());
            }
        }
        out
    }

    /// Places every proper relation into the `side` summand.
    pub fn tagged(&self, side: Side) -> Instance {
        let mut out = Instance::new();
        for r in self.proper_relations() {
            out.add(TaggedRelation {
                tag: r.tag.pushed(side),
                relation: r.relation.clone(),
            });
        }
        for (name, r) in &self.names {
            let moved = if r.relation.is_empty() {
                r.clone()
            } else {
                TaggedRelation {
                    tag: r.tag.pushed(side),
                    relation: r.relation.clone(),
                }
            };
            out.names.insert(format!("{}{}", side.prefix(), name), moved);
        }
        out
    }

    /// Inverse of [`tagged`](Self::tagged): keeps the `side` summand with its
    /// outer tag removed.
    pub fn untag(&self, side: Side) -> Instance {
        let mut out = Instance::new();
        for r in self.proper_relations() {
            if let Some(tag) = r.tag.strip(side) {
                out.add(TaggedRelation {
                    tag,
                    relation: r.relation.clone(),
                });
            }
        }
        for (name, r) in &self.names {
            let Some(base) = name.strip_prefix(side.prefix()) else {
                continue;
            };
            if r.relation.is_empty() {
                out.names.insert(base.to_string(), r.clone());
            } else if let Some(tag) = r.tag.strip(side) {
                out.names.insert(
                    base.to_string(),
                    TaggedRelation {
                        tag,
                        relation: r.relation.clone(),
                    },
                );
            }
        }
        out
    }

    /// Groups proper relations by their full tag.
    pub(crate) fn components(&self) -> BTreeMap<Tag, Vec<&TaggedRelation>> {
        let mut groups: BTreeMap<Tag, Vec<&TaggedRelation>> = BTreeMap::new();
        for r in self.proper_relations() {
            groups.entry(r.tag.clone()).or_default().push(r);
        }
        groups
    }
}

/// Union, intersection or tagged disjoint union of two instances.
pub fn combine(a: &Instance, b: &Instance, mode: CombineMode) -> Result<Instance> {
    match mode {
        CombineMode::Coproduct => {
            let left = a.tagged(Side::Left);
            let right = b.tagged(Side::Right);
            let mut out = left;
            for r in right.relations {
                out.add(r);
            }
            out.names.extend(right.names);
            Ok(out)
        }
        CombineMode::Union | CombineMode::Intersection => {
            use Universe::*;
            match (a.universe(), b.universe()) {
                (Untagged, Tagged) | (Tagged, Untagged) => return Err(Error::TagMismatch),
                _ => {}
            }
            let mut out = Instance::new();
            if mode == CombineMode::Union {
                for r in a.relations.iter().chain(&b.relations) {
                    out.add(r.clone());
                }
            } else {
                for r in a.relations.intersection(&b.relations) {
                    out.add(r.clone());
                }
            }
            // names: left operand wins on conflicts
            for (name, r) in b.names.iter().chain(&a.names) {
                if out.contains(r) {
                    out.names.insert(name.clone(), r.clone());
                }
            }
            Ok(out)
        }
    }
}

/// Value-level equality, names ignored.
pub fn instances_equal(a: &Instance, b: &Instance) -> bool {
    a.relations == b.relations
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        instances_equal(self, other)
    }
}

impl Eq for Instance {}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, r) in self.relations.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("}")
    }
}
