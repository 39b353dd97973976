use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use super::Value;
use crate::error::{Error, Result};

/// An ordered sequence of values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple(pub Vec<Value>);

impl Tuple {
    pub fn new(values: Vec<Value>) -> Self {
        Tuple(values)
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn get(&self, index: usize) -> Option<&Value> {
        self.0.get(index)
    }

    /// Keeps the columns at `indices`, in the given order.
    pub fn project(&self, indices: &[usize]) -> Tuple {
        Tuple(indices.iter().map(|&i| self.0[i].clone()).collect())
    }

    pub fn is_ground(&self) -> bool {
        self.0.iter().all(Value::is_const)
    }

    pub fn is_all_null(&self) -> bool {
        self.0.iter().all(Value::is_null)
    }
}

impl<const N: usize> From<[&str; N]> for Tuple {
    fn from(tokens: [&str; N]) -> Self {
        Tuple(tokens.iter().map(Value::constant).collect())
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// A finite set of tuples of one arity.
///
/// Relations are identified by value: every empty relation is the same
/// canonical ⊥ whatever arity it was declared with. The declared arity is kept
/// for type checking only.
#[derive(Debug, Clone)]
pub struct Relation {
    arity: usize,
    tuples: BTreeSet<Tuple>,
}

impl Relation {
    /// The canonical empty relation.
    pub fn bottom() -> Self {
        Relation {
            arity: 0,
            tuples: BTreeSet::new(),
        }
    }

    pub fn empty(arity: usize) -> Self {
        Relation {
            arity,
            tuples: BTreeSet::new(),
        }
    }

    pub fn new(arity: usize, tuples: impl IntoIterator<Item = Tuple>) -> Result<Self> {
        let mut rel = Relation::empty(arity);
        for t in tuples {
            rel.insert(t)?;
        }
        Ok(rel)
    }

    /// Builds a relation from constant tokens. Panics on ragged input, so
    /// reserve it for literals.
    pub fn from_rows<const N: usize>(rows: &[[&str; N]]) -> Self {
        Relation::new(N, rows.iter().map(|r| Tuple::from(*r))).expect("uniform rows")
    }

    pub fn insert(&mut self, tuple: Tuple) -> Result<bool> {
        if tuple.arity() != self.arity {
            return Err(Error::ArityMismatch {
                symbol: "<relation>".into(),
                expected: self.arity,
                found: tuple.arity(),
            });
        }
        Ok(self.tuples.insert(tuple))
    }

    pub(crate) fn from_set(arity: usize, tuples: BTreeSet<Tuple>) -> Self {
        debug_assert!(tuples.iter().all(|t| t.arity() == arity));
        Relation { arity, tuples }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn is_bottom(&self) -> bool {
        self.is_empty()
    }

    pub fn contains(&self, tuple: &Tuple) -> bool {
        self.tuples.contains(tuple)
    }

    pub fn tuples(&self) -> &BTreeSet<Tuple> {
        &self.tuples
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tuple> {
        self.tuples.iter()
    }

    pub fn values(&self) -> impl Iterator<Item = &Value> {
        self.tuples.iter().flat_map(|t| t.0.iter())
    }

    /// Every value passes `Val`.
    pub fn is_ground(&self) -> bool {
        self.tuples.iter().all(Tuple::is_ground)
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.tuples.is_subset(&other.tuples)
    }

    /// Set union. The arity of a non-empty operand wins.
    pub fn union(&self, other: &Relation) -> Result<Relation> {
        if self.is_empty() {
            return Ok(other.clone());
        }
        if other.is_empty() {
            return Ok(self.clone());
        }
        self.same_arity(other)?;
        Ok(Relation::from_set(
            self.arity,
            self.tuples.union(&other.tuples).cloned().collect(),
        ))
    }

    pub fn intersection(&self, other: &Relation) -> Relation {
        let tuples: BTreeSet<_> = self.tuples.intersection(&other.tuples).cloned().collect();
        Relation::from_set(self.arity, tuples)
    }

    pub fn difference(&self, other: &Relation) -> Relation {
        Relation::from_set(
            self.arity,
            self.tuples.difference(&other.tuples).cloned().collect(),
        )
    }

    /// Column projection (indices may repeat or permute).
    pub fn project(&self, indices: &[usize]) -> Result<Relation> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.arity) {
            return Err(Error::InvalidTerm(format!(
                "column {bad} out of range for arity {}",
                self.arity
            )));
        }
        Ok(Relation::from_set(
            indices.len(),
            self.tuples.iter().map(|t| t.project(indices)).collect(),
        ))
    }

    pub fn map_values(&self, mut f: impl FnMut(&Value) -> Value) -> Relation {
        Relation::from_set(
            self.arity,
            self.tuples
                .iter()
                .map(|t| Tuple(t.0.iter().map(&mut f).collect()))
                .collect(),
        )
    }

    fn same_arity(&self, other: &Relation) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                symbol: "<union>".into(),
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    fn identity_key(&self) -> (usize, &BTreeSet<Tuple>) {
        (if self.is_empty() { 0 } else { self.arity }, &self.tuples)
    }
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.identity_key() == other.identity_key()
    }
}

impl Eq for Relation {}

impl PartialOrd for Relation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Relation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.identity_key().cmp(&other.identity_key())
    }
}

impl Hash for Relation {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.identity_key().hash(state);
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("⊥");
        }
        f.write_str("{")?;
        for (i, t) in self.tuples.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("}")
    }
}
