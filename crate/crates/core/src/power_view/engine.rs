//! Bitset closure over the active domain.
//!
//! A relation of arity `j` is a bit vector indexed by tuples of `D^j` in
//! lexicographic order, where `D` is the sorted active domain.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::relational::{Relation, Tuple, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Bits {
    arity: usize,
    words: Box<[u64]>,
}

impl Bits {
    fn zero(arity: usize, len: usize) -> Self {
        Bits {
            arity,
            words: vec![0; len.div_ceil(64)].into_boxed_slice(),
        }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    fn and(&self, mask: &Bits) -> Bits {
        Bits {
            arity: self.arity,
            words: self.words.iter().zip(mask.words.iter()).map(|(a, b)| a & b).collect(),
        }
    }

    fn is_subset(&self, other: &Bits) -> bool {
        self.words.iter().zip(other.words.iter()).all(|(a, b)| a & !b == 0)
    }

    fn or(&self, other: &Bits) -> Bits {
        Bits {
            arity: self.arity,
            words: self.words.iter().zip(other.words.iter()).map(|(a, b)| a | b).collect(),
        }
    }
}

/// Limits applied while closing.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Limits {
    pub k: usize,
    pub max_new_views: Option<usize>,
    pub max_rounds: Option<usize>,
}

struct Space {
    domain: Vec<Value>,
    /// `pow[j] = |D|^j` for `j <= k`.
    pow: Vec<usize>,
    /// Selection masks per arity.
    masks: Vec<Vec<Bits>>,
    /// Index maps for order-preserving projections, per arity.
    projections: Vec<Vec<(usize, Vec<usize>)>>,
}

impl Space {
    fn new(domain: Vec<Value>, k: usize) -> Self {
        let n = domain.len();
        let pow: Vec<usize> = (0..=k).map(|j| n.pow(j as u32)).collect();
        let mut space = Space {
            domain,
            pow,
            masks: Vec::new(),
            projections: Vec::new(),
        };
        for j in 0..=k {
            let masks = space.selection_masks(j);
            let projs = space.projection_maps(j);
            space.masks.push(masks);
            space.projections.push(projs);
        }
        space
    }

    fn digits(&self, mut idx: usize, arity: usize) -> Vec<usize> {
        let n = self.domain.len();
        let mut d = vec![0; arity];
        for slot in d.iter_mut().rev() {
            *slot = idx % n;
            idx /= n;
        }
        d
    }

    fn encode(&self, digits: impl IntoIterator<Item = usize>) -> usize {
        let n = self.domain.len();
        digits.into_iter().fold(0, |acc, d| acc * n + d)
    }

    fn selection_masks(&self, j: usize) -> Vec<Bits> {
        let size = self.pow[j];
        let mut conds: Vec<Box<dyn Fn(&[usize]) -> bool>> = Vec::new();
        for a in 0..j {
            for b in a + 1..j {
                conds.push(Box::new(move |d| d[a] == d[b]));
            }
            // marked nulls are values of the domain too, so they can be selected on
            for ci in 0..self.domain.len() {
                conds.push(Box::new(move |d| d[a] == ci));
            }
            let domain = &self.domain;
            conds.push(Box::new(move |d| domain[d[a]].is_const()));
        }
        conds
            .iter()
            .map(|cond| {
                let mut m = Bits::zero(j, size);
                for i in 0..size {
                    if cond(&self.digits(i, j)) {
                        m.set(i);
                    }
                }
                m
            })
            .collect()
    }

    fn projection_maps(&self, j: usize) -> Vec<(usize, Vec<usize>)> {
        let mut out = Vec::new();
        // proper, non-empty, strictly increasing column subsets
        for subset in 1..(1usize << j).saturating_sub(1) {
            let cols: Vec<usize> = (0..j).filter(|c| subset & (1 << c) != 0).collect();
            let map = (0..self.pow[j])
                .map(|i| {
                    let d = self.digits(i, j);
                    self.encode(cols.iter().map(|&c| d[c]))
                })
                .collect();
            out.push((cols.len(), map));
        }
        out
    }

    fn to_bits(&self, rel: &Relation) -> Bits {
        let mut b = Bits::zero(rel.arity(), self.pow[rel.arity()]);
        for t in rel.iter() {
            let idx = self.encode(t.values().iter().map(|v| {
                self.domain
                    .binary_search(v)
                    .expect("value in active domain")
            }));
            b.set(idx);
        }
        b
    }

    fn to_relation(&self, bits: &Bits) -> Relation {
        let tuples = bits.ones().map(|i| {
            Tuple::new(
                self.digits(i, bits.arity)
                    .into_iter()
                    .map(|d| self.domain[d].clone())
                    .collect(),
            )
        });
        Relation::new(bits.arity, tuples).expect("uniform arity")
    }

    fn project(&self, bits: &Bits, width: usize, map: &[usize]) -> Bits {
        let mut out = Bits::zero(width, self.pow[width]);
        for i in bits.ones() {
            out.set(map[i]);
        }
        out
    }

    fn product(&self, a: &Bits, b: &Bits) -> Bits {
        let arity = a.arity + b.arity;
        let mut out = Bits::zero(arity, self.pow[arity]);
        let stride = self.pow[b.arity];
        for i in a.ones() {
            for j in b.ones() {
                out.set(i * stride + j);
            }
        }
        out
    }
}

/// Result of [`close`].
pub(crate) struct Closed {
    /// Union-irreducible views of arity at most `k`.
    pub irreducible: Vec<Relation>,
    /// Seeds above the bound, kept as they are.
    pub oversized: Vec<Relation>,
}

/// Closes `seeds` under selection, order-preserving projection, product up
/// to arity `k`, and same-arity union, returning the union-irreducible
/// members. Every member of the closure is a union of those.
///
/// Selection, projection and product distribute over union, so only
/// irreducible views need to be expanded and unions never have to be
/// materialised.
pub(crate) fn close(seeds: &[Relation], limits: Limits) -> Result<Closed> {
    let k = limits.k;
    let mut domain: Vec<Value> = seeds.iter().flat_map(|r| r.values().cloned()).collect();
    domain.sort();
    domain.dedup();
    let space = Space::new(domain, k);

    let mut oversized: Vec<Relation> = Vec::new();
    let mut start: Vec<Bits> = Vec::new();
    for r in seeds.iter().filter(|r| !r.is_empty()) {
        if r.arity() > k {
            if !oversized.contains(r) {
                oversized.push(r.clone());
            }
        } else {
            start.push(space.to_bits(r));
        }
    }
    // oversized seeds only feed projections of width <= k
    for r in &oversized {
        let j = r.arity();
        for width in 1..=k.min(j - 1) {
            for cols in increasing_subsets(j, width) {
                let p = r.project(&cols).expect("columns in range");
                start.push(space.to_bits(&p));
            }
        }
    }

    let mut acc = Accumulator::new(limits, k);
    for b in start {
        acc.emit(b)?;
    }
    acc.seeded = acc.count;

    let mut delta = acc.take_delta();
    while !delta.is_empty() {
        acc.next_round()?;
        let snapshot: Vec<usize> = acc.by_arity.iter().map(Vec::len).collect();
        for d in &delta {
            for m in &space.masks[d.arity] {
                acc.emit(d.and(m))?;
            }
            for (width, map) in &space.projections[d.arity] {
                acc.emit(space.project(d, *width, map))?;
            }
            if d.arity == 0 {
                continue;
            }
            for xa in 1..=k - d.arity {
                for xi in 0..snapshot[xa] {
                    let x = &acc.by_arity[xa][xi];
                    let (p, q) = (space.product(d, x), space.product(x, d));
                    acc.emit(p)?;
                    acc.emit(q)?;
                }
            }
        }
        delta = acc.take_delta();
    }

    let mut irreducible = Vec::new();
    for group in &acc.by_arity {
        for (i, b) in group.iter().enumerate() {
            let below = group
                .iter()
                .enumerate()
                .filter(|&(j, h)| j != i && h.is_subset(b) && h != b)
                .fold(Bits::zero(b.arity, b.words.len() * 64), |u, (_, h)| u.or(h));
            if &below != b {
                irreducible.push(space.to_relation(b));
            }
        }
    }
    Ok(Closed {
        irreducible,
        oversized,
    })
}

struct Accumulator {
    limits: Limits,
    seen: HashSet<Bits>,
    /// Irreducible (when found) views, grouped by arity.
    by_arity: Vec<Vec<Bits>>,
    fresh: Vec<Bits>,
    count: usize,
    seeded: usize,
    rounds: usize,
}

impl Accumulator {
    fn new(limits: Limits, k: usize) -> Self {
        Accumulator {
            limits,
            seen: HashSet::new(),
            by_arity: vec![Vec::new(); k + 1],
            fresh: Vec::new(),
            count: 0,
            seeded: 0,
            rounds: 0,
        }
    }

    fn emit(&mut self, b: Bits) -> Result<()> {
        if b.is_empty() || !self.seen.insert(b.clone()) {
            return Ok(());
        }
        // a union of views already present adds nothing new to expand
        let group = &self.by_arity[b.arity];
        let mut below = Bits {
            arity: b.arity,
            words: vec![0; b.words.len()].into_boxed_slice(),
        };
        for h in group.iter().filter(|h| h.is_subset(&b)) {
            below = below.or(h);
        }
        if below == b {
            return Ok(());
        }
        self.by_arity[b.arity].push(b.clone());
        self.fresh.push(b);
        self.count += 1;
        if self
            .limits
            .max_new_views
            .is_some_and(|cap| self.count - self.seeded > cap)
        {
            return Err(Error::CapExceeded {
                views: self.count,
                rounds: self.rounds,
            });
        }
        Ok(())
    }

    fn take_delta(&mut self) -> Vec<Bits> {
        std::mem::take(&mut self.fresh)
    }

    fn next_round(&mut self) -> Result<()> {
        if self.limits.max_rounds.is_some_and(|cap| self.rounds >= cap) {
            return Err(Error::CapExceeded {
                views: self.count,
                rounds: self.rounds,
            });
        }
        self.rounds += 1;
        Ok(())
    }
}

pub(crate) fn increasing_subsets(n: usize, width: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, width: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == width {
            out.push(cur.clone());
            return;
        }
        for c in start..n {
            cur.push(c);
            go(c + 1, n, width, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, width, &mut Vec::new(), &mut out);
    out
}
