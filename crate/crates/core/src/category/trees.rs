//! Composition trees: which relations a morphism really reads and writes.

use std::collections::BTreeSet;

use super::morphism::{Morphism, Shape};
use crate::relational::{Instance, Side};

/// A component seen from outside: the domain relations it reads and the
/// codomain relations it writes, by name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Link {
    pub label: String,
    pub inputs: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
}

impl Morphism {
    /// `∂0`: domain relations feeding the surviving components.
    pub fn sources(&self) -> BTreeSet<String> {
        self.links().into_iter().flat_map(|l| l.inputs).collect()
    }

    /// `∂1`: codomain relations written by the surviving components.
    pub fn targets(&self) -> BTreeSet<String> {
        self.links().into_iter().flat_map(|l| l.outputs).collect()
    }

    /// Surviving components, with composed trees collapsed to their roots.
    pub fn links(&self) -> Vec<Link> {
        match self.shape() {
            Shape::Composed(outer, inner) => {
                let below = inner.links();
                let fed: BTreeSet<String> = below.iter().flat_map(|l| l.outputs.clone()).collect();
                let mut out = Vec::new();
                for l in outer.links() {
                    let inputs = graft(&l.inputs, outer.dom(), inner.cod());
                    if inputs.is_disjoint(&fed) {
                        continue;
                    }
                    let sources = below
                        .iter()
                        .filter(|m| !m.outputs.is_disjoint(&inputs))
                        .flat_map(|m| m.inputs.clone())
                        .collect();
                    out.push(Link {
                        label: l.label,
                        inputs: sources,
                        outputs: l.outputs,
                    });
                }
                out
            }
            _ => self.local_links(),
        }
    }

    /// Links of one stage, without looking through compositions at the top.
    pub(crate) fn local_links(&self) -> Vec<Link> {
        match self.shape() {
            Shape::Atomic(cs) => cs
                .iter()
                .enumerate()
                .map(|(i, c)| Link {
                    label: c
                        .component
                        .label()
                        .map_or_else(|| format!("q{}", i + 1), str::to_string),
                    inputs: c.component.sources().into_iter().map(String::from).collect(),
                    outputs: c.component.target.iter().cloned().collect(),
                })
                .collect(),
            Shape::Composed(..) => self.links(),
            Shape::Inverse(f) => f
                .links()
                .into_iter()
                .map(|l| Link {
                    label: l.label,
                    inputs: l.outputs,
                    outputs: l.inputs,
                })
                .collect(),
            Shape::ViewMap(views) => {
                let outputs: BTreeSet<String> = self
                    .cod()
                    .names()
                    .filter(|(_, r)| !r.relation.is_empty() && views.contains(r))
                    .map(|(n, _)| n.to_string())
                    .collect();
                if outputs.is_empty() {
                    return Vec::new();
                }
                vec![Link {
                    label: "views".into(),
                    inputs: proper_names(self.dom()),
                    outputs,
                }]
            }
            Shape::Sum(f, g) => {
                let side = |m: &Morphism, s: Side| {
                    m.links().into_iter().map(move |l| Link {
                        label: format!("{}{}", s.prefix(), l.label),
                        inputs: prefixed(&l.inputs, s),
                        outputs: prefixed(&l.outputs, s),
                    })
                };
                side(f, Side::Left).chain(side(g, Side::Right)).collect()
            }
            Shape::Copair(f, g) => {
                let side = |m: &Morphism, s: Side| {
                    m.links().into_iter().map(move |l| Link {
                        label: format!("{}{}", s.prefix(), l.label),
                        inputs: prefixed(&l.inputs, s),
                        outputs: l.outputs,
                    })
                };
                side(f, Side::Left).chain(side(g, Side::Right)).collect()
            }
            Shape::Injection(s) => proper_names(self.dom())
                .into_iter()
                .map(|n| Link {
                    label: format!("{}{n}", s.prefix()),
                    outputs: BTreeSet::from([format!("{}{n}", s.prefix())]),
                    inputs: BTreeSet::from([n]),
                })
                .collect(),
        }
    }

    /// The chain `[m0, m1, ..]` with `self = .. ∘ m1 ∘ m0`.
    pub(crate) fn stages(&self) -> Vec<Morphism> {
        match self.shape() {
            Shape::Composed(outer, inner) => {
                let mut s = inner.stages();
                s.extend(outer.stages());
                s
            }
            _ => vec![self.clone()],
        }
    }
}

fn proper_names(a: &Instance) -> BTreeSet<String> {
    a.names()
        .filter(|(_, r)| !r.relation.is_empty())
        .map(|(n, _)| n.to_string())
        .collect()
}

fn prefixed(names: &BTreeSet<String>, side: Side) -> BTreeSet<String> {
    names.iter().map(|n| format!("{}{n}", side.prefix())).collect()
}

/// Renames symbols of `from` to the symbols `to` uses for the same relation.
/// A name bound in `to` is kept as it is.
pub(crate) fn graft(names: &BTreeSet<String>, from: &Instance, to: &Instance) -> BTreeSet<String> {
    names
        .iter()
        .filter_map(|n| {
            if to.get_tagged(n).is_some() {
                return Some(n.clone());
            }
            from.get_tagged(n)
                .and_then(|r| to.name_of(r))
                .map(str::to_string)
        })
        .collect()
}
