//! Graphviz export of composition trees.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::morphism::Morphism;
use super::trees::{graft, Link};
use crate::relational::Instance;

/// Renders each morphism as a cluster: one sub-cluster per object of its
/// composition chain and one box per component. Relations and components
/// off the surviving paths are dashed. Output depends only on the input.
pub fn export_dot(morphisms: &[Morphism]) -> String {
    let mut out = String::from("digraph viewdb {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    for (mi, m) in morphisms.iter().enumerate() {
        render(&mut out, mi, m);
    }
    out.push_str("}\n");
    out
}

struct Stage {
    links: Vec<Link>,
    /// Inputs renamed into the previous object's symbols.
    inputs: Vec<BTreeSet<String>>,
    alive: Vec<bool>,
}

fn render(out: &mut String, mi: usize, m: &Morphism) {
    let chain = m.stages();
    let mut objects: Vec<Instance> = vec![chain[0].dom().clone()];
    objects.extend(chain.iter().map(|s| s.cod().clone()));

    let mut stages: Vec<Stage> = chain
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let links = s.local_links();
            let inputs = links
                .iter()
                .map(|l| graft(&l.inputs, s.dom(), &objects[i]))
                .collect();
            let n = links.len();
            Stage {
                links,
                inputs,
                alive: vec![true; n],
            }
        })
        .collect();

    // forward: fed by the previous stage; backward: feeding the next one
    for i in 1..stages.len() {
        let fed = outputs(&stages[i - 1]);
        let s = &mut stages[i];
        for j in 0..s.links.len() {
            s.alive[j] = !s.inputs[j].is_disjoint(&fed);
        }
    }
    for i in (0..stages.len().saturating_sub(1)).rev() {
        let used = inputs(&stages[i + 1]);
        let s = &mut stages[i];
        for j in 0..s.links.len() {
            s.alive[j] = s.alive[j] && !s.links[j].outputs.is_disjoint(&used);
        }
    }

    let solid = |oi: usize, name: &str| -> bool {
        let written = oi == 0 || outputs(&stages[oi - 1]).contains(name);
        let read = oi == stages.len() || inputs(&stages[oi]).contains(name);
        written && read
    };

    let _ = writeln!(out, "  subgraph \"cluster_m{mi}\" {{");
    let _ = writeln!(
        out,
        "    label={};",
        quote(&format!(
            "m{mi}: ∂0 = {{{}}}  ∂1 = {{{}}}",
            join(&m.sources()),
            join(&m.targets())
        ))
    );
    for (oi, o) in objects.iter().enumerate() {
        let _ = writeln!(out, "    subgraph \"cluster_m{mi}_o{oi}\" {{");
        let _ = writeln!(out, "      label=\"object {oi}\";");
        let names: BTreeSet<&str> = o.names().map(|(n, _)| n).collect();
        for n in names {
            let _ = writeln!(
                out,
                "      {} [label={}{}];",
                quote(&relation_id(mi, oi, n)),
                quote(n),
                style(solid(oi, n))
            );
        }
        out.push_str("    }\n");
    }
    for (si, s) in stages.iter().enumerate() {
        for (j, l) in s.links.iter().enumerate() {
            let id = format!("m{mi}_s{si}_{j}");
            let _ = writeln!(
                out,
                "    {} [shape=box, label={}{}];",
                quote(&id),
                quote(&l.label),
                style(s.alive[j])
            );
            for input in &s.inputs[j] {
                let _ = writeln!(
                    out,
                    "    {} -> {}{};",
                    quote(&relation_id(mi, si, input)),
                    quote(&id),
                    style(s.alive[j] && solid(si, input))
                );
            }
            for output in &l.outputs {
                let _ = writeln!(
                    out,
                    "    {} -> {}{};",
                    quote(&id),
                    quote(&relation_id(mi, si + 1, output)),
                    style(s.alive[j] && solid(si + 1, output))
                );
            }
        }
    }
    out.push_str("  }\n");
}

fn outputs(s: &Stage) -> BTreeSet<String> {
    s.links
        .iter()
        .zip(&s.alive)
        .filter(|(_, a)| **a)
        .flat_map(|(l, _)| l.outputs.iter().cloned())
        .collect()
}

fn inputs(s: &Stage) -> BTreeSet<String> {
    s.inputs
        .iter()
        .zip(&s.alive)
        .filter(|(_, a)| **a)
        .flat_map(|(i, _)| i.iter().cloned())
        .collect()
}

fn relation_id(mi: usize, oi: usize, name: &str) -> String {
    format!("m{mi}_o{oi}_{name}")
}

fn style(solid: bool) -> &'static str {
    if solid {
        ""
    } else {
        ", style=dashed"
    }
}

fn join(names: &BTreeSet<String>) -> String {
    names.iter().cloned().collect::<Vec<_>>().join(", ")
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            q.push('\\');
        }
        q.push(c);
    }
    q.push('"');
    q
}
