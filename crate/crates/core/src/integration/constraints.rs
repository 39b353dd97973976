use std::collections::BTreeMap;
use std::fmt;

use super::chase::{egds_of, Db};
use super::schema::{Schema, Tgd};
use crate::category::{compose, MappingComponent, Morphism, Variant};
use crate::error::{Error, Result};
use crate::power_view::{closure, ViewBound};
use crate::query::{eval_rule, for_each_match, Atom, Binding, Head, Rule, Term};
use crate::relational::{Instance, Relation, Tuple};

/// Outcome of checking one constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintCheck {
    pub constraint: String,
    /// One entry per violation: the tuples witnessing it.
    pub violations: Vec<Vec<Tuple>>,
}

impl ConstraintCheck {
    pub fn is_satisfied(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintReport {
    pub checks: Vec<ConstraintCheck>,
}

impl ConstraintReport {
    pub fn is_satisfied(&self) -> bool {
        self.checks.iter().all(ConstraintCheck::is_satisfied)
    }

    pub fn violated(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| !c.is_satisfied())
    }
}

impl fmt::Display for ConstraintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            if c.is_satisfied() {
                writeln!(f, "ok        {}", c.constraint)?;
                continue;
            }
            writeln!(f, "violated  {}", c.constraint)?;
            for w in &c.violations {
                let ts: Vec<String> = w.iter().map(ToString::to_string).collect();
                writeln!(f, "    {}", ts.join(" "))?;
            }
        }
        Ok(())
    }
}

fn database(schema: &Schema, instance: &Instance) -> Db {
    let mut db: Db = schema
        .relations()
        .map(|(n, a)| (n.to_string(), Relation::empty(a)))
        .collect();
    for (name, r) in instance.names() {
        if !r.relation.is_empty() {
            db.insert(name.to_string(), r.relation.clone());
        }
    }
    db
}

fn lookup<'a>(db: &'a Db) -> impl FnMut(&str, usize) -> Result<&'a Relation> {
    move |s, _| db.get(s).ok_or_else(|| Error::UnboundSymbol(s.to_string()))
}

/// The relational atoms of `atoms` instantiated by `b`.
fn witness(atoms: &[Atom], b: &Binding) -> Vec<Tuple> {
    atoms
        .iter()
        .filter_map(|a| match a {
            Atom::Relational { args, .. } => Some(Tuple::new(
                args.iter()
                    .map(|t| match t {
                        Term::Var(v) => b[v].clone(),
                        Term::Const(c) => c.clone(),
                    })
                    .collect(),
            )),
            _ => None,
        })
        .collect()
}

fn tgd_violations(tgd: &Tgd, db: &Db) -> Result<Vec<Vec<Tuple>>> {
    let mut out = Vec::new();
    let mut premise_matches = Vec::new();
    for_each_match(&tgd.premise, lookup(db), |b| {
        premise_matches.push(b.clone());
        Ok(true)
    })?;
    for b in premise_matches {
        let bound: Vec<Atom> = tgd
            .conclusion
            .iter()
            .map(|a| {
                a.map_terms(|t| match t {
                    Term::Var(v) if b.contains_key(v) => Term::Const(b[v].clone()),
                    other => other.clone(),
                })
            })
            .collect();
        let mut found = false;
        for_each_match(&bound, lookup(db), |_| {
            found = true;
            Ok(false)
        })?;
        if !found {
            out.push(witness(&tgd.premise, &b));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Checks keys, foreign keys, tgds and egds, collecting witnesses.
pub fn check_constraints(schema: &Schema, instance: &Instance) -> Result<ConstraintReport> {
    let db = database(schema, instance);
    let mut checks = Vec::new();

    for (name, key) in schema.keys() {
        let cols: Vec<usize> = key.iter().copied().collect();
        let mut groups: BTreeMap<Tuple, Vec<&Tuple>> = BTreeMap::new();
        for t in db[name].iter() {
            groups.entry(t.project(&cols)).or_default().push(t);
        }
        let violations = groups
            .values()
            .filter(|g| g.len() > 1)
            .flat_map(|g| g[1..].iter().map(|t| vec![g[0].clone(), (*t).clone()]))
            .collect();
        let cols: Vec<String> = key.iter().map(|c| (c + 1).to_string()).collect();
        checks.push(ConstraintCheck {
            constraint: format!("key {name}({})", cols.join(",")),
            violations,
        });
    }

    for fk in schema.fks() {
        let present: Relation = db[&fk.to].project(&fk.to_cols)?;
        let violations = db[&fk.from]
            .iter()
            .filter(|t| !present.contains(&t.project(&fk.from_cols)))
            .map(|t| vec![t.clone()])
            .collect();
        checks.push(ConstraintCheck {
            constraint: fk.to_string(),
            violations,
        });
    }

    for tgd in schema.tgds() {
        checks.push(ConstraintCheck {
            constraint: tgd.to_string(),
            violations: tgd_violations(tgd, &db)?,
        });
    }

    for egd in schema.egds() {
        let mut violations = Vec::new();
        for_each_match(&egd.premise, lookup(&db), |b| {
            if b[&egd.left] != b[&egd.right] {
                violations.push(witness(&egd.premise, b));
            }
            Ok(true)
        })?;
        violations.sort();
        violations.dedup();
        checks.push(ConstraintCheck {
            constraint: egd.to_string(),
            violations,
        });
    }
    Ok(ConstraintReport { checks })
}

/// The endo-morphism of a legal instance induced by its constraints: each
/// tgd (foreign keys included) sends its premise query into the view its
/// conclusion defines, each egd becomes a Yes/No component. The result
/// goes back to `instance` through its own views.
pub fn constraint_morphism(schema: &Schema, instance: &Instance, bound: ViewBound) -> Result<Morphism> {
    let report = check_constraints(schema, instance)?;
    if let Some(bad) = report.violated().next() {
        return Err(Error::ConstraintViolated(bad.constraint.clone()));
    }
    let mut tgds: Vec<Tgd> = schema.tgds().to_vec();
    for fk in schema.fks() {
        tgds.push(schema.fk_as_tgd(fk)?);
    }

    let mut cod = database(schema, instance);
    let mut components = Vec::new();
    for (i, tgd) in tgds.iter().enumerate() {
        let mut name = format!("tgd{}", i + 1);
        while cod.contains_key(&name) {
            name.push('_');
        }
        let head = Head {
            name: Some(name.clone()),
            vars: tgd.frontier(),
        };
        let premise = Rule::new(head.clone(), tgd.premise.clone())?;
        let conclusion = Rule::new(head, tgd.conclusion.clone())?;
        let view = eval_rule(&conclusion, &Instance::from_named(cod.clone()))?;
        cod.insert(name.clone(), view);
        components.push(MappingComponent::new(premise, Variant::Inclusion, name));
    }
    for egd in egds_of(schema) {
        let yes_no = Rule::new(
            Head {
                name: None,
                vars: Vec::new(),
            },
            egd.premise.clone(),
        )?;
        components.push(MappingComponent::boolean(yes_no));
    }

    let dom = Instance::from_named(database(schema, instance));
    let cod = Instance::from_named(cod);
    let forward = Morphism::atomic(&dom, &cod, components)?;
    let back = Morphism::view_map(&cod, &dom, closure(&dom, bound)?);
    compose(&back, &forward)
}
