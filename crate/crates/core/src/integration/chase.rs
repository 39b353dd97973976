//! The chase with marked nulls, and its finite stopping point.

use std::collections::{BTreeMap, BTreeSet};

use super::answers::retrieve_global;
use super::schema::{Egd, Schema, Tgd};
use super::system::GlavSystem;
use crate::error::{Error, Result};
use crate::query::{eval_rule, for_each_match, Atom, Binding, Term};
use crate::relational::{Instance, NullAllocator, Relation, Tuple, Value};

pub(crate) type Db = BTreeMap<String, Relation>;

pub const DEFAULT_MAX_ROUNDS: usize = 1000;

/// Source database, current global database and chase bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChaseState {
    source: Instance,
    db: Db,
    round: usize,
    frontier: Vec<(String, Tuple)>,
    nulls: NullAllocator,
}

impl ChaseState {
    /// `⟨I, J⟩` with `J` given by name. Null ids continue after those used.
    pub fn new(source: Instance, target: BTreeMap<String, Relation>) -> Self {
        let nulls = NullAllocator::after(
            source
                .relations()
                .flat_map(|r| r.relation.values())
                .chain(target.values().flat_map(Relation::values)),
        );
        ChaseState {
            source,
            db: target,
            round: 0,
            frontier: Vec::new(),
            nulls,
        }
    }

    pub fn source(&self) -> &Instance {
        &self.source
    }

    pub fn target(&self) -> Instance {
        Instance::from_named(self.db.clone())
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.db.get(name)
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Tuples added by the last round.
    pub fn frontier(&self) -> &[(String, Tuple)] {
        &self.frontier
    }

    /// The next null id to be handed out.
    pub fn next_null(&self) -> u64 {
        self.nulls.peek()
    }
}

fn lookup<'a>(db: &'a Db) -> impl FnMut(&str, usize) -> Result<&'a Relation> {
    move |symbol, arity| {
        let rel = db
            .get(symbol)
            .ok_or_else(|| Error::UnboundSymbol(symbol.to_string()))?;
        if rel.arity() != arity && !rel.is_empty() {
            return Err(Error::ArityMismatch {
                symbol: symbol.to_string(),
                expected: rel.arity(),
                found: arity,
            });
        }
        Ok(rel)
    }
}

fn matches(atoms: &[Atom], db: &Db) -> Result<Vec<Binding>> {
    let mut out = Vec::new();
    for_each_match(atoms, lookup(db), |b| {
        out.push(b.clone());
        Ok(true)
    })?;
    out.sort();
    out.dedup();
    Ok(out)
}

fn has_match(atoms: &[Atom], db: &Db) -> Result<bool> {
    let mut found = false;
    for_each_match(atoms, lookup(db), |_| {
        found = true;
        Ok(false)
    })?;
    Ok(found)
}

fn bind(atoms: &[Atom], b: &Binding) -> Vec<Atom> {
    atoms
        .iter()
        .map(|a| {
            a.map_terms(|t| match t {
                Term::Var(v) => b.get(v).map_or_else(|| t.clone(), |x| Term::Const(x.clone())),
                c => c.clone(),
            })
        })
        .collect()
}

/// Adds `atoms` (relational, variables bound by `b` or fresh) unless some
/// extension of `b` already satisfies them.
fn satisfy(atoms: &[Atom], b: &Binding, db: &mut Db, nulls: &mut NullAllocator) -> Result<()> {
    let bound = bind(atoms, b);
    if has_match(&bound, db)? {
        return Ok(());
    }
    let mut fresh: BTreeMap<String, Value> = BTreeMap::new();
    for a in &bound {
        let Atom::Relational { symbol, args } = a else {
            continue;
        };
        let values = args
            .iter()
            .map(|t| match t {
                Term::Const(v) => v.clone(),
                Term::Var(v) => fresh.entry(v.clone()).or_insert_with(|| nulls.fresh()).clone(),
            })
            .collect();
        let rel = db
            .get_mut(symbol)
            .ok_or_else(|| Error::UnboundSymbol(symbol.clone()))?;
        rel.insert(Tuple::new(values))?;
    }
    Ok(())
}

/// Egds in application order: the schema's own, then one per non-key
/// column of each key, each group sorted by text.
pub(crate) fn egds_of(schema: &Schema) -> Vec<Egd> {
    let mut own: Vec<Egd> = schema.egds().to_vec();
    own.sort_by_key(ToString::to_string);
    let mut keys: Vec<Egd> = schema.key_egds().into_iter().map(|(_, e)| e).collect();
    keys.sort_by_key(ToString::to_string);
    own.extend(keys);
    own
}

/// Tgds in application order, sorted by text.
fn tgds_of(schema: &Schema) -> Vec<Tgd> {
    let mut tgds = schema.tgds().to_vec();
    tgds.sort_by_key(ToString::to_string);
    tgds
}

/// One application of every rule: foreign keys, then tgds, then egds. Each
/// rule sees what earlier rules of the same round added.
pub fn chase_round(state: &ChaseState, schema: &Schema) -> Result<ChaseState> {
    let mut db = state.db.clone();
    let mut nulls = state.nulls.clone();
    for (name, arity) in schema.relations() {
        db.entry(name.to_string()).or_insert_with(|| Relation::empty(arity));
    }

    let mut fks = schema.fks().to_vec();
    fks.sort();
    for fk in &fks {
        let to_arity = schema.arity(&fk.to)?;
        let wanted = db[&fk.from].project(&fk.from_cols)?;
        let mut present: BTreeSet<Tuple> = db[&fk.to].project(&fk.to_cols)?.iter().cloned().collect();
        for t in wanted.iter() {
            if present.contains(t) {
                continue;
            }
            let values = (0..to_arity)
                .map(|j| match fk.to_cols.iter().position(|&c| c == j) {
                    Some(p) => t.values()[p].clone(),
                    None => nulls.fresh(),
                })
                .collect();
            db.get_mut(&fk.to)
                .expect("declared")
                .insert(Tuple::new(values))?;
            present.insert(t.clone());
        }
    }

    for tgd in tgds_of(schema) {
        for b in matches(&tgd.premise, &db)? {
            satisfy(&tgd.conclusion, &b, &mut db, &mut nulls)?;
        }
    }

    for egd in egds_of(schema) {
        apply_egd(&egd, &mut db)?;
    }

    let frontier = db
        .iter()
        .flat_map(|(name, rel)| {
            let before = state.db.get(name);
            rel.iter()
                .filter(move |t| before.is_none_or(|r| !r.contains(t)))
                .map(move |t| (name.clone(), t.clone()))
        })
        .collect();
    Ok(ChaseState {
        source: state.source.clone(),
        db,
        round: state.round + 1,
        frontier,
        nulls,
    })
}

/// Equates values until no premise match disagrees. Two distinct constants
/// mean the chase fails.
fn apply_egd(egd: &Egd, db: &mut Db) -> Result<()> {
    loop {
        let mut clash = None;
        for_each_match(&egd.premise, lookup(db), |b| {
            let (l, r) = (&b[&egd.left], &b[&egd.right]);
            if l != r {
                clash = Some((l.clone(), r.clone()));
                return Ok(false);
            }
            Ok(true)
        })?;
        let Some((l, r)) = clash else {
            return Ok(());
        };
        let (from, to) = match (&l, &r) {
            (Value::Const(_), Value::Const(_)) => {
                return Err(Error::ChaseFailure {
                    constraint: egd.to_string(),
                    witness: (l, r),
                })
            }
            (Value::Null(_), Value::Const(_)) => (l, r),
            (Value::Const(_), Value::Null(_)) => (r, l),
            // the higher id goes
            (Value::Null(a), Value::Null(b)) => {
                if a > b {
                    (l, r)
                } else {
                    (r, l)
                }
            }
        };
        for rel in db.values_mut() {
            *rel = rel.map_values(|v| if *v == from { to.clone() } else { v.clone() });
        }
    }
}

/// Why [`chase`] stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// A round added nothing.
    Fixpoint,
    /// A round added only tuples made of marked nulls.
    NullFrontier,
}

/// Iterates [`chase_round`] from `state` until a round adds nothing or
/// adds only all-null tuples (kept in the result).
pub fn chase(mut state: ChaseState, schema: &Schema, max_rounds: usize) -> Result<(ChaseState, Stop)> {
    loop {
        if state.round >= max_rounds {
            return Err(Error::RoundCapExceeded { rounds: state.round });
        }
        state = chase_round(&state, schema)?;
        if state.frontier.is_empty() {
            return Ok((state, Stop::Fixpoint));
        }
        if state.frontier.iter().all(|(_, t)| t.is_all_null()) {
            return Ok((state, Stop::NullFrontier));
        }
    }
}

/// The starting state for a system: the retrieved global database of the
/// GAV definitions, then every assertion applied once as a
/// source-to-target dependency.
pub fn seed(source: &Instance, system: &GlavSystem) -> Result<ChaseState> {
    let mut db: Db = system
        .global_arities()?
        .into_iter()
        .map(|(n, a)| (n, Relation::empty(a)))
        .collect();
    if !system.gav.is_empty() {
        let ret = retrieve_global(&system.gav, source, &system.target)?;
        for (name, rel) in ret.names() {
            db.insert(name.to_string(), rel.relation.clone());
        }
    }
    let mut state = ChaseState::new(source.clone(), db);
    for a in &system.assertions {
        let answers = eval_rule(&a.source, source)?;
        for t in answers.iter() {
            let mut b = Binding::new();
            for (v, x) in a.target.head_vars().iter().zip(t.values()) {
                if let Some(prev) = b.insert(v.clone(), x.clone()) {
                    if prev != *x {
                        return Err(Error::ChaseFailure {
                            constraint: a.to_string(),
                            witness: (prev, x.clone()),
                        });
                    }
                }
            }
            satisfy(a.target.body(), &b, &mut state.db, &mut state.nulls)?;
        }
    }
    Ok(state)
}

/// The finite canonical database of `system` over `source`.
pub fn chase_fixpoint(source: &Instance, system: &GlavSystem, max_rounds: usize) -> Result<Instance> {
    let (state, _) = chase(seed(source, system)?, &system.target, max_rounds)?;
    Ok(state.target())
}
