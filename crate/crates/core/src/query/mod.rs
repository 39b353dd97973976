//! Conjunctive rules, SPJRU algebra, query lifting and GAV unfolding.

mod algebra;
mod eval;
mod rewrite;
mod rule;

pub use algebra::{compile, eval_algebra, eval_compiled, term_arity, AlgebraTerm, Cond};
pub use eval::{eval_rule, holds_in};
pub use rewrite::{lift_query, unfold_query, GavDefinitionSet};
pub use rule::{parse_rule, parse_rules, Atom, Head, Rule, Term};

pub(crate) use eval::{for_each_match, Binding};
pub(crate) use rule::{atoms_at, rule_at, Fresh};
