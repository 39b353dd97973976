//! Data integration: schemas with constraints, GLAV systems, the chase,
//! certain answers and the morphisms a system induces.

mod answers;
mod chase;
mod constraints;
mod glav;
mod schema;
mod system;

pub use answers::{certain_answers, retrieve_global};
pub use chase::{chase, chase_fixpoint, chase_round, seed, ChaseState, Stop, DEFAULT_MAX_ROUNDS};
pub use constraints::{check_constraints, constraint_morphism, ConstraintCheck, ConstraintReport};
pub use glav::{glav_decompose, GlavDecomposition};
pub use schema::{parse_schema, Egd, ForeignKey, Schema, Tgd};
pub use system::{parse_glav, Assertion, GlavSystem};
