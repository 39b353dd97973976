//! Instances, view-based mappings between them, and a chase-based data
//! integration engine.
//!
//! The crate is organised bottom-up:
//!
//! * [`relational`]: values, relations, instances and fact files;
//! * [`query`]: conjunctive rules, SPJRU algebra terms, lifting and unfolding;
//! * [`power_view`]: bounded view closures and the orders they induce;
//! * [`category`]: mapping morphisms, flux, composition and constructions;
//! * [`integration`]: schemas, constraints, the chase and certain answers.

pub mod category;
pub mod error;
pub mod integration;
pub mod power_view;
pub mod query;
pub mod relational;
pub(crate) mod syntax;

pub use error::{Error, Result};
