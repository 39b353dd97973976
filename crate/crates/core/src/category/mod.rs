//! Morphisms between instances: view-mapping components, composition
//! trees, information flux and the constructions built on it.

mod component;
mod dot;
mod mapfile;
mod morphism;
mod trees;

pub use component::{MappingComponent, Variant};
pub use dot::export_dot;
pub use mapfile::{parse_map, parse_translation};
pub use morphism::{compose, copair, pullback, sum, Classification, Morphism, Pullback};
pub use trees::Link;
