//! Values, tuples, relations and instances.

mod facts;
mod instance;
mod relation;
mod value;

pub use facts::{parse_facts, write_facts};
pub use instance::{
    combine, instances_equal, CombineMode, Instance, Side, Tag, TaggedRelation, Universe,
};
pub use relation::{Relation, Tuple};
pub use value::{NullAllocator, Value};

