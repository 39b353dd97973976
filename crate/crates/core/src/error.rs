use crate::relational::Tuple;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong inside the engine.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("head variable {variable} of rule `{rule}` does not occur in the body")]
    HeadVariableNotInBody { rule: String, variable: String },

    #[error("variable {variable} of rule `{rule}` is not bound by any relational atom")]
    UnsafeVariable { rule: String, variable: String },

    #[error("rule `{0}` has no relational atom in its body")]
    NoRelationalAtom(String),

    #[error("symbol `{0}` is not bound in the instance")]
    UnboundSymbol(String),

    #[error("arity mismatch for `{symbol}`: expected {expected}, found {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid algebra term: {0}")]
    InvalidTerm(String),

    #[error("cannot combine a coproduct instance with an untagged one")]
    TagMismatch,

    #[error("query over a coproduct joins relations from different components: {0}")]
    CrossComponentQuery(String),

    #[error("global symbol `{0}` has no definition")]
    MissingDefinition(String),

    #[error("duplicate definition for `{0}`")]
    DuplicateDefinition(String),

    #[error("closure cap exceeded after {rounds} rounds with {views} views")]
    CapExceeded { views: usize, rounds: usize },

    #[error("closures were computed with different bounds")]
    BoundMismatch,

    #[error("{variant} component targeting `{target}` violated by {} tuple(s)", offending.len())]
    VariantViolation {
        target: String,
        variant: String,
        offending: Vec<Tuple>,
    },

    #[error("endpoint mismatch: {0}")]
    EndpointMismatch(String),

    #[error("key violation on `{relation}`: {} and {}", witness.0, witness.1)]
    KeyViolation {
        relation: String,
        witness: (Tuple, Tuple),
    },

    #[error("chase failure: `{constraint}` equates distinct constants {} and {}", witness.0, witness.1)]
    ChaseFailure {
        constraint: String,
        witness: (crate::relational::Value, crate::relational::Value),
    },

    #[error("chase did not stabilise within {rounds} rounds")]
    RoundCapExceeded { rounds: usize },

    #[error("instance violates constraint `{0}`")]
    ConstraintViolated(String),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
}

impl Error {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}
