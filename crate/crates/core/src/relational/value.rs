use std::fmt;
use std::sync::Arc;

/// A domain constant or a marked (labeled) null.
///
/// Constants and nulls live in disjoint spaces. Nulls compare by id, so a
/// null joins only with itself.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Const(Arc<str>),
    Null(u64),
}

impl Value {
    pub fn constant(token: impl AsRef<str>) -> Self {
        Value::Const(Arc::from(token.as_ref()))
    }

    pub fn null(id: u64) -> Self {
        Value::Null(id)
    }

    /// `Val(v)`: true only for domain constants.
    pub fn is_const(&self) -> bool {
        matches!(self, Value::Const(_))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null(_))
    }

    pub fn null_id(&self) -> Option<u64> {
        match self {
            Value::Null(id) => Some(*id),
            Value::Const(_) => None,
        }
    }
}

/// Constants that look like `[a-z0-9][A-Za-z0-9_]*` print bare, everything
/// else is quoted.
pub(crate) fn is_bare_token(token: &str) -> bool {
    let mut chars = token.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null(id) => write!(f, "#{id}"),
            Value::Const(token) if is_bare_token(token) => f.write_str(token),
            Value::Const(token) => {
                f.write_str("\"")?;
                for c in token.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

/// Hands out fresh null ids, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NullAllocator {
    next: u64,
}

impl NullAllocator {
    /// Starts after the largest id in `existing` (or at 1).
    pub fn after<'a>(existing: impl IntoIterator<Item = &'a Value>) -> Self {
        let max = existing
            .into_iter()
            .filter_map(Value::null_id)
            .max()
            .unwrap_or(0);
        NullAllocator { next: max + 1 }
    }

    pub fn fresh(&mut self) -> Value {
        let id = self.next;
        self.next += 1;
        Value::Null(id)
    }

    /// The id the next call to [`fresh`](Self::fresh) will return.
    pub fn peek(&self) -> u64 {
        self.next
    }
}

impl Default for NullAllocator {
    fn default() -> Self {
        NullAllocator { next: 1 }
    }
}
