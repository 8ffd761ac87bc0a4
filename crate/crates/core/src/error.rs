use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} cap exceeded: {size} > {cap}")]
    CapExceeded { what: &'static str, size: u128, cap: u128 },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("line {line}: undefined variable `{name}`")]
    UndefinedVariable { line: usize, name: String },

    #[error("line {line}: duplicate definition of `{name}`")]
    DuplicateDefinition { line: usize, name: String },

    #[error("mode probabilities must be positive and sum to 1 (got {sum})")]
    Probability { sum: f64 },

    #[error("node `{node}` has arity {arity}, above the cap of {cap}")]
    ArityCap { node: String, arity: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("not structurally controllable: {0}")]
    NotControllable(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_cap(what: &'static str, size: u128, cap: u128) -> Result<()> {
    if size > cap {
        Err(Error::CapExceeded { what, size, cap })
    } else {
        Ok(())
    }
}
