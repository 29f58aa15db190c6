use thiserror::Error;

/// Errors raised by the cascata library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, got {actual}")]
    ArityMismatch { expected: usize, actual: usize },

    #[error("value `{value}` is not in the domain of coordinate `{coord}`")]
    UnknownValue { coord: String, value: String },

    #[error("unknown letter `{letter}` at position {position}")]
    UnknownLetter { letter: String, position: usize },

    #[error("the output on the empty string is undefined; input must contain at least one letter")]
    EmptyString,

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid projection: {0}")]
    InvalidProjection(String),

    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("component `{component}`: {reason}")]
    Component { component: String, reason: String },

    #[error("invalid function class: {0}")]
    InvalidClass(String),

    #[error("{what} exceeds cap: size {size} > cap {cap}")]
    CapExceeded { what: String, size: String, cap: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis not met: {0}")]
    Hypothesis(String),

    #[error("function shape error: {0}")]
    Shape(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn cap(what: impl Into<String>, size: impl ToString, cap: u64) -> Self {
        Error::CapExceeded {
            what: what.into(),
            size: size.to_string(),
            cap,
        }
    }

    pub(crate) fn component(component: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Component {
            component: component.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by a configured size cap.
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }

    /// True for errors caused by malformed input documents.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
