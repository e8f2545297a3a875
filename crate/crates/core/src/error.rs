use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,

    #[error("variable count mismatch: {left} vs {right}")]
    NvarsMismatch { left: usize, right: usize },

    #[error("variable index {index} out of range for {nvars} variables")]
    VarOutOfRange { index: usize, nvars: usize },

    #[error("too many variables: {0} (at most 64 coordinates are supported)")]
    TooManyVars(usize),

    #[error("degree underflow: cannot contract degree {inner} into degree {outer}")]
    DegreeUnderflow { inner: usize, outer: usize },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("indices not strictly increasing: {0:?}")]
    IndicesNotIncreasing(Vec<usize>),

    #[error("context mismatch: {0}")]
    ContextMismatch(String),

    #[error("incompatible fiber model for bracket {bracket}: {reason}")]
    IncompatibleFiber { bracket: String, reason: String },

    #[error("unknown bracket {0:?}")]
    UnknownBracket(String),

    #[error("not linear: offending term {witness}")]
    NotLinear { witness: String },

    #[error("not a linear form: offending term {witness}")]
    NotLinearForm { witness: String },

    #[error("reality constraint violated at frequency {0:?}")]
    RealityViolated((i64, i64)),

    #[error("bracket fails the second-slot Leibniz rule: {0}")]
    NotLeibniz(String),

    #[error("bracket is not a Dorfman bracket; Jacobiator witness {0}")]
    NotDorfman(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
