use thiserror::Error;

/// Errors raised by the partition, category, integration and model layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("middle colors do not match at position {position}: lower leg is {lower}, upper leg is {upper}")]
    ColorMismatch {
        position: usize,
        lower: char,
        upper: char,
    },

    #[error("middle rows have different lengths: {lower} lower legs against {upper} upper legs")]
    MiddleLengthMismatch { lower: usize, upper: usize },

    #[error("cannot rotate a leg out of an empty {0} row")]
    EmptyRow(&'static str),

    #[error("leg structures differ: ({0}, {1}) legs against ({2}, {3}) legs")]
    LegCountMismatch(usize, usize, usize, usize),

    #[error("index tuple has {got} entries, expected {expected}")]
    IndexLength { expected: usize, got: usize },

    #[error("index {index} is outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("partition has a block of odd size {0}; an even partition is required")]
    OddBlock(usize),

    #[error("{legs} legs exceed the enumeration bound of {bound}")]
    LegBound { legs: usize, bound: usize },

    #[error("monomial degree {degree} exceeds the bound of {bound}")]
    DegreeBound { degree: usize, bound: usize },

    #[error("dense map needs {cells} cells, above the bound of {bound}")]
    CellBound { cells: u128, bound: u128 },

    #[error("group has {elements} elements, above the enumeration bound of {bound}")]
    GroupBound { elements: u128, bound: u128 },

    #[error("generated category only holds partitions with at most {bound} legs, got {legs}")]
    GeneratedBound { legs: usize, bound: usize },

    #[error("no twist is defined for {0}; twisted integration accepts O, O*, U and U*")]
    TwistUnsupported(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown {kind} '{given}'; known: {known}")]
    UnknownId {
        kind: &'static str,
        given: String,
        known: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model is not integrable: {0}")]
    NonIntegrable(String),
}

impl Error {
    /// True for failures caused by a size guardrail rather than by bad input.
    pub fn is_bound_violation(&self) -> bool {
        matches!(
            self,
            Error::LegBound { .. }
                | Error::DegreeBound { .. }
                | Error::CellBound { .. }
                | Error::GroupBound { .. }
                | Error::GeneratedBound { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
