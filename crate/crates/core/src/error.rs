use thiserror::Error;

use crate::shift::Symbol;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid transition matrix: {0}")]
    InvalidMatrix(String),

    #[error("symbol {0} has no outgoing transition (zero row)")]
    ZeroRow(Symbol),

    #[error("symbol {0} has no incoming transition (zero column)")]
    ZeroColumn(Symbol),

    #[error("metric base {0} is outside (0, 1)")]
    MetricBase(f64),

    #[error("symbol {symbol} is outside the alphabet 0..{k}")]
    SymbolOutOfRange { symbol: Symbol, k: usize },

    #[error("forbidden transition {from} -> {to} at position {position}")]
    ForbiddenTransition {
        from: Symbol,
        to: Symbol,
        position: i64,
    },

    #[error("empty word")]
    EmptyWord,

    #[error("shift space is not primitive; a topologically mixing space is required")]
    NotPrimitive,

    #[error("block length must be at least 1")]
    ZeroBlockLength,

    #[error("potential table is missing the admissible window {0:?}")]
    MissingEntry(Vec<Symbol>),

    #[error("potential table has a superfluous entry for {0:?} (inadmissible, duplicated or wrong length)")]
    SuperfluousEntry(Vec<Symbol>),

    #[error("potential value {value} for window {word:?} is not a finite real")]
    NonFinite { word: Vec<Symbol>, value: f64 },

    #[error("word of length {actual} is too short; at least {required} symbols are needed")]
    WordTooShort { required: usize, actual: usize },

    #[error("potential depends on {past} past coordinates; apply shift_reduce to obtain a one-sided potential first")]
    TwoSidedPotential { past: usize },

    #[error("potentials live on different shift spaces")]
    SpaceMismatch,

    #[error("power iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("Perron root is not simple: starts disagree by {0:e}")]
    NotSimple(f64),

    #[error("not a stochastic pair: {0}")]
    NotStochastic(String),

    #[error("exact arithmetic unavailable: {0}")]
    ExactUnavailable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
