use thiserror::Error;

use crate::quadham::Monomial;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid too coarse: cutoff {cutoff} needs at least {required} points per dimension, got {got}")]
    GridTooCoarse {
        cutoff: u32,
        required: usize,
        got: usize,
    },

    #[error("sample count {got} does not match a {dim}-dimensional grid of side {side}")]
    GridShape { dim: usize, side: usize, got: usize },

    #[error("point with |Im θ| = {im} lies outside the strip of half-width {width}")]
    OutsideStrip { im: f64, width: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("class mismatch: {0}")]
    ClassMismatch(String),

    #[error("resonant divisor |{modulus:.3e}| below threshold {threshold:.3e} at k = {k:?} for monomial {monomial}")]
    Resonance {
        k: Vec<i32>,
        monomial: Monomial,
        modulus: f64,
        threshold: f64,
    },

    #[error("consistency failure in {what}: discrepancy {discrepancy:.3e} exceeds {tolerance:.3e}")]
    Consistency {
        what: String,
        discrepancy: f64,
        tolerance: f64,
    },

    #[error("matrix logarithm: {0}")]
    LogBranch(String),

    #[error("Fourier transport did not resolve within {max_grid} points per dimension (tail {tail:.3e})")]
    Unresolved { max_grid: usize, tail: f64 },

    #[error("symplectic defect {defect:.3e} exceeded {limit:.1e} at t = {t}; reduce dt")]
    StepSize { defect: f64, limit: f64, t: f64 },

    #[error("degenerate slow frequency: |2ν₂| = {value:.3e} below {threshold:.3e}")]
    Degenerate { value: f64, threshold: f64 },

    #[error("window too short: {0}")]
    WindowTooShort(String),
}

pub type Result<T> = std::result::Result<T, Error>;
