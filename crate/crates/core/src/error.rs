use std::path::PathBuf;

use crate::funcrep::ParseError;

/// Everything that can go wrong while building or checking a solution.
///
/// Variants fall into two groups: operational failures (bad input files,
/// evaluation outside a sampled domain, ...) and admissibility rejections,
/// where the mathematics says the requested problem cannot be solved by the
/// construction (irrational time/period ratio, resonance, ordering, ...).
/// [`Error::is_admissibility`] tells them apart.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("x = {x} lies outside the sampled domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("derivative order {0} is not supported (expected 0..=3)")]
    DerivativeOrder(u8),

    #[error("function is not {period}-periodic: |f(x) - f(x + L)| = {defect:e} at x = {x}")]
    NotPeriodic { period: f64, x: f64, defect: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad CSV in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("2T/L = {value} is not recognised as a rational number (denominator bound {max_denominator})")]
    IrrationalRatio { value: f64, max_denominator: u64 },

    #[error("2T/L = {ratio} is an integer; terminal data obstructed with residual {residual:e}")]
    ResonantRatio { ratio: i64, residual: f64 },

    #[error("resonant Fourier modes cannot reach the terminal profile (mismatch {mismatch:e} > {tolerance:e})")]
    ResonantModeMismatch { mismatch: f64, tolerance: f64 },

    #[error("Fourier tail bound {tail:e} still above tolerance {tolerance:e} at K = {cap}")]
    TailNotConverged { tail: f64, tolerance: f64, cap: usize },

    #[error("compatibility conditions violated: {0}")]
    Compatibility(String),

    #[error("ordering inf f > sup g violated near x = {x}: f = {f_value}, g = {g_value}")]
    OrderingViolated { x: f64, f_value: f64, g_value: f64 },

    #[error("nonnegativity condition on the reduced target fails at x = {x} (partial sum {sum:e})")]
    NonnegConditionFailed { x: f64, sum: f64 },

    #[error("no nonnegative seed satisfying the moment conditions was found (best minimum {best_min:e})")]
    NoNonnegativeSeed { best_min: f64 },

    #[error("linear solution lost positivity at (t, x) = ({t}, {x}): z = {z:e}")]
    PositivityLost { t: f64, x: f64, z: f64 },

    #[error("CFL condition violated: lambda = {0} > 1")]
    Cfl(f64),

    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
}

impl Error {
    /// True for rejections that come from the mathematics of the problem
    /// rather than from I/O or malformed input.
    pub fn is_admissibility(&self) -> bool {
        matches!(
            self,
            Error::IrrationalRatio { .. }
                | Error::ResonantRatio { .. }
                | Error::ResonantModeMismatch { .. }
                | Error::TailNotConverged { .. }
                | Error::Compatibility(_)
                | Error::OrderingViolated { .. }
                | Error::NonnegConditionFailed { .. }
                | Error::NoNonnegativeSeed { .. }
                | Error::PositivityLost { .. }
        )
    }

    /// Stable machine-readable reason code, used in manifests.
    pub fn reason(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse-error",
            Error::OutOfDomain { .. } => "out-of-domain",
            Error::DerivativeOrder(_) => "derivative-order",
            Error::NotPeriodic { .. } => "not-periodic",
            Error::InvalidInput(_) => "invalid-input",
            Error::Io { .. } => "io-error",
            Error::Csv { .. } => "csv-error",
            Error::IrrationalRatio { .. } => "irrational-ratio",
            Error::ResonantRatio { .. } => "resonance-obstruction",
            Error::ResonantModeMismatch { .. } => "resonant-mode-obstruction",
            Error::TailNotConverged { .. } => "tail-not-converged",
            Error::Compatibility(_) => "compatibility-failure",
            Error::OrderingViolated { .. } => "ordering-violation",
            Error::NonnegConditionFailed { .. } => "nonnegativity-condition",
            Error::NoNonnegativeSeed { .. } => "no-nonnegative-seed",
            Error::PositivityLost { .. } => "positivity-lost",
            Error::Cfl(_) => "cfl-violation",
            Error::OutOfRange { .. } => "out-of-range",
        }
    }

    /// Numeric residual attached to the rejection, when there is one.
    pub fn residual(&self) -> Option<f64> {
        match self {
            Error::ResonantRatio { residual, .. } => Some(*residual),
            Error::ResonantModeMismatch { mismatch, .. } => Some(*mismatch),
            Error::TailNotConverged { tail, .. } => Some(*tail),
            Error::NonnegConditionFailed { sum, .. } => Some(*sum),
            Error::NoNonnegativeSeed { best_min } => Some(*best_min),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_range(what: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    // tiny slack so that t = T computed as k * dt still counts as inside
    let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    if value.is_nan() || value < lo - slack || value > hi + slack {
        Err(Error::OutOfRange { what, value, lo, hi })
    } else {
        Ok(())
    }
}
