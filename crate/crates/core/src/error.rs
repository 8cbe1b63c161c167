use alloc::string::String;

/// Errors raised by the gate laboratory.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("time {t} µs outside schedule domain [0, {end}] µs")]
    Domain { t: f64, end: f64 },

    #[error("invalid gate specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered: {0}")]
    Numeric(String),

    #[error("trajectory is not closed: endpoint distance {distance:.3e}")]
    OpenTrajectory { distance: f64 },

    #[error("evolution is not cyclic: |<λ|U|λ>| = {overlap:.6}")]
    NotCyclic { overlap: f64 },

    #[error("trajectory too sparse: quadrature step-halving discrepancy {discrepancy:.3e} rad")]
    TooSparse { discrepancy: f64 },

    #[error("measurement records are not informationally complete")]
    Incomplete,

    #[error("fit did not converge after {iterations} iterations (rss = {residual:.3e})")]
    FitFailed { iterations: usize, residual: f64 },

    #[error("identity fidelity is zero; corrected fidelity undefined")]
    ZeroIdentityFidelity,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
