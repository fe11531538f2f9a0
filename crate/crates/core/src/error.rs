use thiserror::Error;

/// Errors raised by the physical models and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("bessel evaluation disagrees between series and asymptotic forms at |z| = {abs_z:.3} (relative gap {gap:.2e})")]
    Accuracy { abs_z: f64, gap: f64 },

    #[error("singular boundary value: {0}")]
    Singularity(String),

    #[error("grid refinement error estimate {estimate:.2e} exceeds {limit:.1e}")]
    Convergence { estimate: f64, limit: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("bracket [{lo:.6e}, {hi:.6e}] does not contain a sign change")]
    Bracket { lo: f64, hi: f64 },

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("temperature {temperature:.2} K outside valid range [{min:.1}, {max:.1}] K")]
    Range { temperature: f64, min: f64, max: f64 },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("solver did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("target unreachable: {0}")]
    UnreachableTarget(String),

    #[error("infeasible target: {0}")]
    Infeasible(String),

    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {value}")))
    }
}
