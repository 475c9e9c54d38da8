use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the accounting routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kappa must be positive, got {0}")]
    DegenerateKappa(f64),

    #[error("Rényi order {} is singular", fmt_complex(.0))]
    SingularOrder(Complex64),

    #[error("transform diverges: {0}")]
    Divergence(String),

    #[error("region of convergence is empty")]
    EmptyRoc,

    #[error("invalid privacy loss distribution: {0}")]
    InvalidPld(String),

    #[error("integral did not converge: {0}")]
    NonConvergence(String),

    #[error("kernel reproduces the profile with sup-norm error {0:e}")]
    Reconstruction(f64),

    #[error("atom book holds {atoms} atoms, above the cap of {cap}")]
    BookOverflow { atoms: usize, cap: usize },

    #[error("product support of {size} outcomes exceeds the cap of {cap}")]
    SupportOverflow { size: usize, cap: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("budget {budget:e} unattainable: delta({eps}) = {delta:e}")]
    NoCrossing { eps: f64, delta: f64, budget: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

fn fmt_complex(z: &Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}
