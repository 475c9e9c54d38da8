//! Domain types and the algebra shared by every accountant: discrete pairs,
//! privacy profiles, privacy loss distributions, Rényi curves and trade-off curves.

pub mod discrete;
pub mod pld;
pub mod profile;
pub mod renyi;
pub mod tradeoff;

pub use discrete::{discrete_profile, profile_from_discrete, DiscretePair};
pub use pld::{pld_from_discrete, profile_from_pld, renyi_from_pld, reverse_pld, Pld, PldGrid, ATOM_MERGE_TOL};
pub use profile::{floor_delta, reverse_profile, PrivacyProfile, ProfileKind};
pub use renyi::{rho_from_e, RenyiCurve};
pub use tradeoff::{check_tradeoff_reversal, tradeoff_from_discrete, tradeoff_inverse};

use crate::error::{Error, Result};

/// A single (ε, δ) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsDelta {
    pub epsilon: f64,
    pub delta: f64,
}

impl EpsDelta {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be finite, got {epsilon}")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("delta must lie in [0, 1], got {delta}")));
        }
        Ok(Self { epsilon, delta })
    }
}
