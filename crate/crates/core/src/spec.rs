//! JSON description of mechanisms and their composition.
//!
//! ```json
//! {"mechanisms": [
//!   {"point_guarantee": {"eps0": 0.1, "delta0": 1e-8}, "repeat": 100},
//!   {"subsampled": {"lambda": 0.01, "inner": {"gaussian": {"kappa": 2.0}}}}
//! ]}
//! ```
//!
//! A bare descriptor such as `{"gaussian": {"kappa": 0.5}}` is read as a
//! one-element composition.

use serde::{Deserialize, Serialize};

use crate::composition::PointGuarantee;
use crate::core::{pld_from_discrete, DiscretePair, Pld, PrivacyProfile, RenyiCurve};
use crate::error::{Error, Result};
use crate::laplace::{estimate_roc, renyi_curve_from_profile};
use crate::mechanisms::{
    dominating_profile_for_point_dp, gaussian_profile_curve, gaussian_renyi_curve, rr_pair, rr_profile_curve,
    rr_renyi_curve, GaussianParams, RRParams,
};
use crate::oracle::gaussian_grid_kernel;
use crate::subsampling::{poisson_subsample_profile, SubsampleParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Descriptor {
    Gaussian { kappa: f64 },
    RandomizedResponse { eps0: f64, delta0: f64 },
    PointGuarantee { eps0: f64, delta0: f64 },
    Subsampled { lambda: f64, inner: Box<Descriptor> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    #[serde(flatten)]
    pub descriptor: Descriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionSpec {
    pub mechanisms: Vec<Entry>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnySpec {
    Full(CompositionSpec),
    Single(Entry),
}

impl Descriptor {
    pub fn validate(&self) -> Result<()> {
        match self {
            Descriptor::Gaussian { kappa } => {
                if *kappa != 0.0 {
                    GaussianParams::new(*kappa)?;
                }
            }
            Descriptor::RandomizedResponse { eps0, delta0 } => {
                RRParams::new(*eps0, *delta0)?;
            }
            Descriptor::PointGuarantee { eps0, delta0 } => {
                PointGuarantee::new(*eps0, *delta0)?;
            }
            Descriptor::Subsampled { lambda, inner } => {
                SubsampleParams::new(*lambda)?;
                inner.validate()?;
            }
        }
        Ok(())
    }

    pub fn profile(&self) -> Result<PrivacyProfile> {
        match self {
            Descriptor::Gaussian { kappa } => gaussian_profile_curve(*kappa),
            Descriptor::RandomizedResponse { eps0, delta0 } => rr_profile_curve(RRParams::new(*eps0, *delta0)?),
            Descriptor::PointGuarantee { eps0, delta0 } => dominating_profile_for_point_dp(*eps0, *delta0),
            Descriptor::Subsampled { lambda, inner } => {
                poisson_subsample_profile(&inner.profile()?, SubsampleParams::new(*lambda)?)
            }
        }
    }

    /// Closed-form curve where one exists, otherwise the numeric transform of
    /// the profile. Fails with `EmptyRoc` when no order converges.
    pub fn renyi(&self) -> Result<RenyiCurve> {
        match self {
            Descriptor::Gaussian { kappa } => gaussian_renyi_curve(*kappa),
            Descriptor::RandomizedResponse { eps0, delta0 } | Descriptor::PointGuarantee { eps0, delta0 }
                if *delta0 == 0.0 =>
            {
                rr_renyi_curve(*eps0)
            }
            _ => {
                let prof = self.profile()?;
                if estimate_roc(&prof).is_empty() {
                    return Err(Error::EmptyRoc);
                }
                renyi_curve_from_profile(&prof)
            }
        }
    }

    pub fn point_guarantee(&self) -> Option<PointGuarantee> {
        match self {
            Descriptor::RandomizedResponse { eps0, delta0 } | Descriptor::PointGuarantee { eps0, delta0 } => {
                PointGuarantee::new(*eps0, *delta0).ok()
            }
            _ => None,
        }
    }

    /// A finite pair realizing the profile exactly, when there is one.
    pub fn discrete_pair(&self) -> Option<Result<DiscretePair>> {
        match self {
            Descriptor::RandomizedResponse { eps0, delta0 } | Descriptor::PointGuarantee { eps0, delta0 } => {
                Some(RRParams::new(*eps0, *delta0).and_then(rr_pair))
            }
            Descriptor::Subsampled { lambda, inner } => {
                let lambda = *lambda;
                inner.discrete_pair().map(|r| {
                    let pair = r?;
                    SubsampleParams::new(lambda)?;
                    let p = pair.p().iter().zip(pair.q()).map(|(p, q)| lambda * p + (1.0 - lambda) * q).collect();
                    DiscretePair::new(p, pair.q().to_vec())
                })
            }
            Descriptor::Gaussian { .. } => None,
        }
    }

    /// PLD used by the grid oracle: exact atoms for finite pairs, a sampled
    /// density on the lattice of `step` for the Gaussian.
    pub fn oracle_pld(&self, step: f64) -> Result<Pld> {
        if let Some(pair) = self.discrete_pair() {
            return Ok(pld_from_discrete(&pair?));
        }
        match self {
            Descriptor::Gaussian { kappa } if *kappa == 0.0 => Ok(Pld::point_mass(0.0)),
            Descriptor::Gaussian { kappa } => gaussian_grid_kernel(*kappa, step, 40.0),
            _ => Err(Error::InvalidParameter("no oracle distribution for this mechanism".into())),
        }
    }
}

impl Entry {
    pub fn count(&self) -> u32 {
        self.repeat.unwrap_or(1)
    }
}

impl CompositionSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec = match serde_json::from_str::<AnySpec>(text) {
            Ok(AnySpec::Full(s)) => s,
            Ok(AnySpec::Single(e)) => CompositionSpec { mechanisms: vec![e] },
            Err(e) => return Err(Error::InvalidParameter(format!("unreadable spec: {e}"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mechanisms.is_empty() {
            return Err(Error::InvalidParameter("spec lists no mechanisms".into()));
        }
        for e in &self.mechanisms {
            if e.repeat == Some(0) {
                return Err(Error::InvalidParameter("repeat must be at least 1".into()));
            }
            e.descriptor.validate()?;
        }
        Ok(())
    }

    /// Mechanisms in order, repeats expanded.
    pub fn expanded(&self) -> Vec<Descriptor> {
        self.mechanisms
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.descriptor.clone(), e.count() as usize))
            .collect()
    }

    /// The lone descriptor of a one-mechanism spec.
    pub fn single(&self) -> Result<&Descriptor> {
        match self.mechanisms.as_slice() {
            [e] if e.count() == 1 => Ok(&e.descriptor),
            _ => Err(Error::InvalidParameter("expected a single mechanism".into())),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}
