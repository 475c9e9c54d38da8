//! Poisson subsampling on privacy profiles. The operator acts in the remove
//! direction (P = λP_IN + (1−λ)Q against Q); the add direction is its reversal.

use crate::core::{reverse_profile, PrivacyProfile};
use crate::error::{Error, Result};

/// Selection probability λ ∈ (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsampleParams {
    pub lambda: f64,
}

impl SubsampleParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidParameter(format!("lambda must lie in (0, 1], got {lambda}")));
        }
        Ok(Self { lambda })
    }
}

/// log(1 + (e^ε − 1)/λ), the inner argument of the amplified profile.
fn inner_eps(eps: f64, lambda: f64) -> f64 {
    if eps > 30.0 {
        // e^ε dominates; avoid overflow in expm1.
        return eps - lambda.ln() + ((lambda - 1.0) * (-eps).exp()).ln_1p();
    }
    (eps.exp_m1() / lambda).ln_1p()
}

/// ε ↦ log(1 + λ(e^ε − 1)), mapping inner knots to outer ones.
fn outer_eps(t: f64, lambda: f64) -> f64 {
    if t > 30.0 {
        return t + lambda.ln() + (((1.0 - lambda) / lambda) * (-t).exp()).ln_1p();
    }
    (lambda * t.exp_m1()).ln_1p()
}

/// ε ↦ λ·δ_in(log(1 + (e^ε − 1)/λ)) for ε > log(1 − λ), and 1 − e^ε otherwise.
pub fn poisson_subsample_profile(prof_in: &PrivacyProfile, params: SubsampleParams) -> Result<PrivacyProfile> {
    let lambda = SubsampleParams::new(params.lambda)?.lambda;
    if lambda == 1.0 {
        return Ok(prof_in.clone());
    }
    let brk = (-lambda).ln_1p();
    let inner = prof_in.clone();
    let f = move |e: f64| {
        if e <= brk {
            -e.exp_m1()
        } else {
            lambda * inner.eval(inner_eps(e, lambda))
        }
    };
    let mut knots: Vec<f64> = prof_in.knots().iter().map(|&k| outer_eps(k, lambda)).collect();
    knots.push(brk);
    let hi = prof_in.window().1;
    // Only ε ≤ log(1 − λ) is guaranteed to follow 1 − e^ε exactly.
    let window = (brk, outer_eps(hi, lambda).max(brk));
    let right = lambda * prof_in.limit_pos_inf();
    Ok(PrivacyProfile::analytic(f, knots, window).with_tails(1.0, right))
}

/// The add-direction curve δ_{Q|P}, obtained by reversing the subsampled curve.
pub fn subsampled_reverse_profile(prof_in: &PrivacyProfile, params: SubsampleParams) -> Result<PrivacyProfile> {
    Ok(reverse_profile(&poisson_subsample_profile(prof_in, params)?))
}

/// max(δ_{P|Q}(ε), δ_{Q|P}(ε)) for the subsampled mechanism.
pub fn pointwise_two_sided_guarantee(prof_in: &PrivacyProfile, params: SubsampleParams, eps: f64) -> Result<f64> {
    let fwd = poisson_subsample_profile(prof_in, params)?;
    let rev = reverse_profile(&fwd);
    Ok(fwd.eval(eps).max(rev.eval(eps)))
}
