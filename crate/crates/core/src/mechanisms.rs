//! Closed-form profiles and Rényi curves of the Gaussian mechanism and of
//! randomized response.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::core::{DiscretePair, PrivacyProfile, RenyiCurve};
use crate::error::{Error, Result};
use crate::normal::log_sf;

/// Gaussian mechanism with κ = ‖μ − μ′‖²/(2σ²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub kappa: f64,
}

impl GaussianParams {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::DegenerateKappa(kappa));
        }
        Ok(Self { kappa })
    }
}

/// Randomized response with parameters (ε₀, δ₀).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RRParams {
    pub eps0: f64,
    pub delta0: f64,
}

impl RRParams {
    pub fn new(eps0: f64, delta0: f64) -> Result<Self> {
        if !(eps0 >= 0.0) || !eps0.is_finite() {
            return Err(Error::InvalidParameter(format!("eps0 must be finite and >= 0, got {eps0}")));
        }
        if !(0.0..=1.0).contains(&delta0) {
            return Err(Error::InvalidParameter(format!("delta0 must lie in [0, 1], got {delta0}")));
        }
        Ok(Self { eps0, delta0 })
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn gaussian_delta(kappa: f64, eps: f64) -> f64 {
    if eps == f64::INFINITY {
        return 0.0;
    }
    if eps == f64::NEG_INFINITY {
        return 1.0;
    }
    if eps < 0.0 {
        let v = gaussian_delta(kappa, -eps);
        return -eps.exp_m1() + eps.exp() * v;
    }
    let s = (2.0 * kappa).sqrt();
    let la = log_sf((eps - kappa) / s);
    let lb = log_sf((eps + kappa) / s);
    let d = eps + lb - la;
    if d >= 0.0 {
        return 0.0;
    }
    (-(la.exp()) * d.exp_m1()).clamp(0.0, 1.0)
}

/// Φ̄((ε−κ)/√(2κ)) − e^ε·Φ̄((ε+κ)/√(2κ)).
pub fn gaussian_profile(params: GaussianParams, eps: f64) -> Result<f64> {
    if !(params.kappa > 0.0) || !params.kappa.is_finite() {
        return Err(Error::DegenerateKappa(params.kappa));
    }
    Ok(gaussian_delta(params.kappa, eps))
}

/// The Gaussian profile as a curve; κ = 0 gives the floor profile.
pub fn gaussian_profile_curve(kappa: f64) -> Result<PrivacyProfile> {
    if kappa == 0.0 {
        return Ok(PrivacyProfile::floor());
    }
    let k = GaussianParams::new(kappa)?.kappa;
    let w = 10.0 * (2.0 * k).sqrt();
    Ok(PrivacyProfile::analytic(move |e| gaussian_delta(k, e), vec![], (k - w, k + w))
        .with_tails(1.0, 0.0)
        .with_symmetry())
}

/// ρ(q) = κq.
pub fn gaussian_renyi(params: GaussianParams, q: Complex64) -> Result<Complex64> {
    if q == Complex64::new(0.0, 0.0) || q == Complex64::new(1.0, 0.0) {
        return Err(Error::SingularOrder(q));
    }
    if !(params.kappa > 0.0) {
        return Err(Error::DegenerateKappa(params.kappa));
    }
    Ok(q * params.kappa)
}

/// E_q = e^{(q−1)κq}, entire in q.
pub fn gaussian_renyi_curve(kappa: f64) -> Result<RenyiCurve> {
    if kappa == 0.0 {
        return Ok(RenyiCurve::identity());
    }
    let k = GaussianParams::new(kappa)?.kappa;
    Ok(RenyiCurve::new(move |q| Ok(((q - 1.0) * q * k).exp()), (f64::NEG_INFINITY, f64::INFINITY)))
}

/// The output distributions of randomized response on inputs 0 and 1, over
/// outcomes (0,⊥), (0,⊤), (1,⊤), (1,⊥).
pub fn rr_pair(params: RRParams) -> Result<DiscretePair> {
    let RRParams { eps0, delta0 } = RRParams::new(params.eps0, params.delta0)?;
    let a = (1.0 - delta0) / (1.0 + (-eps0).exp());
    let b = (1.0 - delta0) / (1.0 + eps0.exp());
    DiscretePair::new(vec![delta0, a, b, 0.0], vec![0.0, b, a, delta0])
}

/// Three-branch randomized-response profile, left-continuous at ±ε₀.
pub fn rr_profile(params: RRParams, t: f64) -> f64 {
    let RRParams { eps0, delta0 } = params;
    if t > eps0 {
        delta0
    } else if t > -eps0 {
        // 1 − (e^t + 1)(1 − δ₀)/(e^{ε₀} + 1), arranged to avoid cancellation near t = ε₀.
        delta0 + (1.0 - delta0) * t.exp() * (eps0 - t).exp_m1() / (eps0.exp() + 1.0)
    } else {
        1.0 - t.exp() * (1.0 - delta0)
    }
}

/// The randomized-response profile as a curve with knots at ±ε₀.
pub fn rr_profile_curve(params: RRParams) -> Result<PrivacyProfile> {
    let p = RRParams::new(params.eps0, params.delta0)?;
    let knots = if p.eps0 > 0.0 { vec![-p.eps0, p.eps0] } else { vec![0.0] };
    Ok(PrivacyProfile::analytic(move |t| rr_profile(p, t), knots, (-p.eps0, p.eps0))
        .with_tails(1.0 - p.delta0, p.delta0)
        .with_symmetry())
}

fn wrap_im(z: Complex64) -> Complex64 {
    let mut im = z.im % (2.0 * PI);
    if im > PI {
        im -= 2.0 * PI;
    } else if im <= -PI {
        im += 2.0 * PI;
    }
    Complex64::new(z.re, im)
}

/// Principal log of E_q for (ε₀, 0)-randomized response.
fn rr_log_e(eps0: f64, q: Complex64) -> Complex64 {
    let t1 = -softplus(-eps0) - q * eps0;
    let t2 = -softplus(eps0) + q * eps0;
    let (m, o) = if t1.re >= t2.re { (t1, t2) } else { (t2, t1) };
    wrap_im(m + ((o - m).exp() + 1.0).ln())
}

/// ρ(q) of (ε₀, 0)-randomized response on the principal branch.
pub fn rr_renyi(eps0: f64, q: Complex64) -> Result<Complex64> {
    if q.re == 0.0 || q.re == 1.0 {
        return Err(Error::SingularOrder(q));
    }
    if !(eps0 >= 0.0) || !eps0.is_finite() {
        return Err(Error::InvalidParameter(format!("eps0 must be finite and >= 0, got {eps0}")));
    }
    Ok(rr_log_e(eps0, q) / (q - 1.0))
}

/// E_q of (ε₀, 0)-randomized response.
pub fn rr_renyi_curve(eps0: f64) -> Result<RenyiCurve> {
    RRParams::new(eps0, 0.0)?;
    Ok(RenyiCurve::new(move |q| Ok(rr_log_e(eps0, q).exp()), (f64::NEG_INFINITY, f64::INFINITY)))
}

/// Worst-case profile over all pairs satisfying an (ε₀, δ₀) point guarantee,
/// in either direction: the randomized-response profile.
pub fn dominating_profile_for_point_dp(eps0: f64, delta0: f64) -> Result<PrivacyProfile> {
    rr_profile_curve(RRParams::new(eps0, delta0)?)
}
