//! Bilateral Laplace transform of privacy profiles (profile → Rényi), its
//! Bromwich inverse (Rényi → profile), and a numerical region-of-convergence probe.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::core::{reverse_profile, PrivacyProfile, RenyiCurve};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

const C_ONE_TOL: f64 = 1e-9;
const BETA_TOL: f64 = 1e-15;
const TAIL_REACH: f64 = 5000.0;

/// Contour and accuracy settings for [`profile_from_renyi`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BromwichConfig {
    /// Abscissa Re(s) of the vertical contour; Re(q) = 1 − gamma.
    pub gamma: f64,
    /// Initial truncation of the ω range; doubled until the result settles.
    pub omega_max: f64,
    pub quad_tol: f64,
}

impl Default for BromwichConfig {
    fn default() -> Self {
        Self { gamma: -1.0, omega_max: 64.0, quad_tol: 1e-8 }
    }
}

impl BromwichConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() || self.gamma == 0.0 || self.gamma == 1.0 {
            return Err(Error::InvalidParameter(format!("gamma must avoid 0 and 1, got {}", self.gamma)));
        }
        if !(self.omega_max >= 10.0) || !self.omega_max.is_finite() {
            return Err(Error::InvalidParameter(format!("omega_max must be >= 10, got {}", self.omega_max)));
        }
        if !(self.quad_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("quad_tol must be positive, got {}", self.quad_tol)));
        }
        Ok(())
    }
}

/// An open interval (lo, hi) of Re(s); empty when lo >= hi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Roc {
    pub lo: f64,
    pub hi: f64,
}

impl Roc {
    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    /// The matching strip of Rényi orders under q = 1 − s.
    pub fn to_order_strip(&self) -> (f64, f64) {
        (1.0 - self.hi, 1.0 - self.lo)
    }
}

fn fwd_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-16, rel_tol: 1e-13, max_panels: 4000 }
}

/// B{δ}(s) = ∫ e^{−st} δ(t) dt.
///
/// Left of the window the profile is exactly 1 − c·e^t and that piece is
/// added in closed form; for c = 1 the closed form continues the transform
/// analytically to Re(s) > 0. A residual mass β = δ(+∞) is likewise handled
/// analytically when Re(s) > 0.
pub fn bilateral_laplace_of_profile(prof: &PrivacyProfile, s: Complex64) -> Result<Complex64> {
    if !s.re.is_finite() || !s.im.is_finite() {
        return Err(Error::InvalidParameter(format!("s must be finite, got {s}")));
    }
    if s == Complex64::new(0.0, 0.0) || s == Complex64::new(1.0, 0.0) {
        return Err(Error::SingularOrder(1.0 - s));
    }
    let (lo, hi) = prof.window();
    let c = prof.left_tail_constant();
    let beta = prof.limit_pos_inf();
    if s.re >= 0.0 && (c - 1.0).abs() > C_ONE_TOL {
        return Err(Error::Divergence(format!(
            "left tail 1 - {c}·e^t does not converge at Re(s) = {}",
            s.re
        )));
    }
    if s.re <= 0.0 && beta > BETA_TOL {
        return Err(Error::Divergence(format!(
            "right tail tends to {beta:e} and does not converge at Re(s) = {}",
            s.re
        )));
    }
    let l = lo - 1.0;
    let r = hi + 1.0;
    let one = Complex64::new(1.0, 0.0);
    let left = -(-s * l).exp() / s - c * ((one - s) * l).exp() / (one - s);

    let mut breaks: Vec<f64> = prof.knots().to_vec();
    let mut x = l + 1.0;
    while x < r {
        breaks.push(x);
        x += 1.0;
    }
    // Oscillatory integrands cancel; what is attainable is a small multiple
    // of the integral of |e^{−st}·δ(t)|, so the absolute target scales with it.
    let opts = if s.im == 0.0 {
        fwd_opts()
    } else {
        let loose = QuadOptions { abs_tol: 0.0, rel_tol: 1e-6, max_panels: 400 };
        let scale = integrate(|t| (-s.re * t).exp() * prof.eval(t), l, r, &breaks, loose).value;
        QuadOptions { abs_tol: fwd_opts().abs_tol.max(1e-13 * scale), ..fwd_opts() }
    };
    let mid = integrate(|t| (-s * t).exp() * prof.eval(t), l, r, &breaks, opts);
    let sub = if beta > BETA_TOL { beta } else { 0.0 };
    let mut total = left + mid.value;
    if sub > 0.0 {
        total += sub * (-s * r).exp() / s;
    }

    let mut a = r;
    let mut w = 1.0;
    let mut quiet = 0;
    loop {
        let chunk = integrate(|t| (-s * t).exp() * (prof.eval(t) - sub), a, a + w, &[], opts).value;
        total += chunk;
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Divergence(format!("right tail overflows at Re(s) = {}", s.re)));
        }
        if chunk.norm() <= 1e-16 * total.norm() || chunk.norm() < 1e-300 {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        a += w;
        w = (2.0 * w).min(8.0);
        if a - r > TAIL_REACH {
            return Err(Error::Divergence(format!("right tail does not decay at Re(s) = {}", s.re)));
        }
    }
    Ok(total)
}

/// E_q = q(q − 1)·B{δ}(1 − q). Orders with Re(q) < 1/2 are evaluated as
/// E_{1−q} of the reversed profile, which keeps the transform abscissa negative.
pub fn renyi_from_profile(prof: &PrivacyProfile, q: Complex64) -> Result<Complex64> {
    if q == Complex64::new(0.0, 0.0) || q == Complex64::new(1.0, 0.0) {
        return Err(Error::SingularOrder(q));
    }
    let k = q * (q - 1.0);
    if q.re < 0.5 {
        let rev = reverse_profile(prof);
        return Ok(k * bilateral_laplace_of_profile(&rev, q)?);
    }
    Ok(k * bilateral_laplace_of_profile(prof, 1.0 - q)?)
}

/// The Rényi curve of a profile, evaluated numerically on demand.
pub fn renyi_curve_from_profile(prof: &PrivacyProfile) -> Result<RenyiCurve> {
    let roc = estimate_roc(prof);
    if roc.is_empty() {
        return Err(Error::EmptyRoc);
    }
    let p = prof.clone();
    Ok(RenyiCurve::new(move |q| renyi_from_profile(&p, q), roc.to_order_strip()))
}

fn log_tail_decays(prof: &PrivacyProfile, sigma: f64) -> bool {
    let t0 = prof.window().1 + 1.0;
    let vals: Vec<f64> = (0..12)
        .map(|k| {
            let t = t0 + (1u32 << k) as f64;
            -sigma * t + prof.eval(t).ln()
        })
        .collect();
    let n = vals.len();
    let last = vals[n - 1];
    last == f64::NEG_INFINITY
        || (vals[n - 1] < vals[n - 2] && vals[n - 2] < vals[n - 3] && last < vals[0] - 30.0)
}

fn roc_ok(prof: &PrivacyProfile, sigma: f64) -> bool {
    let c = prof.left_tail_constant();
    let beta = prof.limit_pos_inf();
    let left = sigma < 0.0 || (c - 1.0).abs() <= C_ONE_TOL;
    let right = if beta > BETA_TOL { sigma > 0.0 } else { log_tail_decays(prof, sigma) };
    left && right
}

/// Numerically probes the strip of Re(s) on which both tails of the
/// transform integrand decay (the left tail counting as convergent when it
/// continues analytically). Unbounded sides are reported as ±∞.
pub fn estimate_roc(prof: &PrivacyProfile) -> Roc {
    let mut sweep: Vec<f64> = (-4..=6).map(|k| -(2f64.powi(k))).collect();
    sweep.extend((-4..=6).map(|k| 2f64.powi(k)));
    sweep.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ok: Vec<bool> = sweep.iter().map(|&s| roc_ok(prof, s)).collect();
    let Some(first) = ok.iter().position(|&b| b) else {
        return Roc { lo: 0.0, hi: 0.0 };
    };
    let last = ok.iter().rposition(|&b| b).unwrap();
    let refine = |mut good: f64, mut bad: f64| {
        for _ in 0..60 {
            let m = 0.5 * (good + bad);
            if roc_ok(prof, m) {
                good = m;
            } else {
                bad = m;
            }
        }
        0.5 * (good + bad)
    };
    let lo = if first == 0 { f64::NEG_INFINITY } else { refine(sweep[first], sweep[first - 1]) };
    let hi = if last == sweep.len() - 1 { f64::INFINITY } else { refine(sweep[last], sweep[last + 1]) };
    Roc { lo, hi }
}

/// Outcome of a Bromwich inversion, including diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BromwichResult {
    /// Real part clamped to [0, 1].
    pub delta: f64,
    /// Unclamped real part.
    pub raw: f64,
    /// |Im| of the unclamped integral.
    pub residue: f64,
    /// Final truncation of the ω range.
    pub omega: f64,
}

fn w_antiderivative(gamma: f64, omega: f64) -> Complex64 {
    let s = Complex64::new(gamma, omega);
    Complex64::new(0.0, -1.0) * (1.0 - 1.0 / s).ln()
}

/// δ(ε) = (1/2π) ∫ e^{sε}·E_{1−s}/(s(s−1)) dω along s = γ + iω, with diagnostics.
pub fn profile_from_renyi_detailed(curve: &RenyiCurve, eps: f64, cfg: &BromwichConfig) -> Result<BromwichResult> {
    cfg.validate()?;
    let (qlo, qhi) = curve.roc_re();
    if !(qlo < qhi) {
        return Err(Error::EmptyRoc);
    }
    let qre = 1.0 - cfg.gamma;
    if !(qlo < qre && qre < qhi) {
        return Err(Error::InvalidParameter(format!(
            "contour Re(q) = {qre} lies outside the strip ({qlo}, {qhi})"
        )));
    }
    if !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon must be finite, got {eps}")));
    }
    let gamma = cfg.gamma;
    let mut failure: Option<Error> = None;
    let mut h = |omega: f64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for om in [omega, -omega] {
            let s = Complex64::new(gamma, om);
            match curve.e(1.0 - s) {
                Ok(e) => acc += (s * eps).exp() * e / (s * (s - 1.0)),
                Err(err) => {
                    failure.get_or_insert(err);
                }
            }
        }
        acc
    };
    let width = PI / (4.0 * eps.abs().max(1.0));
    let panel_opts = QuadOptions { abs_tol: 1e-4 * cfg.quad_tol, rel_tol: 1e-12, max_panels: 200 };
    let span = |a: f64, b: f64, h: &mut dyn FnMut(f64) -> Complex64| -> Complex64 {
        let n = ((b - a) / width).ceil().max(1.0) as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let x0 = a + (b - a) * i as f64 / n as f64;
            let x1 = a + (b - a) * (i + 1) as f64 / n as f64;
            acc += integrate(&mut *h, x0, x1, &[], panel_opts).value;
        }
        acc
    };
    // ∫_a^b [w(ω) + w(−ω)] dω for w = 1/(s(s−1)).
    let wsum = |a: f64, b: f64| 2.0 * (w_antiderivative(gamma, b) - w_antiderivative(gamma, a)).re;
    let wtail = |a: f64| -2.0 * w_antiderivative(gamma, a).re;

    let mut omega = cfg.omega_max;
    let head = span(0.0, 0.5 * omega, &mut h);
    let mut last_chunk = span(0.5 * omega, omega, &mut h);
    let mut body = head + last_chunk;
    let corrected = |body: Complex64, chunk: Complex64, lo: f64, hi: f64| {
        let c_est = chunk / wsum(lo, hi);
        body + c_est * wtail(hi)
    };
    let mut prev = corrected(body, last_chunk, 0.5 * omega, omega);
    let cap = cfg.omega_max * 4096.0;
    let mut change = f64::INFINITY;
    while omega < cap {
        last_chunk = span(omega, 2.0 * omega, &mut h);
        body += last_chunk;
        let next = corrected(body, last_chunk, omega, 2.0 * omega);
        omega *= 2.0;
        change = (next - prev).norm() / (2.0 * PI);
        prev = next;
        if change < cfg.quad_tol {
            break;
        }
    }
    if let Some(err) = failure {
        return Err(err);
    }
    if change >= cfg.quad_tol {
        return Err(Error::NonConvergence(format!(
            "Bromwich integral still moving by {change:e} at omega = {omega}"
        )));
    }
    let val = prev / (2.0 * PI);
    let residue = val.im.abs();
    if residue > 100.0 * cfg.quad_tol {
        log::warn!("Bromwich inversion at eps = {eps} left an imaginary residue of {residue:e}");
    }
    Ok(BromwichResult { delta: val.re.clamp(0.0, 1.0), raw: val.re, residue, omega })
}

/// δ(ε) recovered from a Rényi curve by Bromwich inversion.
pub fn profile_from_renyi(curve: &RenyiCurve, eps: f64, cfg: &BromwichConfig) -> Result<f64> {
    Ok(profile_from_renyi_detailed(curve, eps, cfg)?.delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{gaussian_profile_curve, gaussian_renyi_curve, rr_profile_curve, rr_renyi, RRParams};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn floor_transform_closed_form() {
        let f = PrivacyProfile::floor();
        for s in [c(-0.5, 0.0), c(-0.3, 2.0), c(-0.9, -1.5), c(-3.0, 0.5)] {
            let got = bilateral_laplace_of_profile(&f, s).unwrap();
            let want = 1.0 / (s * (s - 1.0));
            assert!((got - want).norm() < 1e-12 * want.norm().max(1.0), "{s}: {got} vs {want}");
        }
    }

    #[test]
    fn rr_and_gaussian_transform_values() {
        let rr = rr_profile_curve(RRParams { eps0: 2f64.ln(), delta0: 0.0 }).unwrap();
        let v = bilateral_laplace_of_profile(&rr, c(-1.0, 0.0)).unwrap();
        assert!((v - c(0.75, 0.0)).norm() < 1e-12);
        let g = gaussian_profile_curve(0.5).unwrap();
        let v = bilateral_laplace_of_profile(&g, c(-1.0, 0.0)).unwrap();
        assert!((v.re - std::f64::consts::E / 2.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn transform_conjugate_symmetry() {
        let g = gaussian_profile_curve(0.5).unwrap();
        let s = c(-1.2, 0.7);
        let a = bilateral_laplace_of_profile(&g, s).unwrap();
        let b = bilateral_laplace_of_profile(&g, s.conj()).unwrap();
        assert!((a.conj() - b).norm() < 1e-13 * a.norm());
    }

    #[test]
    fn divergence_is_reported() {
        let rr = rr_profile_curve(RRParams { eps0: 1.0, delta0: 0.1 }).unwrap();
        assert!(matches!(bilateral_laplace_of_profile(&rr, c(-1.0, 0.0)), Err(Error::Divergence(_))));
        assert!(matches!(bilateral_laplace_of_profile(&rr, c(0.5, 0.0)), Err(Error::Divergence(_))));
        assert!(matches!(renyi_from_profile(&rr, c(1.0, 0.0)), Err(Error::SingularOrder(_))));
    }

    #[test]
    fn renyi_from_profile_values() {
        let f = PrivacyProfile::floor();
        let e = renyi_from_profile(&f, c(3.0, 0.0)).unwrap();
        assert!((e - 1.0).norm() < 1e-12);
        let g = gaussian_profile_curve(0.5).unwrap();
        let e = renyi_from_profile(&g, c(2.0, 0.0)).unwrap();
        assert!((e.ln().re - 1.0).abs() < 1e-6);
        let l2 = 2f64.ln();
        let rr = rr_profile_curve(RRParams { eps0: l2, delta0: 0.0 }).unwrap();
        for q in [1.5, -2.0, -0.5, 0.3, 0.7] {
            let q = c(q, 0.0);
            let e = renyi_from_profile(&rr, q).unwrap();
            let want = rr_renyi(l2, q).unwrap();
            assert!((e.ln() / (q - 1.0) - want).norm() < 1e-8, "{q}");
        }
    }

    #[test]
    fn roc_estimates() {
        let g = estimate_roc(&gaussian_profile_curve(0.5).unwrap());
        assert!(g.lo <= -3.0 && g.hi >= -0.1);
        let rr = estimate_roc(&rr_profile_curve(RRParams { eps0: 2f64.ln(), delta0: 0.1 }).unwrap());
        assert!(rr.is_empty());
        let f = estimate_roc(&PrivacyProfile::floor());
        assert!(f.lo <= -1.0 && f.hi >= 0.0);
        // P ≪ Q only: the strip is Re(s) < 0.
        let pair = crate::core::DiscretePair::new(vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.5]).unwrap();
        let r = estimate_roc(&crate::core::discrete_profile(&pair));
        assert!(r.hi.abs() < 1e-9 && r.lo == f64::NEG_INFINITY);
    }

    #[test]
    fn bromwich_identity_curve_gives_floor() {
        let cfg = BromwichConfig::default();
        let id = RenyiCurve::identity();
        for eps in [-1.0, -0.25, 0.0, 0.5, 2.0] {
            let d = profile_from_renyi(&id, eps, &cfg).unwrap();
            let want = crate::core::floor_delta(eps);
            assert!((d - want).abs() < 1e-8, "{eps}: {d} vs {want}");
        }
    }

    #[test]
    fn bromwich_gaussian() {
        let cfg = BromwichConfig::default();
        let curve = gaussian_renyi_curve(0.5).unwrap();
        let prof = gaussian_profile_curve(0.5).unwrap();
        for eps in [-1.0, 0.0, 1.0, 3.0] {
            let d = profile_from_renyi(&curve, eps, &cfg).unwrap();
            assert!((d - prof.eval(eps)).abs() < 1e-6, "{eps}");
        }
    }

    #[test]
    fn bromwich_rr_off_and_on_knots() {
        let l2 = 2f64.ln();
        let curve = crate::mechanisms::rr_renyi_curve(l2).unwrap();
        let cfg = BromwichConfig::default();
        let d = profile_from_renyi(&curve, 0.0, &cfg).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-6, "{d}");
        let d = profile_from_renyi(&curve, l2, &cfg).unwrap();
        assert!(d.abs() < 1e-6, "{d}");
    }

    #[test]
    fn config_validation() {
        assert!(BromwichConfig { gamma: 0.0, ..Default::default() }.validate().is_err());
        assert!(BromwichConfig { omega_max: 5.0, ..Default::default() }.validate().is_err());
        let curve = RenyiCurve::new(|_| Ok(c(1.0, 0.0)), (3.0, 5.0));
        assert!(profile_from_renyi(&curve, 0.0, &BromwichConfig::default()).is_err());
    }
}
