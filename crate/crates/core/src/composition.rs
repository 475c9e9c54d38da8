//! Exactly tight composition: the δ̈ − δ̇ kernel route for arbitrary profiles,
//! the ±ε recursion for (ε, δ) point guarantees, and its binomial closed form.

use std::sync::Arc;

use crate::core::pld::merge_atoms;
use crate::core::{profile_from_pld, PrivacyProfile, Pld, PldGrid};
use crate::error::{Error, Result};

/// Default cap on the number of atoms held by a [`SignedAtomBook`].
pub const DEFAULT_BOOK_CAP: usize = 1 << 20;
const SHIFT_MERGE_TOL: f64 = 1e-12;

/// A single (ε_i, δ_i) guarantee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointGuarantee {
    pub eps: f64,
    pub delta: f64,
}

impl PointGuarantee {
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!("eps must be finite and >= 0, got {eps}")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("delta must lie in [0, 1], got {delta}")));
        }
        Ok(Self { eps, delta })
    }
}

/// Expansion of the composition recursion: the composed profile is
/// `inf_mass + Σ w·max(0, 1 − e^{t − shift})`.
#[derive(Debug, Clone)]
pub struct SignedAtomBook {
    atoms: Vec<(f64, f64)>,
    log_finite: f64,
    cap: usize,
}

impl Default for SignedAtomBook {
    fn default() -> Self {
        Self::new()
    }
}

impl SignedAtomBook {
    /// The empty composition: a single atom at 0.
    pub fn new() -> Self {
        Self::with_cap(DEFAULT_BOOK_CAP)
    }

    pub fn with_cap(cap: usize) -> Self {
        Self { atoms: vec![(0.0, 1.0)], log_finite: 0.0, cap }
    }

    pub fn from_guarantees(gs: &[PointGuarantee], cap: usize) -> Result<Self> {
        let mut book = Self::with_cap(cap);
        for g in gs {
            book.push(*g)?;
        }
        Ok(book)
    }

    /// Composes one more guarantee onto the book.
    pub fn push(&mut self, g: PointGuarantee) -> Result<()> {
        let g = PointGuarantee::new(g.eps, g.delta)?;
        let keep = 1.0 - g.delta;
        let up = keep / (1.0 + (-g.eps).exp());
        let down = keep / (1.0 + g.eps.exp());
        let mut next = Vec::with_capacity(2 * self.atoms.len());
        for &(s, w) in &self.atoms {
            next.push((s + g.eps, w * up));
            next.push((s - g.eps, w * down));
        }
        let merged = merge_atoms(next, SHIFT_MERGE_TOL);
        if merged.len() > self.cap {
            return Err(Error::BookOverflow { atoms: merged.len(), cap: self.cap });
        }
        self.atoms = merged;
        self.log_finite += (-g.delta).ln_1p();
        Ok(())
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// 1 − ∏(1 − δ_i).
    pub fn inf_mass(&self) -> f64 {
        -self.log_finite.exp_m1()
    }

    /// ∏(1 − δ_i).
    pub fn finite_mass(&self) -> f64 {
        self.log_finite.exp()
    }

    /// The composed profile at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let mut s = 0.0;
        for &(shift, w) in self.atoms.iter().rev() {
            if shift <= t {
                break;
            }
            s += w * -(t - shift).exp_m1();
        }
        (self.inf_mass() + s).min(1.0)
    }

    /// The book as a privacy loss distribution.
    pub fn to_pld(&self) -> Pld {
        Pld::with_mass_tolerance(self.atoms.clone(), None, self.inf_mass(), 1e-9)
            .expect("book masses sum to one")
    }
}

/// δ^{⊗k}(t) for a sequence of (ε_i, δ_i) guarantees.
pub fn compose_point_guarantees(gs: &[PointGuarantee], t: f64) -> Result<f64> {
    Ok(SignedAtomBook::from_guarantees(gs, DEFAULT_BOOK_CAP)?.eval(t))
}

/// The composed curve of a sequence of (ε_i, δ_i) guarantees.
pub fn composed_point_profile(gs: &[PointGuarantee], cap: usize) -> Result<PrivacyProfile> {
    let book = Arc::new(SignedAtomBook::from_guarantees(gs, cap)?);
    Ok(book_profile(book))
}

pub(crate) fn book_profile(book: Arc<SignedAtomBook>) -> PrivacyProfile {
    let knots: Vec<f64> = book.atoms().iter().map(|a| a.0).collect();
    let window = (knots[0], knots[knots.len() - 1]);
    let (c, inf) = (book.finite_mass(), book.inf_mass());
    let b = book.clone();
    PrivacyProfile::analytic(move |t| b.eval(t), knots, window).with_tails(c, inf)
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Binomial closed form of the k-fold homogeneous composition:
/// 1 − (1−δ₀)^k·(1 − E[max(0, 1 − e^{t − ε₀(2Y − k)})]), Y ~ Bin(k, e^{ε₀}/(1+e^{ε₀})).
pub fn compose_homogeneous(eps0: f64, delta0: f64, k: u32, t: f64) -> f64 {
    let kf = k as f64;
    let log_keep = kf * (-delta0).ln_1p();
    let inf = -log_keep.exp_m1();
    let lp = -softplus(-eps0);
    let lq = -softplus(eps0);
    let mut log_binom = 0.0;
    let mut e = 0.0;
    for y in 0..=k {
        if y > 0 {
            log_binom += ((k - y + 1) as f64).ln() - (y as f64).ln();
        }
        let shift = eps0 * (2.0 * y as f64 - kf);
        if shift > t {
            let lw = log_binom + y as f64 * lp + (kf - y as f64) * lq + log_keep;
            e += lw.exp() * -(t - shift).exp_m1();
        }
    }
    (inf + e).min(1.0)
}

/// The homogeneous closed form as a curve.
pub fn homogeneous_profile(eps0: f64, delta0: f64, k: u32) -> Result<PrivacyProfile> {
    let g = PointGuarantee::new(eps0, delta0)?;
    let kf = k as f64;
    let knots: Vec<f64> = (0..=k).map(|y| g.eps * (2.0 * y as f64 - kf)).collect();
    let window = (-g.eps * kf, g.eps * kf);
    let keep = (kf * (-g.delta).ln_1p()).exp();
    Ok(PrivacyProfile::analytic(move |t| compose_homogeneous(g.eps, g.delta, k, t), knots, window)
        .with_tails(keep, 1.0 - keep))
}

/// Smallest ε in `bracket` with δ(ε) ≤ `budget`, by bisection to width 1e−9.
pub fn eps_for_delta<F: Fn(f64) -> f64>(delta: F, budget: f64, bracket: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!("bad bracket ({lo}, {hi})")));
    }
    let dhi = delta(hi);
    if dhi > budget {
        return Err(Error::NoCrossing { eps: hi, delta: dhi, budget });
    }
    if delta(lo) <= budget {
        return Ok(lo);
    }
    while hi - lo >= 1e-9 {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        if delta(m) <= budget {
            hi = m;
        } else {
            lo = m;
        }
    }
    Ok(hi)
}

/// Discretization settings for [`pld_kernel_from_profile_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    /// Spacing of the density grid; nodes sit on multiples of it.
    pub grid_step: f64,
    /// Finite-difference spacing.
    pub fd_step: f64,
    /// Allowed sup-norm error when the kernel is used to rebuild the profile.
    pub validation_tol: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { grid_step: 1e-3, fd_step: 2e-3, validation_tol: 1e-6 }
    }
}

/// The PLD whose density is δ̈ − δ̇, with default discretization.
pub fn pld_kernel_from_profile(prof: &PrivacyProfile) -> Result<Pld> {
    pld_kernel_from_profile_with(prof, &KernelConfig::default())
}

fn one_sided_derivatives(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
    let v: Vec<f64> = (0..5).map(|i| f(x + i as f64 * h)).collect();
    let d1 = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h);
    let d2 = (35.0 * v[0] - 104.0 * v[1] + 114.0 * v[2] - 56.0 * v[3] + 11.0 * v[4]) / (12.0 * h * h);
    (d1, d2)
}

/// Kernel of a profile: atoms at knots carrying the jump of δ′, a gridded
/// density δ″ − δ′ between knots, and mass δ(+∞) at +∞. Fails if the kernel
/// does not reproduce the profile within `cfg.validation_tol`.
pub fn pld_kernel_from_profile_with(prof: &PrivacyProfile, cfg: &KernelConfig) -> Result<Pld> {
    if !(cfg.grid_step > 0.0) || !(cfg.fd_step > 0.0) {
        return Err(Error::InvalidParameter("kernel steps must be positive".into()));
    }
    let f = |t: f64| prof.eval(t);
    let knots = prof.knots().to_vec();
    let (lo, hi) = prof.window();

    let mut atoms = Vec::new();
    for (i, &k) in knots.iter().enumerate() {
        let left_gap = if i > 0 { k - knots[i - 1] } else { f64::INFINITY };
        let right_gap = if i + 1 < knots.len() { knots[i + 1] - k } else { f64::INFINITY };
        let h = cfg.fd_step.min(left_gap / 8.0).min(right_gap / 8.0);
        let (dr, _) = one_sided_derivatives(&f, k, h);
        let (dl, _) = one_sided_derivatives(&f, k, -h);
        let jump = dr - dl;
        if jump.abs() >= 1e-12 {
            atoms.push((k, jump.max(0.0)));
        }
    }

    let h = cfg.fd_step;
    let step = cfg.grid_step;
    let i0 = (lo / step).floor() as i64;
    let i1 = (hi / step).ceil() as i64;
    let mut dens = Vec::with_capacity((i1 - i0 + 1).max(0) as usize);
    let mut peak = 0.0f64;
    for i in i0..=i1 {
        let z = i as f64 * step;
        let near = knots.iter().copied().find(|k| (z - k).abs() < 2.5 * h);
        let g = match near {
            Some(k) => {
                let (d1, d2) = one_sided_derivatives(&f, z, if z >= k { h } else { -h });
                d2 - d1
            }
            None => {
                let v = [f(z - 2.0 * h), f(z - h), f(z), f(z + h), f(z + 2.0 * h)];
                let d1 = (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * h);
                let d2 = (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * h * h);
                d2 - d1
            }
        };
        peak = peak.max(g.abs());
        dens.push(g.max(0.0));
    }
    let grid = if peak < 1e-7 { None } else { Some(PldGrid::new(i0 as f64 * step, step, dens)?) };
    let kernel = Pld::with_mass_tolerance(atoms, grid, prof.limit_pos_inf(), 1e-4)?;

    let mut checks: Vec<f64> = (0..=200).map(|i| lo - 2.0 + (hi - lo + 4.0) * i as f64 / 200.0).collect();
    for &k in &knots {
        checks.extend([k - 1e-3, k, k + 1e-3]);
    }
    let err = checks
        .iter()
        .map(|&e| (profile_from_pld(&kernel, e) - prof.eval(e)).abs())
        .fold(0.0, f64::max);
    if err > cfg.validation_tol {
        return Err(Error::Reconstruction(err));
    }
    Ok(kernel)
}

/// ε ↦ E_{Z₂}[δ₁(ε − Z₂)] + P[Z₂ = +∞]: the composition of a profile with the
/// kernel of a second mechanism.
pub fn compose_profile_with_kernel(prof1: &PrivacyProfile, kernel2: &Pld) -> PrivacyProfile {
    let mut nodes = Vec::new();
    kernel2.for_each_node(|z, m| {
        if m > 1e-300 {
            nodes.push((z, m));
        }
    });
    let inf = kernel2.mass_pos_inf();
    let mut knots = Vec::new();
    for &(z, _) in kernel2.atoms() {
        knots.extend(prof1.knots().iter().map(|k| k + z));
    }
    let (lo1, hi1) = prof1.window();
    let (zlo, zhi) = kernel2.support().unwrap_or((0.0, 0.0));
    let c2: f64 = nodes.iter().map(|(z, m)| m * (-z).exp()).sum();
    let finite: f64 = nodes.iter().map(|n| n.1).sum();
    let left_c = prof1.left_tail_constant() * c2;
    let right = prof1.limit_pos_inf() * finite + inf;
    let p1 = prof1.clone();
    PrivacyProfile::analytic(
        move |e| {
            let s: f64 = nodes.iter().map(|&(z, m)| m * p1.eval(e - z)).sum();
            (s + inf).min(1.0)
        },
        knots,
        (lo1 + zlo, hi1 + zhi),
    )
    .with_tails(left_c, right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{gaussian_profile_curve, rr_profile, rr_profile_curve, RRParams};

    #[test]
    fn empty_and_single_step() {
        assert_eq!(compose_point_guarantees(&[], 0.0).unwrap(), 0.0);
        let g = PointGuarantee { eps: 1.0, delta: 0.05 };
        assert!((compose_point_guarantees(&[g], 2.0).unwrap() - 0.05).abs() < 1e-15);
        for t in [-2.0, 0.0, 0.5, 2.0] {
            let want = rr_profile(RRParams { eps0: 1.0, delta0: 0.05 }, t);
            assert!((compose_point_guarantees(&[g], t).unwrap() - want).abs() < 1e-15);
            assert!((compose_homogeneous(1.0, 0.05, 1, t) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn two_rr_ln2() {
        let g = PointGuarantee { eps: 2f64.ln(), delta: 0.0 };
        assert!((compose_point_guarantees(&[g, g], 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((compose_homogeneous(2f64.ln(), 0.0, 2, 0.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn homogeneous_book_has_k_plus_one_atoms() {
        let g = PointGuarantee { eps: 0.1, delta: 1e-8 };
        let book = SignedAtomBook::from_guarantees(&vec![g; 100], DEFAULT_BOOK_CAP).unwrap();
        assert_eq!(book.len(), 101);
        let total: f64 = book.atoms().iter().map(|a| a.1).sum::<f64>() + book.inf_mass();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn book_cap() {
        let gs: Vec<PointGuarantee> =
            (0..12).map(|i| PointGuarantee { eps: 1.0 / (i as f64 + 1.7).sqrt(), delta: 0.0 }).collect();
        let r = SignedAtomBook::from_guarantees(&gs, 1000);
        assert!(matches!(r, Err(Error::BookOverflow { .. })));
    }

    #[test]
    fn calibration() {
        let floor = PrivacyProfile::floor();
        let e = eps_for_delta(|x| floor.eval(x), 0.0, (-1.0, 1.0)).unwrap();
        assert!(e.abs() < 1e-9);
        let rr = RRParams { eps0: 1.0, delta0: 0.05 };
        let e = eps_for_delta(|t| rr_profile(rr, t), 0.05, (0.0, 5.0)).unwrap();
        assert!((e - 1.0).abs() < 1e-8);
        assert!(matches!(
            eps_for_delta(|t| rr_profile(rr, t), 0.01, (0.0, 5.0)),
            Err(Error::NoCrossing { .. })
        ));
    }

    #[test]
    fn floor_kernel_is_unit_atom() {
        let k = pld_kernel_from_profile(&PrivacyProfile::floor()).unwrap();
        assert!(k.grid().is_none());
        assert_eq!(k.atoms().len(), 1);
        assert!(k.atoms()[0].0.abs() < 1e-15 && (k.atoms()[0].1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rr_kernel_atoms() {
        let (e, d) = (1.0f64, 0.1);
        let k = pld_kernel_from_profile(&rr_profile_curve(RRParams { eps0: e, delta0: d }).unwrap()).unwrap();
        assert!(k.grid().is_none());
        let a = k.atoms();
        assert_eq!(a.len(), 2);
        assert!((a[1].1 - (1.0 - d) * e.exp() / (e.exp() + 1.0)).abs() < 1e-10);
        assert!((a[0].1 - (1.0 - d) / (e.exp() + 1.0)).abs() < 1e-10);
        assert!((k.mass_pos_inf() - d).abs() < 1e-15);
    }

    #[test]
    fn gaussian_kernel_is_normal_density() {
        let kappa = 0.5;
        let k = pld_kernel_from_profile(&gaussian_profile_curve(kappa).unwrap()).unwrap();
        let g = k.grid().unwrap();
        let sd = (2.0 * kappa).sqrt();
        let mut err = 0.0f64;
        for i in 0..g.len() {
            let z = g.z(i);
            let want = crate::normal::pdf((z - kappa) / sd) / sd;
            err = err.max((g.densities()[i] - want).abs());
        }
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn rr_with_rr_kernel() {
        let p = rr_profile_curve(RRParams { eps0: 2f64.ln(), delta0: 0.0 }).unwrap();
        let k = pld_kernel_from_profile(&p).unwrap();
        let c = compose_profile_with_kernel(&p, &k);
        assert!((c.eval(0.0) - 1.0 / 3.0).abs() < 1e-10);
        let f = PrivacyProfile::floor();
        let c = compose_profile_with_kernel(&f, &Pld::point_mass(0.0));
        for e in [-1.0, 0.0, 1.0] {
            assert_eq!(c.eval(e), f.eval(e));
        }
    }
}
