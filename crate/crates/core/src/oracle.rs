//! Brute-force and grid-numerical accountants used to cross-check the
//! analytic routes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use crate::core::pld::merge_atoms;
use crate::core::{profile_from_pld, DiscretePair, Pld, PldGrid, PrivacyProfile, RenyiCurve, ATOM_MERGE_TOL};
use crate::error::{Error, Result};
use crate::normal;

/// Largest product support [`product_pair`] will build.
pub const PRODUCT_SUPPORT_CAP: usize = 1_000_000;
const SPARSE_LIMIT: usize = 20_000_000;
const TRIM_MASS: f64 = 1e-25;
const LATTICE_TOL: f64 = 1e-6;

/// Outer product of the pairs' probability vectors.
pub fn product_pair(pairs: &[DiscretePair]) -> Result<DiscretePair> {
    let size = pairs.iter().try_fold(1usize, |acc, p| acc.checked_mul(p.n()));
    match size {
        Some(s) if s <= PRODUCT_SUPPORT_CAP => {}
        _ => {
            return Err(Error::SupportOverflow { size: size.unwrap_or(usize::MAX), cap: PRODUCT_SUPPORT_CAP })
        }
    }
    let mut p = vec![1.0];
    let mut q = vec![1.0];
    for pair in pairs {
        let mut np = Vec::with_capacity(p.len() * pair.n());
        let mut nq = Vec::with_capacity(q.len() * pair.n());
        for (a, b) in p.iter().zip(&q) {
            for (c, d) in pair.p().iter().zip(pair.q()) {
                np.push(a * c);
                nq.push(b * d);
            }
        }
        p = np;
        q = nq;
    }
    DiscretePair::new(p, q)
}

/// A convolution together with the finite mass lost or gained numerically.
#[derive(Debug, Clone)]
pub struct Convolution {
    pub pld: Pld,
    pub mass_error: f64,
}

fn lattice_index(z: f64, step: f64) -> Result<i64> {
    let x = z / step;
    let r = x.round();
    if (x - r).abs() > LATTICE_TOL {
        return Err(Error::GridMismatch(format!("z = {z} is not on the lattice of step {step}")));
    }
    Ok(r as i64)
}

/// Nodes of a PLD on the integer lattice of `step`, as (index, mass).
fn lattice_nodes(pld: &Pld, step: f64) -> Result<(i64, Vec<f64>)> {
    let mut idx = Vec::new();
    for &(z, m) in pld.atoms() {
        idx.push((lattice_index(z, step)?, m));
    }
    if let Some(g) = pld.grid() {
        if ((g.step() - step) / step).abs() > 1e-12 {
            return Err(Error::GridMismatch(format!("grid steps {} and {step} differ", g.step())));
        }
        let i0 = lattice_index(g.z_min(), step)?;
        for (i, d) in g.densities().iter().enumerate() {
            if *d > 0.0 {
                idx.push((i0 + i as i64, d * step));
            }
        }
    }
    if idx.is_empty() {
        return Ok((0, Vec::new()));
    }
    let lo = idx.iter().map(|x| x.0).min().unwrap();
    let hi = idx.iter().map(|x| x.0).max().unwrap();
    let mut dense = vec![0.0; (hi - lo + 1) as usize];
    for (i, m) in idx {
        dense[(i - lo) as usize] += m;
    }
    Ok((lo, dense))
}

fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = (a.len() + b.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fa.resize(n, Complex64::new(0.0, 0.0));
    let mut fb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fb.resize(n, Complex64::new(0.0, 0.0));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    fa.truncate(a.len() + b.len() - 1);
    fa.into_iter().map(|z| z.re / n as f64).collect()
}

fn direct_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    let nb: Vec<(usize, f64)> = b.iter().copied().enumerate().filter(|x| x.1 != 0.0).collect();
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for &(j, y) in &nb {
            out[i + j] += x * y;
        }
    }
    out
}

fn grid_step(a: &Pld, b: &Pld) -> Option<f64> {
    a.grid().map(|g| g.step()).or_else(|| b.grid().map(|g| g.step()))
}

/// Distribution of Z₁ + Z₂ for independent privacy losses.
pub fn convolve_plds(a: &Pld, b: &Pld) -> Result<Pld> {
    Ok(convolve_plds_tracked(a, b)?.pld)
}

/// As [`convolve_plds`], also reporting the numerical finite-mass error.
pub fn convolve_plds_tracked(a: &Pld, b: &Pld) -> Result<Convolution> {
    let inf = a.mass_pos_inf() + b.mass_pos_inf() - a.mass_pos_inf() * b.mass_pos_inf();
    let expected = a.finite_mass() * b.finite_mass();
    let Some(step) = grid_step(a, b) else {
        let mut atoms = Vec::with_capacity(a.atoms().len() * b.atoms().len());
        for &(za, ma) in a.atoms() {
            for &(zb, mb) in b.atoms() {
                atoms.push((za + zb, ma * mb));
            }
        }
        let atoms = merge_atoms(atoms, ATOM_MERGE_TOL);
        let got: f64 = atoms.iter().map(|x| x.1).sum();
        let pld = Pld::from_parts(atoms, None, inf);
        return Ok(Convolution { pld, mass_error: (got - expected).abs() });
    };
    let (ia, da) = lattice_nodes(a, step)?;
    let (ib, db) = lattice_nodes(b, step)?;
    if da.is_empty() || db.is_empty() {
        return Ok(Convolution { pld: Pld::from_parts(vec![], None, inf), mass_error: expected });
    }
    let nnz_a = da.iter().filter(|x| **x != 0.0).count();
    let nnz_b = db.iter().filter(|x| **x != 0.0).count();
    let mut out = if nnz_a.saturating_mul(nnz_b) <= SPARSE_LIMIT {
        direct_convolve(&da, &db)
    } else {
        fft_convolve(&da, &db)
    };
    for x in out.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let mut start = 0;
    let mut end = out.len();
    let mut trimmed = 0.0;
    while start < end && out[start] < TRIM_MASS {
        trimmed += out[start];
        start += 1;
    }
    while end > start && out[end - 1] < TRIM_MASS {
        trimmed += out[end - 1];
        end -= 1;
    }
    let kept: f64 = out[start..end].iter().sum();
    let mass_error = (kept + trimmed - expected).abs();
    let z0 = (ia + ib + start as i64) as f64 * step;
    let dens: Vec<f64> = out[start..end].iter().map(|m| m / step).collect();
    let grid = if dens.is_empty() { None } else { Some(PldGrid::new(z0, step, dens)?) };
    Ok(Convolution { pld: Pld::from_parts(vec![], grid, (inf + trimmed).min(1.0)), mass_error })
}

/// Moves every finite node of `pld` up to the next multiple of `step`.
/// Since δ is increasing in Z this can only raise the profile.
pub fn discretize_pld(pld: &Pld, step: f64) -> Result<Pld> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    let mut nodes: Vec<(i64, f64)> = Vec::new();
    pld.for_each_node(|z, m| nodes.push(((z / step - 1e-9).ceil() as i64, m)));
    if nodes.is_empty() {
        return Ok(Pld::from_parts(vec![], None, pld.mass_pos_inf()));
    }
    if pld.grid().is_none() {
        let atoms = nodes.into_iter().map(|(i, m)| (i as f64 * step, m)).collect();
        return Ok(Pld::from_parts(merge_atoms(atoms, ATOM_MERGE_TOL), None, pld.mass_pos_inf()));
    }
    let lo = nodes.iter().map(|x| x.0).min().unwrap();
    let hi = nodes.iter().map(|x| x.0).max().unwrap();
    let mut dens = vec![0.0; (hi - lo + 1) as usize];
    for (i, m) in nodes {
        dens[(i - lo) as usize] += m / step;
    }
    let grid = PldGrid::new(lo as f64 * step, step, dens)?;
    Ok(Pld::from_parts(vec![], Some(grid), pld.mass_pos_inf()))
}

/// Privacy loss of the Gaussian mechanism, N(κ, 2κ), sampled on the lattice
/// of `step` over ±`width_sd` standard deviations. Mass outside the range is
/// placed at +∞.
pub fn gaussian_grid_kernel(kappa: f64, step: f64, width_sd: f64) -> Result<Pld> {
    if !(kappa > 0.0) {
        return Err(Error::DegenerateKappa(kappa));
    }
    if !(step > 0.0) || !(width_sd > 0.0) {
        return Err(Error::InvalidParameter("step and width must be positive".into()));
    }
    let sd = (2.0 * kappa).sqrt();
    let i0 = ((kappa - width_sd * sd) / step).floor() as i64;
    let i1 = ((kappa + width_sd * sd) / step).ceil() as i64;
    let dens: Vec<f64> = (i0..=i1).map(|i| normal::pdf((i as f64 * step - kappa) / sd) / sd).collect();
    let grid = PldGrid::new(i0 as f64 * step, step, dens)?;
    let inf = (1.0 - grid.total_mass()).max(0.0);
    Ok(Pld::from_parts(vec![], Some(grid), inf))
}

/// Output of [`grid_accountant`].
#[derive(Debug, Clone)]
pub struct GridAccountantReport {
    pub deltas: Vec<f64>,
    /// Discretization error heuristic k·step·(finite mass) plus tracked mass
    /// error; surfaced, not certified.
    pub error_bound: f64,
    pub mass_error: f64,
    pub pld: Pld,
}

/// k-fold self-convolution of `kernel` evaluated at `eps_grid`. With
/// `step = Some(h)` the kernel is first rounded up onto the lattice of `h`.
pub fn grid_accountant(kernel: &Pld, k: u32, eps_grid: &[f64], step: Option<f64>) -> Result<GridAccountantReport> {
    let base = match step {
        Some(h) => discretize_pld(kernel, h)?,
        None => kernel.clone(),
    };
    let mut acc = Pld::point_mass(0.0);
    let mut pow = base;
    let mut n = k;
    let mut mass_error = 0.0;
    while n > 0 {
        if n & 1 == 1 {
            let c = convolve_plds_tracked(&acc, &pow)?;
            mass_error += c.mass_error;
            acc = c.pld;
        }
        n >>= 1;
        if n > 0 {
            let c = convolve_plds_tracked(&pow, &pow)?;
            mass_error += c.mass_error;
            pow = c.pld;
        }
    }
    let deltas = eps_grid.iter().map(|&e| profile_from_pld(&acc, e)).collect();
    let h = step.or_else(|| kernel.grid().map(|g| g.step())).unwrap_or(0.0);
    let error_bound = k as f64 * h * acc.finite_mass() + mass_error;
    Ok(GridAccountantReport { deltas, error_bound, mass_error, pld: acc })
}

/// Pointwise ordering of two profiles on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dominance {
    /// δ₁ ≥ δ₂ everywhere (ties included).
    Dominates,
    /// δ₁ ≤ δ₂ everywhere, strictly somewhere.
    Dominated,
    /// The ordering flips; the payload is the first ε where it does.
    Crossing(f64),
}

/// Compares δ₁ and δ₂ on `eps_grid` augmented with the knots of both curves
/// that fall inside it. Differences within 1e−12 count as ties.
pub fn check_dominance(delta1: &PrivacyProfile, delta2: &PrivacyProfile, eps_grid: &[f64]) -> Dominance {
    let mut grid: Vec<f64> = eps_grid.iter().copied().filter(|e| e.is_finite()).collect();
    if let (Some(lo), Some(hi)) = (
        grid.iter().copied().reduce(f64::min),
        grid.iter().copied().reduce(f64::max),
    ) {
        for k in delta1.knots().iter().chain(delta2.knots()) {
            if *k >= lo && *k <= hi {
                grid.push(*k);
            }
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (mut above, mut below) = (false, false);
    for e in grid {
        let d = delta1.eval(e) - delta2.eval(e);
        if d > 1e-12 {
            if below {
                return Dominance::Crossing(e);
            }
            above = true;
        } else if d < -1e-12 {
            if above {
                return Dominance::Crossing(e);
            }
            below = true;
        }
    }
    if below {
        Dominance::Dominated
    } else {
        Dominance::Dominates
    }
}

fn real_rho(c: &RenyiCurve, q: f64) -> f64 {
    match c.rho(Complex64::new(q, 0.0)) {
        Ok(r) if r.re.is_finite() => r.re,
        Ok(_) | Err(Error::Divergence(_)) => f64::INFINITY,
        Err(_) => f64::NAN,
    }
}

/// True iff ρ₁(q) ≤ ρ₂(q) + 1e−12 at every grid order. Divergent orders count as +∞.
pub fn check_renyi_dominance(c1: &RenyiCurve, c2: &RenyiCurve, q_grid: &[f64]) -> bool {
    q_grid.iter().all(|&q| {
        let (a, b) = (real_rho(c1, q), real_rho(c2, q));
        a == b || a <= b + 1e-12
    })
}

/// A random pair over `n` outcomes with Dirichlet(1, …, 1) marginals. With
/// probability `zero_prob` a coordinate of P, of Q, or of both is zeroed to
/// break absolute continuity in one or both directions.
pub fn random_pair<R: Rng>(rng: &mut R, n: usize, zero_prob: f64) -> DiscretePair {
    assert!(n >= 2);
    loop {
        let mut p: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let mut q: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        if rng.random::<f64>() < zero_prob {
            match rng.random_range(0..3) {
                0 => p[rng.random_range(0..n)] = 0.0,
                1 => q[rng.random_range(0..n)] = 0.0,
                _ => {
                    let i = rng.random_range(0..n);
                    let j = (i + 1 + rng.random_range(0..n - 1)) % n;
                    p[i] = 0.0;
                    q[j] = 0.0;
                }
            }
        }
        let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
        if sp <= 0.0 || sq <= 0.0 {
            continue;
        }
        p.iter_mut().for_each(|x| *x /= sp);
        q.iter_mut().for_each(|x| *x /= sq);
        if let Ok(pair) = DiscretePair::new(p, q) {
            return pair;
        }
    }
}

/// `count` reproducible random pairs with support sizes drawn from `sizes`.
pub fn random_pairs(seed: u64, count: usize, sizes: std::ops::RangeInclusive<usize>, zero_prob: f64) -> Vec<DiscretePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(sizes.clone());
            random_pair(&mut rng, n, zero_prob)
        })
        .collect()
}
