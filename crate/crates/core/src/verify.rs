//! Oracle-backed invariant suites behind `dp-laplace verify`.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::composition::{compose_homogeneous, compose_point_guarantees, composed_point_profile, PointGuarantee,
    DEFAULT_BOOK_CAP};
use crate::core::{
    check_tradeoff_reversal, discrete_profile, pld_from_discrete, profile_from_discrete, reverse_pld, reverse_profile,
    DiscretePair, RenyiCurve,
};
use crate::laplace::{profile_from_renyi, renyi_from_profile, BromwichConfig};
use crate::mechanisms::{
    gaussian_profile, gaussian_profile_curve, gaussian_renyi_curve, rr_pair, rr_profile, rr_profile_curve, rr_renyi,
    rr_renyi_curve, GaussianParams, RRParams,
};
use crate::oracle::{
    check_dominance, check_renyi_dominance, gaussian_grid_kernel, grid_accountant, product_pair, random_pair,
    Dominance,
};
use crate::spec::Descriptor;
use crate::subsampling::{poisson_subsample_profile, SubsampleParams};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, r: std::result::Result<String, String>) -> Check {
    match r {
        Ok(detail) => Check { name, passed: true, detail },
        Err(detail) => Check { name, passed: false, detail },
    }
}

type Outcome = std::result::Result<String, String>;

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn max_err(errs: impl Iterator<Item = f64>) -> f64 {
    errs.fold(0.0, |m: f64, e| if e.is_nan() { f64::INFINITY } else { m.max(e) })
}

fn within(name: &str, err: f64, tol: f64) -> Outcome {
    let msg = format!("{name} max error {err:.3e} (tol {tol:.0e})");
    if err <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn gaussian_linearity(kappas: &[f64], qs: &[f64]) -> Outcome {
    let mut err = 0.0f64;
    for &k in kappas {
        let prof = gaussian_profile_curve(k).map_err(|e| e.to_string())?;
        for &q in qs {
            let e = renyi_from_profile(&prof, Complex64::new(q, 0.0)).map_err(|e| e.to_string())?;
            err = err.max((e.re.ln() / (q - 1.0) - k * q).abs());
        }
    }
    within("rho vs kappa*q", err, 1e-6)
}

fn gaussian_bromwich(eps: &[f64]) -> Outcome {
    let curve = gaussian_renyi_curve(0.5).map_err(|e| e.to_string())?;
    let cfg = BromwichConfig::default();
    let mut err = 0.0f64;
    for &e in eps {
        let got = profile_from_renyi(&curve, e, &cfg).map_err(|e| e.to_string())?;
        let want = gaussian_profile(GaussianParams { kappa: 0.5 }, e).map_err(|e| e.to_string())?;
        err = err.max((got - want).abs());
    }
    within("inverse transform vs closed form", err, 1e-6)
}

fn rr_renyi_numeric(qs: &[f64]) -> Outcome {
    let prof = rr_profile_curve(RRParams { eps0: LN_2, delta0: 0.0 }).map_err(|e| e.to_string())?;
    let mut err = 0.0f64;
    for &q in qs {
        let q = Complex64::new(q, 0.0);
        let rho_num = crate::core::rho_from_e(renyi_from_profile(&prof, q).map_err(|e| e.to_string())?, q)
            .map_err(|e| e.to_string())?;
        let rho = rr_renyi(LN_2, q).map_err(|e| e.to_string())?;
        err = err.max((rho_num - rho).norm());
    }
    within("closed form vs transform", err, 1e-8)
}

fn empty_roc() -> Outcome {
    match (Descriptor::RandomizedResponse { eps0: 1.0, delta0: 0.1 }).renyi() {
        Err(Error::EmptyRoc) => Ok("RR(1, 0.1) has no convergent order".into()),
        other => Err(format!("expected an empty strip, got {:?}", other.map(|c| c.roc_re()))),
    }
}

fn random_rr<R: Rng>(rng: &mut R) -> (f64, f64) {
    let eps0 = rng.random_range(0.0..2.0);
    let delta0 = if rng.random::<bool>() { 0.0 } else { rng.random_range(0.0..0.2) };
    (eps0, delta0)
}

fn composition_vs_product(seed: u64, trials: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = linspace(-4.0, 4.0, 25);
    let mut err = 0.0f64;
    for _ in 0..trials {
        let k = rng.random_range(1..=3);
        let params: Vec<(f64, f64)> = (0..k).map(|_| random_rr(&mut rng)).collect();
        let pairs: Vec<DiscretePair> = params
            .iter()
            .map(|&(e, d)| rr_pair(RRParams { eps0: e, delta0: d }))
            .collect::<crate::Result<_>>()
            .map_err(|e| e.to_string())?;
        let prod = product_pair(&pairs).map_err(|e| e.to_string())?;
        let gs: Vec<PointGuarantee> = params.iter().map(|&(e, d)| PointGuarantee { eps: e, delta: d }).collect();
        for &t in &grid {
            let got = compose_point_guarantees(&gs, t).map_err(|e| e.to_string())?;
            err = err.max((got - profile_from_discrete(&prod, t)).abs());
        }
    }
    within("recursion vs product pair", err, 1e-12)
}

fn recursion_vs_closed_form(seed: u64, ks: &[u32]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (eps0, delta0) = (0.1, 1e-8);
    let mut err = 0.0f64;
    for &k in ks {
        let gs = vec![PointGuarantee { eps: eps0, delta: delta0 }; k as usize];
        let book = composed_point_profile(&gs, DEFAULT_BOOK_CAP).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let t = rng.random_range(-(k as f64) * eps0 - 0.5..=(k as f64) * eps0 + 0.5);
            err = err.max((book.eval(t) - compose_homogeneous(eps0, delta0, k, t)).abs());
        }
    }
    within("recursion vs binomial form", err, 1e-12)
}

fn subsampling_vs_mixture(seed: u64, pairs: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = linspace(-5.0, 5.0, 50);
    let mut err = 0.0f64;
    for _ in 0..pairs {
        let n = rng.random_range(3..=5);
        let pair = random_pair(&mut rng, n, 0.3);
        let prof = discrete_profile(&pair);
        for lambda in [0.1, 0.5, 0.9] {
            let sub = poisson_subsample_profile(&prof, SubsampleParams { lambda }).map_err(|e| e.to_string())?;
            let mix = mixture_pair(&pair, lambda);
            err = err.max(max_err(grid.iter().map(|&e| (sub.eval(e) - profile_from_discrete(&mix, e)).abs())));
        }
    }
    within("formula vs mixture", err, 1e-12)
}

/// (λP + (1−λ)Q, Q).
pub fn mixture_pair(pair: &DiscretePair, lambda: f64) -> DiscretePair {
    let p = pair.p().iter().zip(pair.q()).map(|(p, q)| lambda * p + (1.0 - lambda) * q).collect();
    DiscretePair::new(p, pair.q().to_vec()).expect("mixture of valid pairs")
}

/// Largest violation of the four reversal identities on one pair.
pub fn reversal_error(pair: &DiscretePair) -> f64 {
    let rev = pair.swapped();
    let prof_rev = reverse_profile(&discrete_profile(pair));
    let mut err = max_err(linspace(-8.0, 8.0, 41).into_iter().map(|e| (prof_rev.eval(e) - profile_from_discrete(&rev, e)).abs()));

    let (c1, c2) = match (RenyiCurve::from_pld(&pld_from_discrete(pair)), RenyiCurve::from_pld(&pld_from_discrete(&rev))) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return f64::INFINITY,
    };
    for q in [-0.5, 0.3, 0.7, 1.5, 2.0] {
        let a = c1.e(Complex64::new(q, 0.0));
        let b = c2.e(Complex64::new(1.0 - q, 0.0));
        match (a, b) {
            (Ok(a), Ok(b)) => err = err.max((a - b).norm() / a.norm().max(1.0)),
            (Err(_), Err(_)) => {}
            _ => return f64::INFINITY,
        }
    }

    if !check_tradeoff_reversal(pair, &linspace(0.0, 1.0, 101)) {
        return f64::INFINITY;
    }

    let (a, b) = match reverse_pld(&pld_from_discrete(pair)) {
        Ok(a) => (a, pld_from_discrete(&rev)),
        Err(_) => return f64::INFINITY,
    };
    if a.atoms().len() != b.atoms().len() {
        return f64::INFINITY;
    }
    for (x, y) in a.atoms().iter().zip(b.atoms()) {
        err = err.max((x.0 - y.0).abs()).max((x.1 - y.1).abs());
    }
    err.max((a.mass_pos_inf() - b.mass_pos_inf()).abs())
}

fn reversal_identities(seed: u64, pairs: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let err = max_err((0..pairs).map(|_| {
        let n = rng.random_range(3..=5);
        reversal_error(&random_pair(&mut rng, n, 0.5))
    }));
    within("profile, Renyi, trade-off and PLD reversal", err, 1e-9)
}

/// Checks profile dominance ⇒ Rényi dominance for one pair of pairs.
/// Returns `None` when neither profile dominates the other.
pub fn one_way_dominance(a: &DiscretePair, b: &DiscretePair, q_grid: &[f64]) -> Option<bool> {
    let (pa, pb) = (discrete_profile(a), discrete_profile(b));
    let knots: Vec<f64> = pa.knots().iter().chain(pb.knots()).copied().collect();
    let lo = knots.iter().copied().fold(0.0, f64::min) - 1.0;
    let hi = knots.iter().copied().fold(0.0, f64::max) + 1.0;
    let grid = linspace(lo, hi, 200);
    let ca = RenyiCurve::from_pld(&pld_from_discrete(a)).ok()?;
    let cb = RenyiCurve::from_pld(&pld_from_discrete(b)).ok()?;
    match check_dominance(&pa, &pb, &grid) {
        Dominance::Dominates => Some(check_renyi_dominance(&cb, &ca, q_grid)),
        Dominance::Dominated => Some(check_renyi_dominance(&ca, &cb, q_grid)),
        Dominance::Crossing(_) => None,
    }
}

fn dominance_one_way(seed: u64, trials: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q_grid = [1.1, 2.0, 5.0, 10.0];
    let (mut ordered, mut bad) = (0, 0);
    for _ in 0..trials {
        let a = random_pair(&mut rng, 3, 0.3);
        let b = random_pair(&mut rng, 3, 0.3);
        match one_way_dominance(&a, &b, &q_grid) {
            Some(true) => ordered += 1,
            Some(false) => bad += 1,
            None => {}
        }
    }
    let msg = format!("{ordered} ordered instances of {trials}, {bad} violations");
    if bad == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn oracle_atom_exactness() -> Outcome {
    let g = PointGuarantee { eps: 0.3, delta: 1e-3 };
    let kernel = pld_from_discrete(&rr_pair(RRParams { eps0: g.eps, delta0: g.delta }).map_err(|e| e.to_string())?);
    let grid = linspace(-2.0, 2.0, 41);
    let rep = grid_accountant(&kernel, 5, &grid, None).map_err(|e| e.to_string())?;
    let gs = vec![g; 5];
    let err = max_err(
        grid.iter().zip(&rep.deltas).map(|(&t, d)| (compose_point_guarantees(&gs, t).unwrap_or(f64::NAN) - d).abs()),
    );
    within("grid accountant vs recursion", err, 1e-12)
}

fn gaussian_grid_agreement() -> Outcome {
    let kappa = 0.5;
    let kernel = gaussian_grid_kernel(kappa, 1e-3, 40.0).map_err(|e| e.to_string())?;
    let mut err = 0.0f64;
    for k in [2u32, 10] {
        let kk = kappa * k as f64;
        let grid = linspace(-3.0, kk + 8.0 * (2.0 * kk).sqrt(), 60);
        let rep = grid_accountant(&kernel, k, &grid, None).map_err(|e| e.to_string())?;
        for (&e, d) in grid.iter().zip(&rep.deltas) {
            let want = gaussian_profile(GaussianParams { kappa: kk }, e).map_err(|e| e.to_string())?;
            err = err.max((d - want).abs());
        }
    }
    within("grid convolution vs composed Gaussian", err, 1e-4)
}

fn crossing_witness() -> Outcome {
    let rr = rr_profile_curve(RRParams { eps0: 3.0, delta0: 0.0 }).map_err(|e| e.to_string())?;
    let g = gaussian_profile_curve(4.5).map_err(|e| e.to_string())?;
    let c_rr = rr_renyi_curve(3.0).map_err(|e| e.to_string())?;
    let c_g = gaussian_renyi_curve(4.5).map_err(|e| e.to_string())?;
    let renyi = check_renyi_dominance(&c_rr, &c_g, &[1.1, 2.0, 5.0, 10.0, 50.0]);
    match check_dominance(&rr, &g, &linspace(-6.0, 6.0, 1201)) {
        Dominance::Crossing(w) if renyi => Ok(format!("profiles cross at eps = {w:.4}, Renyi order holds")),
        d => Err(format!("dominance {d:?}, Renyi order {renyi}")),
    }
}

fn rr_bromwich() -> Outcome {
    let curve = rr_renyi_curve(LN_2).map_err(|e| e.to_string())?;
    let cfg = BromwichConfig::default();
    let params = RRParams { eps0: LN_2, delta0: 0.0 };
    let mut err = 0.0f64;
    for e in [-1.0, -0.3, 0.2, 0.5] {
        err = err.max((profile_from_renyi(&curve, e, &cfg).map_err(|e| e.to_string())? - rr_profile(params, e)).abs());
    }
    within("inverse transform vs RR profile", err, 1e-6)
}

/// Runs the suite for `level`; the report depends only on `level` and `seed`.
pub fn run_suite(level: Level, seed: u64) -> Vec<Check> {
    let mut out = vec![
        check("gaussian_renyi_linearity", gaussian_linearity(&[0.5], &[2.0, 5.0])),
        check("bromwich_gaussian_recovery", gaussian_bromwich(&[0.0, 1.0])),
        check("rr_renyi_closed_form", rr_renyi_numeric(&[1.5, -0.5])),
        check("rr_empty_strip", empty_roc()),
        check("composition_vs_product", composition_vs_product(seed, 20)),
        check("recursion_vs_closed_form", recursion_vs_closed_form(seed ^ 1, &[1, 5, 20])),
        check("subsampling_vs_mixture", subsampling_vs_mixture(seed ^ 2, 20)),
        check("reversal_identities", reversal_identities(seed ^ 3, 50)),
        check("oracle_atom_exactness", oracle_atom_exactness()),
    ];
    match level {
        Level::Quick => out.push(check("dominance_one_way", dominance_one_way(seed ^ 4, 100))),
        Level::Full => {
            out.push(check("dominance_one_way", dominance_one_way(seed ^ 4, 1000)));
            out.push(check("gaussian_grid_agreement", gaussian_grid_agreement()));
            out.push(check("profile_crossing_witness", crossing_witness()));
            out.push(check("rr_bromwich_recovery", rr_bromwich()));
            out.push(check("reversal_identities_extended", reversal_identities(seed ^ 5, 200)));
        }
    }
    out
}

pub fn render(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        s.push_str(&format!("{} {:<30} {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    s.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes_and_is_deterministic() {
        let a = run_suite(Level::Quick, 11);
        for c in &a {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert_eq!(render(&a), render(&run_suite(Level::Quick, 11)));
    }
}
