mod common;

use common::{linspace, rr};
use dp_laplace::composition::{compose_point_guarantees, PointGuarantee};
use dp_laplace::core::*;
use dp_laplace::mechanisms::*;
use dp_laplace::oracle::*;
use dp_laplace::verify::one_way_dominance;

#[test]
fn atom_kernels_are_exact() {
    for (eps0, delta0, k) in [(0.1, 1e-8, 25u32), (0.8, 0.02, 6), (std::f64::consts::LN_2, 0.0, 3)] {
        let kernel = pld_from_discrete(&rr(eps0, delta0));
        let grid = linspace(-3.0, 3.0, 61);
        let rep = grid_accountant(&kernel, k, &grid, None).unwrap();
        let gs = vec![PointGuarantee::new(eps0, delta0).unwrap(); k as usize];
        for (&t, d) in grid.iter().zip(&rep.deltas) {
            assert!((compose_point_guarantees(&gs, t).unwrap() - d).abs() < 1e-12);
        }
    }
}

#[test]
fn gaussian_grid_matches_analytic_composition() {
    let kappa = 0.4;
    let kernel = gaussian_grid_kernel(kappa, 1e-3, 40.0).unwrap();
    for k in [2u32, 10] {
        let kk = kappa * k as f64;
        let grid = linspace(-4.0, kk + 10.0 * (2.0 * kk).sqrt(), 200);
        let rep = grid_accountant(&kernel, k, &grid, None).unwrap();
        let exact = gaussian_profile_curve(kk).unwrap();
        let err = grid.iter().zip(&rep.deltas).map(|(&e, d)| (exact.eval(e) - d).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4, "k {k}: {err}");
    }
}

#[test]
fn rounding_up_is_pessimistic() {
    let kernel = pld_from_discrete(&rr(0.37, 0.0));
    let grid = linspace(-2.0, 3.0, 51);
    let exact = grid_accountant(&kernel, 8, &grid, None).unwrap();
    let coarse = grid_accountant(&kernel, 8, &grid, Some(0.05)).unwrap();
    for (a, b) in exact.deltas.iter().zip(&coarse.deltas) {
        assert!(b + 1e-15 >= *a);
    }
    assert!(coarse.error_bound > 0.0);
}

#[test]
fn profile_dominance_implies_renyi_dominance() {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(99);
    let mut ordered = 0;
    for _ in 0..1000 {
        let a = random_pair(&mut rng, 3, 0.3);
        let b = random_pair(&mut rng, 3, 0.3);
        if let Some(ok) = one_way_dominance(&a, &b, &[1.1, 2.0, 5.0, 10.0]) {
            assert!(ok, "{a:?} {b:?}");
            ordered += 1;
        }
    }
    assert!(ordered > 50);
}

#[test]
fn renyi_dominance_does_not_imply_profile_dominance() {
    let rr3 = rr_profile_curve(RRParams::new(3.0, 0.0).unwrap()).unwrap();
    let g = gaussian_profile_curve(4.5).unwrap();
    assert!(check_renyi_dominance(
        &rr_renyi_curve(3.0).unwrap(),
        &gaussian_renyi_curve(4.5).unwrap(),
        &[1.1, 2.0, 5.0, 10.0, 50.0]
    ));
    let Dominance::Crossing(w) = check_dominance(&rr3, &g, &linspace(-6.0, 6.0, 601)) else {
        panic!("expected crossing profiles");
    };
    assert!((-6.0..=6.0).contains(&w));
}

#[test]
fn dominance_edge_cases() {
    let p = discrete_profile(&rr(1.0, 0.0));
    let grid = linspace(-5.0, 5.0, 101);
    assert_eq!(check_dominance(&p, &p, &grid), Dominance::Dominates);
    assert_eq!(check_dominance(&PrivacyProfile::floor(), &p, &grid), Dominance::Dominated);
    let c = RenyiCurve::from_pld(&pld_from_discrete(&rr(1.0, 0.1))).unwrap();
    let d = RenyiCurve::from_pld(&pld_from_discrete(&rr(1.0, 0.0))).unwrap();
    // Mass at +∞ makes every order above one divergent.
    assert!(check_renyi_dominance(&d, &c, &[2.0]));
    assert!(!check_renyi_dominance(&c, &d, &[2.0]));
}
