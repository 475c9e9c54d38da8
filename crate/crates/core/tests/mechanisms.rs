mod common;

use common::{linspace, rr};
use dp_laplace::core::*;
use dp_laplace::laplace::renyi_from_profile;
use dp_laplace::mechanisms::*;
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn gaussian_profile_is_self_reversing() {
    for kappa in [0.125, 0.5, 2.0, 8.0] {
        let g = gaussian_profile_curve(kappa).unwrap();
        // Force the generic reversal rather than the symmetric shortcut.
        let window = g.window();
        let generic = PrivacyProfile::analytic(move |e| g.eval(e), vec![], window).with_tails(1.0, 0.0);
        let rev = reverse_profile(&generic);
        for e in linspace(-5.0, 5.0, 101) {
            assert!((rev.eval(e) - generic.eval(e)).abs() < 1e-10, "kappa {kappa} eps {e}");
        }
    }
}

proptest! {
    #[test]
    fn rr_profile_matches_pair(eps0 in 0.0f64..4.0, delta0 in 0.0f64..0.5) {
        let params = RRParams::new(eps0, delta0).unwrap();
        let pair = rr_pair(params).unwrap();
        for t in linspace(-5.0, 5.0, 100) {
            prop_assert!((rr_profile(params, t) - profile_from_discrete(&pair, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn profiles_are_monotone_and_above_floor(kappa in 0.01f64..20.0, eps0 in 0.0f64..3.0, delta0 in 0.0f64..0.3) {
        let curves = [gaussian_profile_curve(kappa).unwrap(), rr_profile_curve(RRParams::new(eps0, delta0).unwrap()).unwrap()];
        for c in &curves {
            let mut prev = f64::INFINITY;
            for e in linspace(-10.0, 10.0, 1000) {
                let d = c.eval(e);
                prop_assert!(d <= prev + 1e-15 && d >= floor_delta(e) - 1e-15);
                prev = d;
            }
        }
    }
}

#[test]
fn rr_renyi_matches_pld_moments() {
    for eps0 in [0.3, std::f64::consts::LN_2, 2.0] {
        let pld = pld_from_discrete(&rr(eps0, 0.0));
        let qs = [
            Complex64::new(-2.0, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(1.5, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(5.0, 0.0),
            Complex64::new(2.0, 1.0),
            Complex64::new(2.0, -1.0),
        ];
        for q in qs {
            let want = rho_from_e(renyi_from_pld(&pld, q).unwrap(), q).unwrap();
            let got = rr_renyi(eps0, q).unwrap();
            assert!((got - want).norm() < 1e-10, "eps0 {eps0} q {q}: {got} vs {want}");
        }
    }
}

#[test]
fn gaussian_renyi_matches_transform() {
    for kappa in [0.125, 0.5, 2.0] {
        let prof = gaussian_profile_curve(kappa).unwrap();
        for q in [1.5, 2.0, 5.0] {
            let qc = Complex64::new(q, 0.0);
            let rho = rho_from_e(renyi_from_profile(&prof, qc).unwrap(), qc).unwrap();
            let want = gaussian_renyi(GaussianParams::new(kappa).unwrap(), qc).unwrap();
            assert!((rho - want).norm() < 1e-6, "kappa {kappa} q {q}");
        }
    }
}

#[test]
fn point_guarantee_dominates_every_pair_meeting_it() {
    let grid = linspace(-4.0, 4.0, 201);
    let pairs = dp_laplace::oracle::random_pairs(5, 200, 2..=4, 0.2);
    for pair in pairs {
        let eps0 = 0.7;
        let delta0 = profile_from_discrete(&pair, eps0).max(profile_from_discrete(&pair.swapped(), eps0));
        let dom = dominating_profile_for_point_dp(eps0, delta0).unwrap();
        for &e in &grid {
            assert!(profile_from_discrete(&pair, e) <= dom.eval(e) + 1e-12);
        }
    }
}

#[test]
fn degenerate_parameters_are_rejected() {
    assert!(matches!(GaussianParams::new(-1.0), Err(dp_laplace::Error::DegenerateKappa(_))));
    assert!(RRParams::new(-0.1, 0.0).is_err());
    assert!(RRParams::new(1.0, 1.5).is_err());
    assert!(RRParams::new(1.0, 1.0).is_ok());
    assert!(rr_renyi(1.0, Complex64::new(1.0, 0.0)).is_err());
}
