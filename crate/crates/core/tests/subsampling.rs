mod common;

use common::{linspace, pair_strategy};
use dp_laplace::core::*;
use dp_laplace::mechanisms::*;
use dp_laplace::subsampling::*;
use dp_laplace::verify::mixture_pair;
use proptest::prelude::*;

proptest! {
    #[test]
    fn matches_mixture_oracle(pair in pair_strategy()) {
        let prof = discrete_profile(&pair);
        for lambda in [0.1, 0.3, 0.5, 0.9] {
            let sub = poisson_subsample_profile(&prof, SubsampleParams::new(lambda).unwrap()).unwrap();
            let mix = mixture_pair(&pair, lambda);
            for e in linspace(-5.0, 5.0, 100) {
                prop_assert!((sub.eval(e) - profile_from_discrete(&mix, e)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reversal_matches_swapped_mixture(pair in pair_strategy()) {
        let prof = discrete_profile(&pair);
        for lambda in [0.1, 0.5, 0.9] {
            let rev = subsampled_reverse_profile(&prof, SubsampleParams::new(lambda).unwrap()).unwrap();
            let mix = mixture_pair(&pair, lambda).swapped();
            for e in linspace(-5.0, 5.0, 100) {
                prop_assert!((rev.eval(e) - profile_from_discrete(&mix, e)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn subsampling_amplifies(kappa in 0.05f64..5.0, lambda in 0.01f64..0.99) {
        let prof = gaussian_profile_curve(kappa).unwrap();
        let sub = poisson_subsample_profile(&prof, SubsampleParams::new(lambda).unwrap()).unwrap();
        for e in linspace(0.0, 8.0, 60) {
            prop_assert!(sub.eval(e) <= prof.eval(e) + 1e-15);
        }
    }
}

#[test]
fn continuous_at_the_seam() {
    for lambda in [0.1f64, 0.3, 0.5, 0.9] {
        let brk = (-lambda).ln_1p();
        for inner in [gaussian_profile_curve(1.0).unwrap(), rr_profile_curve(RRParams::new(1.0, 0.05).unwrap()).unwrap()] {
            let sub = poisson_subsample_profile(&inner, SubsampleParams::new(lambda).unwrap()).unwrap();
            let (l, r) = (sub.eval(brk - 1e-12), sub.eval(brk + 1e-12));
            assert!((l - r).abs() < 1e-10, "lambda {lambda}: {l} vs {r}");
        }
    }
}

#[test]
fn two_sided_guarantee_is_the_larger_direction() {
    let inner = rr_profile_curve(RRParams::new(2.0, 0.01).unwrap()).unwrap();
    let p = SubsampleParams::new(0.2).unwrap();
    let fwd = poisson_subsample_profile(&inner, p).unwrap();
    let rev = subsampled_reverse_profile(&inner, p).unwrap();
    for e in linspace(-1.0, 3.0, 41) {
        let two = pointwise_two_sided_guarantee(&inner, p, e).unwrap();
        assert_eq!(two, fwd.eval(e).max(rev.eval(e)));
    }
    assert!(SubsampleParams::new(0.0).is_err() && SubsampleParams::new(1.2).is_err());
}
