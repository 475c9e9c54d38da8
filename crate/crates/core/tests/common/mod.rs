#![allow(dead_code)]

use dp_laplace::core::DiscretePair;
use proptest::prelude::*;

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Pairs on 3–5 outcomes, sometimes with a zeroed coordinate in P and/or Q.
pub fn pair_strategy() -> impl Strategy<Value = DiscretePair> {
    (3usize..=5)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.01f64..1.0, n),
                prop::collection::vec(0.01f64..1.0, n),
                prop::option::of(0..n),
                prop::option::of(0..n),
            )
        })
        .prop_filter_map("degenerate pair", |(mut p, mut q, zp, zq)| {
            if let Some(i) = zp {
                p[i] = 0.0;
            }
            if let Some(i) = zq {
                q[i] = 0.0;
            }
            let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
            p.iter_mut().for_each(|x| *x /= sp);
            q.iter_mut().for_each(|x| *x /= sq);
            DiscretePair::new(p, q).ok()
        })
}

pub fn rr(eps0: f64, delta0: f64) -> DiscretePair {
    dp_laplace::mechanisms::rr_pair(dp_laplace::mechanisms::RRParams::new(eps0, delta0).unwrap()).unwrap()
}
