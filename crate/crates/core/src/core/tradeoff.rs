use std::cmp::Ordering;

use crate::core::discrete::DiscretePair;

/// Clamps to [0, 1], absorbing summation error near the ends.
fn snap(x: f64) -> f64 {
    if x < 1e-12 {
        0.0
    } else if x > 1.0 - 1e-12 {
        1.0
    } else {
        x
    }
}

/// Vertices (α, β) of the Neyman–Pearson curve of P vs Q: outcomes are added
/// to the rejection region in decreasing order of q_i/p_i.
fn vertices(pair: &DiscretePair) -> Vec<(f64, f64)> {
    let mut idx: Vec<usize> = (0..pair.n()).collect();
    let (p, q) = (pair.p(), pair.q());
    idx.sort_by(|&i, &j| (q[j] * p[i]).partial_cmp(&(q[i] * p[j])).unwrap_or(Ordering::Equal));
    let mut out = Vec::with_capacity(pair.n() + 1);
    let (mut a, mut b) = (0.0, 0.0);
    out.push((0.0, 1.0));
    for i in idx {
        a += p[i];
        b += q[i];
        out.push((snap(a), snap(1.0 - b)));
    }
    if let Some(last) = out.last_mut() {
        *last = (1.0, 0.0);
    }
    out
}

/// Smallest ordinate of the polyline at abscissa `x`.
fn lowest_on_polyline(pts: &[(f64, f64)], x: f64) -> f64 {
    let mut best = f64::INFINITY;
    for w in pts.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        let (lo, hi) = if x0 <= x1 { (x0, x1) } else { (x1, x0) };
        if x < lo || x > hi {
            continue;
        }
        let y = if x1 == x0 { y0.min(y1) } else { y0 + (x - x0) / (x1 - x0) * (y1 - y0) };
        best = best.min(y);
    }
    best
}

/// Minimal type-II error β at type-I level α over all randomized tests.
pub fn tradeoff_from_discrete(pair: &DiscretePair, alpha: f64) -> f64 {
    let a = alpha.clamp(0.0, 1.0);
    lowest_on_polyline(&vertices(pair), a).clamp(0.0, 1.0)
}

/// Left-continuous inverse β ↦ inf{α : f(α) ≤ β} of the trade-off curve of P vs Q.
pub fn tradeoff_inverse(pair: &DiscretePair, beta: f64) -> f64 {
    let b = beta.clamp(0.0, 1.0);
    let swapped: Vec<(f64, f64)> = vertices(pair).into_iter().map(|(a, b)| (b, a)).collect();
    lowest_on_polyline(&swapped, b).clamp(0.0, 1.0)
}

/// Checks f_{P|Q}^{-1}(β) = f_{Q|P}(β) within 1e−9 at every grid point.
pub fn check_tradeoff_reversal(pair: &DiscretePair, grid: &[f64]) -> bool {
    let rev = pair.swapped();
    grid.iter()
        .all(|&b| (tradeoff_inverse(pair, b) - tradeoff_from_discrete(&rev, b)).abs() <= 1e-9)
}
