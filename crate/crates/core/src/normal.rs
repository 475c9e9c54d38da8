//! Standard normal tail functions.

use libm::erfc;
use std::f64::consts::{PI, SQRT_2};

const LOG_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

/// Survival function Φ̄(x) = P[N(0,1) > x].
pub fn sf(x: f64) -> f64 {
    if x > 37.0 {
        return log_sf(x).exp();
    }
    0.5 * erfc(x / SQRT_2)
}

/// Natural log of Φ̄(x), accurate far into the upper tail.
pub fn log_sf(x: f64) -> f64 {
    if x < 25.0 {
        return (0.5 * erfc(x / SQRT_2)).ln();
    }
    // Mills ratio via the continued fraction 1/(x+1/(x+2/(x+3/(x+...)))).
    let mut r = x;
    for k in (1..=60).rev() {
        r = x + k as f64 / r;
    }
    -0.5 * x * x - LOG_SQRT_2PI - r.ln()
}

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}
