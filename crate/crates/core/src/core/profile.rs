use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// How a profile is represented internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Analytic,
    Tabulated,
}

type Curve = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A privacy profile ε ↦ δ(ε).
///
/// `knots` are the abscissas where the curve has derivative jumps. Left of
/// `window.0 - 1` the curve is taken to be exactly 1 − c·e^ε with
/// c = `left_c` (the Q-mass of the support of P); right of the window it tends
/// to `right_limit` (the P-mass where Q vanishes).
#[derive(Clone)]
pub struct PrivacyProfile {
    kind: ProfileKind,
    curve: Curve,
    knots: Vec<f64>,
    window: (f64, f64),
    left_c: f64,
    right_limit: f64,
    symmetric: bool,
}

impl fmt::Debug for PrivacyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrivacyProfile")
            .field("kind", &self.kind)
            .field("knots", &self.knots)
            .field("window", &self.window)
            .field("left_c", &self.left_c)
            .field("right_limit", &self.right_limit)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

/// The P = Q profile max(0, 1 − e^ε).
pub fn floor_delta(eps: f64) -> f64 {
    if eps >= 0.0 {
        0.0
    } else {
        -eps.exp_m1()
    }
}

fn sorted_knots(mut knots: Vec<f64>) -> Vec<f64> {
    knots.retain(|k| k.is_finite());
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    knots
}

impl PrivacyProfile {
    /// Wraps a closed-form curve.
    pub fn analytic<F>(f: F, knots: Vec<f64>, window: (f64, f64)) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::build(ProfileKind::Analytic, Arc::new(f), knots, window)
    }

    fn build(kind: ProfileKind, curve: Curve, knots: Vec<f64>, window: (f64, f64)) -> Self {
        let knots = sorted_knots(knots);
        let mut lo = window.0.min(window.1);
        let mut hi = window.0.max(window.1);
        if let (Some(&a), Some(&b)) = (knots.first(), knots.last()) {
            lo = lo.min(a);
            hi = hi.max(b);
        }
        let l = lo - 1.0;
        let left_c = ((1.0 - curve(l).clamp(0.0, 1.0)) * (-l).exp()).clamp(0.0, 1.0);
        let r = curve(hi + 60.0);
        let right_limit = if r.is_nan() { 0.0 } else { r.clamp(0.0, 1.0) };
        Self { kind, curve, knots, window: (lo, hi), left_c, right_limit, symmetric: false }
    }

    /// Overrides the numerically fitted tail constants with exact values.
    pub fn with_tails(mut self, left_c: f64, right_limit: f64) -> Self {
        self.left_c = left_c.clamp(0.0, 1.0);
        self.right_limit = right_limit.clamp(0.0, 1.0);
        self
    }

    /// Marks the profile as equal to its own reversal.
    pub fn with_symmetry(mut self) -> Self {
        self.symmetric = true;
        self
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// The floor profile max(0, 1 − e^ε) of identical distributions.
    pub fn floor() -> Self {
        Self::analytic(floor_delta, vec![0.0], (0.0, 0.0)).with_tails(1.0, 0.0).with_symmetry()
    }

    /// Monotone piecewise-linear interpolation through `(eps[i], delta[i])`.
    ///
    /// Left of the table the curve continues as 1 − c·e^ε through the first
    /// node; right of the table it stays at the last value.
    pub fn tabulated(eps: Vec<f64>, delta: Vec<f64>, knots: Vec<f64>) -> Result<Self> {
        if eps.len() != delta.len() || eps.len() < 2 {
            return Err(Error::InvalidParameter(
                "tabulated profile needs at least two matching nodes".into(),
            ));
        }
        if eps.windows(2).any(|w| !(w[1] > w[0])) || eps.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter("tabulated abscissas must increase".into()));
        }
        if delta.iter().any(|d| !(0.0..=1.0).contains(d)) {
            return Err(Error::InvalidParameter("tabulated delta outside [0, 1]".into()));
        }
        let mut d = delta;
        for i in 0..d.len() {
            d[i] = d[i].max(floor_delta(eps[i]));
            if i > 0 {
                d[i] = d[i].min(d[i - 1]);
            }
        }
        let c = (1.0 - d[0]) * (-eps[0]).exp();
        let last = d[d.len() - 1];
        let window = (eps[0], eps[eps.len() - 1]);
        let e = eps;
        let curve = move |x: f64| {
            let n = e.len();
            if x < e[0] {
                return 1.0 - c * x.exp();
            }
            if x >= e[n - 1] {
                return d[n - 1];
            }
            let i = e.partition_point(|&v| v < x);
            if e[i] == x {
                return d[i];
            }
            let w = (x - e[i - 1]) / (e[i] - e[i - 1]);
            d[i - 1] + w * (d[i] - d[i - 1])
        };
        Ok(Self::build(ProfileKind::Tabulated, Arc::new(curve), knots, window).with_tails(c, last))
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// δ(ε), clamped to `[max(0, 1 − e^ε), 1]`.
    pub fn eval(&self, eps: f64) -> f64 {
        if eps.is_nan() {
            return f64::NAN;
        }
        if eps == f64::NEG_INFINITY {
            return 1.0;
        }
        if eps == f64::INFINITY {
            return self.limit_pos_inf();
        }
        let v = (self.curve)(eps);
        let lo = floor_delta(eps);
        if v.is_nan() {
            return lo;
        }
        v.clamp(lo, 1.0)
    }

    /// lim δ(ε) as ε → ∞, i.e. the mass P assigns where Q vanishes.
    pub fn limit_pos_inf(&self) -> f64 {
        self.right_limit
    }

    /// The constant c in δ(ε) = 1 − c·e^ε left of the window.
    pub fn left_tail_constant(&self) -> f64 {
        self.left_c
    }

    /// Samples onto the union of the knots in `[lo, hi]` and a uniform grid
    /// with spacing at most `max_step`, returning a tabulated profile.
    pub fn tabulate(&self, lo: f64, hi: f64, max_step: f64) -> Result<Self> {
        if !(hi > lo) || !(max_step > 0.0) {
            return Err(Error::InvalidParameter("tabulate needs lo < hi and a positive step".into()));
        }
        let n = ((hi - lo) / max_step).ceil() as usize;
        let mut xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        xs.extend(self.knots.iter().copied().filter(|k| *k > lo && *k < hi));
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let ds = xs.iter().map(|&x| self.eval(x)).collect();
        let knots = self.knots.iter().copied().filter(|k| *k >= lo && *k <= hi).collect();
        Self::tabulated(xs, ds, knots)
    }
}

/// ε ↦ 1 − e^ε + e^ε·δ(−ε): the profile with P and Q exchanged.
pub fn reverse_profile(prof: &PrivacyProfile) -> PrivacyProfile {
    if prof.symmetric {
        return prof.clone();
    }
    let inner = prof.clone();
    let (lo, hi) = prof.window;
    let flat = 1.0 - prof.left_c;
    let edge = -(lo - 1.0);
    let f = move |e: f64| {
        if e >= edge {
            return flat;
        }
        let v = inner.eval(-e);
        if e <= 0.0 {
            -e.exp_m1() + e.exp() * v
        } else {
            e.exp() * (v + (-e).exp_m1())
        }
    };
    let knots = prof.knots.iter().map(|k| -k).collect();
    let left_c = 1.0 - prof.right_limit;
    PrivacyProfile::build(prof.kind, Arc::new(f), knots, (-hi, -lo)).with_tails(left_c, flat)
}
