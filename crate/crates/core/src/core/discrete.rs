use crate::core::profile::PrivacyProfile;
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Two probability vectors over a shared finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePair {
    p: Vec<f64>,
    q: Vec<f64>,
}

impl DiscretePair {
    /// Validates both vectors and drops outcomes that neither distribution charges.
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::InvalidDistribution(format!(
                "support sizes differ: {} vs {}",
                p.len(),
                q.len()
            )));
        }
        for (name, v) in [("p", &p), ("q", &q)] {
            if let Some(x) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(Error::InvalidDistribution(format!("{name} has entry {x}")));
            }
            let s: f64 = v.iter().sum();
            if (s - 1.0).abs() > SUM_TOL {
                return Err(Error::InvalidDistribution(format!("{name} sums to {s}")));
            }
        }
        let (p, q): (Vec<f64>, Vec<f64>) =
            p.into_iter().zip(q).filter(|(a, b)| *a > 0.0 || *b > 0.0).unzip();
        Ok(Self { p, q })
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// The pair with the roles of P and Q exchanged.
    pub fn swapped(&self) -> Self {
        Self { p: self.q.clone(), q: self.p.clone() }
    }

    /// Finite log-likelihood ratios log(p_i/q_i), sorted and deduplicated.
    pub fn log_ratios(&self) -> Vec<f64> {
        let mut z: Vec<f64> = self
            .p
            .iter()
            .zip(&self.q)
            .filter(|(a, b)| **a > 0.0 && **b > 0.0)
            .map(|(a, b)| (a / b).ln())
            .collect();
        z.sort_by(|a, b| a.partial_cmp(b).unwrap());
        z.dedup();
        z
    }

    /// True when Q(S) = 0 implies P(S) = 0.
    pub fn p_abs_cont_q(&self) -> bool {
        self.p.iter().zip(&self.q).all(|(a, b)| *b > 0.0 || *a == 0.0)
    }
}

/// Hockey-stick divergence Σ max(0, p_i − e^ε q_i).
pub fn profile_from_discrete(pair: &DiscretePair, eps: f64) -> f64 {
    let e = eps.exp();
    let s: f64 = pair
        .p
        .iter()
        .zip(&pair.q)
        .map(|(&a, &b)| if b == 0.0 { a } else { (a - e * b).max(0.0) })
        .sum();
    s.min(1.0)
}

/// The privacy profile of a discrete pair as a curve.
pub fn discrete_profile(pair: &DiscretePair) -> PrivacyProfile {
    let knots = pair.log_ratios();
    let window = match (knots.first(), knots.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (-1.0, 1.0),
    };
    let c: f64 = pair.p.iter().zip(&pair.q).filter(|(a, _)| **a > 0.0).map(|(_, b)| b).sum();
    let beta: f64 = pair.p.iter().zip(&pair.q).filter(|(_, b)| **b == 0.0).map(|(a, _)| a).sum();
    let pair = pair.clone();
    PrivacyProfile::analytic(move |e| profile_from_discrete(&pair, e), knots, window).with_tails(c, beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(DiscretePair::new(vec![0.5, 0.5], vec![1.0]).is_err());
        assert!(DiscretePair::new(vec![0.5, 0.6], vec![0.5, 0.5]).is_err());
        assert!(DiscretePair::new(vec![-0.1, 1.1], vec![0.5, 0.5]).is_err());
        let pr = DiscretePair::new(vec![0.5, 0.0, 0.5], vec![0.5, 0.0, 0.5]).unwrap();
        assert_eq!(pr.n(), 2);
    }

    #[test]
    fn basic_values() {
        let d = DiscretePair::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(profile_from_discrete(&d, 0.0), 1.0);
        assert_eq!(profile_from_discrete(&d, 800.0), 1.0);
        let s = DiscretePair::new(vec![0.3, 0.7], vec![0.3, 0.7]).unwrap();
        assert_eq!(profile_from_discrete(&s, 0.0), 0.0);
        let rr = DiscretePair::new(vec![2.0 / 3.0, 1.0 / 3.0], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert!((profile_from_discrete(&rr, 0.0) - 1.0 / 3.0).abs() < 1e-15);
    }
}
