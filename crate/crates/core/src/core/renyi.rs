use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::core::pld::{renyi_from_pld, reverse_pld, Pld};
use crate::error::{Error, Result};

type ECurve = Arc<dyn Fn(Complex64) -> Result<Complex64> + Send + Sync>;

/// The map q ↦ E_q = e^{(q−1)·R_q} on a strip of Re(q).
#[derive(Clone)]
pub struct RenyiCurve {
    e: ECurve,
    roc_re: (f64, f64),
}

impl fmt::Debug for RenyiCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RenyiCurve").field("roc_re", &self.roc_re).finish()
    }
}

/// ρ = log(E)/(q − 1) on the principal branch.
pub fn rho_from_e(e: Complex64, q: Complex64) -> Result<Complex64> {
    if q == Complex64::new(0.0, 0.0) || q == Complex64::new(1.0, 0.0) {
        return Err(Error::SingularOrder(q));
    }
    Ok(e.ln() / (q - 1.0))
}

impl RenyiCurve {
    pub fn new<F>(e: F, roc_re: (f64, f64)) -> Self
    where
        F: Fn(Complex64) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self { e: Arc::new(e), roc_re }
    }

    /// The curve E_q ≡ 1 of identical distributions.
    pub fn identity() -> Self {
        Self::new(|_| Ok(Complex64::new(1.0, 0.0)), (f64::NEG_INFINITY, f64::INFINITY))
    }

    /// Moment curve of a PLD. Mass at +∞ caps the strip at Re(q) < 1, and
    /// Q-mass outside the support of P caps it at Re(q) > 0.
    pub fn from_pld(pld: &Pld) -> Result<Self> {
        let missing = reverse_pld(pld)?.mass_pos_inf();
        let lo = if missing > 1e-15 { 0.0 } else { f64::NEG_INFINITY };
        let hi = if pld.mass_pos_inf() > 0.0 { 1.0 } else { f64::INFINITY };
        let pld = pld.clone();
        Ok(Self::new(
            move |q| {
                if q.re <= lo {
                    return Err(Error::Divergence(format!(
                        "Q charges outcomes P misses; E_q infinite for Re(q) = {} <= 0",
                        q.re
                    )));
                }
                renyi_from_pld(&pld, q)
            },
            (lo, hi),
        ))
    }

    pub fn roc_re(&self) -> (f64, f64) {
        self.roc_re
    }

    /// E_q.
    pub fn e(&self, q: Complex64) -> Result<Complex64> {
        (self.e)(q)
    }

    /// ρ(q) = log(E_q)/(q − 1).
    pub fn rho(&self, q: Complex64) -> Result<Complex64> {
        if q == Complex64::new(0.0, 0.0) || q == Complex64::new(1.0, 0.0) {
            return Err(Error::SingularOrder(q));
        }
        rho_from_e(self.e(q)?, q)
    }
}
