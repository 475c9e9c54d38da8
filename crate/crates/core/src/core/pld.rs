use num_complex::Complex64;

use crate::core::discrete::DiscretePair;
use crate::error::{Error, Result};

/// Atoms closer than this in z are merged.
pub const ATOM_MERGE_TOL: f64 = 1e-12;
const MASS_TOL: f64 = 1e-12;

/// Uniformly gridded density of the privacy loss. Node `i` sits at
/// `z_min + i·step` and carries mass `densities[i]·step`.
#[derive(Debug, Clone, PartialEq)]
pub struct PldGrid {
    z_min: f64,
    step: f64,
    densities: Vec<f64>,
}

impl PldGrid {
    pub fn new(z_min: f64, step: f64, densities: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || !z_min.is_finite() {
            return Err(Error::InvalidPld(format!("bad grid: z_min={z_min}, step={step}")));
        }
        if densities.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidPld("grid densities must be finite and non-negative".into()));
        }
        Ok(Self { z_min, step, densities })
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn len(&self) -> usize {
        self.densities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }

    pub fn z(&self, i: usize) -> f64 {
        self.z_min + i as f64 * self.step
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.densities[i] * self.step
    }

    pub fn total_mass(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.step
    }
}

/// Distribution of the privacy loss Z = log(P/Q) under P.
#[derive(Debug, Clone, PartialEq)]
pub struct Pld {
    atoms: Vec<(f64, f64)>,
    grid: Option<PldGrid>,
    mass_pos_inf: f64,
}

pub(crate) fn merge_atoms(mut atoms: Vec<(f64, f64)>, tol: f64) -> Vec<(f64, f64)> {
    atoms.retain(|a| a.1 > 0.0);
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (z, m) in atoms {
        match out.last_mut() {
            Some(last) if (z - last.0).abs() < tol => last.1 += m,
            _ => out.push((z, m)),
        }
    }
    out
}

impl Pld {
    /// Builds a PLD whose total mass is 1 within 1e−12.
    pub fn new(atoms: Vec<(f64, f64)>, grid: Option<PldGrid>, mass_pos_inf: f64) -> Result<Self> {
        Self::with_mass_tolerance(atoms, grid, mass_pos_inf, MASS_TOL)
    }

    /// As [`Pld::new`] with a caller-chosen tolerance on total mass.
    pub fn with_mass_tolerance(
        atoms: Vec<(f64, f64)>,
        grid: Option<PldGrid>,
        mass_pos_inf: f64,
        tol: f64,
    ) -> Result<Self> {
        if atoms.iter().any(|(z, m)| !z.is_finite() || !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidPld("atoms need finite z and non-negative mass".into()));
        }
        if !(0.0..=1.0 + tol).contains(&mass_pos_inf) {
            return Err(Error::InvalidPld(format!("mass at +inf is {mass_pos_inf}")));
        }
        let pld = Self { atoms: merge_atoms(atoms, ATOM_MERGE_TOL), grid, mass_pos_inf };
        let total = pld.total_mass();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidPld(format!("total mass {total} differs from 1")));
        }
        Ok(pld)
    }

    /// Assembles a PLD without the total-mass check; callers track mass error.
    pub(crate) fn from_parts(atoms: Vec<(f64, f64)>, grid: Option<PldGrid>, mass_pos_inf: f64) -> Self {
        Self { atoms: merge_atoms(atoms, ATOM_MERGE_TOL), grid, mass_pos_inf }
    }

    /// A single atom of mass one at `z`.
    pub fn point_mass(z: f64) -> Self {
        Self { atoms: vec![(z, 1.0)], grid: None, mass_pos_inf: 0.0 }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn grid(&self) -> Option<&PldGrid> {
        self.grid.as_ref()
    }

    pub fn mass_pos_inf(&self) -> f64 {
        self.mass_pos_inf
    }

    /// Mass on finite values of Z.
    pub fn finite_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum::<f64>() + self.grid.as_ref().map_or(0.0, |g| g.total_mass())
    }

    pub fn total_mass(&self) -> f64 {
        self.finite_mass() + self.mass_pos_inf
    }

    /// Smallest and largest finite support points.
    pub fn support(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        if let (Some(a), Some(b)) = (self.atoms.first(), self.atoms.last()) {
            lo = a.0;
            hi = b.0;
        }
        if let Some(g) = self.grid.as_ref().filter(|g| !g.is_empty()) {
            lo = lo.min(g.z(0));
            hi = hi.max(g.z(g.len() - 1));
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Visits every finite node as (z, mass).
    pub fn for_each_node(&self, mut f: impl FnMut(f64, f64)) {
        for &(z, m) in &self.atoms {
            f(z, m);
        }
        if let Some(g) = &self.grid {
            for (i, d) in g.densities.iter().enumerate() {
                if *d > 0.0 {
                    f(g.z(i), d * g.step);
                }
            }
        }
    }
}

/// Atoms at log(p_i/q_i) with mass p_i; outcomes with q_i = 0 go to +∞.
pub fn pld_from_discrete(pair: &DiscretePair) -> Pld {
    let mut atoms = Vec::new();
    let mut inf = 0.0;
    for (&p, &q) in pair.p().iter().zip(pair.q()) {
        if p == 0.0 {
            continue;
        }
        if q == 0.0 {
            inf += p;
        } else {
            atoms.push(((p / q).ln(), p));
        }
    }
    Pld { atoms: merge_atoms(atoms, ATOM_MERGE_TOL), grid: None, mass_pos_inf: inf }
}

/// The PLD of the reversed pair: (z, m) ↦ (−z, m·e^{−z}).
pub fn reverse_pld(pld: &Pld) -> Result<Pld> {
    let atoms: Vec<(f64, f64)> = pld.atoms.iter().map(|&(z, m)| (-z, m * (-z).exp())).collect();
    let grid = match &pld.grid {
        Some(g) if !g.is_empty() => {
            let n = g.len();
            let z_max = g.z(n - 1);
            let dens = (0..n).rev().map(|i| g.densities[i] * (-g.z(i)).exp()).collect();
            Some(PldGrid::new(-z_max, g.step, dens)?)
        }
        _ => None,
    };
    let mapped: f64 =
        atoms.iter().map(|a| a.1).sum::<f64>() + grid.as_ref().map_or(0.0, |g| g.total_mass());
    if mapped > 1.0 + 1e-9 {
        return Err(Error::InvalidPld(format!("reversed finite mass {mapped} exceeds one")));
    }
    Ok(Pld { atoms: merge_atoms(atoms, ATOM_MERGE_TOL), grid, mass_pos_inf: (1.0 - mapped).max(0.0) })
}

/// δ(ε) = E[max(0, 1 − e^{ε−Z})] + P[Z = +∞].
pub fn profile_from_pld(pld: &Pld, eps: f64) -> f64 {
    let mut s = 0.0;
    pld.for_each_node(|z, m| {
        if z > eps {
            s += m * -(eps - z).exp_m1();
        }
    });
    (s + pld.mass_pos_inf).min(1.0)
}

/// E_q = E[e^{(q−1)Z}] for complex q.
pub fn renyi_from_pld(pld: &Pld, q: Complex64) -> Result<Complex64> {
    if pld.mass_pos_inf > 0.0 && q.re >= 1.0 {
        return Err(Error::Divergence(format!(
            "mass {:e} at +inf makes E_q infinite for Re(q) = {} >= 1",
            pld.mass_pos_inf, q.re
        )));
    }
    let a = q - 1.0;
    let mut s = Complex64::new(0.0, 0.0);
    pld.for_each_node(|z, m| s += m * (a * z).exp());
    Ok(s)
}
