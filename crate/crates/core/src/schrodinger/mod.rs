//! Schrödinger operators `-Δ + V` on `L²(ℝ^d)` with compactly supported C¹
//! potentials.
//!
//! The basis at level `n` is the Fourier transform of normalized indicator
//! functions of cubes of edge `1/n`. In that basis `-Δ` is diagonal with
//! closed-form entries, while the potential elements are approximated by a
//! lattice sum over `V` sampled on `(1/l)ℤ^d`. See [`basis`] and [`assembly`].

pub mod assembly;
pub mod basis;
pub mod potential;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use assembly::{
    assemble_hnl, choose_l, corollary_bound, element_bound, gamma3, lattice_pl, potential_element,
    step_potential, AssembledHamiltonian, LatticeSampling,
};
pub use basis::{
    basis_eval, laplacian_element, lattice_ln, lattice_ln_with, sup_norm_bound, FourierBasis,
    FreeLaplacian, LatticeReading,
};
pub use potential::{
    FnPotential, PhaseBump, PolynomialBump, Potential, TabulatedPotential, ZeroPotential,
};

/// Size caps for Schrödinger computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum basis size `k_n`.
    pub max_basis: usize,
    /// Maximum potential sampling parameter `l`.
    pub max_l: u64,
    /// Maximum number of potential samples `|P_l ∩ C|`.
    pub max_samples: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_basis: crate::operator::DEFAULT_BASIS_CAP,
            max_l: 1_000_000,
            max_samples: 20_000_000,
        }
    }
}

/// Axis-aligned closed box `∏ [lower_j, upper_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::input(
                "box bounds must be nonempty and of equal length",
            ));
        }
        for (j, (&a, &b)) in lower.iter().zip(&upper).enumerate() {
            if !a.is_finite() || !b.is_finite() || !(a < b) {
                return Err(Error::input(format!(
                    "box axis {j} must satisfy lower < upper, got [{a}, {b}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[-half, half]^d`.
    pub fn cube(half: f64, dim: usize) -> Self {
        Self {
            lower: vec![-half; dim],
            upper: vec![half; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Lebesgue measure `|C|`.
    pub fn measure(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| b - a)
            .product()
    }

    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Largest coordinate magnitude, so the box lies in `[-r, r]^d`.
    pub fn max_abs_coordinate(&self) -> f64 {
        self.lower
            .iter()
            .chain(&self.upper)
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `-Δ + V` with `supp V ⊆ C` and `‖V‖_∞ + ‖∇V‖_∞ ≤ M`.
///
/// The C¹ bound `M` and the support are asserted by the caller; construction
/// only spot-checks that `V` vanishes on a test lattice outside `C`.
#[derive(Clone)]
pub struct SchrodingerProblem {
    dim: usize,
    potential: Arc<dyn Potential>,
    support: BoxRegion,
    c1_bound: f64,
}

impl SchrodingerProblem {
    pub fn new(
        dim: usize,
        potential: Arc<dyn Potential>,
        support: BoxRegion,
        c1_bound: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("spatial dimension must be at least 1"));
        }
        if support.dim() != dim {
            return Err(Error::input(format!(
                "support box has dimension {}, problem has {dim}",
                support.dim()
            )));
        }
        if !(c1_bound > 0.0) || !c1_bound.is_finite() {
            return Err(Error::input(format!(
                "C1 bound M must be positive, got {c1_bound}"
            )));
        }
        let problem = Self {
            dim,
            potential,
            support,
            c1_bound,
        };
        problem.spot_check_support()?;
        Ok(problem)
    }

    /// Free Laplacian: `V ≡ 0` with a unit-cube nominal support.
    pub fn free(dim: usize) -> Result<Self> {
        Self::new(dim, Arc::new(ZeroPotential), BoxRegion::cube(0.5, dim), 1.0)
    }

    /// Evaluates `V` on a lattice covering `C` widened by half its width per
    /// side and rejects nonzero values outside `C`.
    fn spot_check_support(&self) -> Result<()> {
        let per_axis = ((4096f64).powf(1.0 / self.dim as f64).floor() as usize).clamp(3, 33);
        let total = per_axis.pow(self.dim as u32);
        let mut x = vec![0.0; self.dim];
        for flat in 0..total {
            let mut rest = flat;
            for j in 0..self.dim {
                let t = (rest % per_axis) as f64 / (per_axis - 1) as f64;
                rest /= per_axis;
                let (a, b) = (self.support.lower[j], self.support.upper[j]);
                let w = b - a;
                x[j] = a - 0.5 * w + t * 2.0 * w;
            }
            let v = self.potential.eval(&x);
            if !v.is_finite() {
                return Err(Error::input(format!("potential is not finite at {x:?}")));
            }
            if !self.support.contains(&x) && v != Complex64::new(0.0, 0.0) {
                return Err(Error::input(format!(
                    "potential is nonzero at {x:?}, outside the declared support"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn potential(&self) -> &Arc<dyn Potential> {
        &self.potential
    }

    pub fn support(&self) -> &BoxRegion {
        &self.support
    }

    pub fn c1_bound(&self) -> f64 {
        self.c1_bound
    }
}

impl fmt::Debug for SchrodingerProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchrodingerProblem")
            .field("dim", &self.dim)
            .field("potential", &self.potential.describe())
            .field("support", &self.support)
            .field("c1_bound", &self.c1_bound)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_geometry() {
        let c = BoxRegion::new(vec![-1.0, 0.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(c.measure(), 6.0);
        assert!((c.diameter() - 13f64.sqrt()).abs() < 1e-15);
        assert!(c.contains(&[1.0, 3.0]));
        assert!(!c.contains(&[1.0, 3.1]));
        assert!(BoxRegion::new(vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn support_spot_check() {
        let bump = Arc::new(PolynomialBump::real(1.0, 1.0, 1).unwrap());
        assert!(SchrodingerProblem::new(1, bump.clone(), BoxRegion::cube(1.0, 1), 3.0).is_ok());
        let err = SchrodingerProblem::new(1, bump, BoxRegion::cube(0.5, 1), 3.0).unwrap_err();
        assert!(err.to_string().contains("outside the declared support"));

        let bump2 = Arc::new(PolynomialBump::real(1.0, 1.0, 2).unwrap());
        assert!(SchrodingerProblem::new(2, bump2.clone(), BoxRegion::cube(1.0, 2), 3.0).is_ok());
        assert!(SchrodingerProblem::new(1, bump2, BoxRegion::cube(1.0, 2), 3.0).is_err());
    }
}
