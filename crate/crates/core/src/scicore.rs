//! Single-limit spectral algorithms on abstract operators.
//!
//! Each algorithm scans the grid `G_n = (1/n)(ℤ + iℤ) ∩ B_n(0)` and keeps the
//! points where the truncated operator is "almost singular":
//!
//! * `gamma1`: `s(T_n - λ) ≤ 1/n` for selfadjoint `T`;
//! * `gamma2`: `s(H_n - λ) ≤ 1/n`, united with `gamma1(T)`, for `H = T + V`;
//! * `xi_n`: as `gamma2` with threshold `3/n`.
//!
//! Membership is decided with the boolean Cholesky test
//! [`smin_exceeds`](crate::linalg::smin_exceeds), never by computing `s` and
//! comparing, and boundary ties count as members. `min{s(H_n - λ), s(H_n* - λ̄)}`
//! collapses to `s(H_n - λ)` because a square matrix and its adjoint share
//! their singular values.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ShiftedGram};
use crate::operator::{truncate, truncate_perturbed, DecomposedOperator, MatrixElementProvider};

/// The lattice `(1/n)(ℤ + iℤ)` intersected with the closed disk of radius `n`.
///
/// Points are `(a + bi)/n` with `a² + b² ≤ n⁴`, sorted by `(re, im)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    numerators: Vec<(i64, i64)>,
    points: Vec<Complex64>,
}

/// Builds `G_n`.
pub fn grid(n: usize) -> Result<Grid> {
    if n == 0 {
        return Err(Error::input("grid level n must be at least 1"));
    }
    let r = (n as i64)
        .checked_mul(n as i64)
        .ok_or_else(|| Error::input(format!("grid level {n} too large")))?;
    let r2 = r
        .checked_mul(r)
        .ok_or_else(|| Error::input(format!("grid level {n} too large")))?;
    let nf = n as f64;
    let mut numerators = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            if a * a + b * b <= r2 {
                numerators.push((a, b));
            }
        }
    }
    let points = numerators
        .iter()
        .map(|&(a, b)| Complex64::new(a as f64 / nf, b as f64 / nf))
        .collect();
    Ok(Grid {
        n,
        numerators,
        points,
    })
}

impl Grid {
    pub fn level(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Integer pairs `(a, b)` with point `(a + bi)/n`, in the same order as
    /// [`points`](Self::points).
    pub fn numerators(&self) -> &[(i64, i64)] {
        &self.numerators
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points whose mask entry is set, in grid order.
    pub fn select(&self, mask: &[bool]) -> Vec<Complex64> {
        debug_assert_eq!(mask.len(), self.points.len());
        self.points
            .iter()
            .zip(mask)
            .filter(|(_, &keep)| keep)
            .map(|(&z, _)| z)
            .collect()
    }
}

/// Lexicographic order on `(re, im)`.
pub fn lex_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Gamma1,
    Gamma2,
    Xi,
    Gamma3,
    Oracle,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Algorithm::Gamma1 => "gamma1",
            Algorithm::Gamma2 => "gamma2",
            Algorithm::Xi => "xi",
            Algorithm::Gamma3 => "gamma3",
            Algorithm::Oracle => "oracle",
        };
        f.write_str(s)
    }
}

/// Run data attached to a [`SpectralSet`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Basis size `k_n`.
    pub basis_size: usize,
    /// Potential sampling lattice parameter, for Schrödinger runs.
    pub l: Option<u64>,
    /// Operator-norm bound on the matrix-element approximation error.
    pub error_bound: Option<f64>,
    /// Number of grid points scanned.
    pub grid_size: usize,
}

/// Finite set of grid points returned by one algorithm at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSet {
    pub points: Vec<Complex64>,
    pub n: usize,
    pub threshold: f64,
    pub algorithm: Algorithm,
    pub provenance: Provenance,
}

impl SpectralSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, z: Complex64) -> bool {
        // Grid coordinates are never -0.0.
        let z = Complex64::new(z.re + 0.0, z.im + 0.0);
        self.points.binary_search_by(|p| lex_cmp(p, &z)).is_ok()
    }

    pub fn is_subset_of(&self, other: &SpectralSet) -> bool {
        self.points.iter().all(|&z| other.contains(z))
    }
}

/// Per-point membership `s(A - λ) ≤ threshold` over the grid.
pub fn pseudospectral_mask(a: &ComplexMatrix, grid: &Grid, threshold: f64) -> Result<Vec<bool>> {
    let family = ShiftedGram::new(a)?;
    grid.points()
        .par_iter()
        .map(|&lambda| family.exceeds(lambda, threshold).map(|exceeds| !exceeds))
        .collect()
}

/// Mask of `{λ : s(primary - λ) ≤ threshold} ∪ {λ : s(fallback - λ) ≤ 1/n}`.
pub(crate) fn union_mask(
    primary: &ComplexMatrix,
    threshold: f64,
    fallback: &ComplexMatrix,
    grid: &Grid,
) -> Result<Vec<bool>> {
    let base = 1.0 / grid.level() as f64;
    let primary = ShiftedGram::new(primary)?;
    let fallback = ShiftedGram::new(fallback)?;
    grid.points()
        .par_iter()
        .map(|&lambda| {
            if !primary.exceeds(lambda, threshold)? {
                return Ok(true);
            }
            Ok(!fallback.exceeds(lambda, base)?)
        })
        .collect()
}

/// `Γ⁽¹⁾_n(T) = {λ ∈ G_n : s(T_n - λ) ≤ 1/n}` for selfadjoint `T`.
pub fn gamma1(p: &dyn MatrixElementProvider, n: usize, cap: usize) -> Result<SpectralSet> {
    if !p.is_selfadjoint() {
        return Err(Error::input("gamma1 requires a selfadjoint provider"));
    }
    let t_n = truncate(p, n, cap)?;
    let g = grid(n)?;
    let threshold = 1.0 / n as f64;
    let mask = pseudospectral_mask(&t_n, &g, threshold)?;
    Ok(SpectralSet {
        points: g.select(&mask),
        n,
        threshold,
        algorithm: Algorithm::Gamma1,
        provenance: Provenance {
            basis_size: t_n.dim(),
            grid_size: g.len(),
            ..Provenance::default()
        },
    })
}

fn perturbed(
    h: &DecomposedOperator,
    n: usize,
    cap: usize,
    multiple: f64,
    algorithm: Algorithm,
) -> Result<SpectralSet> {
    let (t_n, h_n) = truncate_perturbed(h, n, cap)?;
    let g = grid(n)?;
    let threshold = multiple / n as f64;
    let mask = union_mask(&h_n, threshold, &t_n, &g)?;
    Ok(SpectralSet {
        points: g.select(&mask),
        n,
        threshold,
        algorithm,
        provenance: Provenance {
            basis_size: h_n.dim(),
            grid_size: g.len(),
            ..Provenance::default()
        },
    })
}

/// `Γ⁽²⁾_n(H) = {λ ∈ G_n : s(H_n - λ) ≤ 1/n} ∪ Γ⁽¹⁾_n(T)`.
pub fn gamma2(h: &DecomposedOperator, n: usize, cap: usize) -> Result<SpectralSet> {
    perturbed(h, n, cap, 1.0, Algorithm::Gamma2)
}

/// `Ξ_n(H)`: `gamma2` with the singular-value threshold widened to `3/n`.
pub fn xi_n(h: &DecomposedOperator, n: usize, cap: usize) -> Result<SpectralSet> {
    perturbed(h, n, cap, 3.0, Algorithm::Xi)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::operator::{
        BasisGrowth, DiagonalOperator, FiniteMatrixOperator, ZeroOperator, DEFAULT_BASIS_CAP,
    };

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_level_one() {
        let g = grid(1).unwrap();
        assert_eq!(
            g.points(),
            &[
                c(-1.0, 0.0),
                c(0.0, -1.0),
                c(0.0, 0.0),
                c(0.0, 1.0),
                c(1.0, 0.0)
            ]
        );
    }

    #[test]
    fn grid_sizes_match_brute_force() {
        for n in 1..=6usize {
            let r = (n * n) as i64;
            let mut count = 0;
            for a in -2 * r..=2 * r {
                for b in -2 * r..=2 * r {
                    if a * a + b * b <= r * r {
                        count += 1;
                    }
                }
            }
            assert_eq!(grid(n).unwrap().len(), count, "n = {n}");
        }
        assert_eq!(grid(2).unwrap().len(), 49);
    }

    #[test]
    fn grid_invariants() {
        for n in 1..=5 {
            let g = grid(n).unwrap();
            let pts = g.points();
            assert!(pts.contains(&c(0.0, 0.0)));
            assert!(pts
                .windows(2)
                .all(|w| lex_cmp(&w[0], &w[1]) == Ordering::Less));
            for &z in pts {
                assert!(z.norm() <= n as f64 + 1e-12);
                let find = |w: Complex64| {
                    let w = c(w.re + 0.0, w.im + 0.0);
                    pts.binary_search_by(|p| lex_cmp(p, &w)).is_ok()
                };
                assert!(find(z.conj()) && find(-z));
            }
        }
    }

    #[test]
    fn gamma1_zero_operator() {
        let p = ZeroOperator {
            growth: BasisGrowth::Constant(1),
        };
        let s = gamma1(&p, 2, DEFAULT_BASIS_CAP).unwrap();
        assert_eq!(
            s.points,
            vec![
                c(-0.5, 0.0),
                c(0.0, -0.5),
                c(0.0, 0.0),
                c(0.0, 0.5),
                c(0.5, 0.0)
            ]
        );
        assert_eq!(s.threshold, 0.5);
    }

    #[test]
    fn gamma1_rejects_non_selfadjoint() {
        let nil = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let p = FiniteMatrixOperator::square(nil);
        assert!(gamma1(&p, 2, DEFAULT_BASIS_CAP).is_err());
    }

    #[test]
    fn gamma2_nilpotent_contains_zero() {
        let t: Arc<dyn MatrixElementProvider> = Arc::new(ZeroOperator {
            growth: BasisGrowth::Constant(2),
        });
        let nil = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let h = DecomposedOperator::new(t, Arc::new(FiniteMatrixOperator::square(nil))).unwrap();
        for n in 1..=4 {
            let s2 = gamma2(&h, n, DEFAULT_BASIS_CAP).unwrap();
            assert!(s2.contains(c(0.0, 0.0)));
            let xi = xi_n(&h, n, DEFAULT_BASIS_CAP).unwrap();
            assert!(s2.is_subset_of(&xi));
            assert_eq!(xi.threshold, 3.0 / n as f64);
        }
    }

    #[test]
    fn xi_zero_level_one_is_whole_grid() {
        let t: Arc<dyn MatrixElementProvider> = Arc::new(ZeroOperator::default());
        let h = DecomposedOperator::unperturbed(t).unwrap();
        let xi = xi_n(&h, 1, DEFAULT_BASIS_CAP).unwrap();
        assert_eq!(xi.points, grid(1).unwrap().points().to_vec());
    }

    #[test]
    fn gamma2_without_perturbation_is_gamma1() {
        let d = Arc::new(DiagonalOperator::new(vec![1.0, -1.0], BasisGrowth::Linear(2)).unwrap());
        let h = DecomposedOperator::unperturbed(d.clone()).unwrap();
        for n in 1..=4 {
            let g1 = gamma1(d.as_ref(), n, DEFAULT_BASIS_CAP).unwrap();
            let g2 = gamma2(&h, n, DEFAULT_BASIS_CAP).unwrap();
            assert_eq!(g1.points, g2.points);
        }
    }
}
