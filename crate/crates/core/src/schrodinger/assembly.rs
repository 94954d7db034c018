//! Potential matrix elements from lattice samples, assembly of `H_n^l`, and
//! the Schrödinger spectral algorithm.
//!
//! `V` is replaced by the step function `V_l = Σ_{i ∈ P_l} V(i)·χ_{i+[0,1/l)^d}`
//! and each basis function by its values at the same lattice points, giving
//!
//! ```text
//! ⟨V_l E_k, E_m⟩ = l^{-d}·Σ_{i ∈ P_l ∩ C} V(i)·e_k(i)·conj(e_m(i)).
//! ```
//!
//! The elementwise error is at most `3|C|M(2π)^{-d/2}n^{3-d/2}d / l` and the
//! operator-norm error of the assembled matrix `n` times that.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scicore::{grid, union_mask, Algorithm, Provenance, SpectralSet};

use super::basis::FourierBasis;
use super::{Limits, SchrodingerProblem};

/// `P_l = (1/l)ℤ^d ∩ [-l/2, l/2]^d`, lexicographic.
pub fn lattice_pl(l: u64, d: usize, cap: usize) -> Result<Vec<Vec<f64>>> {
    if l == 0 || d == 0 {
        return Err(Error::input("P_l needs l >= 1 and d >= 1"));
    }
    let half = (l as u128 * l as u128 / 2) as i64;
    let per_axis = (2 * half + 1) as u128;
    let total = per_axis.checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > cap as u128 {
        return Err(Error::resource(
            format!("lattice P_{l} (d = {d})"),
            total.min(u64::MAX as u128) as u64,
            cap as u64,
        ));
    }
    let axis: Vec<i64> = (-half..=half).collect();
    Ok(cartesian(&vec![axis; d])
        .into_iter()
        .map(|i| i.iter().map(|&v| v as f64 / l as f64).collect())
        .collect())
}

fn cartesian(axes: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// `3|C|M(2π)^{-d/2}·d / l` times `n^{power - d/2}`.
fn scaled_bound(n: usize, l: u64, prob: &SchrodingerProblem, power: f64) -> f64 {
    let d = prob.dim() as f64;
    3.0 * prob.support().measure()
        * prob.c1_bound()
        * (2.0 * PI).powf(-0.5 * d)
        * (n as f64).powf(power - 0.5 * d)
        * d
        / l as f64
}

/// Bound on each `|⟨V e_k, e_m⟩ - ⟨V_l E_k, E_m⟩|`.
pub fn element_bound(n: usize, l: u64, prob: &SchrodingerProblem) -> f64 {
    scaled_bound(n, l, prob, 3.0)
}

/// Bound on `‖H_n - H_n^l‖`.
pub fn corollary_bound(n: usize, l: u64, prob: &SchrodingerProblem) -> f64 {
    scaled_bound(n, l, prob, 4.0)
}

/// `V_l(x) = V(i)` for the lattice point `i ∈ P_l` with `x ∈ i + [0, 1/l)^d`,
/// zero when no such point exists.
pub fn step_potential(prob: &SchrodingerProblem, l: u64, x: &[f64]) -> Complex64 {
    let lf = l as f64;
    let half = (l as u128 * l as u128 / 2) as f64;
    let mut corner = Vec::with_capacity(x.len());
    for &v in x {
        let j = (v * lf).floor();
        if j.abs() > half {
            return Complex64::new(0.0, 0.0);
        }
        corner.push(j / lf);
    }
    prob.potential().eval(&corner)
}

fn check_sampling_preconditions(l: u64, prob: &SchrodingerProblem) -> Result<()> {
    let diam = prob.support().diameter();
    if !(l as f64 > 2.0 * diam) {
        return Err(Error::input(format!(
            "sampling parameter violates l > 2·diam(C): l = {l}, 2·diam(C) = {}",
            2.0 * diam
        )));
    }
    let reach = prob.support().max_abs_coordinate();
    if reach > l as f64 / 2.0 {
        return Err(Error::input(format!(
            "sampling parameter violates C ⊆ Q_l(0): max |x_j| over C is {reach}, l/2 = {}",
            l as f64 / 2.0
        )));
    }
    Ok(())
}

/// The samples `V(i)` for `i ∈ P_l ∩ C`.
#[derive(Debug, Clone)]
pub struct LatticeSampling {
    l: u64,
    points: Vec<Vec<f64>>,
    values: Vec<Complex64>,
    cell_volume: f64,
}

impl LatticeSampling {
    pub fn new(prob: &SchrodingerProblem, l: u64, limits: &Limits) -> Result<Self> {
        check_sampling_preconditions(l, prob)?;
        let lf = l as f64;
        let support = prob.support();
        let mut axes = Vec::with_capacity(prob.dim());
        let mut total: u128 = 1;
        for (&a, &b) in support.lower().iter().zip(support.upper()) {
            let lo = (a * lf).ceil() as i64 - 1;
            let hi = (b * lf).floor() as i64 + 1;
            let axis: Vec<i64> = (lo..=hi)
                .filter(|&i| {
                    let x = i as f64 / lf;
                    a <= x && x <= b
                })
                .collect();
            total *= axis.len() as u128;
            axes.push(axis);
        }
        if total > limits.max_samples as u128 {
            return Err(Error::resource(
                format!("potential samples |P_{l} ∩ C|"),
                total.min(u64::MAX as u128) as u64,
                limits.max_samples as u64,
            ));
        }
        let points: Vec<Vec<f64>> = cartesian(&axes)
            .into_iter()
            .map(|i| i.iter().map(|&v| v as f64 / lf).collect())
            .collect();
        let values = points
            .iter()
            .map(|x| prob.potential().eval(x))
            .collect::<Vec<_>>();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("potential returned a non-finite sample"));
        }
        Ok(Self {
            l,
            points,
            values,
            cell_volume: lf.powi(-(prob.dim() as i32)),
        })
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `e_k(i)` for every sample point.
    fn basis_row(&self, basis: &FourierBasis, k: usize) -> Vec<Complex64> {
        self.points.iter().map(|x| basis.eval(k, x)).collect()
    }

    /// `l^{-d}·Σ V(i)·(e_k(i)·conj(e_m(i)))` from precomputed basis rows.
    ///
    /// The product `e_k·conj(e_m)` is formed before multiplying by `V(i)`, so
    /// swapping `k` and `m` conjugates every term exactly when `V` is real.
    fn sum_rows(&self, row_k: &[Complex64], row_m: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((v, ek), em) in self.values.iter().zip(row_k).zip(row_m) {
            acc += *v * (*ek * em.conj());
        }
        acc * self.cell_volume
    }

    pub fn element(&self, basis: &FourierBasis, k: usize, m: usize) -> Complex64 {
        self.sum_rows(&self.basis_row(basis, k), &self.basis_row(basis, m))
    }
}

/// `⟨V_l E_{k,l}, E_{m,l}⟩` in the level-`n` basis.
pub fn potential_element(
    k: usize,
    m: usize,
    n: usize,
    l: u64,
    prob: &SchrodingerProblem,
    limits: &Limits,
) -> Result<Complex64> {
    let basis = FourierBasis::new(n, prob.dim(), limits.max_basis)?;
    if k >= basis.len() || m >= basis.len() {
        return Err(Error::input(format!(
            "basis indices ({k}, {m}) out of range for k_n = {}",
            basis.len()
        )));
    }
    let sampling = LatticeSampling::new(prob, l, limits)?;
    Ok(sampling.element(&basis, k, m))
}

/// Smallest `l` with `corollary_bound(n, l) < 1/(2n)`, `l > 2·diam(C)` and
/// `C ⊆ Q_l(0)`.
pub fn choose_l(n: usize, prob: &SchrodingerProblem, max_l: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::input("level n must be at least 1"));
    }
    let target = 1.0 / (2.0 * n as f64);
    // corollary_bound(n, l) = numerator / l.
    let numerator = corollary_bound(n, 1, prob);
    let from_bound = (numerator / target).floor() + 1.0;
    let from_diam = (2.0 * prob.support().diameter()).floor() + 1.0;
    let from_cube = (2.0 * prob.support().max_abs_coordinate()).ceil();
    let first = from_bound.max(from_diam).max(from_cube);
    if !first.is_finite() || first > max_l as f64 {
        return Err(Error::resource(
            format!("sampling parameter l({n})"),
            if first.is_finite() && first < u64::MAX as f64 {
                first as u64
            } else {
                u64::MAX
            },
            max_l,
        ));
    }
    let mut l = first as u64;
    while !(corollary_bound(n, l, prob) < target)
        || !(l as f64 > 2.0 * prob.support().diameter())
        || prob.support().max_abs_coordinate() > l as f64 / 2.0
    {
        l += 1;
        if l > max_l {
            return Err(Error::resource(
                format!("sampling parameter l({n})"),
                l,
                max_l,
            ));
        }
    }
    Ok(l)
}

/// `H_n^l = P_n(-Δ + V_l)|_{H_n}` with its error bound.
#[derive(Debug, Clone)]
pub struct AssembledHamiltonian {
    pub matrix: ComplexMatrix,
    pub basis: FourierBasis,
    pub l: u64,
    /// `corollary_bound(n, l)`.
    pub error_bound: f64,
}

impl AssembledHamiltonian {
    pub fn laplacian(&self) -> Result<ComplexMatrix> {
        let diag: Vec<Complex64> = self
            .basis
            .laplacian_diagonal()
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect();
        ComplexMatrix::from_diagonal(&diag)
    }
}

pub fn assemble_hnl(
    prob: &SchrodingerProblem,
    n: usize,
    l: u64,
    limits: &Limits,
) -> Result<AssembledHamiltonian> {
    if n == 0 {
        return Err(Error::input("level n must be at least 1"));
    }
    let basis = FourierBasis::new(n, prob.dim(), limits.max_basis)?;
    let sampling = LatticeSampling::new(prob, l, limits)?;
    let k_n = basis.len();
    let table_size = k_n as u128 * sampling.len() as u128;
    if table_size > limits.max_samples as u128 {
        return Err(Error::resource(
            "basis-sample table k_n·|P_l ∩ C|",
            table_size.min(u64::MAX as u128) as u64,
            limits.max_samples as u64,
        ));
    }
    let rows: Vec<Vec<Complex64>> = (0..k_n)
        .into_par_iter()
        .map(|k| sampling.basis_row(&basis, k))
        .collect();
    let entries: Vec<Complex64> = (0..k_n)
        .into_par_iter()
        .flat_map_iter(|k| {
            let rows = &rows;
            let basis = &basis;
            let sampling = &sampling;
            (0..k_n).map(move |m| {
                let lap = basis.laplacian_element(k, m);
                Complex64::new(lap, 0.0) + sampling.sum_rows(&rows[k], &rows[m])
            })
        })
        .collect();
    Ok(AssembledHamiltonian {
        matrix: ComplexMatrix::new(k_n, entries)?,
        basis,
        l,
        error_bound: corollary_bound(n, l, prob),
    })
}

/// `Γ⁽³⁾_n(H) = {λ ∈ G_n : s(H_n^l - λ) ≤ 2/n} ∪ Γ⁽¹⁾_n(-Δ)`.
///
/// Without `l_override`, `l = choose_l(n)` (strict mode). With it, the given
/// `l` is used and the honest error bound is recorded in the provenance.
pub fn gamma3(
    prob: &SchrodingerProblem,
    n: usize,
    l_override: Option<u64>,
    limits: &Limits,
) -> Result<SpectralSet> {
    let l = match l_override {
        Some(l) => l,
        None => choose_l(n, prob, limits.max_l)?,
    };
    let h = assemble_hnl(prob, n, l, limits)?;
    let lap = h.laplacian()?;
    let g = grid(n)?;
    let threshold = 2.0 / n as f64;
    let mask = union_mask(&h.matrix, threshold, &lap, &g)?;
    Ok(SpectralSet {
        points: g.select(&mask),
        n,
        threshold,
        algorithm: Algorithm::Gamma3,
        provenance: Provenance {
            basis_size: h.matrix.dim(),
            l: Some(l),
            error_bound: Some(h.error_bound),
            grid_size: g.len(),
        },
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::schrodinger::{BoxRegion, PolynomialBump, ZeroPotential};

    fn reference_problem() -> SchrodingerProblem {
        let bump = PolynomialBump::with_c1_norm(1.0, 1.0, 1).unwrap();
        SchrodingerProblem::new(1, Arc::new(bump), BoxRegion::cube(1.0, 1), 1.0).unwrap()
    }

    #[test]
    fn pl_examples() {
        assert_eq!(lattice_pl(1, 1, 1000).unwrap(), vec![vec![0.0]]);
        let p2: Vec<f64> = lattice_pl(2, 1, 1000)
            .unwrap()
            .into_iter()
            .map(|v| v[0])
            .collect();
        assert_eq!(p2, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        for l in 1..=20u64 {
            let lf = l as f64;
            let brute = (-1000i64..=1000)
                .filter(|&i| (i as f64 / lf).abs() <= lf / 2.0)
                .count();
            assert_eq!(lattice_pl(l, 1, 10_000).unwrap().len(), brute);
            if l % 2 == 0 {
                assert_eq!(brute as u64, l * l + 1);
            }
        }
        assert!(lattice_pl(200, 2, 1000).unwrap_err().is_resource());
    }

    #[test]
    fn choose_l_reference_values() {
        let prob = reference_problem();
        assert_eq!(choose_l(1, &prob, 1_000_000).unwrap(), 5);
        assert_eq!(choose_l(2, &prob, 1_000_000).unwrap(), 109);
        let mut prev = 0;
        for n in 1..=5 {
            let l = choose_l(n, &prob, 1_000_000).unwrap();
            assert!(l >= prev);
            assert!(corollary_bound(n, l, &prob) < 1.0 / (2.0 * n as f64));
            assert!(corollary_bound(n, l - 1, &prob) >= 1.0 / (2.0 * n as f64) || l - 1 <= 4);
            prev = l;
        }
        let err = choose_l(2, &prob, 100).unwrap_err();
        assert!(err.is_resource());
        assert!(err.to_string().contains("109"));
    }

    #[test]
    fn sampling_preconditions_are_named() {
        let prob = reference_problem();
        let limits = Limits::default();
        let err = LatticeSampling::new(&prob, 4, &limits).unwrap_err();
        assert!(err.to_string().contains("l > 2·diam(C)"));
        let wide = SchrodingerProblem::new(
            1,
            Arc::new(ZeroPotential),
            BoxRegion::new(vec![2.0], vec![2.5]).unwrap(),
            1.0,
        )
        .unwrap();
        let err = LatticeSampling::new(&wide, 3, &limits).unwrap_err();
        assert!(err.to_string().contains("C ⊆ Q_l(0)"));
    }

    #[test]
    fn zero_potential_elements_vanish() {
        let prob =
            SchrodingerProblem::new(1, Arc::new(ZeroPotential), BoxRegion::cube(1.0, 1), 1.0)
                .unwrap();
        let limits = Limits::default();
        for n in 1..=2 {
            let k_n = FourierBasis::new(n, 1, 100).unwrap().len();
            for k in 0..k_n.saturating_sub(1) {
                let v = potential_element(k, k + 1, n, 9, &prob, &limits).unwrap();
                assert_eq!(v, Complex64::new(0.0, 0.0));
            }
        }
        let h = assemble_hnl(&prob, 2, 9, &limits).unwrap();
        assert_eq!(h.matrix, h.laplacian().unwrap());
    }

    #[test]
    fn real_potential_gives_exact_hermitian_matrix() {
        let bump = PolynomialBump::real(-3.0, 1.0, 1).unwrap();
        let prob = SchrodingerProblem::new(
            1,
            Arc::new(bump.clone()),
            bump.support_box(),
            bump.c1_norm(),
        )
        .unwrap();
        let limits = Limits::default();
        let h = assemble_hnl(&prob, 2, 16, &limits).unwrap();
        assert!(h.matrix.is_hermitian());
        for k in 0..h.basis.len() {
            for m in 0..h.basis.len() {
                let pe = potential_element(k, m, 2, 16, &prob, &limits).unwrap();
                let pe_t = potential_element(m, k, 2, 16, &prob, &limits).unwrap();
                assert_eq!(pe, pe_t.conj());
                let lap = if k == m {
                    h.basis.laplacian_element(k, k)
                } else {
                    0.0
                };
                assert_eq!(h.matrix[(k, m)], Complex64::new(lap, 0.0) + pe);
            }
        }
    }

    #[test]
    fn step_potential_error_within_gradient_over_l() {
        let bump = PolynomialBump::real(1.0, 1.0, 1).unwrap();
        let grad = bump.gradient_norm();
        let prob =
            SchrodingerProblem::new(1, Arc::new(bump), BoxRegion::cube(1.0, 1), 3.0).unwrap();
        for l in [8u64, 16, 32] {
            let worst = (0..=40_000)
                .map(|j| -2.0 + j as f64 * 1e-4)
                .map(|x| (prob.potential().eval(&[x]) - step_potential(&prob, l, &[x])).norm())
                .fold(0.0, f64::max);
            assert!(worst <= grad / l as f64, "l = {l}: {worst}");
        }
    }

    #[test]
    fn gamma3_free_level_one_is_whole_grid() {
        let prob = SchrodingerProblem::free(1).unwrap();
        let s = gamma3(&prob, 1, Some(5), &Limits::default()).unwrap();
        assert_eq!(s.points, grid(1).unwrap().points().to_vec());
        assert_eq!(s.threshold, 2.0);
        assert_eq!(s.provenance.l, Some(5));
    }
}
