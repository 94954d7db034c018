//! Brute-force references that share no kernel with the Cholesky path.
//!
//! Eigenvalues and singular values come from cyclic Jacobi rotations, the
//! Schrödinger reference is a central-difference discretization solved by
//! Sturm bisection, and exact potential elements are approximated by a
//! midpoint rule much finer than the algorithm's sampling lattice.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::operator::{truncate, MatrixElementProvider};
use crate::schrodinger::{FourierBasis, SchrodingerProblem};
use crate::scicore::{grid, Algorithm, Provenance, SpectralSet};

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    JacobiEigen,
    JacobiSvd,
    FiniteDifference,
    MidpointQuadrature,
}

/// Value computed by an oracle together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport<T> {
    pub value: T,
    pub method: OracleMethod,
    /// Resolution parameters (mesh sizes, refinements) used.
    pub resolution: Vec<usize>,
    /// Nonnegative self-reported discrepancy or error estimate.
    pub discrepancy: f64,
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// The `n × n` Hermitian `A = B + iC` is embedded as the real symmetric
/// `[[B, -C], [C, B]]`, which has every eigenvalue of `A` twice; cyclic
/// Jacobi on the embedding and taking every other sorted value recovers them.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if !a.is_hermitian() {
        return Err(Error::input(
            "hermitian_eigenvalues needs a Hermitian matrix",
        ));
    }
    let n = a.dim();
    let m = 2 * n;
    let mut s = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            s[i * m + j] = z.re;
            s[(i + n) * m + (j + n)] = z.re;
            s[i * m + (j + n)] = -z.im;
            s[(i + n) * m + j] = z.im;
        }
    }
    let mut eig = symmetric_jacobi(s, m);
    eig.sort_by(f64::total_cmp);
    Ok(eig.into_iter().step_by(2).collect())
}

/// Cyclic Jacobi on a real symmetric matrix; returns the diagonal after
/// convergence.
fn symmetric_jacobi(mut s: Vec<f64>, m: usize) -> Vec<f64> {
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s[i * m + j] * s[i * m + j])
            .sum();
        let total: f64 = s.iter().map(|v| v * v).sum();
        if off <= f64::EPSILON * f64::EPSILON * total || off == 0.0 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = s[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let app = s[p * m + p];
                let aqq = s[q * m + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let skp = s[k * m + p];
                    let skq = s[k * m + q];
                    s[k * m + p] = c * skp - sn * skq;
                    s[k * m + q] = sn * skp + c * skq;
                }
                for k in 0..m {
                    let spk = s[p * m + k];
                    let sqk = s[q * m + k];
                    s[p * m + k] = c * spk - sn * sqk;
                    s[q * m + k] = sn * spk + c * sqk;
                }
            }
        }
    }
    (0..m).map(|i| s[i * m + i]).collect()
}

/// Singular values by one-sided (Hestenes) Jacobi, ascending.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.dim();
    // Column-major copy.
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)]).collect())
        .collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .map(|(u, v)| u.conj() * v)
                    .sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate the phase out of γ, then apply a real rotation.
                let phase = gamma.conj() / g;
                for v in cols[q].iter_mut() {
                    *v *= phase;
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (u, v) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (up, vq) = (*u, *v);
                    *u = up * c - vq * s;
                    *v = up * s + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(f64::total_cmp);
    sv
}

/// Smallest singular value via the Jacobi SVD.
pub fn svd_smin(a: &ComplexMatrix) -> f64 {
    singular_values(a)[0]
}

/// Spectral norm via the Jacobi SVD.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    *singular_values(a).last().expect("matrix is nonempty")
}

/// `min_j |λ - μ_j|`.
pub fn distance_to_eigenvalues(lambda: Complex64, eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .map(|&mu| (lambda - mu).norm())
        .fold(f64::INFINITY, f64::min)
}

/// `{λ ∈ G_n : dist(λ, σ(T_n)) ≤ 1/n}` from a dense eigendecomposition.
///
/// For Hermitian `T_n`, `s(T_n - λ)` is exactly that distance, so this equals
/// `gamma1` up to rounding at the threshold.
pub fn gamma1_oracle(p: &dyn MatrixElementProvider, n: usize, cap: usize) -> Result<SpectralSet> {
    if !p.is_selfadjoint() {
        return Err(Error::input(
            "gamma1_oracle requires a selfadjoint provider",
        ));
    }
    let t_n = truncate(p, n, cap)?;
    let eig = hermitian_eigenvalues(&t_n)?;
    let g = grid(n)?;
    let threshold = 1.0 / n as f64;
    let mask: Vec<bool> = g
        .points()
        .par_iter()
        .map(|&lambda| distance_to_eigenvalues(lambda, &eig) <= threshold)
        .collect();
    Ok(SpectralSet {
        points: g.select(&mask),
        n,
        threshold,
        algorithm: Algorithm::Oracle,
        provenance: Provenance {
            basis_size: t_n.dim(),
            grid_size: g.len(),
            ..Provenance::default()
        },
    })
}

/// Outcome of comparing `gamma1` with [`gamma1_oracle`] at one level.
#[derive(Debug, Clone)]
pub struct Gamma1Comparison {
    pub primary: SpectralSet,
    pub oracle: SpectralSet,
    /// Points in exactly one set whose eigenvalue distance is farther than
    /// the guard from the threshold.
    pub mismatches: Vec<Complex64>,
    /// Points in exactly one set that fall inside the guard band.
    pub guarded: Vec<Complex64>,
}

/// Runs both paths and classifies their symmetric difference.
pub fn compare_gamma1(
    p: &dyn MatrixElementProvider,
    n: usize,
    cap: usize,
    guard: f64,
) -> Result<Gamma1Comparison> {
    let primary = crate::scicore::gamma1(p, n, cap)?;
    let oracle = gamma1_oracle(p, n, cap)?;
    let eig = hermitian_eigenvalues(&truncate(p, n, cap)?)?;
    let threshold = 1.0 / n as f64;
    let mut mismatches = Vec::new();
    let mut guarded = Vec::new();
    let only_primary = primary.points.iter().filter(|z| !oracle.contains(**z));
    let only_oracle = oracle.points.iter().filter(|z| !primary.contains(**z));
    for &z in only_primary.chain(only_oracle) {
        if (distance_to_eigenvalues(z, &eig) - threshold).abs() <= guard {
            guarded.push(z);
        } else {
            mismatches.push(z);
        }
    }
    Ok(Gamma1Comparison {
        primary,
        oracle,
        mismatches,
        guarded,
    })
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// the given diagonal and constant off-diagonal.
fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        let coupling = if i == 0 { 0.0 } else { off * off / q };
        q = d - x - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + off.abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `count` eigenvalues of `-u'' + Vu` on `[-halfwidth, halfwidth]`
/// with Dirichlet ends, by second-order central differences.
fn fd_eigenvalues(
    prob: &SchrodingerProblem,
    halfwidth: f64,
    meshpoints: usize,
    count: usize,
) -> Vec<f64> {
    let h = 2.0 * halfwidth / (meshpoints + 1) as f64;
    let inv_h2 = 1.0 / (h * h);
    let diag: Vec<f64> = (1..=meshpoints)
        .map(|i| {
            let x = -halfwidth + i as f64 * h;
            2.0 * inv_h2 + prob.potential().eval(&[x]).re
        })
        .collect();
    let off = -inv_h2;
    let lo = diag.iter().copied().fold(f64::INFINITY, f64::min) - 2.0 * off.abs() - 1.0;
    let hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 2.0 * off.abs() + 1.0;
    (0..count.min(meshpoints))
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(&diag, off, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Finite-difference reference for 1D Schrödinger eigenvalues.
///
/// The value holds the lowest `count` eigenvalues on the requested mesh. The
/// discrepancy is a Richardson estimate `(4/3)·max|λ_h - λ_{h/2}|` from a
/// second solve with the step halved.
pub fn fd_schrodinger_1d(
    prob: &SchrodingerProblem,
    halfwidth: f64,
    meshpoints: usize,
    count: usize,
) -> Result<OracleReport<Vec<f64>>> {
    if prob.dim() != 1 {
        return Err(Error::input("finite-difference oracle is one-dimensional"));
    }
    if meshpoints < 16 {
        return Err(Error::input(format!(
            "meshpoints must be at least 16, got {meshpoints}"
        )));
    }
    if !(halfwidth > 0.0) || !halfwidth.is_finite() {
        return Err(Error::input("halfwidth must be positive"));
    }
    if !prob.potential().is_real() {
        return Err(Error::input(
            "finite-difference oracle needs a real potential",
        ));
    }
    let coarse = fd_eigenvalues(prob, halfwidth, meshpoints, count);
    let fine_mesh = 2 * meshpoints + 1;
    let fine = fd_eigenvalues(prob, halfwidth, fine_mesh, count);
    let discrepancy = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).abs() * 4.0 / 3.0)
        .fold(0.0, f64::max);
    Ok(OracleReport {
        value: coarse,
        method: OracleMethod::FiniteDifference,
        resolution: vec![meshpoints, fine_mesh],
        discrepancy,
    })
}

/// Tensor midpoint rule for `∫_C V·e_k·conj(e_m)` with `cells_per_unit`
/// cells per unit length on every axis.
fn midpoint_element(
    basis: &FourierBasis,
    k: usize,
    m: usize,
    prob: &SchrodingerProblem,
    cells_per_unit: usize,
) -> Complex64 {
    let support = prob.support();
    let d = prob.dim();
    let counts: Vec<usize> = support
        .lower()
        .iter()
        .zip(support.upper())
        .map(|(a, b)| (((b - a) * cells_per_unit as f64).ceil() as usize).max(1))
        .collect();
    let steps: Vec<f64> = support
        .lower()
        .iter()
        .zip(support.upper())
        .zip(&counts)
        .map(|((a, b), &c)| (b - a) / c as f64)
        .collect();
    let volume: f64 = steps.iter().product();
    let total: usize = counts.iter().product();
    let mut x = vec![0.0; d];
    let mut acc = Complex64::new(0.0, 0.0);
    for flat in 0..total {
        let mut rest = flat;
        for j in (0..d).rev() {
            let idx = rest % counts[j];
            rest /= counts[j];
            x[j] = support.lower()[j] + (idx as f64 + 0.5) * steps[j];
        }
        let v = prob.potential().eval(&x);
        acc += v * (basis.eval(k, &x) * basis.eval(m, &x).conj());
    }
    acc * volume
}

/// Approximates the exact element `⟨V e_k, e_m⟩` by midpoint quadrature at
/// `refinement` and `2·refinement` cells per unit length.
///
/// The value is the finer estimate; the discrepancy is the difference
/// between the two and serves as the error budget of the stand-in.
pub fn quad_element_oracle(
    basis: &FourierBasis,
    k: usize,
    m: usize,
    prob: &SchrodingerProblem,
    refinement: usize,
) -> Result<OracleReport<Complex64>> {
    if refinement < 2 {
        return Err(Error::input(format!(
            "refinement must be at least 2, got {refinement}"
        )));
    }
    if basis.dim() != prob.dim() {
        return Err(Error::input("basis and problem dimensions differ"));
    }
    if k >= basis.len() || m >= basis.len() {
        return Err(Error::input(format!(
            "basis indices ({k}, {m}) out of range"
        )));
    }
    let coarse = midpoint_element(basis, k, m, prob, refinement);
    let fine = midpoint_element(basis, k, m, prob, 2 * refinement);
    Ok(OracleReport {
        value: fine,
        method: OracleMethod::MidpointQuadrature,
        resolution: vec![refinement, 2 * refinement],
        discrepancy: (fine - coarse).norm(),
    })
}

/// Stand-in for the exact truncation `H_n = P_n(-Δ + V)|_{H_n}` built from
/// [`quad_element_oracle`], with `η̃ = k_n·max discrepancy` as its
/// operator-norm error budget.
pub fn quadrature_hamiltonian(
    prob: &SchrodingerProblem,
    n: usize,
    refinement: usize,
    cap: usize,
) -> Result<OracleReport<ComplexMatrix>> {
    let basis = FourierBasis::new(n, prob.dim(), cap)?;
    let k_n = basis.len();
    let cells: Vec<OracleReport<Complex64>> = (0..k_n * k_n)
        .into_par_iter()
        .map(|flat| quad_element_oracle(&basis, flat / k_n, flat % k_n, prob, refinement))
        .collect::<Result<_>>()?;
    let max_disc = cells.iter().map(|c| c.discrepancy).fold(0.0, f64::max);
    let matrix = ComplexMatrix::from_fn(k_n, |i, j| {
        let lap = basis.laplacian_element(i, j);
        Complex64::new(lap, 0.0) + cells[i * k_n + j].value
    })?;
    Ok(OracleReport {
        value: matrix,
        method: OracleMethod::MidpointQuadrature,
        resolution: vec![refinement, 2 * refinement],
        discrepancy: k_n as f64 * max_disc,
    })
}
