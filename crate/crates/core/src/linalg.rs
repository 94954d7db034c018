//! Dense complex matrices and the smallest-singular-value kernel.
//!
//! Every membership test in the spectral algorithms reduces to one question:
//! is `s(A) > q`, where `s` is the smallest singular value of a square matrix?
//! That holds exactly when `A*A - q²I` is positive definite, which a Cholesky
//! factorization decides with finitely many arithmetic operations. The
//! bisection routine [`smin`] is built on top of the same boolean test.

use std::fmt;
use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default absolute tolerance for [`smin`].
pub const DEFAULT_SMIN_TOL: f64 = 1e-10;

/// Dense square complex matrix stored row-major.
///
/// Entries are finite on construction.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("matrix dimension must be at least 1"));
        }
        if data.len() != dim * dim {
            return Err(Error::input(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::input(format!(
                "non-finite matrix entry at ({}, {})",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::input(format!(
                "row {bad} has {} entries, expected {dim}",
                rows[bad].len()
            )));
        }
        Self::new(dim, rows.concat())
    }

    /// Convenience constructor for real matrices.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(dim, vec![Complex64::new(0.0, 0.0); dim * dim])
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_diagonal(&vec![Complex64::new(1.0, 0.0); dim])
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Result<Self> {
        let dim = diag.len();
        Self::from_fn(dim, |i, j| {
            if i == j {
                diag[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major view of the entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Self { dim: n, data }
    }

    /// `A - λI`.
    pub fn shifted(&self, lambda: Complex64) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.data[i * self.dim + i] -= lambda;
        }
        out
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::input(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.dim, data)
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            out.data[i * n + i] = Complex64::new(self.data[i * n + i].re, 0.0);
            for j in (i + 1)..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                out.data[i * n + j] = avg;
                out.data[j * n + i] = avg.conj();
            }
        }
        out
    }

    /// Exact check `A == A*`.
    pub fn is_hermitian(&self) -> bool {
        let n = self.dim;
        (0..n).all(|i| (i..n).all(|j| self.data[i * n + j] == self.data[j * n + i].conj()))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::input(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Self::new(n, data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Leading `k x k` block.
    pub fn leading_block(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.dim {
            return Err(Error::input(format!(
                "block size {k} out of range 1..={}",
                self.dim
            )));
        }
        Self::from_fn(k, |i, j| self.data[i * self.dim + j])
    }

    fn ensure_finite(&self) -> Result<()> {
        if self.data.iter().all(|z| z.is_finite()) {
            Ok(())
        } else {
            Err(Error::input("matrix has non-finite entries"))
        }
    }

    /// `A*A - shift·I`, Hermitian.
    fn gram_minus(&self, shift: f64) -> Vec<Complex64> {
        let n = self.dim;
        let mut g = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.data[k * n + i].conj() * self.data[k * n + j];
                }
                g[i * n + j] = acc;
                g[j * n + i] = acc.conj();
            }
            g[i * n + i] = Complex64::new(g[i * n + i].re - shift, 0.0);
        }
        g
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(
            i < self.dim && j < self.dim,
            "index ({i}, {j}) out of bounds"
        );
        &self.data[i * self.dim + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Cholesky factorization of a Hermitian matrix, reporting only whether every
/// pivot is strictly positive.
fn cholesky_is_positive_definite(mut g: Vec<Complex64>, n: usize) -> bool {
    for j in 0..n {
        let mut pivot = g[j * n + j].re;
        for k in 0..j {
            pivot -= g[j * n + k].norm_sqr();
        }
        // Catches NaN as well as non-positive pivots.
        if !(pivot > 0.0) {
            return false;
        }
        let diag = pivot.sqrt();
        g[j * n + j] = Complex64::new(diag, 0.0);
        for i in (j + 1)..n {
            let mut acc = g[i * n + j];
            for k in 0..j {
                acc -= g[i * n + k] * g[j * n + k].conj();
            }
            g[i * n + j] = acc / diag;
        }
    }
    true
}

/// Decides `s(A) > q` by testing positive definiteness of `A*A - q²I`.
///
/// The pivot threshold is exactly zero; a pivot `<= 0` means "not positive
/// definite". Near `s(A) = q` the answer is subject to rounding in the Gram
/// matrix, roughly `eps·‖A‖² / q` in absolute terms.
pub fn smin_exceeds(a: &ComplexMatrix, q: f64) -> Result<bool> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::input(format!(
            "threshold q must be positive and finite, got {q}"
        )));
    }
    a.ensure_finite()?;
    Ok(cholesky_is_positive_definite(a.gram_minus(q * q), a.dim))
}

/// `s(A - λ) > q` tests for a fixed `A` and many shifts `λ`.
///
/// Keeps `A*A` and forms `(A - λ)*(A - λ) - q²I = A*A - λA* - λ̄A + (|λ|² - q²)I`
/// per query, so each test costs one `O(k²)` update plus the factorization.
#[derive(Debug, Clone)]
pub struct ShiftedGram {
    dim: usize,
    a: Vec<Complex64>,
    gram: Vec<Complex64>,
}

impl ShiftedGram {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        a.ensure_finite()?;
        Ok(Self {
            dim: a.dim,
            a: a.data.clone(),
            gram: a.gram_minus(0.0),
        })
    }

    /// Same answer as `smin_exceeds(&a.shifted(lambda), q)` up to rounding.
    pub fn exceeds(&self, lambda: Complex64, q: f64) -> Result<bool> {
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::input(format!(
                "threshold q must be positive and finite, got {q}"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::input("shift must be finite"));
        }
        let n = self.dim;
        let diag = lambda.norm_sqr() - q * q;
        let mut g = self.gram.clone();
        for i in 0..n {
            for j in i..n {
                // (A*)_{ij} = conj(A_{ji}).
                let v = g[i * n + j]
                    - lambda * self.a[j * n + i].conj()
                    - lambda.conj() * self.a[i * n + j];
                g[i * n + j] = v;
                g[j * n + i] = v.conj();
            }
            g[i * n + i] = Complex64::new(g[i * n + i].re + diag, 0.0);
        }
        Ok(cholesky_is_positive_definite(g, n))
    }
}

/// Smallest singular value by bisection on [`smin_exceeds`].
///
/// The bracket starts at `[0, ‖A‖_F]` and is halved until its width is at most
/// `tol`; the midpoint is returned, so the error is at most `tol / 2` plus
/// the rounding noted on [`smin_exceeds`].
pub fn smin(a: &ComplexMatrix, tol: f64) -> Result<f64> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::input(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    a.ensure_finite()?;
    let mut lo = 0.0_f64;
    let mut hi = a.frobenius_norm();
    if hi == 0.0 {
        return Ok(0.0);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if smin_exceeds(a, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn shifted_gram_matches_direct_test() {
        let a = ComplexMatrix::from_fn(5, |i, j| {
            Complex64::new(
                ((i * 7 + j * 3) % 5) as f64 - 2.0,
                ((i + 2 * j) % 3) as f64 - 1.0,
            )
        })
        .unwrap();
        let family = ShiftedGram::new(&a).unwrap();
        for re in -6..=6 {
            for im in -6..=6 {
                let lambda = Complex64::new(re as f64 * 0.5, im as f64 * 0.5);
                let shifted = a.shifted(lambda);
                let s = smin(&shifted, 1e-12).unwrap();
                for q in [0.25, 0.5, 1.0] {
                    if (s - q).abs() > 1e-9 {
                        assert_eq!(
                            family.exceeds(lambda, q).unwrap(),
                            smin_exceeds(&shifted, q).unwrap()
                        );
                    }
                }
            }
        }
        assert!(family.exceeds(c(0.0), 0.0).is_err());
    }

    #[test]
    fn exceeds_on_diagonal() {
        let a = ComplexMatrix::from_diagonal(&[c(1.0), c(2.0)]).unwrap();
        assert!(smin_exceeds(&a, 0.5).unwrap());
        assert!(!smin_exceeds(&a, 1.5).unwrap());
    }

    #[test]
    fn exceeds_false_on_rank_deficient() {
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(!smin_exceeds(&a, 0.5).unwrap());
        let z = ComplexMatrix::zeros(1).unwrap();
        assert!(!smin_exceeds(&z, 0.1).unwrap());
    }

    #[test]
    fn smin_examples() {
        let tol = DEFAULT_SMIN_TOL;
        let a = ComplexMatrix::from_diagonal(&[c(3.0), c(-1.0)]).unwrap();
        assert!((smin(&a, tol).unwrap() - 1.0).abs() <= tol);

        let b = ComplexMatrix::from_real_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert!(smin(&b, tol).unwrap() <= tol);

        // s² is the small root of t² - 3t + 1, the characteristic polynomial of A*A.
        let j = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let expected = ((3.0 - 5f64.sqrt()) / 2.0).sqrt();
        assert!((smin(&j, tol).unwrap() - expected).abs() <= tol);
        assert!((expected - 0.618034).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ComplexMatrix::new(1, vec![Complex64::new(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::new(0, vec![]).is_err());
        assert!(ComplexMatrix::new(2, vec![c(1.0); 3]).is_err());
        let a = ComplexMatrix::identity(2).unwrap();
        assert!(smin_exceeds(&a, 0.0).is_err());
        assert!(smin_exceeds(&a, -1.0).is_err());
        assert!(smin(&a, 0.0).is_err());
        let huge = ComplexMatrix::from_diagonal(&[c(f64::MAX), c(f64::MAX)]).unwrap();
        assert!(huge.try_add(&huge).is_err());
    }

    #[test]
    fn hermitian_part_is_exactly_hermitian() {
        let a = ComplexMatrix::from_fn(4, |i, j| {
            Complex64::new(
                (i * 3 + j) as f64 * 0.1,
                (i as f64 - j as f64) * 0.37 + 0.01,
            )
        })
        .unwrap();
        assert!(!a.is_hermitian());
        assert!(a.hermitian_part().is_hermitian());
    }

    #[test]
    fn shifted_and_adjoint() {
        let a = ComplexMatrix::from_rows(&[
            vec![Complex64::new(1.0, 2.0), Complex64::new(0.0, 1.0)],
            vec![c(3.0), c(4.0)],
        ])
        .unwrap();
        let s = a.shifted(Complex64::new(1.0, 1.0));
        assert_eq!(s[(0, 0)], Complex64::new(0.0, 1.0));
        assert_eq!(s[(1, 1)], Complex64::new(3.0, -1.0));
        assert_eq!(s[(0, 1)], a[(0, 1)]);
        let h = a.adjoint();
        assert_eq!(h[(1, 0)], Complex64::new(0.0, -1.0));
        assert_eq!(h.adjoint(), a);
    }
}
