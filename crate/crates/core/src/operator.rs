//! Operators described by their matrix elements in a family of orthonormal bases.
//!
//! A [`MatrixElementProvider`] answers `⟨T e_i, e_j⟩` for the basis of level
//! `n` and reports how many basis vectors that level has. Truncation to level
//! `n` is then just the `k_n × k_n` table of those numbers.
//!
//! Whether an operator actually satisfies the hypotheses under which the
//! truncation algorithms converge (convex extended essential spectrum, the
//! union of the basis spans being a core, relative compactness of the
//! perturbation) cannot be decided from finitely many matrix elements. Those
//! are preconditions asserted by the caller.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Default cap on the basis size `k_n` of a truncation.
pub const DEFAULT_BASIS_CAP: usize = 4096;

/// Source of matrix elements `⟨T e_i⁽ⁿ⁾, e_j⁽ⁿ⁾⟩` (indices are zero-based).
///
/// Implementations must be deterministic and safe to query concurrently.
/// `basis_size` must be nondecreasing in `n`.
pub trait MatrixElementProvider: Send + Sync {
    fn element(&self, i: usize, j: usize, n: usize) -> Result<Complex64>;

    fn basis_size(&self, n: usize) -> usize;

    /// Set when the operator is selfadjoint, i.e. `element(i, j, n)` equals
    /// `conj(element(j, i, n))`.
    fn is_selfadjoint(&self) -> bool;

    /// Upper bound on the operator norm, if the operator is known to be bounded.
    fn norm_bound(&self) -> Option<f64> {
        None
    }

    /// Whether the level-`n` basis is a prefix of the level-`n+1` basis.
    fn is_nested(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        "custom".to_string()
    }
}

/// How the basis size `k_n` grows with the level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisGrowth {
    /// `k_n = k` at every level.
    Constant(usize),
    /// `k_n = c·n`.
    Linear(usize),
}

impl BasisGrowth {
    pub fn size(self, n: usize) -> usize {
        match self {
            BasisGrowth::Constant(k) => k,
            BasisGrowth::Linear(c) => c.saturating_mul(n),
        }
    }
}

impl Default for BasisGrowth {
    fn default() -> Self {
        BasisGrowth::Linear(1)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroOperator {
    pub growth: BasisGrowth,
}

impl MatrixElementProvider for ZeroOperator {
    fn element(&self, _i: usize, _j: usize, _n: usize) -> Result<Complex64> {
        Ok(Complex64::new(0.0, 0.0))
    }

    fn basis_size(&self, n: usize) -> usize {
        self.growth.size(n)
    }

    fn is_selfadjoint(&self) -> bool {
        true
    }

    fn norm_bound(&self) -> Option<f64> {
        Some(0.0)
    }

    fn describe(&self) -> String {
        "zero".to_string()
    }
}

/// Real diagonal operator whose entries repeat a finite pattern.
///
/// The pattern `(1, -1)` gives the operator with spectrum `{-1, 1}`.
#[derive(Debug, Clone)]
pub struct DiagonalOperator {
    pattern: Vec<f64>,
    pub growth: BasisGrowth,
}

impl DiagonalOperator {
    pub fn new(pattern: Vec<f64>, growth: BasisGrowth) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::input("diagonal pattern must be nonempty"));
        }
        if pattern.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("diagonal pattern must be finite"));
        }
        Ok(Self { pattern, growth })
    }

    pub fn entry(&self, j: usize) -> f64 {
        self.pattern[j % self.pattern.len()]
    }
}

impl MatrixElementProvider for DiagonalOperator {
    fn element(&self, i: usize, j: usize, _n: usize) -> Result<Complex64> {
        Ok(if i == j {
            Complex64::new(self.entry(i), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        })
    }

    fn basis_size(&self, n: usize) -> usize {
        self.growth.size(n)
    }

    fn is_selfadjoint(&self) -> bool {
        true
    }

    fn norm_bound(&self) -> Option<f64> {
        Some(self.pattern.iter().fold(0.0, |m, x| m.max(x.abs())))
    }

    fn describe(&self) -> String {
        format!("diagonal{:?}", self.pattern)
    }
}

/// Multiplication-type diagonal operator whose entries accumulate at
/// prescribed points.
///
/// Entry `j` is `a[j mod p] + 1/(⌊j/p⌋ + 1)`, so the spectrum is the closure
/// of the entries: every `a + 1/m` together with the accumulation points `a`.
#[derive(Debug, Clone)]
pub struct AccumulatingDiagonal {
    points: Vec<f64>,
    pub growth: BasisGrowth,
}

impl AccumulatingDiagonal {
    pub fn new(points: Vec<f64>, growth: BasisGrowth) -> Result<Self> {
        if points.is_empty() || points.iter().any(|x| !x.is_finite()) {
            return Err(Error::input(
                "accumulation points must be finite and nonempty",
            ));
        }
        Ok(Self { points, growth })
    }

    pub fn entry(&self, j: usize) -> f64 {
        let p = self.points.len();
        self.points[j % p] + 1.0 / ((j / p) as f64 + 1.0)
    }

    pub fn accumulation_points(&self) -> &[f64] {
        &self.points
    }
}

impl MatrixElementProvider for AccumulatingDiagonal {
    fn element(&self, i: usize, j: usize, _n: usize) -> Result<Complex64> {
        Ok(if i == j {
            Complex64::new(self.entry(i), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        })
    }

    fn basis_size(&self, n: usize) -> usize {
        self.growth.size(n)
    }

    fn is_selfadjoint(&self) -> bool {
        true
    }

    fn norm_bound(&self) -> Option<f64> {
        Some(self.points.iter().fold(0.0, |m, x| m.max(x.abs() + 1.0)))
    }

    fn describe(&self) -> String {
        format!("accumulating{:?}", self.points)
    }
}

/// Symmetric tridiagonal (Jacobi) operator with constant coefficients.
///
/// With diagonal `a` and off-diagonal `b` its `k × k` truncation has
/// eigenvalues `a + 2b·cos(jπ/(k+1))`, and the spectrum of the full operator
/// is `[a - 2|b|, a + 2|b|]`.
#[derive(Debug, Clone, Copy)]
pub struct JacobiOperator {
    pub diagonal: f64,
    pub off_diagonal: f64,
    pub growth: BasisGrowth,
}

impl JacobiOperator {
    pub fn new(diagonal: f64, off_diagonal: f64, growth: BasisGrowth) -> Result<Self> {
        if !diagonal.is_finite() || !off_diagonal.is_finite() {
            return Err(Error::input("Jacobi coefficients must be finite"));
        }
        Ok(Self {
            diagonal,
            off_diagonal,
            growth,
        })
    }
}

impl MatrixElementProvider for JacobiOperator {
    fn element(&self, i: usize, j: usize, _n: usize) -> Result<Complex64> {
        let v = if i == j {
            self.diagonal
        } else if i.abs_diff(j) == 1 {
            self.off_diagonal
        } else {
            0.0
        };
        Ok(Complex64::new(v, 0.0))
    }

    fn basis_size(&self, n: usize) -> usize {
        self.growth.size(n)
    }

    fn is_selfadjoint(&self) -> bool {
        true
    }

    fn norm_bound(&self) -> Option<f64> {
        Some(self.diagonal.abs() + 2.0 * self.off_diagonal.abs())
    }

    fn describe(&self) -> String {
        format!("jacobi(a={}, b={})", self.diagonal, self.off_diagonal)
    }
}

/// Finite-rank operator: a fixed matrix block in the leading basis vectors,
/// zero elsewhere.
#[derive(Debug, Clone)]
pub struct FiniteMatrixOperator {
    block: ComplexMatrix,
    hermitian: bool,
    pub growth: BasisGrowth,
}

impl FiniteMatrixOperator {
    pub fn new(block: ComplexMatrix, growth: BasisGrowth) -> Self {
        let hermitian = block.is_hermitian();
        Self {
            block,
            hermitian,
            growth,
        }
    }

    /// Uses the block size as the constant basis size.
    pub fn square(block: ComplexMatrix) -> Self {
        let k = block.dim();
        Self::new(block, BasisGrowth::Constant(k))
    }

    pub fn block(&self) -> &ComplexMatrix {
        &self.block
    }
}

impl MatrixElementProvider for FiniteMatrixOperator {
    fn element(&self, i: usize, j: usize, _n: usize) -> Result<Complex64> {
        let k = self.block.dim();
        Ok(if i < k && j < k {
            self.block[(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        })
    }

    fn basis_size(&self, n: usize) -> usize {
        self.growth.size(n)
    }

    fn is_selfadjoint(&self) -> bool {
        self.hermitian
    }

    fn norm_bound(&self) -> Option<f64> {
        Some(self.block.frobenius_norm())
    }

    fn describe(&self) -> String {
        format!("finite({}x{})", self.block.dim(), self.block.dim())
    }
}

/// The adjoint `T*` of a provider: `⟨T* e_i, e_j⟩ = conj⟨T e_j, e_i⟩`.
#[derive(Clone)]
pub struct Adjoint<P>(pub P);

impl<P: MatrixElementProvider> MatrixElementProvider for Adjoint<P> {
    fn element(&self, i: usize, j: usize, n: usize) -> Result<Complex64> {
        Ok(self.0.element(j, i, n)?.conj())
    }

    fn basis_size(&self, n: usize) -> usize {
        self.0.basis_size(n)
    }

    fn is_selfadjoint(&self) -> bool {
        self.0.is_selfadjoint()
    }

    fn norm_bound(&self) -> Option<f64> {
        self.0.norm_bound()
    }

    fn is_nested(&self) -> bool {
        self.0.is_nested()
    }

    fn describe(&self) -> String {
        format!("adjoint({})", self.0.describe())
    }
}

/// Provider backed by a closure, for programmatic registration.
pub struct FnOperator<F> {
    f: F,
    growth: BasisGrowth,
    selfadjoint: bool,
}

impl<F> FnOperator<F>
where
    F: Fn(usize, usize, usize) -> Complex64 + Send + Sync,
{
    pub fn new(f: F, growth: BasisGrowth, selfadjoint: bool) -> Self {
        Self {
            f,
            growth,
            selfadjoint,
        }
    }
}

impl<F> MatrixElementProvider for FnOperator<F>
where
    F: Fn(usize, usize, usize) -> Complex64 + Send + Sync,
{
    fn element(&self, i: usize, j: usize, n: usize) -> Result<Complex64> {
        Ok((self.f)(i, j, n))
    }

    fn basis_size(&self, n: usize) -> usize {
        self.growth.size(n)
    }

    fn is_selfadjoint(&self) -> bool {
        self.selfadjoint
    }
}

impl<P: MatrixElementProvider + ?Sized> MatrixElementProvider for Arc<P> {
    fn element(&self, i: usize, j: usize, n: usize) -> Result<Complex64> {
        (**self).element(i, j, n)
    }

    fn basis_size(&self, n: usize) -> usize {
        (**self).basis_size(n)
    }

    fn is_selfadjoint(&self) -> bool {
        (**self).is_selfadjoint()
    }

    fn norm_bound(&self) -> Option<f64> {
        (**self).norm_bound()
    }

    fn is_nested(&self) -> bool {
        (**self).is_nested()
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// An operator `H = T + V` handed to the algorithm together with its split.
///
/// `T` must be selfadjoint (checked via its flag). The remaining hypotheses
/// (spectrum of `T` equal to its essential spectrum, convex extended
/// essential spectrum, `V` and `V*` relatively compact with respect to `T`)
/// are the caller's responsibility.
#[derive(Clone)]
pub struct DecomposedOperator {
    t_part: Arc<dyn MatrixElementProvider>,
    v_part: Arc<dyn MatrixElementProvider>,
}

impl DecomposedOperator {
    pub fn new(
        t_part: Arc<dyn MatrixElementProvider>,
        v_part: Arc<dyn MatrixElementProvider>,
    ) -> Result<Self> {
        if !t_part.is_selfadjoint() {
            return Err(Error::input(
                "the T part of a decomposed operator must be selfadjoint",
            ));
        }
        Ok(Self { t_part, v_part })
    }

    /// `H = T` with zero perturbation.
    pub fn unperturbed(t_part: Arc<dyn MatrixElementProvider>) -> Result<Self> {
        let zero = ZeroLike(t_part.clone());
        Self::new(t_part, Arc::new(zero))
    }

    pub fn t_part(&self) -> &Arc<dyn MatrixElementProvider> {
        &self.t_part
    }

    pub fn v_part(&self) -> &Arc<dyn MatrixElementProvider> {
        &self.v_part
    }
}

impl fmt::Debug for DecomposedOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DecomposedOperator")
            .field("t_part", &self.t_part.describe())
            .field("v_part", &self.v_part.describe())
            .finish()
    }
}

/// Zero operator that borrows its basis sizes from another provider.
struct ZeroLike(Arc<dyn MatrixElementProvider>);

impl MatrixElementProvider for ZeroLike {
    fn element(&self, _i: usize, _j: usize, _n: usize) -> Result<Complex64> {
        Ok(Complex64::new(0.0, 0.0))
    }

    fn basis_size(&self, n: usize) -> usize {
        self.0.basis_size(n)
    }

    fn is_selfadjoint(&self) -> bool {
        true
    }

    fn norm_bound(&self) -> Option<f64> {
        Some(0.0)
    }

    fn is_nested(&self) -> bool {
        self.0.is_nested()
    }

    fn describe(&self) -> String {
        "zero".to_string()
    }
}

fn checked_basis_size(p: &dyn MatrixElementProvider, n: usize, cap: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::input("level n must be at least 1"));
    }
    let k = p.basis_size(n);
    if k == 0 {
        return Err(Error::input(format!(
            "provider reports empty basis at level {n}"
        )));
    }
    if k > cap {
        return Err(Error::resource(
            format!("basis size k_{n}"),
            k as u64,
            cap as u64,
        ));
    }
    Ok(k)
}

/// The `k_n × k_n` matrix of `⟨T e_i⁽ⁿ⁾, e_j⁽ⁿ⁾⟩`.
///
/// Selfadjoint providers are symmetrized as `(A + A*)/2`, so the result is
/// exactly Hermitian even if the provider has round-off.
pub fn truncate(p: &dyn MatrixElementProvider, n: usize, cap: usize) -> Result<ComplexMatrix> {
    let k = checked_basis_size(p, n, cap)?;
    let mut data = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let z = p.element(i, j, n)?;
            if !z.is_finite() {
                return Err(Error::input(format!(
                    "provider returned non-finite element ({i}, {j}) at level {n}"
                )));
            }
            data.push(z);
        }
    }
    let a = ComplexMatrix::new(k, data)?;
    Ok(if p.is_selfadjoint() {
        a.hermitian_part()
    } else {
        a
    })
}

/// Truncations `(T_n, H_n)` with `H_n = T_n + V_n`.
pub fn truncate_perturbed(
    h: &DecomposedOperator,
    n: usize,
    cap: usize,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let kt = checked_basis_size(h.t_part.as_ref(), n, cap)?;
    let kv = checked_basis_size(h.v_part.as_ref(), n, cap)?;
    if kt != kv {
        return Err(Error::input(format!(
            "basis size mismatch at level {n}: T part has {kt}, V part has {kv}"
        )));
    }
    let t_n = truncate(h.t_part.as_ref(), n, cap)?;
    let v_n = truncate(h.v_part.as_ref(), n, cap)?;
    let h_n = t_n.try_add(&v_n)?;
    Ok((t_n, h_n))
}
