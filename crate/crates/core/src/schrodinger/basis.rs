//! The Fourier-box basis and the diagonal Laplacian.
//!
//! At level `n` the basis vectors are `e_k = n^{d/2}·F[χ_{i_k + [0,1/n)^d}]`,
//! the Fourier transforms of normalized indicators of cubes with lower corners
//! `i_k` on the lattice `L_n`. In closed form
//!
//! ```text
//! e_k(ξ) = (n/2π)^{d/2} ∏_j (exp(iξ_j((i_k)_j + 1/n)) - exp(iξ_j (i_k)_j)) / ξ_j
//! ```
//!
//! and `⟨-Δ e_k, e_m⟩ = δ_km·(n/3)·Σ_j (((i_k)_j + 1/n)³ - (i_k)_j³)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::MatrixElementProvider;

/// Below this `|ξ_j|` the basis factor is evaluated by its Taylor series.
const SERIES_CUTOFF: f64 = 1e-8;

/// Radius convention for the cube-corner lattice `L_n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeReading {
    /// Corners `i/n` with `|i/n| < n`, i.e. cubes filling the ball of radius `n`.
    #[default]
    Ball,
    /// Corners `i/n` with `|i| < n`, confined to the unit ball. Kept for
    /// comparison only: this family does not exhaust `L²`.
    UnitBall,
}

/// Integer numerators `i ∈ ℤ^d` of the corners `i/n ∈ L_n`, lexicographic.
pub fn lattice_ln(n: usize, d: usize, cap: usize) -> Result<Vec<Vec<i64>>> {
    lattice_ln_with(n, d, LatticeReading::Ball, cap)
}

pub fn lattice_ln_with(
    n: usize,
    d: usize,
    reading: LatticeReading,
    cap: usize,
) -> Result<Vec<Vec<i64>>> {
    if n == 0 || d == 0 {
        return Err(Error::input("lattice needs n >= 1 and d >= 1"));
    }
    let radius = match reading {
        LatticeReading::Ball => (n as i64).checked_mul(n as i64),
        LatticeReading::UnitBall => Some(n as i64),
    }
    .ok_or_else(|| Error::input(format!("level {n} too large")))?;
    let r2 = radius
        .checked_mul(radius)
        .ok_or_else(|| Error::input(format!("level {n} too large")))?;
    let reach = radius - 1;

    let mut out = Vec::new();
    let mut idx = vec![-reach; d];
    loop {
        let norm2: i64 = idx.iter().map(|v| v * v).sum();
        if norm2 < r2 {
            if out.len() == cap {
                return Err(Error::resource(
                    format!("basis size k_{n} (d = {d})"),
                    count_lattice(reach, r2, d) as u64,
                    cap as u64,
                ));
            }
            out.push(idx.clone());
        }
        // Odometer, last axis fastest.
        let mut axis = d;
        loop {
            if axis == 0 {
                return Ok(out);
            }
            axis -= 1;
            if idx[axis] < reach {
                idx[axis] += 1;
                for later in idx.iter_mut().skip(axis + 1) {
                    *later = -reach;
                }
                break;
            }
        }
    }
}

/// Number of `i ∈ [-reach, reach]^d` with `|i|² < r2`, without allocating.
fn count_lattice(reach: i64, r2: i64, d: usize) -> usize {
    fn rec(reach: i64, budget: i64, d: usize) -> usize {
        if d == 0 {
            return usize::from(budget > 0);
        }
        (-reach..=reach)
            .filter(|v| v * v < budget)
            .map(|v| rec(reach, budget - v * v, d - 1))
            .sum()
    }
    rec(reach, r2, d)
}

/// `e_k⁽ⁿ⁾(ξ)` for the cube with lower corner `corner`.
pub fn basis_eval(corner: &[f64], n: usize, xi: &[f64]) -> Complex64 {
    debug_assert_eq!(corner.len(), xi.len());
    let nf = n as f64;
    let d = corner.len() as f64;
    let mut acc = Complex64::new((nf / (2.0 * PI)).powf(0.5 * d), 0.0);
    for (&c, &x) in corner.iter().zip(xi) {
        acc *= basis_factor(c, nf, x);
    }
    acc
}

/// `(exp(iξ(c + 1/n)) - exp(iξc)) / ξ`.
fn basis_factor(c: f64, n: f64, xi: f64) -> Complex64 {
    if xi.abs() < SERIES_CUTOFF {
        series_factor(c, n, xi)
    } else {
        closed_factor(c, n, xi)
    }
}

/// `exp(iξc)·(i/n - ξ/(2n²) - iξ²/(6n³))`.
fn series_factor(c: f64, n: f64, xi: f64) -> Complex64 {
    let series = Complex64::new(-xi / (2.0 * n * n), 1.0 / n - xi * xi / (6.0 * n * n * n));
    Complex64::from_polar(1.0, xi * c) * series
}

/// `exp(iξ/n) - 1 = 2i·sin(ξ/2n)·exp(iξ/2n)`, free of cancellation.
fn closed_factor(c: f64, n: f64, xi: f64) -> Complex64 {
    let half = xi / (2.0 * n);
    Complex64::from_polar(2.0 * half.sin() / xi, xi * (c + 1.0 / (2.0 * n)))
        * Complex64::new(0.0, 1.0)
}

/// `(2π)^{-d/2}·d·n^{3-d/2}`, the stated bound on `‖e_k‖_∞` and `‖∇e_k‖_∞`.
pub fn sup_norm_bound(n: usize, d: usize) -> f64 {
    let (nf, df) = (n as f64, d as f64);
    (2.0 * PI).powf(-0.5 * df) * df * nf.powf(3.0 - 0.5 * df)
}

/// `⟨-Δ e_k, e_m⟩` for corners `i_k/n`, `i_m/n` given by integer numerators.
///
/// With `c = i/n`, `(n/3)((c + 1/n)³ - c³) = (3i² + 3i + 1)/(3n²)`; the
/// integer form keeps the sum exact before the single division.
pub fn laplacian_element(k: &[i64], m: &[i64], n: usize) -> f64 {
    if k != m {
        return 0.0;
    }
    let sum: i64 = k.iter().map(|&i| 3 * i * i + 3 * i + 1).sum();
    sum as f64 / (3.0 * (n as f64) * (n as f64))
}

/// The level-`n` Fourier-box basis in `d` dimensions.
#[derive(Debug, Clone)]
pub struct FourierBasis {
    n: usize,
    d: usize,
    numerators: Vec<Vec<i64>>,
    corners: Vec<Vec<f64>>,
}

impl FourierBasis {
    pub fn new(n: usize, d: usize, cap: usize) -> Result<Self> {
        Self::with_reading(n, d, LatticeReading::Ball, cap)
    }

    pub fn with_reading(n: usize, d: usize, reading: LatticeReading, cap: usize) -> Result<Self> {
        let numerators = lattice_ln_with(n, d, reading, cap)?;
        let nf = n as f64;
        let corners = numerators
            .iter()
            .map(|i| i.iter().map(|&v| v as f64 / nf).collect())
            .collect();
        Ok(Self {
            n,
            d,
            numerators,
            corners,
        })
    }

    pub fn level(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    pub fn corner(&self, k: usize) -> &[f64] {
        &self.corners[k]
    }

    pub fn numerator(&self, k: usize) -> &[i64] {
        &self.numerators[k]
    }

    pub fn eval(&self, k: usize, xi: &[f64]) -> Complex64 {
        basis_eval(&self.corners[k], self.n, xi)
    }

    pub fn laplacian_element(&self, k: usize, m: usize) -> f64 {
        laplacian_element(&self.numerators[k], &self.numerators[m], self.n)
    }

    /// The diagonal of the Laplacian truncation.
    pub fn laplacian_diagonal(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.laplacian_element(k, k))
            .collect()
    }
}

/// `-Δ` on `L²(ℝ^d)` as a provider over the Fourier-box bases.
///
/// Bases at different levels are not nested.
pub struct FreeLaplacian {
    d: usize,
    reading: LatticeReading,
    cap: usize,
    cache: Mutex<HashMap<usize, Arc<FourierBasis>>>,
}

impl FreeLaplacian {
    pub fn new(d: usize, reading: LatticeReading, cap: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        Ok(Self {
            d,
            reading,
            cap,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn basis(&self, n: usize) -> Result<Arc<FourierBasis>> {
        let mut cache = self.cache.lock().expect("basis cache poisoned");
        if let Some(b) = cache.get(&n) {
            return Ok(b.clone());
        }
        let b = Arc::new(FourierBasis::with_reading(
            n,
            self.d,
            self.reading,
            self.cap,
        )?);
        cache.insert(n, b.clone());
        Ok(b)
    }
}

impl MatrixElementProvider for FreeLaplacian {
    fn element(&self, i: usize, j: usize, n: usize) -> Result<Complex64> {
        let b = self.basis(n)?;
        if i >= b.len() || j >= b.len() {
            return Err(Error::input(format!(
                "index ({i}, {j}) outside basis of size {}",
                b.len()
            )));
        }
        Ok(Complex64::new(b.laplacian_element(i, j), 0.0))
    }

    fn basis_size(&self, n: usize) -> usize {
        if n == 0 {
            return 0;
        }
        let radius = match self.reading {
            LatticeReading::Ball => n.saturating_mul(n) as i64,
            LatticeReading::UnitBall => n as i64,
        };
        count_lattice(radius - 1, radius.saturating_mul(radius), self.d)
    }

    fn is_selfadjoint(&self) -> bool {
        true
    }

    fn is_nested(&self) -> bool {
        false
    }

    fn describe(&self) -> String {
        format!("laplacian(d={})", self.d)
    }
}
