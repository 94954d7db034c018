//! Compactly supported C¹ potentials.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::BoxRegion;

/// A potential `V: ℝ^d → ℂ`, accessed only through point evaluations.
pub trait Potential: Send + Sync {
    fn eval(&self, x: &[f64]) -> Complex64;

    /// True when `V` is real-valued everywhere.
    fn is_real(&self) -> bool {
        false
    }

    fn describe(&self) -> String {
        "custom".to_string()
    }
}

/// `sup_{0≤s≤1} 4s(1 - s²) = 8 / (3√3)`, the gradient factor of the bump.
fn bump_gradient_factor() -> f64 {
    8.0 / (3.0 * 3f64.sqrt())
}

/// `c·(1 - |x|²/r²)²` inside the ball of radius `r`, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialBump {
    pub amplitude: Complex64,
    pub radius: f64,
    pub dim: usize,
}

impl PolynomialBump {
    pub fn new(amplitude: Complex64, radius: f64, dim: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::input(format!(
                "bump radius must be positive, got {radius}"
            )));
        }
        if !amplitude.is_finite() {
            return Err(Error::input("bump amplitude must be finite"));
        }
        if dim == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        Ok(Self {
            amplitude,
            radius,
            dim,
        })
    }

    pub fn real(amplitude: f64, radius: f64, dim: usize) -> Result<Self> {
        Self::new(Complex64::new(amplitude, 0.0), radius, dim)
    }

    /// Real bump scaled so that `‖V‖_∞ + ‖∇V‖_∞` equals `c1_norm`.
    pub fn with_c1_norm(c1_norm: f64, radius: f64, dim: usize) -> Result<Self> {
        let unit = Self::real(1.0, radius, dim)?;
        Self::real(c1_norm / unit.c1_norm(), radius, dim)
    }

    /// Exact `‖V‖_∞ + ‖∇V‖_∞ = |c|·(1 + 8/(3√3·r))`.
    pub fn c1_norm(&self) -> f64 {
        self.amplitude.norm() * (1.0 + bump_gradient_factor() / self.radius)
    }

    /// Exact `‖∇V‖_∞`.
    pub fn gradient_norm(&self) -> f64 {
        self.amplitude.norm() * bump_gradient_factor() / self.radius
    }

    pub fn support_box(&self) -> BoxRegion {
        BoxRegion::cube(self.radius, self.dim)
    }
}

impl Potential for PolynomialBump {
    fn eval(&self, x: &[f64]) -> Complex64 {
        let s2: f64 = x.iter().map(|v| v * v).sum::<f64>() / (self.radius * self.radius);
        if s2 >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let w = 1.0 - s2;
        self.amplitude * (w * w)
    }

    fn is_real(&self) -> bool {
        self.amplitude.im == 0.0
    }

    fn describe(&self) -> String {
        format!(
            "bump(amplitude={}{:+}i, radius={})",
            self.amplitude.re, self.amplitude.im, self.radius
        )
    }
}

/// Bump multiplied by a plane-wave phase: `c·(1 - |x|²/r²)²·exp(i·k·x₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseBump {
    pub bump: PolynomialBump,
    pub wavenumber: f64,
}

impl PhaseBump {
    pub fn new(bump: PolynomialBump, wavenumber: f64) -> Result<Self> {
        if !wavenumber.is_finite() {
            return Err(Error::input("wavenumber must be finite"));
        }
        Ok(Self { bump, wavenumber })
    }

    /// Upper bound `|c|·(1 + 8/(3√3·r) + |k|)` on the C¹ norm.
    pub fn c1_bound(&self) -> f64 {
        self.bump.c1_norm() + self.bump.amplitude.norm() * self.wavenumber.abs()
    }
}

impl Potential for PhaseBump {
    fn eval(&self, x: &[f64]) -> Complex64 {
        let base = self.bump.eval(x);
        base * Complex64::from_polar(1.0, self.wavenumber * x[0])
    }

    fn describe(&self) -> String {
        format!("phase-{} k={}", self.bump.describe(), self.wavenumber)
    }
}

/// Samples on a regular grid over a box, multilinearly interpolated and zero
/// outside the box.
///
/// Nodes on the box boundary must be zero so the interpolant is continuous.
/// The interpolant is Lipschitz rather than C¹; the C¹ bound passed to the
/// problem is the caller's assertion.
#[derive(Clone)]
pub struct TabulatedPotential {
    region: BoxRegion,
    shape: Vec<usize>,
    values: Vec<Complex64>,
}

impl TabulatedPotential {
    /// `values` are row-major with the last axis fastest; `shape[j] ≥ 2`.
    pub fn new(region: BoxRegion, shape: Vec<usize>, values: Vec<Complex64>) -> Result<Self> {
        if shape.len() != region.dim() {
            return Err(Error::input("table shape must match the box dimension"));
        }
        if shape.iter().any(|&s| s < 2) {
            return Err(Error::input("every table axis needs at least 2 nodes"));
        }
        let total: usize = shape.iter().product();
        if values.len() != total {
            return Err(Error::input(format!(
                "table needs {total} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("table values must be finite"));
        }
        let table = Self {
            region,
            shape,
            values,
        };
        for (flat, v) in table.values.iter().enumerate() {
            let idx = table.unflatten(flat);
            let on_boundary = idx
                .iter()
                .zip(&table.shape)
                .any(|(&i, &s)| i == 0 || i == s - 1);
            if on_boundary && *v != Complex64::new(0.0, 0.0) {
                return Err(Error::input(format!(
                    "boundary node {idx:?} must be zero for a compactly supported potential"
                )));
            }
        }
        Ok(table)
    }

    fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for axis in (0..self.shape.len()).rev() {
            idx[axis] = flat % self.shape[axis];
            flat /= self.shape[axis];
        }
        idx
    }

    fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &s)| acc * s + i)
    }

    fn spacing(&self, axis: usize) -> f64 {
        (self.region.upper()[axis] - self.region.lower()[axis]) / (self.shape[axis] - 1) as f64
    }

    /// `max|v| + √d·max|Δv|/h`, the C¹ norm of the interpolant.
    pub fn c1_estimate(&self) -> f64 {
        let d = self.shape.len();
        let sup = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut slope = 0.0_f64;
        for flat in 0..self.values.len() {
            let idx = self.unflatten(flat);
            for axis in 0..d {
                if idx[axis] + 1 < self.shape[axis] {
                    let mut next = idx.clone();
                    next[axis] += 1;
                    let diff = (self.values[self.flatten(&next)] - self.values[flat]).norm();
                    slope = slope.max(diff / self.spacing(axis));
                }
            }
        }
        sup + (d as f64).sqrt() * slope
    }

    pub fn region(&self) -> &BoxRegion {
        &self.region
    }
}

impl fmt::Debug for TabulatedPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TabulatedPotential")
            .field("region", &self.region)
            .field("shape", &self.shape)
            .finish()
    }
}

impl Potential for TabulatedPotential {
    fn eval(&self, x: &[f64]) -> Complex64 {
        if !self.region.contains(x) {
            return Complex64::new(0.0, 0.0);
        }
        let d = self.shape.len();
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for axis in 0..d {
            let t = (x[axis] - self.region.lower()[axis]) / self.spacing(axis);
            let cell = (t.floor() as usize).min(self.shape[axis] - 2);
            base[axis] = cell;
            frac[axis] = t - cell as f64;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for corner in 0..(1usize << d) {
            let mut weight = 1.0;
            let mut idx = base.clone();
            for axis in 0..d {
                if corner >> axis & 1 == 1 {
                    idx[axis] += 1;
                    weight *= frac[axis];
                } else {
                    weight *= 1.0 - frac[axis];
                }
            }
            acc += self.values[self.flatten(&idx)] * weight;
        }
        acc
    }

    fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    fn describe(&self) -> String {
        format!("tabulated{:?}", self.shape)
    }
}

/// Potential backed by a closure.
pub struct FnPotential<F> {
    f: F,
    real: bool,
}

impl<F> FnPotential<F>
where
    F: Fn(&[f64]) -> Complex64 + Send + Sync,
{
    pub fn new(f: F, real: bool) -> Self {
        Self { f, real }
    }
}

impl<F> Potential for FnPotential<F>
where
    F: Fn(&[f64]) -> Complex64 + Send + Sync,
{
    fn eval(&self, x: &[f64]) -> Complex64 {
        (self.f)(x)
    }

    fn is_real(&self) -> bool {
        self.real
    }
}

/// `V ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPotential;

impl Potential for ZeroPotential {
    fn eval(&self, _x: &[f64]) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    fn is_real(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        "zero".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values_and_norm() {
        let b = PolynomialBump::real(1.0, 1.0, 1).unwrap();
        assert_eq!(b.eval(&[0.0]), Complex64::new(1.0, 0.0));
        assert_eq!(b.eval(&[1.0]), Complex64::new(0.0, 0.0));
        assert_eq!(b.eval(&[-3.0]), Complex64::new(0.0, 0.0));
        assert!((b.eval(&[0.5]).re - 0.5625).abs() < 1e-15);

        // Central differences on a fine grid recover the gradient norm.
        let h = 1e-6;
        let grad = (0..20001)
            .map(|i| -1.0 + i as f64 * 1e-4)
            .map(|x| ((b.eval(&[x + h]) - b.eval(&[x - h])) / (2.0 * h)).norm())
            .fold(0.0, f64::max);
        assert!((grad - b.gradient_norm()).abs() < 1e-6);

        let unit = PolynomialBump::with_c1_norm(1.0, 1.0, 1).unwrap();
        assert!((unit.c1_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tabulated_interpolates() {
        let region = BoxRegion::new(vec![-1.0], vec![1.0]).unwrap();
        let vals = [0.0, 1.0, 0.0].map(|v| Complex64::new(v, 0.0)).to_vec();
        let t = TabulatedPotential::new(region.clone(), vec![3], vals).unwrap();
        assert!((t.eval(&[0.5]).re - 0.5).abs() < 1e-15);
        assert_eq!(t.eval(&[2.0]), Complex64::new(0.0, 0.0));
        assert!((t.c1_estimate() - 2.0).abs() < 1e-15);

        let bad = [1.0, 1.0, 0.0].map(|v| Complex64::new(v, 0.0)).to_vec();
        assert!(TabulatedPotential::new(region, vec![3], bad).is_err());
    }

    #[test]
    fn tabulated_bilinear() {
        let region = BoxRegion::new(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap();
        let mut vals = vec![Complex64::new(0.0, 0.0); 9];
        vals[4] = Complex64::new(4.0, 0.0);
        let t = TabulatedPotential::new(region, vec![3, 3], vals).unwrap();
        assert!((t.eval(&[1.0, 1.0]).re - 4.0).abs() < 1e-15);
        assert!((t.eval(&[0.5, 1.0]).re - 2.0).abs() < 1e-15);
        assert!((t.eval(&[0.5, 0.5]).re - 1.0).abs() < 1e-15);
    }
}
