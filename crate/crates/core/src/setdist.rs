//! Distances between closed subsets of ℂ: the windowed two-sided distance
//! `d_K`, a truncated Attouch-Wets series, and Hausdorff distance.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scicore::{lex_cmp, SpectralSet};

/// Default truncation of the Attouch-Wets series; the tail is `2^-20`.
pub const DEFAULT_AW_TERMS: u32 = 20;

/// Closed subset of ℂ with a closed-form point distance.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedSet {
    /// Finite set, kept sorted and deduplicated.
    Points(Vec<Complex64>),
    /// `[start, ∞) ⊂ ℝ`.
    HalfLine { start: f64 },
    /// Finite union of closed real intervals, merged and sorted.
    Intervals(Vec<(f64, f64)>),
    /// Closed disk.
    Disk { center: Complex64, radius: f64 },
}

impl ClosedSet {
    pub fn points(mut pts: Vec<Complex64>) -> Result<Self> {
        if pts.iter().any(|z| !z.is_finite()) {
            return Err(Error::input("point set contains a non-finite value"));
        }
        pts.sort_by(lex_cmp);
        pts.dedup();
        Ok(ClosedSet::Points(pts))
    }

    pub fn half_line(start: f64) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::input("half-line start must be finite"));
        }
        Ok(ClosedSet::HalfLine { start })
    }

    pub fn intervals(mut parts: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &parts {
            if !a.is_finite() || !b.is_finite() || a > b {
                return Err(Error::input(format!("invalid interval [{a}, {b}]")));
            }
        }
        parts.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(parts.len());
        for (a, b) in parts {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(ClosedSet::Intervals(merged))
    }

    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        if !center.is_finite() || !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::input("disk needs a finite center and radius ≥ 0"));
        }
        Ok(ClosedSet::Disk { center, radius })
    }

    pub fn is_empty(&self) -> bool {
        match self {
            ClosedSet::Points(p) => p.is_empty(),
            ClosedSet::Intervals(v) => v.is_empty(),
            _ => false,
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, ClosedSet::HalfLine { .. })
    }

    pub fn dist_to(&self, z: Complex64) -> f64 {
        dist_to(z, self)
    }
}

impl From<&SpectralSet> for ClosedSet {
    fn from(s: &SpectralSet) -> Self {
        // Spectral sets are already lexicographic and duplicate-free.
        ClosedSet::Points(s.points.clone())
    }
}

/// Euclidean distance from `z` to `s`; `+∞` for the empty set.
pub fn dist_to(z: Complex64, s: &ClosedSet) -> f64 {
    match s {
        ClosedSet::Points(p) => p
            .iter()
            .map(|&w| (z - w).norm())
            .fold(f64::INFINITY, f64::min),
        ClosedSet::HalfLine { start } => {
            if z.re >= *start {
                z.im.abs()
            } else {
                (z - start).norm()
            }
        }
        ClosedSet::Intervals(v) => v
            .iter()
            .map(|&(a, b)| Complex64::new(z.re - z.re.clamp(a, b), z.im).norm())
            .fold(f64::INFINITY, f64::min),
        ClosedSet::Disk { center, radius } => ((z - center).norm() - radius).max(0.0),
    }
}

/// Closed disk used as the compact window `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub center: Complex64,
    pub radius: f64,
}

impl Window {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !center.is_finite() || !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::input(
                "window needs a finite center and positive radius",
            ));
        }
        Ok(Self { center, radius })
    }

    /// Smallest disk containing the rectangle `[re0, re1] × [im0, im1]`.
    pub fn enclosing_rect(re0: f64, re1: f64, im0: f64, im1: f64) -> Result<Self> {
        let center = Complex64::new(0.5 * (re0 + re1), 0.5 * (im0 + im1));
        Self::new(center, (Complex64::new(re0, im0) - center).norm())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }

    /// `K ∩ ℝ` as an interval, if nonempty.
    fn real_chord(&self) -> Option<(f64, f64)> {
        let y = self.center.im.abs();
        if y > self.radius {
            return None;
        }
        let w = (self.radius * self.radius - y * y).sqrt();
        Some((self.center.re - w, self.center.re + w))
    }
}

/// `sup_{x ∈ X ∩ K} dist(x, Y)`, with the empty supremum equal to 0.
fn one_sided(x: &ClosedSet, y: &ClosedSet, k: &Window) -> f64 {
    match x {
        ClosedSet::Points(p) => p
            .iter()
            .filter(|&&z| k.contains(z))
            .map(|&z| dist_to(z, y))
            .fold(0.0, f64::max),
        ClosedSet::HalfLine { start } => real_pieces(&[(*start, f64::INFINITY)], k)
            .iter()
            .map(|&(a, b)| sup_on_segment(a, b, y))
            .fold(0.0, f64::max),
        ClosedSet::Intervals(v) => real_pieces(v, k)
            .iter()
            .map(|&(a, b)| sup_on_segment(a, b, y))
            .fold(0.0, f64::max),
        ClosedSet::Disk { center, radius } => sup_on_disk_sampled(*center, *radius, k, y),
    }
}

/// Intersections of real intervals with `K ∩ ℝ`.
fn real_pieces(parts: &[(f64, f64)], k: &Window) -> Vec<(f64, f64)> {
    let Some((lo, hi)) = k.real_chord() else {
        return Vec::new();
    };
    parts
        .iter()
        .filter_map(|&(a, b)| {
            let (a, b) = (a.max(lo), b.min(hi));
            (a <= b).then_some((a, b))
        })
        .collect()
}

/// Exact `sup_{t ∈ [a, b]} dist(t, Y)` for real `t`.
fn sup_on_segment(a: f64, b: f64, y: &ClosedSet) -> f64 {
    let at = |t: f64| dist_to(Complex64::new(t, 0.0), y);
    match y {
        // Convex in t.
        ClosedSet::Disk { .. } => at(a).max(at(b)),
        ClosedSet::HalfLine { .. } => at(a).max(at(b)),
        // Piecewise linear; interior maxima sit at gap midpoints.
        ClosedSet::Intervals(v) => v
            .windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].0))
            .filter(|&m| a <= m && m <= b)
            .map(at)
            .fold(at(a).max(at(b)), f64::max),
        ClosedSet::Points(p) => {
            if p.is_empty() {
                return f64::INFINITY;
            }
            // On each real Voronoi cell dist(t, y_j) is convex, so the
            // maximum over the cell sits at its clipped endpoints.
            let mut best = 0.0f64;
            for (j, &yj) in p.iter().enumerate() {
                let (mut lo, mut hi) = (a, b);
                for (i, &yi) in p.iter().enumerate() {
                    if i == j || lo > hi {
                        continue;
                    }
                    // |t - yj| ≤ |t - yi|  ⟺  2t(yi.re - yj.re) ≤ |yi|² - |yj|².
                    let slope = 2.0 * (yi.re - yj.re);
                    let rhs = yi.norm_sqr() - yj.norm_sqr();
                    match slope.partial_cmp(&0.0) {
                        Some(Ordering::Greater) => hi = hi.min(rhs / slope),
                        Some(Ordering::Less) => lo = lo.max(rhs / slope),
                        _ => {
                            if rhs < 0.0 {
                                lo = f64::INFINITY;
                            }
                        }
                    }
                }
                if lo <= hi {
                    let d = |t: f64| (Complex64::new(t, 0.0) - yj).norm();
                    best = best.max(d(lo)).max(d(hi));
                }
            }
            best
        }
    }
}

/// Lower estimate of `sup dist(x, Y)` over a disk intersected with `K`, from
/// a 512 × 512 grid over the smaller disk's bounding square.
fn sup_on_disk_sampled(center: Complex64, radius: f64, k: &Window, y: &ClosedSet) -> f64 {
    const STEPS: i64 = 512;
    let (c, r) = if radius <= k.radius {
        (center, radius)
    } else {
        (k.center, k.radius)
    };
    let h = 2.0 * r / STEPS as f64;
    (0..=STEPS)
        .into_par_iter()
        .map(|a| {
            let mut best = 0.0f64;
            for b in 0..=STEPS {
                let z = c + Complex64::new(-r + a as f64 * h, -r + b as f64 * h);
                if (z - center).norm() <= radius && k.contains(z) {
                    best = best.max(dist_to(z, y));
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// `max(sup_{x∈X∩K} dist(x,Y), sup_{y∈Y∩K} dist(y,X))`.
///
/// A supremum over an empty intersection is 0, so two empty sets are at
/// distance 0. Exact for point and real-line sets; a disk on the source side
/// is sampled.
pub fn d_k(x: &ClosedSet, y: &ClosedSet, k: &Window) -> f64 {
    one_sided(x, y, k).max(one_sided(y, x, k))
}

/// Hausdorff distance between finite sets; `+∞` if exactly one is empty.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let one = |p: &[Complex64], q: &[Complex64]| {
        p.iter()
            .map(|&z| {
                q.iter()
                    .map(|&w| (z - w).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

/// Truncated Attouch-Wets distance with its error budget.
#[derive(Debug, Clone, PartialEq)]
pub struct AwEstimate {
    /// `Σ_{i ≤ i_max} 2^-i min{1, s_i}` with `s_i` the sampled inner sup.
    pub estimate: f64,
    /// Added Lipschitz allowance: the true truncated sum is at most
    /// `estimate + slack`.
    pub slack: f64,
    /// Series tail bound `2^-i_max`.
    pub tail: f64,
    /// Sampled inner sups per term, before the cap at 1.
    pub terms: Vec<f64>,
}

impl AwEstimate {
    pub fn upper(&self) -> f64 {
        self.estimate + self.slack + self.tail
    }
}

const BLOCK: i64 = 16;

/// Sampled `sup_{|x| < i} |dist(x,A) - dist(x,B)|` on the grid `h·ℤ²`,
/// `h = 1/(8i)`.
///
/// Grid blocks whose Lipschitz bound cannot beat the running maximum are
/// skipped; the value equals the maximum over every grid point. Points of
/// finite sets inside the disk are sampled as well.
fn inner_sup(a: &ClosedSet, b: &ClosedSet, i: u32, cap: Option<f64>) -> f64 {
    let scale = 8 * i as i64;
    let h = 1.0 / scale as f64;
    // Grid indices satisfy p² + q² < (8i·i)².
    let rad = scale * i as i64;
    let rad2 = rad * rad;
    let f = |z: Complex64| (dist_to(z, a) - dist_to(z, b)).abs();
    let inside = |p: i64, q: i64| p * p + q * q < rad2;
    let to_z = |p: i64, q: i64| Complex64::new(p as f64 * h, q as f64 * h);

    let mut best = 0.0f64;
    for s in [a, b] {
        if let ClosedSet::Points(pts) = s {
            for &z in pts {
                if z.norm() < i as f64 {
                    best = best.max(f(z));
                }
            }
        }
    }
    let upper_cap = cap.unwrap_or(f64::INFINITY);
    if best >= 1.0 || best >= upper_cap {
        return best;
    }

    let nblocks = (2 * rad + 1 + BLOCK - 1) / BLOCK;
    let origin = -rad;
    let blocks: Vec<(i64, i64)> = (0..nblocks)
        .flat_map(|u| (0..nblocks).map(move |v| (u, v)))
        .collect();
    let centers: Vec<(f64, f64)> = blocks
        .par_iter()
        .map(|&(u, v)| {
            let p = origin + u * BLOCK + BLOCK / 2;
            let q = origin + v * BLOCK + BLOCK / 2;
            let val = f(to_z(p, q));
            let sample = if inside(p, q) { val } else { 0.0 };
            (sample, val)
        })
        .collect();
    best = centers.iter().map(|c| c.0).fold(best, f64::max);
    if best >= 1.0 || best >= upper_cap {
        return best;
    }
    // Any block point lies within BLOCK/√2 grid steps of the center.
    let allowance = 2.0 * BLOCK as f64 * std::f64::consts::FRAC_1_SQRT_2 * h;
    let floor = best;
    let refined = blocks
        .par_iter()
        .zip(&centers)
        .filter(|(_, c)| (c.1 + allowance).min(upper_cap).min(1.0) > floor)
        .map(|(&(u, v), _)| {
            let mut m = 0.0f64;
            for p in (origin + u * BLOCK)..(origin + (u + 1) * BLOCK).min(rad + 1) {
                for q in (origin + v * BLOCK)..(origin + (v + 1) * BLOCK).min(rad + 1) {
                    if inside(p, q) {
                        m = m.max(f(to_z(p, q)));
                    }
                }
            }
            m
        })
        .reduce(|| 0.0, f64::max);
    best.max(refined)
}

/// `Σ_{i=1}^{i_max} 2^-i min{1, sup_{|x|<i} |dist(x,A) - dist(x,B)|}`.
///
/// Each inner sup is sampled on a square grid of step `h = 1/(8i)` over the
/// open disk, and the Lipschitz allowance `√2·h` per unsaturated term is
/// reported as slack. If exactly one set is empty every term is 1.
pub fn d_aw(a: &ClosedSet, b: &ClosedSet, i_max: u32) -> Result<AwEstimate> {
    if i_max == 0 {
        return Err(Error::input("i_max must be at least 1"));
    }
    let tail = 0.5f64.powi(i_max as i32);
    let saturated = 1.0 - tail;
    match (a.is_empty(), b.is_empty()) {
        (true, true) => {
            return Ok(AwEstimate {
                estimate: 0.0,
                slack: 0.0,
                tail,
                terms: vec![0.0; i_max as usize],
            })
        }
        (true, false) | (false, true) => {
            return Ok(AwEstimate {
                estimate: saturated,
                slack: 0.0,
                tail,
                terms: vec![f64::INFINITY; i_max as usize],
            })
        }
        _ => {}
    }
    if a == b {
        return Ok(AwEstimate {
            estimate: 0.0,
            slack: 0.0,
            tail,
            terms: vec![0.0; i_max as usize],
        });
    }
    // For bounded finite sets the integrand never exceeds the Hausdorff distance.
    let cap = match (a, b) {
        (ClosedSet::Points(p), ClosedSet::Points(q)) => Some(hausdorff(p, q)),
        _ => None,
    };
    let mut terms = Vec::with_capacity(i_max as usize);
    for i in 1..=i_max {
        // The inner sup is monotone in i, so saturation propagates.
        if terms.last().is_some_and(|&s: &f64| s >= 1.0) {
            terms.push(*terms.last().unwrap());
            continue;
        }
        terms.push(inner_sup(a, b, i, cap));
    }
    let mut estimate = 0.0;
    let mut slack = 0.0;
    for (idx, &s) in terms.iter().enumerate() {
        let w = 0.5f64.powi(idx as i32 + 1);
        let h = 1.0 / (8.0 * (idx as f64 + 1.0));
        let lo = s.min(1.0);
        estimate += w * lo;
        slack += w * ((s + std::f64::consts::SQRT_2 * h).min(1.0) - lo);
    }
    Ok(AwEstimate {
        estimate,
        slack,
        tail,
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pts(v: &[(f64, f64)]) -> ClosedSet {
        ClosedSet::points(v.iter().map(|&(a, b)| c(a, b)).collect()).unwrap()
    }

    #[test]
    fn dist_examples() {
        assert_eq!(dist_to(c(3.0, 4.0), &pts(&[(0.0, 0.0)])), 5.0);
        let half = ClosedSet::half_line(0.0).unwrap();
        assert_eq!(dist_to(c(-2.0, 0.0), &half), 2.0);
        assert_eq!(dist_to(c(1.0, 1.0), &half), 1.0);
        assert_eq!(
            dist_to(c(1.0, 1.0), &ClosedSet::Points(vec![])),
            f64::INFINITY
        );
        let iv = ClosedSet::intervals(vec![(2.0, 3.0), (-1.0, 0.0), (2.5, 4.0)]).unwrap();
        assert_eq!(iv, ClosedSet::Intervals(vec![(-1.0, 0.0), (2.0, 4.0)]));
        assert_eq!(dist_to(c(1.0, 0.0), &iv), 1.0);
        let d = ClosedSet::disk(c(1.0, 0.0), 1.0).unwrap();
        assert_eq!(dist_to(c(4.0, 0.0), &d), 2.0);
        assert_eq!(dist_to(c(1.5, 0.0), &d), 0.0);
    }

    #[test]
    fn d_k_examples() {
        let k = Window::new(c(0.0, 0.0), 2.0).unwrap();
        let zero = pts(&[(0.0, 0.0)]);
        assert_eq!(d_k(&zero, &zero, &k), 0.0);
        assert_eq!(d_k(&zero, &pts(&[(3.0, 0.0)]), &k), 3.0);
        assert_eq!(d_k(&pts(&[(0.0, 0.0), (1.0, 0.0)]), &zero, &k), 1.0);
        let empty = ClosedSet::Points(vec![]);
        assert_eq!(d_k(&empty, &empty, &k), 0.0);
    }

    #[test]
    fn d_k_segment_sources() {
        let k = Window::new(c(5.0, 0.0), 26f64.sqrt()).unwrap();
        let half = ClosedSet::half_line(0.0).unwrap();
        // K ∩ ℝ = [5 - √26, 5 + √26]; the far end is 5 + √26 - 2 from {2}.
        let two = pts(&[(2.0, 0.0)]);
        let expected = 5.0 + 26f64.sqrt() - 2.0;
        assert!((d_k(&half, &two, &k) - expected).abs() < 1e-12);
        // Voronoi interior maxima: midpoint between 0 and 4 is 2 away.
        let k2 = Window::new(c(2.0, 0.0), 2.0).unwrap();
        let ends = pts(&[(0.0, 0.0), (4.0, 0.0)]);
        let seg = ClosedSet::intervals(vec![(0.0, 4.0)]).unwrap();
        assert!((d_k(&seg, &ends, &k2) - 2.0).abs() < 1e-12);
        // Gap midpoints for interval targets.
        let gaps = ClosedSet::intervals(vec![(0.0, 1.0), (3.0, 4.0)]).unwrap();
        assert!((d_k(&seg, &gaps, &k2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn d_k_is_hausdorff_inside_window() {
        let a = [c(0.0, 0.0), c(1.0, 1.0)];
        let b = [c(0.5, 0.0), c(-1.0, 2.0)];
        let k = Window::new(c(0.0, 0.0), 5.0).unwrap();
        let da = ClosedSet::points(a.to_vec()).unwrap();
        let db = ClosedSet::points(b.to_vec()).unwrap();
        assert_eq!(d_k(&da, &db, &k), hausdorff(&a, &b));
    }

    #[test]
    fn aw_examples() {
        let zero = pts(&[(0.0, 0.0)]);
        assert_eq!(d_aw(&zero, &zero, 20).unwrap().estimate, 0.0);
        let r = d_aw(&zero, &pts(&[(1.0, 0.0)]), 20).unwrap();
        assert!((r.estimate - (1.0 - 2f64.powi(-20))).abs() <= r.slack + 1e-15);
        let empty = ClosedSet::Points(vec![]);
        assert_eq!(d_aw(&zero, &empty, 3).unwrap().estimate, 0.875);
        assert!(d_aw(&zero, &zero, 0).is_err());
    }

    #[test]
    fn aw_far_point() {
        // The extra point at 10 is invisible for |x| < 5 and saturates from i = 6.
        let r = d_aw(&pts(&[(0.0, 0.0)]), &pts(&[(0.0, 0.0), (10.0, 0.0)]), 20).unwrap();
        for i in 0..5 {
            assert_eq!(r.terms[i], 0.0);
        }
        for i in 5..20 {
            assert!(r.terms[i] >= 1.0);
        }
        let expected: f64 = (6..=20).map(|i| 0.5f64.powi(i)).sum();
        assert!((r.estimate - expected).abs() < 1e-15);
    }

    #[test]
    fn aw_pruning_matches_full_sampling() {
        let a = pts(&[(0.0, 0.0), (0.3, 0.2)]);
        let b = ClosedSet::half_line(-0.5).unwrap();
        for i in 1..=3 {
            let fast = inner_sup(&a, &b, i, None);
            let s = 8 * i as i64;
            let rad = s * i as i64;
            let mut full = 0.0f64;
            for p in -rad..=rad {
                for q in -rad..=rad {
                    if p * p + q * q < rad * rad {
                        let z = c(p as f64 / s as f64, q as f64 / s as f64);
                        full = full.max((dist_to(z, &a) - dist_to(z, &b)).abs());
                    }
                }
            }
            assert_eq!(fast.min(1.0), full.min(1.0), "i = {i}");
        }
    }
}
