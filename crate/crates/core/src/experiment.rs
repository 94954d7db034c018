//! Experiment configuration, execution and artifact files.
//!
//! A run evaluates one algorithm at each configured level and writes, per
//! level `n`, into the output directory:
//!
//! - `level_{n}.csv`: header `re,im`, then one point per line in
//!   lexicographic order, each coordinate in `{:.16e}` (17 significant
//!   digits);
//! - `level_{n}.meta`: TOML with the level results under `[level]` and the
//!   configuration needed to rerun just that level under `[config]`;
//! - `level_{n}.plot`: TOML scatter description (points file, axis labels
//!   and ranges).
//!
//! Convergence runs additionally write `convergence.csv` with columns
//! `n,points,d_k,d_aw,d_aw_slack,d_k_decreasing,d_aw_decreasing`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::operator::{
    AccumulatingDiagonal, BasisGrowth, DecomposedOperator, DiagonalOperator, FiniteMatrixOperator,
    JacobiOperator, MatrixElementProvider, ZeroOperator, DEFAULT_BASIS_CAP,
};
use crate::oracle::compare_gamma1;
use crate::schrodinger::{
    gamma3, BoxRegion, FreeLaplacian, LatticeReading, Limits, PhaseBump, PolynomialBump, Potential,
    SchrodingerProblem, ZeroPotential,
};
use crate::scicore::{gamma1, gamma2, Algorithm, SpectralSet};
use crate::setdist::{d_aw, d_k, ClosedSet, Window, DEFAULT_AW_TERMS};

/// Environment variable overriding the default worker count.
pub const WORKERS_ENV: &str = "SCISPEC_WORKERS";

/// Boundary guard used when comparing against the eigenvalue oracle.
pub const ORACLE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Gamma1,
    Gamma2,
    Gamma3,
    OracleCompare,
    #[serde(alias = "converge")]
    Convergence,
}

/// Built-in bounded operators on `ℓ²(ℕ)` and the free Laplacian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    Zero {
        #[serde(default)]
        growth: BasisGrowth,
    },
    Diagonal {
        pattern: Vec<f64>,
        #[serde(default)]
        growth: BasisGrowth,
    },
    Accumulating {
        points: Vec<f64>,
        #[serde(default)]
        growth: BasisGrowth,
    },
    Jacobi {
        diagonal: f64,
        off_diagonal: f64,
        #[serde(default)]
        growth: BasisGrowth,
    },
    /// Real or complex block; `imag` defaults to zero.
    Matrix {
        real: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        imag: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        growth: Option<BasisGrowth>,
    },
    /// `-Δ` on `L²(ℝ^d)` in the Fourier-box basis.
    Laplacian {
        #[serde(default = "one")]
        dim: usize,
    },
}

fn one() -> usize {
    1
}

impl OperatorSpec {
    pub fn build(&self, field: &str, max_basis: usize) -> Result<Arc<dyn MatrixElementProvider>> {
        let wrap = |e: Error| Error::config(field, e.to_string());
        Ok(match self {
            OperatorSpec::Zero { growth } => Arc::new(ZeroOperator { growth: *growth }),
            OperatorSpec::Diagonal { pattern, growth } => {
                Arc::new(DiagonalOperator::new(pattern.clone(), *growth).map_err(wrap)?)
            }
            OperatorSpec::Accumulating { points, growth } => {
                Arc::new(AccumulatingDiagonal::new(points.clone(), *growth).map_err(wrap)?)
            }
            OperatorSpec::Jacobi {
                diagonal,
                off_diagonal,
                growth,
            } => Arc::new(JacobiOperator::new(*diagonal, *off_diagonal, *growth).map_err(wrap)?),
            OperatorSpec::Matrix { real, imag, growth } => {
                let k = real.len();
                if let Some(im) = imag {
                    if im.len() != k || im.iter().any(|r| r.len() != k) {
                        return Err(Error::config(field, "imag must match the shape of real"));
                    }
                }
                if real.iter().any(|r| r.len() != k) {
                    return Err(Error::config(field, "real must be a square matrix"));
                }
                let rows: Vec<Vec<Complex64>> = (0..k)
                    .map(|i| {
                        (0..k)
                            .map(|j| {
                                let im = imag.as_ref().map_or(0.0, |m| m[i][j]);
                                Complex64::new(real[i][j], im)
                            })
                            .collect()
                    })
                    .collect();
                let block = ComplexMatrix::from_rows(&rows).map_err(wrap)?;
                let growth = growth.unwrap_or(BasisGrowth::Constant(k));
                Arc::new(FiniteMatrixOperator::new(block, growth))
            }
            OperatorSpec::Laplacian { dim } => {
                Arc::new(FreeLaplacian::new(*dim, LatticeReading::Ball, max_basis).map_err(wrap)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    /// `c·(1 - |x|²/r²)²` with `c = amplitude + i·amplitude_im`.
    Bump {
        amplitude: f64,
        #[serde(default)]
        amplitude_im: f64,
        radius: f64,
    },
    /// Bump times `exp(i·wavenumber·x₁)`.
    PhaseBump {
        amplitude: f64,
        radius: f64,
        wavenumber: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchrodingerSpec {
    #[serde(default = "one")]
    pub dim: usize,
    pub potential: PotentialSpec,
    /// Defaults to the bounding box of the potential family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<BoxSpec>,
    /// `M ≥ ‖V‖_∞ + ‖∇V‖_∞`; defaults to the family's closed form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1_bound: Option<f64>,
}

impl SchrodingerSpec {
    pub fn build(&self) -> Result<SchrodingerProblem> {
        let wrap = |e: Error| Error::config("schrodinger", e.to_string());
        let d = self.dim;
        let (potential, support, m): (Arc<dyn Potential>, BoxRegion, f64) = match &self.potential {
            PotentialSpec::Zero => (Arc::new(ZeroPotential), BoxRegion::cube(0.5, d), 1.0),
            PotentialSpec::Bump {
                amplitude,
                amplitude_im,
                radius,
            } => {
                let b = PolynomialBump::new(Complex64::new(*amplitude, *amplitude_im), *radius, d)
                    .map_err(wrap)?;
                let (c, m) = (b.support_box(), b.c1_norm());
                (Arc::new(b), c, m)
            }
            PotentialSpec::PhaseBump {
                amplitude,
                radius,
                wavenumber,
            } => {
                let b = PolynomialBump::real(*amplitude, *radius, d).map_err(wrap)?;
                let p = PhaseBump::new(b, *wavenumber).map_err(wrap)?;
                let (c, m) = (p.bump.support_box(), p.c1_bound());
                (Arc::new(p), c, m)
            }
        };
        let support = match &self.support {
            Some(b) => BoxRegion::new(b.lower.clone(), b.upper.clone())
                .map_err(|e| Error::config("schrodinger.support", e.to_string()))?,
            None => support,
        };
        let m = match self.c1_bound {
            Some(v) if !(v > 0.0) || !v.is_finite() => {
                return Err(Error::config("schrodinger.c1_bound", "must be positive"))
            }
            Some(v) => v,
            None => m,
        };
        SchrodingerProblem::new(d, potential, support, m).map_err(wrap)
    }
}

/// Reference closed set for convergence tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    Points { points: Vec<[f64; 2]> },
    HalfLine { start: f64 },
    Intervals { intervals: Vec<[f64; 2]> },
    Disk { center: [f64; 2], radius: f64 },
}

impl SetSpec {
    pub fn build(&self) -> Result<ClosedSet> {
        let r = match self {
            SetSpec::Points { points } => {
                ClosedSet::points(points.iter().map(|p| Complex64::new(p[0], p[1])).collect())
            }
            SetSpec::HalfLine { start } => ClosedSet::half_line(*start),
            SetSpec::Intervals { intervals } => {
                ClosedSet::intervals(intervals.iter().map(|p| (p[0], p[1])).collect())
            }
            SetSpec::Disk { center, radius } => {
                ClosedSet::disk(Complex64::new(center[0], center[1]), *radius)
            }
        };
        r.map_err(|e| Error::config("reference", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            center: [0.0, 0.0],
            radius: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    pub max_basis: usize,
    pub max_l: u64,
    pub max_samples: usize,
    /// Largest admissible grid `|G_n|`.
    pub max_grid: usize,
}

impl Default for Caps {
    fn default() -> Self {
        let limits = Limits::default();
        Self {
            max_basis: DEFAULT_BASIS_CAP,
            max_l: limits.max_l,
            max_samples: limits.max_samples,
            max_grid: 20_000_000,
        }
    }
}

impl Caps {
    pub fn limits(&self) -> Limits {
        Limits {
            max_basis: self.max_basis,
            max_l: self.max_l,
            max_samples: self.max_samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Mode,
    /// Levels `n`, strictly increasing.
    pub levels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorSpec>,
    /// Bounded perturbation `V` for `gamma2`; zero if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<OperatorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schrodinger: Option<SchrodingerSpec>,
    /// Fixed lattice parameter for `gamma3` (relaxed mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u64>,
    /// Algorithm for convergence runs; inferred from the operator if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<SetSpec>,
    #[serde(default)]
    pub window: WindowSpec,
    #[serde(default = "default_aw_terms")]
    pub aw_terms: u32,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub caps: Caps,
}

fn default_aw_terms() -> u32 {
    DEFAULT_AW_TERMS
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    /// Algorithm evaluated at each level.
    pub fn algorithm(&self) -> Algorithm {
        match self.mode {
            Mode::Gamma1 | Mode::OracleCompare => Algorithm::Gamma1,
            Mode::Gamma2 => Algorithm::Gamma2,
            Mode::Gamma3 => Algorithm::Gamma3,
            Mode::Convergence => self.algorithm.unwrap_or(if self.schrodinger.is_some() {
                Algorithm::Gamma3
            } else if self.perturbation.is_some() {
                Algorithm::Gamma2
            } else {
                Algorithm::Gamma1
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::config("levels", "at least one level is required"));
        }
        if self.levels[0] == 0 {
            return Err(Error::config("levels", "levels must be at least 1"));
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config(
                "levels",
                "levels must be strictly increasing",
            ));
        }
        let caps = &self.caps;
        if caps.max_basis == 0 || caps.max_l == 0 || caps.max_samples == 0 || caps.max_grid == 0 {
            return Err(Error::config("caps", "caps must be positive"));
        }
        if self.l == Some(0) {
            return Err(Error::config("l", "must be a positive integer"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be a positive integer"));
        }
        if self.aw_terms == 0 {
            return Err(Error::config("aw_terms", "must be at least 1"));
        }
        if !(self.window.radius > 0.0) || !self.window.radius.is_finite() {
            return Err(Error::config("window.radius", "must be positive"));
        }
        match self.algorithm() {
            Algorithm::Gamma3 => {
                if self.schrodinger.is_none() {
                    return Err(Error::config("schrodinger", "required for gamma3"));
                }
            }
            Algorithm::Gamma1 | Algorithm::Gamma2 => {
                if self.operator.is_none() {
                    return Err(Error::config("operator", "required for this mode"));
                }
            }
            other => {
                return Err(Error::config(
                    "algorithm",
                    format!("{other} is not runnable here"),
                ));
            }
        }
        if self.mode == Mode::Convergence && self.reference.is_none() {
            return Err(Error::config("reference", "required for convergence runs"));
        }
        for &n in &self.levels {
            let estimate = (std::f64::consts::PI * (n as f64).powi(4)).ceil() as u64;
            if estimate > caps.max_grid as u64 {
                return Err(Error::resource(
                    format!("grid G_{n}"),
                    estimate,
                    caps.max_grid as u64,
                ));
            }
        }
        Ok(())
    }

    /// Worker count: the config value, else `SCISPEC_WORKERS`, else the
    /// available parallelism.
    pub fn resolved_workers(&self) -> Result<usize> {
        if let Some(w) = self.workers {
            return Ok(w);
        }
        if let Ok(v) = std::env::var(WORKERS_ENV) {
            return match v.trim().parse::<usize>() {
                Ok(w) if w > 0 => Ok(w),
                _ => Err(Error::config(
                    WORKERS_ENV,
                    format!("not a positive integer: {v:?}"),
                )),
            };
        }
        Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

/// Files and summary for one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRecord {
    pub n: usize,
    pub algorithm: Algorithm,
    pub threshold: f64,
    pub point_count: usize,
    pub basis_size: usize,
    pub grid_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_bound: Option<f64>,
    /// Oracle disagreements outside the boundary guard.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_mismatches: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_guarded: Option<usize>,
    pub elapsed_seconds: f64,
    pub points_file: PathBuf,
    pub meta_file: PathBuf,
    pub plot_file: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub points: usize,
    pub d_k: f64,
    pub d_aw: f64,
    pub d_aw_slack: f64,
    /// Strictly below the previous row; false on the first row.
    pub d_k_decreasing: bool,
    pub d_aw_decreasing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifact {
    pub out_dir: PathBuf,
    pub levels: Vec<LevelRecord>,
    pub sets: Vec<SpectralSet>,
    pub convergence: Option<Vec<ConvergenceRow>>,
}

impl RunArtifact {
    pub fn total_oracle_mismatches(&self) -> usize {
        self.levels.iter().filter_map(|l| l.oracle_mismatches).sum()
    }
}

/// Canonical point-file text.
pub fn format_points(points: &[Complex64]) -> String {
    let mut s = String::with_capacity(16 + points.len() * 48);
    s.push_str("re,im\n");
    for z in points {
        // Normalize -0 so equal sets print identically.
        let (re, im) = (z.re + 0.0, z.im + 0.0);
        let _ = writeln!(s, "{re:.16e},{im:.16e}");
    }
    s
}

/// Parses a point file written by [`format_points`].
pub fn parse_points(text: &str) -> Result<Vec<Complex64>> {
    let mut lines = text.lines();
    if lines.next() != Some("re,im") {
        return Err(Error::input(
            "point file must start with the header `re,im`",
        ));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::input(format!("line {}: expected `re,im`", i + 2)))?;
            let parse = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::input(format!("line {}: {e}", i + 2)))
            };
            Ok(Complex64::new(parse(a)?, parse(b)?))
        })
        .collect()
}

#[derive(Serialize)]
struct MetaFile<'a> {
    level: &'a LevelRecord,
    problem: Option<ProblemMeta>,
    config: &'a ExperimentConfig,
}

#[derive(Serialize)]
struct ProblemMeta {
    dim: usize,
    c1_bound: f64,
    support_measure: f64,
    potential: String,
}

#[derive(Serialize)]
struct PlotFile {
    kind: &'static str,
    title: String,
    points_file: String,
    x_label: &'static str,
    y_label: &'static str,
    x_range: [f64; 2],
    y_range: [f64; 2],
}

struct LevelOutcome {
    set: SpectralSet,
    mismatches: Option<usize>,
    guarded: Option<usize>,
}

struct Prepared {
    provider: Option<Arc<dyn MatrixElementProvider>>,
    decomposed: Option<DecomposedOperator>,
    problem: Option<SchrodingerProblem>,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let provider = cfg
        .operator
        .as_ref()
        .map(|s| s.build("operator", cfg.caps.max_basis))
        .transpose()?;
    let decomposed = match (cfg.algorithm(), &provider) {
        (Algorithm::Gamma2, Some(t)) => {
            let d = match &cfg.perturbation {
                Some(v) => {
                    DecomposedOperator::new(t.clone(), v.build("perturbation", cfg.caps.max_basis)?)
                }
                None => DecomposedOperator::unperturbed(t.clone()),
            };
            Some(d.map_err(|e| Error::config("operator", e.to_string()))?)
        }
        _ => None,
    };
    let problem = cfg.schrodinger.as_ref().map(|s| s.build()).transpose()?;
    Ok(Prepared {
        provider,
        decomposed,
        problem,
    })
}

fn run_level(cfg: &ExperimentConfig, prep: &Prepared, n: usize) -> Result<LevelOutcome> {
    let cap = cfg.caps.max_basis;
    let none = |set| LevelOutcome {
        set,
        mismatches: None,
        guarded: None,
    };
    let provider = || prep.provider.as_deref().expect("validated operator");
    Ok(match (cfg.mode, cfg.algorithm()) {
        (Mode::OracleCompare, _) => {
            let cmp = compare_gamma1(provider(), n, cap, ORACLE_GUARD)?;
            LevelOutcome {
                set: cmp.primary,
                mismatches: Some(cmp.mismatches.len()),
                guarded: Some(cmp.guarded.len()),
            }
        }
        (_, Algorithm::Gamma1) => none(gamma1(provider(), n, cap)?),
        (_, Algorithm::Gamma2) => none(gamma2(
            prep.decomposed.as_ref().expect("validated operator"),
            n,
            cap,
        )?),
        (_, Algorithm::Gamma3) => none(gamma3(
            prep.problem.as_ref().expect("validated problem"),
            n,
            cfg.l,
            &cfg.caps.limits(),
        )?),
        (_, other) => {
            return Err(Error::config(
                "algorithm",
                format!("{other} is not runnable here"),
            ))
        }
    })
}

fn write_level(
    cfg: &ExperimentConfig,
    prep: &Prepared,
    out: &Path,
    outcome: &LevelOutcome,
    elapsed: f64,
) -> Result<LevelRecord> {
    let set = &outcome.set;
    let n = set.n;
    let points_file = out.join(format!("level_{n}.csv"));
    let meta_file = out.join(format!("level_{n}.meta"));
    let plot_file = out.join(format!("level_{n}.plot"));
    let record = LevelRecord {
        n,
        algorithm: set.algorithm,
        threshold: set.threshold,
        point_count: set.len(),
        basis_size: set.provenance.basis_size,
        grid_size: set.provenance.grid_size,
        l: set.provenance.l,
        error_bound: set.provenance.error_bound,
        oracle_mismatches: outcome.mismatches,
        oracle_guarded: outcome.guarded,
        elapsed_seconds: elapsed,
        points_file: points_file.clone(),
        meta_file: meta_file.clone(),
        plot_file: plot_file.clone(),
    };
    fs::write(&points_file, format_points(&set.points))?;

    let mut rerun = cfg.clone();
    rerun.levels = vec![n];
    if set.algorithm == Algorithm::Gamma3 {
        // Pin the lattice actually used so the level reruns identically.
        rerun.l = set.provenance.l;
    }
    let problem = prep.problem.as_ref().map(|p| ProblemMeta {
        dim: p.dim(),
        c1_bound: p.c1_bound(),
        support_measure: p.support().measure(),
        potential: p.potential().describe(),
    });
    let meta = MetaFile {
        level: &record,
        problem,
        config: &rerun,
    };
    let text = toml::to_string(&meta).map_err(|e| Error::config("meta", e.to_string()))?;
    fs::write(&meta_file, text)?;

    let extent = n as f64;
    let plot = PlotFile {
        kind: "scatter",
        title: format!("{} at n = {n}", set.algorithm),
        points_file: format!("level_{n}.csv"),
        x_label: "Re λ",
        y_label: "Im λ",
        x_range: [-extent, extent],
        y_range: [-extent, extent],
    };
    let text = toml::to_string(&plot).map_err(|e| Error::config("plot", e.to_string()))?;
    fs::write(&plot_file, text)?;
    Ok(record)
}

fn run_levels(cfg: &ExperimentConfig) -> Result<RunArtifact> {
    cfg.validate()?;
    let workers = cfg.resolved_workers()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let prep = prepare(cfg)?;
    fs::create_dir_all(&cfg.out)?;
    let mut levels = Vec::with_capacity(cfg.levels.len());
    let mut sets = Vec::with_capacity(cfg.levels.len());
    for &n in &cfg.levels {
        let start = Instant::now();
        let outcome = pool.install(|| run_level(cfg, &prep, n))?;
        let elapsed = start.elapsed().as_secs_f64();
        levels.push(write_level(cfg, &prep, &cfg.out, &outcome, elapsed)?);
        sets.push(outcome.set);
    }
    Ok(RunArtifact {
        out_dir: cfg.out.clone(),
        levels,
        sets,
        convergence: None,
    })
}

/// Runs the configured mode at every level and writes its files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifact> {
    if cfg.mode == Mode::Convergence {
        return convergence_report(cfg);
    }
    run_levels(cfg)
}

/// Runs every level and tabulates `d_K` and truncated `d_AW` against the
/// reference set.
pub fn convergence_report(cfg: &ExperimentConfig) -> Result<RunArtifact> {
    let reference = cfg
        .reference
        .as_ref()
        .ok_or_else(|| Error::config("reference", "required for convergence runs"))?
        .build()?;
    let window = Window::new(
        Complex64::new(cfg.window.center[0], cfg.window.center[1]),
        cfg.window.radius,
    )
    .map_err(|e| Error::config("window", e.to_string()))?;
    let mut artifact = run_levels(cfg)?;
    let workers = cfg.resolved_workers()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(artifact.sets.len());
    for set in &artifact.sets {
        let x = ClosedSet::from(set);
        let dk = d_k(&x, &reference, &window);
        let aw = pool.install(|| d_aw(&x, &reference, cfg.aw_terms))?;
        let prev = rows.last();
        rows.push(ConvergenceRow {
            n: set.n,
            points: set.len(),
            d_k: dk,
            d_aw: aw.estimate,
            d_aw_slack: aw.slack,
            d_k_decreasing: prev.is_some_and(|p| dk < p.d_k),
            d_aw_decreasing: prev.is_some_and(|p| aw.estimate < p.d_aw),
        });
    }
    let mut csv = String::from("n,points,d_k,d_aw,d_aw_slack,d_k_decreasing,d_aw_decreasing\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{:.16e},{:.16e},{:.16e},{},{}",
            r.n, r.points, r.d_k, r.d_aw, r.d_aw_slack, r.d_k_decreasing, r.d_aw_decreasing
        );
    }
    fs::write(cfg.out.join("convergence.csv"), csv)?;
    artifact.convergence = Some(rows);
    Ok(artifact)
}
