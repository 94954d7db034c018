use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scispec::experiment::{run_experiment, ExperimentConfig, Mode, RunArtifact};
use scispec::Error;

/// Spectral inclusion sets from finite truncations.
#[derive(Parser)]
#[command(name = "scispec", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Selfadjoint operators: `s(T_n - λ) ≤ 1/n`.
    Gamma1(RunArgs),
    /// Perturbed operators `T + V`.
    Gamma2(RunArgs),
    /// Schrödinger operators `-Δ + V`.
    Gamma3(RunArgs),
    /// Compare gamma1 with the dense eigenvalue oracle.
    OracleCompare(RunArgs),
    /// Convergence table against a reference set.
    Converge(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Levels, comma separated (overrides the config).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Fixed lattice parameter for gamma3 (relaxed mode).
    #[arg(long)]
    l: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Maximum basis size.
    #[arg(long)]
    cap: Option<usize>,
}

fn configure(mode: Mode, args: RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(&args.config).map_err(|e| match e {
        Error::Io(io) => Error::Config {
            field: "--config".into(),
            reason: format!("{}: {io}", args.config.display()),
        },
        other => other,
    })?;
    cfg.mode = mode;
    if let Some(n) = args.n {
        cfg.levels = n;
    }
    if args.l.is_some() {
        cfg.l = args.l;
    }
    if let Some(out) = args.out {
        cfg.out = out;
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    if let Some(cap) = args.cap {
        cfg.caps.max_basis = cap;
    }
    Ok(cfg)
}

fn report(art: &RunArtifact) {
    for rec in &art.levels {
        let mut line = format!(
            "{} n={} k_n={} points={} file={}",
            rec.algorithm,
            rec.n,
            rec.basis_size,
            rec.point_count,
            rec.points_file.display()
        );
        if let Some(l) = rec.l {
            line.push_str(&format!(" l={l}"));
        }
        if let Some(b) = rec.error_bound {
            line.push_str(&format!(" error_bound={b:.6e}"));
        }
        if let Some(m) = rec.oracle_mismatches {
            line.push_str(&format!(
                " oracle_mismatches={m} guarded={}",
                rec.oracle_guarded.unwrap_or(0)
            ));
        }
        println!("{line}");
    }
    if let Some(rows) = &art.convergence {
        println!("n,d_k,d_aw");
        for r in rows {
            println!("{},{:.6e},{:.6e}", r.n, r.d_k, r.d_aw);
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.verb {
        Verb::Gamma1(a) => (Mode::Gamma1, a),
        Verb::Gamma2(a) => (Mode::Gamma2, a),
        Verb::Gamma3(a) => (Mode::Gamma3, a),
        Verb::OracleCompare(a) => (Mode::OracleCompare, a),
        Verb::Converge(a) => (Mode::Convergence, a),
    };
    match configure(mode, args).and_then(|cfg| run_experiment(&cfg)) {
        Ok(art) => {
            report(&art);
            if art.total_oracle_mismatches() > 0 {
                eprintln!("error: gamma1 and the eigenvalue oracle disagree");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else if e.is_resource() {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
