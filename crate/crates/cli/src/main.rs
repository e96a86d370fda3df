//! `bergman-lab`: batch front end. Exit codes: 0 pass, 1 computation or
//! verdict failure, 2 usage error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod suites;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CliError, CliResult, Format, RunConfig, ScanArgs};

#[derive(Debug, Parser)]
#[command(name = "bergman-lab", version, about = "Weighted Bergman-space diagnostics")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "BERGMAN_LAB_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test-exponent thresholds for the boundedness criterion.
    ///
    /// For p > 1, S is bounded on A^p_alpha when sup_z ||S_z 1||_(m,alpha) is
    /// finite for some m > p(2+alpha)/(1+alpha) max{1, 1/(p-1)}. For 0 < p <= 1
    /// the threshold is max{(2+alpha)/(p delta) + 1, (1+p delta)/(1+alpha) + 1}
    /// with the weight beta = (2+alpha)/p - 2 + delta. For p > 2 the m-window of
    /// the A^p -> A^q result is also printed.
    Threshold {
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        /// Only for p <= 1; defaults to (1+alpha)/p, where both branches agree.
        #[arg(long)]
        delta: Option<f64>,
        /// With --q and p > 2, classify the A^p -> A^q regime.
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
    },
    /// Run one module's invariant sweep and print CSV rows.
    Verify {
        /// geometry, quadrature, kernels, estimates, lattice, atomic or operators.
        suite: String,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Seed for sampled checks.
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
    },
    /// Berezin transform and ||S_z 1|| norms along rays toward the boundary.
    ///
    /// S is compact exactly when its Berezin transform tends to 0 at the
    /// boundary. The verdict "compact-consistent" means the outermost |S~| is
    /// below 5% of the innermost and decays monotonically over the outer half
    /// of every ray; a finite scan cannot prove compactness.
    Scan {
        /// identity, zero, toeplitz:{one|oneminusr2|halfdisk|radialpow:k},
        /// diagonal:{inv_n|const:c|geom:q}, finiterank:proj.
        #[arg(long)]
        op: String,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        p: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        /// Test exponent; defaults to the smallest integer above the threshold.
        #[arg(long)]
        m: Option<f64>,
        /// Number of equally spaced rays.
        #[arg(long, default_value_t = 8)]
        rays: usize,
        /// Radii 1 - 2^-j for j = 1..=depth.
        #[arg(long, default_value_t = 7)]
        depth: usize,
        /// Explicit comma-separated radii; overrides --depth.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        /// Fixed quadrature size (with --n-ang) instead of per-sample grids.
        #[arg(long)]
        n_rad: Option<usize>,
        #[arg(long)]
        n_ang: Option<usize>,
        /// Output stem; writes <stem>.json and/or <stem>.csv.
        #[arg(long, default_value = "scan")]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
    },
    /// Atomic decomposition on an r-lattice and its reconstruction error.
    ///
    /// Functions in A^p_alpha are sums of c_k (1-|a_k|^2)^b / (1 - conj(a_k) w)^b
    /// over lattice centers a_k with (c_k) in l^p. Writes <stem>.expansion and the
    /// error table <stem>.csv; fails if the solve is ill-conditioned or the
    /// relative error on |w| <= 0.8 exceeds 1e-2.
    Atomic {
        /// one, w, monomial:<n>, kernel:<re>[,<im>].
        #[arg(long, default_value = "one")]
        f: String,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        p: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        /// Lattice separation parameter.
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        /// Lattice truncation radius.
        #[arg(long, default_value_t = 0.95)]
        r_max: f64,
        /// Ridge parameter of the sampling solve.
        #[arg(long, default_value_t = bergman_lab::atomic::DEFAULT_RIDGE)]
        ridge: f64,
        #[arg(long, default_value = "atomic")]
        output: PathBuf,
    },
}

fn run(cmd: Command) -> CliResult<String> {
    match cmd {
        Command::Threshold { p, alpha, delta, m, q } => commands::threshold(p, alpha, delta, m, q),
        Command::Verify { suite, output, seed } => {
            let rows = suites::run(&suite, seed).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown suite '{suite}' (one of {})",
                    suites::SUITES.join(", ")
                ))
            })??;
            let csv = suites::to_csv(&rows);
            match output {
                Some(path) => fs::write(&path, &csv)?,
                None => print!("{csv}"),
            }
            let failed = rows.iter().filter(|r| !r.pass).count();
            let summary = format!("{suite}: {} of {} checks passed", rows.len() - failed, rows.len());
            if failed > 0 {
                return Err(CliError::Failure(summary));
            }
            eprintln!("{summary}");
            Ok(String::new())
        }
        Command::Scan {
            op,
            p,
            alpha,
            m,
            rays,
            depth,
            radii,
            n_rad,
            n_ang,
            output,
            format,
        } => {
            let cfg = RunConfig::scan(ScanArgs {
                op: &op,
                p,
                alpha,
                m,
                rays,
                radii: radii.as_deref(),
                depth,
                n_rad,
                n_ang,
                output: &output,
                format,
            })?;
            commands::scan(&cfg)
        }
        Command::Atomic {
            f,
            p,
            alpha,
            r,
            r_max,
            ridge,
            output,
        } => {
            let cfg = RunConfig::atomic(&f, p, alpha, r, r_max, ridge, &output)?;
            commands::atomic(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    match cli.jobs {
        Some(0) => {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        Some(n) => pool = pool.num_threads(n),
        None => {}
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(out) => {
            if !out.is_empty() {
                println!("{}", out.trim_end());
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
