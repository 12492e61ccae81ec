//! `trace-lab` CLI: trace estimation over unit spheres of 1-symmetric
//! normed spaces, exact group verification, the ellipse counterexample,
//! and convergence studies.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trace_lab::hyperoctahedral::{conjugation_constant, conjugation_sum};
use trace_lab::trace::{
    convergence_study, ellipse_counterexample, estimate_trace, load_matrix, Method,
    TraceExperimentConfig,
};
use trace_lab::{NormSpec64, Result};

#[derive(Parser)]
#[command(name = "trace-lab", version, about = "Matrix trace as an average over unit spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Montecarlo,
    Quadrature2d,
    Groupaverage,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Montecarlo => Method::MonteCarlo,
            MethodArg::Quadrature2d => Method::Quadrature2d,
            MethodArg::Groupaverage => Method::GroupAverage,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Estimate tr A = N·∫ ⟨Ax, x*⟩ dμ over the unit sphere of a norm.
    #[command(name = "trace-estimate")]
    TraceEstimate {
        /// Norm descriptor, e.g. lp:3:4, l1:2, topk:2:3, wl2:1,0.5
        #[arg(long)]
        norm: String,
        /// Matrix file (JSON {"n":N,"rows":[[..]]} or CSV)
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        batches: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Montecarlo)]
        method: MethodArg,
        /// Also write the report JSON to this path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the exact identity Σ_Q QᵀAQ = (N−1)!·2^N·tr(A)·I over BC_N.
    #[command(name = "group-verify")]
    GroupVerify {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Average of x² over the ellipse x = cos t, y = b sin t, per b.
    Ellipse {
        /// Comma-separated list of b values in [0, 1]
        #[arg(long, value_delimiter = ',')]
        b: Vec<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Also write the CSV to this path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo trace estimates over an increasing sample schedule.
    Convergence {
        #[arg(long)]
        norm: String,
        #[arg(long)]
        matrix: PathBuf,
        /// Comma-separated increasing sample counts
        #[arg(long, value_delimiter = ',')]
        schedule: Vec<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::TraceEstimate { norm, matrix, samples, seed, batches, method, out } => {
            let config = TraceExperimentConfig {
                norm: NormSpec64::parse(&norm)?,
                matrix: load_matrix(&matrix)?,
                n_samples: samples,
                seed,
                n_batches: batches,
                method: method.into(),
            };
            let report = estimate_trace(&config)?;
            let json = serde_json::to_string_pretty(&report)?;
            println!("{json}");
            if let Some(path) = out {
                std::fs::write(path, format!("{json}\n"))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::GroupVerify { dim, trials } => {
            // fixed seed: the command is a deterministic self-check
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            let mut failures = 0usize;
            for trial in 0..trials {
                let a: Vec<Vec<i64>> =
                    (0..dim).map(|_| (0..dim).map(|_| rng.gen_range(-9..=9)).collect()).collect();
                let trace: i64 = (0..dim).map(|i| a[i][i]).sum();
                let expected = conjugation_constant(dim, trace);
                let sum = conjugation_sum(&a)?;
                let ok = (0..dim).all(|i| {
                    (0..dim).all(|j| sum[i][j] == if i == j { expected } else { 0 })
                });
                println!(
                    "trial {trial}: tr A = {trace}, constant = {expected}: {}",
                    if ok { "ok" } else { "MISMATCH" }
                );
                if !ok {
                    failures += 1;
                }
            }
            println!(
                "group-verify dim {dim}: {}/{trials} trials ok",
                trials - failures
            );
            Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Ellipse { b, tol, out } => {
            let table = ellipse_counterexample(&b, tol)?;
            let mut csv = String::from("b,average\n");
            for (b, avg) in &table {
                csv.push_str(&format!("{b},{avg}\n"));
            }
            print!("{csv}");
            if let Some(path) = out {
                std::fs::write(path, csv)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Convergence { norm, matrix, schedule, seed, out } => {
            let config = TraceExperimentConfig {
                norm: NormSpec64::parse(&norm)?,
                matrix: load_matrix(&matrix)?,
                n_samples: 0,
                seed,
                n_batches: 100,
                method: Method::MonteCarlo,
            };
            let truth = config.matrix.trace();
            let reports = convergence_study(&config, &schedule)?;
            let mut csv = String::from("n,estimate,stderr,abs_error\n");
            for rep in &reports {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    rep.n_samples,
                    rep.estimate,
                    rep.stderr,
                    (rep.estimate - truth).abs()
                ));
            }
            print!("{csv}");
            std::fs::write(out, csv)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
