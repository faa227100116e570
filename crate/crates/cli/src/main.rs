use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use kneser_core::experiments::{threshold_sweep, y_statistic, SweepConfig, SweepResult};
use kneser_core::extremal::{verify_lex_minimality_with_budget, DEFAULT_FAMILY_BUDGET};
use kneser_core::model::{sample, SampledHypergraph, SamplerKind};
use kneser_core::params::{derive, expected_trivial_plus_one};
use kneser_core::solver::{max_independent_set, DEFAULT_NODE_BUDGET};
use kneser_core::verify::{verify_suite, VerifyOptions};
use kneser_core::Params;

/// Environment variable that overrides `--threads`.
const THREADS_ENV: &str = "KNESER_LAB_THREADS";

#[derive(Parser)]
#[command(name = "kneser-lab", version, about = "Random Kneser hypergraphs: exact quantities, samples, independence numbers and sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form quantities for (n, k, r), optionally with E[Y] at p.
    Quantities {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Draw one sample of KG^r_{n,k}(p).
    Sample {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "explicit")]
        sampler: SamplerKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact independence number of a saved sample.
    Alpha {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// The trivial-plus-one count Y of a saved sample.
    Ystat {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Monte Carlo sweep over a grid of p.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the rows as CSV to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check that the lex initial family minimizes induced edges.
    Extremal {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: u64,
        #[arg(long, default_value_t = DEFAULT_FAMILY_BUDGET)]
        budget: u64,
    },
    /// Run the oracle battery; exits with 1 if any check fails.
    Verify {
        #[arg(long)]
        fast: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn run(command: Command) -> AnyResult<ExitCode> {
    match command {
        Command::Quantities { n, k, r, p } => {
            let params = Params::new(n, k, r)?;
            let q = derive(&params)?;
            let expected_y = p.map(|p| expected_trivial_plus_one::<f64>(&params, p)).transpose()?;
            emit(
                &json!({
                    "params": params,
                    "emc_regime": params.emc_regime(),
                    "frankl_regime": params.frankl_regime(),
                    "quantities": q,
                    "p": p,
                    "expected_Y": expected_y,
                }),
                None,
            )?;
        }
        Command::Sample { n, k, r, p, seed, sampler, out } => {
            let params = Params::new(n, k, r)?;
            emit(&sample(&params, p, seed, sampler)?, out.as_deref())?;
        }
        Command::Alpha { input, budget } => {
            let s = load_sample(&input)?;
            emit(&max_independent_set(&s, budget)?, None)?;
        }
        Command::Ystat { input } => {
            let s = load_sample(&input)?;
            let q = derive(&s.params)?;
            let y = y_statistic(&s);
            emit(
                &json!({
                    "Y": y,
                    "params": s.params,
                    "p": s.p,
                    "seed": s.seed,
                    "pairs": q.trivial_plus_one_pairs.to_string(),
                    "expected_Y": expected_trivial_plus_one::<f64>(&s.params, s.p)?,
                }),
                None,
            )?;
        }
        Command::Sweep { config, threads, out, csv } => {
            let config: SweepConfig = serde_json::from_str(&fs::read_to_string(&config)?)?;
            config.validate()?;
            init_threads(threads)?;
            let result = threshold_sweep(&config)?;
            if let Some(path) = csv {
                write_csv(&result, &path)?;
            }
            emit(&result, out.as_deref())?;
        }
        Command::Extremal { n, k, r, s, budget } => {
            emit(&verify_lex_minimality_with_budget(n, k, r, s, budget)?, None)?;
        }
        Command::Verify { fast, out } => {
            init_threads(None)?;
            let report = verify_suite(&VerifyOptions { fast, ..VerifyOptions::default() });
            emit(&report, out.as_deref())?;
            if !report.passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Sizes the global pool from the environment, then `--threads`, then the
/// machine.
fn init_threads(flag: Option<usize>) -> AnyResult<()> {
    let from_env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|e| format!("{THREADS_ENV}={v}: {e}"))?),
        Err(_) => None,
    };
    let threads = from_env.or(flag).unwrap_or(0);
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn load_sample(path: &Path) -> AnyResult<SampledHypergraph> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> AnyResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn write_csv(result: &SweepResult, path: &Path) -> AnyResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "p",
        "trials",
        "n_alpha_eq_N",
        "frac_success",
        "wilson_lo",
        "wilson_hi",
        "mean_alpha",
        "mean_Y",
        "expected_Y",
        "p_over_pc",
    ])?;
    fn cell<T: ToString>(x: Option<T>) -> String {
        x.map(|v| v.to_string()).unwrap_or_default()
    }
    for row in &result.rows {
        w.write_record([
            row.p.to_string(),
            row.trials.to_string(),
            cell(row.n_alpha_eq_n),
            cell(row.frac_success),
            cell(row.wilson_95_interval.map(|w| w[0])),
            cell(row.wilson_95_interval.map(|w| w[1])),
            cell(row.mean_alpha),
            cell(row.mean_y),
            row.expected_y.to_string(),
            cell(row.p_over_pc),
        ])?;
    }
    w.flush()?;
    Ok(())
}
