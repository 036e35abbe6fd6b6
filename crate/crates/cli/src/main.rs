use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use rrl_core::harness::experiment::run_experiment;
use rrl_core::harness::{emit_plot, oracle_check, PlotKind};
use rrl_core::model::{validate_rmdp, DivergenceKind, DivergenceSpec, FiniteRmdp};
use rrl_core::par::{init_thread_pool_from_env, THREADS_ENV};

#[derive(Parser)]
#[command(
    name = "rrl",
    version,
    about = "Online robust RL with f-divergence uncertainty sets"
)]
#[command(after_help = format!("Set {THREADS_ENV} to cap the number of worker threads."))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell and seed of an experiment config.
    Run { config: PathBuf },
    /// Render an aggregate CSV as an SVG line plot.
    Plot {
        aggregate: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a model file for malformed rows, rewards and legality.
    Validate { model: PathBuf },
    /// Compare the dual solvers against brute-force search on random instances.
    OracleCheck {
        #[arg(long)]
        sigma: f64,
        #[arg(long, value_parser = parse_kind)]
        kind: DivergenceKind,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Regret,
    Epsilon,
}

fn parse_kind(s: &str) -> Result<DivergenceKind, String> {
    s.parse::<DivergenceKind>().map_err(|e| e.to_string())
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    init_thread_pool_from_env();
    match cli.command {
        Command::Run { config } => {
            let (dir, manifest) =
                run_experiment(&config).with_context(|| format!("running {}", config.display()))?;
            for cell in &manifest.cells {
                let done = cell.seeds.iter().filter(|s| s.error.is_none()).count();
                println!("{}: {done}/{} seeds", cell.name, cell.seeds.len());
                for seed in cell.seeds.iter().filter(|s| s.error.is_some()) {
                    eprintln!(
                        "  seed {} failed: {}",
                        seed.seed,
                        seed.error.as_deref().unwrap_or("")
                    );
                }
            }
            println!("results in {}", dir.display());
            if !manifest.complete {
                eprintln!("some cells are incomplete; see the manifest");
                return Ok(ExitCode::from(2));
            }
        }
        Command::Plot {
            aggregate,
            kind,
            out,
        } => {
            let kind = match kind {
                Kind::Regret => PlotKind::Regret,
                Kind::Epsilon => PlotKind::Epsilon,
            };
            emit_plot(&aggregate, kind, &out)
                .with_context(|| format!("plotting {}", aggregate.display()))?;
            println!("wrote {}", out.display());
        }
        Command::Validate { model } => {
            let m =
                FiniteRmdp::load(&model).with_context(|| format!("reading {}", model.display()))?;
            let report = validate_rmdp(&m);
            if !report.is_ok() {
                print!("{report}");
                return Ok(ExitCode::FAILURE);
            }
            println!(
                "ok: S={} A={} H={} {} ball, radius {}",
                m.num_states(),
                m.num_actions(),
                m.horizon(),
                m.uncertainty().kind,
                m.uncertainty().radius
            );
        }
        Command::OracleCheck {
            sigma,
            kind,
            instances,
            seed,
        } => {
            let spec = DivergenceSpec::new(kind, sigma)?;
            let report = oracle_check(spec, instances, seed)?;
            for m in &report.mismatches {
                println!(
                    "mismatch: p={:?} v={:?} dual={} oracle={} allowed={}",
                    m.nominal, m.values, m.dual, m.oracle, m.allowed
                );
            }
            println!(
                "{kind} sigma={sigma}: {}/{instances} within tolerance, worst |dual-oracle|/allowance {:.3}",
                instances - report.mismatches.len(),
                report.worst_ratio
            );
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
