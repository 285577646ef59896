//! Experiment runner CLI.
//!
//! Exit codes: 0 = every criterion passed, 2 = a criterion failed,
//! 1 = execution or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use bczk_lab::exp::{self, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "bczk-lab", about = "Bounded-concurrent ZK protocol laboratory", version)]
struct Args {
    /// Experiment configuration (strict TOML).
    #[arg(long)]
    config: PathBuf,

    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<u64>,

    /// Output directory for results.jsonl and summary.csv.
    #[arg(long)]
    out: PathBuf,

    /// Worker pool size for trial fan-out.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match ExperimentConfig::from_file(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    match exp::run_experiment(&config, &args.out, args.workers) {
        Ok(summary) => {
            for c in &summary.criteria {
                println!(
                    "{}: {} (value {:.6e}, threshold {:.6e})",
                    c.criterion,
                    if c.pass { "pass" } else { "FAIL" },
                    c.value,
                    c.threshold
                );
            }
            if summary.all_pass() {
                ExitCode::from(0)
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
