use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kan3::config::{parse_config, ExperimentConfig};
use kan3::report::{run, Experiment};

/// Runs one experiment of the Kan skew-product laboratory.
#[derive(Debug, Parser)]
#[command(name = "kan3", version, allow_negative_numbers = true)]
struct Cli {
    /// verify | blender | basin | lyapunov | gibbs | coverage | mixing | perturb
    experiment: String,
    /// TOML configuration file; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to KAN3_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn resolve(cli: &Cli) -> kan3::Result<(ExperimentConfig, Experiment)> {
    let experiment: Experiment = cli.experiment.parse()?;
    let mut cfg = match &cli.config {
        Some(p) => parse_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(t) = cli.t {
        cfg.t = t;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let env_threads = std::env::var("KAN3_THREADS")
        .ok()
        .and_then(|v| v.parse().ok());
    if let Some(n) = cli.threads.or(env_threads) {
        cfg.threads = Some(n);
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    cfg.experiment = Some(experiment.name().to_string());
    cfg.validate()?;
    Ok((cfg, experiment))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, experiment) = match resolve(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("kan3: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg, experiment) {
        Ok(m) => {
            for c in &m.criteria {
                println!(
                    "{} {}: {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            println!(
                "outputs in {} (payload {})",
                cfg.out.display(),
                m.payload_hash
            );
            if m.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("kan3: {experiment:?} failed: {e}");
            ExitCode::from(1)
        }
    }
}
