use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hsda_core::harness::{
    build_problem, compare_runs, fd_check, parse_assignment, run_experiment, ExperimentConfig, ProblemSpec,
};
use hsda_core::harness::config::parse_pairs;
use hsda_core::Error;

#[derive(Parser)]
#[command(name = "hsda", version, about = "Homogeneous-model descent for nonconvex-strongly-concave minimax")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write `<algorithm>_trace.csv` and `.json`.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// `key=value`, overriding the config file. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Merge traces of the same problem into one CSV.
    Compare {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        traces: Vec<PathBuf>,
    },
    /// Check the closed-form value function against finite differences.
    Fdcheck {
        #[arg(long)]
        problem: String,
        /// `problem.key=value` or `key=value`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        #[arg(long, default_value_t = 10)]
        points: usize,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn solve(config: PathBuf, sets: Vec<String>, out: PathBuf, seed: Option<u64>) -> Result<bool, Error> {
    let text = std::fs::read_to_string(&config)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", config.display())))?;
    let mut pairs = parse_pairs(&text)?;
    for s in &sets {
        pairs.push(parse_assignment(s)?);
    }
    if let Some(seed) = seed {
        pairs.push(("seed".into(), seed.to_string()));
    }
    let cfg = ExperimentConfig::from_pairs(pairs)?;
    let art = run_experiment(&cfg, &out)?;
    let s = &art.summary;
    println!(
        "{}: {} after {} iterations, grad_norm {:.3e}, hvp {}",
        s.algorithm,
        s.termination.as_deref().unwrap_or("failed"),
        s.outer_iterations,
        s.final_grad_norm.unwrap_or(f64::NAN),
        s.total_hvp
    );
    println!("wrote {} and {}", art.csv.display(), art.json.display());
    if let Some(e) = &s.error {
        eprintln!("driver error: {e}");
    }
    Ok(!art.driver_failed())
}

fn fdcheck(problem: String, sets: Vec<String>, points: usize, step: f64, seed: u64) -> Result<(), Error> {
    let mut spec = ProblemSpec::default_for(&problem)?;
    for s in &sets {
        let (k, v) = parse_assignment(s)?;
        spec.set(k.strip_prefix("problem.").unwrap_or(&k), &v)?;
    }
    let oracle = build_problem(&spec)?;
    let report = fd_check(oracle.as_ref(), points, step, seed)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    if e.is_config_error() || matches!(e, Error::Construction(_)) {
        ExitCode::from(2)
    } else {
        ExitCode::from(3)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { config, sets, out, seed } => solve(config, sets, out, seed).map(|ok| {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }),
        Command::Compare { out, traces } => {
            let refs: Vec<&std::path::Path> = traces.iter().map(PathBuf::as_path).collect();
            compare_runs(&refs, &out).map(|()| ExitCode::SUCCESS)
        }
        Command::Fdcheck {
            problem,
            sets,
            points,
            step,
            seed,
        } => fdcheck(problem, sets, points, step, seed).map(|()| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| exit_for(&e))
}
