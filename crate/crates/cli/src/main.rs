use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sgdf_cli::{plot, run_experiment, run_suite, CliError, ExperimentConfig, RunOptions, SUITES};

const EXPERIMENTS: &[&str] = &["race", "regret", "nonconvex_rate", "fpss", "spectrum", "estimator_variance"];
const OBJECTIVES: &[&str] = &[
    "quadratic",
    "rosenbrock",
    "logistic",
    "mlp",
    "shifting_quadratics",
    "stationary_stream",
    "double_well",
    "gaussian_well",
];
const OPTIMIZERS: &[&str] = &["sgdf", "sgd", "adam", "wiener_adam"];

#[derive(Debug, Parser)]
#[command(name = "sgdf", version, about = "Run SGDF experiments and acceptance suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `output_dir`.
        #[arg(long, env = "SGDF_OUT_DIR")]
        out: Option<PathBuf>,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run one acceptance suite, or all of them with `--suite all`.
    Accept {
        #[arg(long)]
        suite: String,
        #[arg(long, env = "SGDF_OUT_DIR", default_value = "sgdf-out/accept")]
        out: PathBuf,
    },
    /// List experiment kinds, objectives, optimizers and acceptance suites.
    List,
    /// Write a matplotlib script next to a summary.json.
    Plot {
        #[arg(long)]
        summary: PathBuf,
    },
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, jobs } => {
            let outcome = ExperimentConfig::load(&config).and_then(|cfg| run_experiment(&cfg, &RunOptions { out_dir: out, jobs }));
            match outcome {
                Ok(o) => {
                    let diverged = o.summary.runs.iter().filter(|r| r.diverged).count();
                    println!("{} runs written to {}", o.summary.runs.len(), o.out_dir.display());
                    if diverged > 0 {
                        println!("{diverged} runs diverged");
                    }
                    println!("summary: {}", o.summary_path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Accept { suite, out } => {
            let ids: Vec<&str> = if suite == "all" { SUITES.iter().map(|s| s.id).collect() } else { vec![suite.as_str()] };
            let mut all_passed = true;
            for id in ids {
                match run_suite(id, &out) {
                    Ok(v) => {
                        println!("{}", v.line());
                        for note in &v.notes {
                            println!("    {note}");
                        }
                        all_passed &= v.passed;
                    }
                    Err(e) => return fail(e),
                }
            }
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::List => {
            println!("experiments: {}", EXPERIMENTS.join(" "));
            println!("objectives:  {}", OBJECTIVES.join(" "));
            println!("optimizers:  {}", OPTIMIZERS.join(" "));
            println!("suites:");
            for s in SUITES {
                println!("AC{:<2} {:<18} {}", s.criterion, s.id, s.description);
            }
            ExitCode::SUCCESS
        }
        Command::Plot { summary } => match plot::emit_plot_script(&summary) {
            Ok((path, warnings)) => {
                for w in warnings {
                    eprintln!("warning: {w}");
                }
                println!("{}", path.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
