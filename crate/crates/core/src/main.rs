use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twostage::cli::{configure_workers, load_config, run_experiment, ExperimentConfig, ExperimentKind, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "twostage", about = "Two-stage variational circuit training experiments")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Parse and validate a config file without running it.
    Validate { config: PathBuf },
    /// Run the toy-problem descent checks; exits nonzero on any violation.
    LemmaSuite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write lemma_suite.json here as well as printing a summary.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Print the version.
    Version,
}

fn run(cfg: &ExperimentConfig) -> twostage::Result<bool> {
    let workers = configure_workers()?;
    log::info!("{workers} worker(s); set {WORKERS_ENV} to change");
    let summary = run_experiment(cfg)?;
    for m in &summary.messages {
        println!("{m}");
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    Ok(summary.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let result = match args.command {
        Command::Version => {
            println!("twostage {}", env!("CARGO_PKG_VERSION"));
            Ok(true)
        }
        Command::Validate { config } => load_config(&config).map(|_| {
            println!("{}: ok", config.display());
            true
        }),
        Command::Run { config } => load_config(&config).and_then(|cfg| run(&cfg)),
        Command::LemmaSuite { seed, output_dir } => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::LemmaSuite);
            cfg.seed = seed;
            match output_dir {
                Some(dir) => {
                    cfg.output_dir = dir;
                    run(&cfg)
                }
                None => twostage::optimizer::lemma_suite(seed).map(|r| {
                    for c in &r.cases {
                        println!(
                            "{:<24} iters {:>6}  violations {}  gap {:.2e}  {}",
                            c.name,
                            c.stage1_iters,
                            c.descent_violations,
                            c.stationarity_gap,
                            if c.passed() { "ok" } else { "FAIL" }
                        );
                    }
                    r.passed()
                }),
            }
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
