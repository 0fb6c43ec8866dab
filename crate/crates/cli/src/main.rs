mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{Experiment, ExperimentConfig, Kind};

const EXIT_INVALID: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "ids-lab", version, about = "Integrated density of states experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check a config without running anything.
    Validate { config: PathBuf },
    /// Run every experiment in the config.
    Run(RunArgs),
    /// Run only the Bloch oracle experiments.
    Oracle(RunArgs),
    /// Run only the exhaustion experiments.
    Ids(RunArgs),
    /// Run only the bracketing experiments.
    Bracket(RunArgs),
    /// Run only the Wegner experiments.
    Wegner(RunArgs),
    /// Run only the self-averaging experiments.
    Selfavg(RunArgs),
    /// Run only the trace experiments.
    Trace(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (falls back to IDS_LAB_WORKERS, then the config).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_plots: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, only) = match cli.command {
        Command::Validate { config } => {
            return match ExperimentConfig::load(&config) {
                Ok(c) => {
                    println!("{}: ok ({} experiments, config_hash={})", config.display(), c.experiments.len(), c.hash());
                    ExitCode::SUCCESS
                }
                Err(e) => invalid(&config, e),
            };
        }
        Command::Run(a) => (a, None),
        Command::Oracle(a) => (a, Some(Kind::Oracle)),
        Command::Ids(a) => (a, Some(Kind::Ids)),
        Command::Bracket(a) => (a, Some(Kind::Bracket)),
        Command::Wegner(a) => (a, Some(Kind::Wegner)),
        Command::Selfavg(a) => (a, Some(Kind::Selfavg)),
        Command::Trace(a) => (a, Some(Kind::Trace)),
    };
    execute(args, only)
}

fn invalid(path: &std::path::Path, e: config::ConfigError) -> ExitCode {
    eprintln!("error: invalid config {}: {e}", path.display());
    ExitCode::from(EXIT_INVALID)
}

fn workers(flag: Option<usize>, configured: Option<usize>) -> Result<Option<usize>, String> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("IDS_LAB_WORKERS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("IDS_LAB_WORKERS must be a positive integer, got `{v}`")),
        Err(_) => Ok(configured),
    }
}

fn execute(args: RunArgs, only: Option<Kind>) -> ExitCode {
    let mut config = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => return invalid(&args.config, e),
    };
    if let Some(seed) = args.seed {
        config.run.seed = seed;
    }
    if args.no_plots {
        config.run.plots = false;
    }
    let workers = match workers(args.workers, config.run.workers) {
        Ok(Some(0)) => Err("worker count must be positive".to_string()),
        other => other,
    };
    let workers = match workers {
        Ok(w) => w,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let dir = args.out.unwrap_or_else(|| PathBuf::from(&config.run.output_dir));

    let experiments: Vec<Experiment> = match only {
        None => config.experiments.clone(),
        Some(kind) => {
            let picked: Vec<Experiment> = config.experiments.iter().filter(|e| e.kind() == kind).cloned().collect();
            if picked.is_empty() {
                vec![Experiment::default_for(kind, &config.model, config.run.seed)]
            } else {
                picked
            }
        }
    };

    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return ExitCode::from(EXIT_RUNTIME);
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };

    let started = Instant::now();
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let result = pool.install(|| run::run_all(&config, &experiments, &dir));
    let records = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };

    let manifest = json!({
        "tool": "ids-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "config": args.config.display().to_string(),
        "config_hash": config.hash(),
        "seed": config.run.seed,
        "workers": pool.current_num_threads(),
        "timestamp_unix": timestamp,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "experiments": records,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    if let Err(e) = std::fs::write(dir.join("manifest.json"), text) {
        eprintln!("error: cannot write manifest: {e}");
        return ExitCode::from(EXIT_RUNTIME);
    }
    for r in &records {
        println!("{} ({}): {} files in {:.2}s", r.name, r.estimator, r.files.len(), r.wall_time_s);
    }
    ExitCode::SUCCESS
}
