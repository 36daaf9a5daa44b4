use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tqg_core::config::LemmaKind;
use tqg_core::experiment::{run_experiment, write_error_report, Context, ExperimentError, Summary};
use tqg_core::{parse_config, Mode};

#[derive(Parser)]
#[command(name = "tqg", version, about = "Thermal quasi-geostrophic spectral toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the config output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Exit with status 1 on monitor or lemma violations.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one ray and track the analyticity radius.
    Simulate(ConfigArg),
    /// Check a functional inequality on random or lattice data.
    Verify {
        #[arg(long, value_parser = parse_lemma)]
        lemma: LemmaKind,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Fit the decay rate of every snapshot along a ray.
    Radius(ConfigArg),
    /// Run a θ grid and map where the monitors hold.
    Sweep(ConfigArg),
}

fn parse_lemma(s: &str) -> Result<LemmaKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown lemma `{s}` (expected convest, veltovor, algebraic, lattice or split)"))
}

const EXIT_NUMERICAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn run(cli: &Cli) -> Result<Summary, (ExperimentError, PathBuf)> {
    let (mode, path, lemma) = match &cli.command {
        Command::Simulate(c) => (Mode::Simulate, &c.config, None),
        Command::Verify { lemma, config } => (Mode::Verify, &config.config, Some(*lemma)),
        Command::Radius(c) => (Mode::Radius, &c.config, None),
        Command::Sweep(c) => (Mode::Sweep, &c.config, None),
    };
    let fallback_out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut config = parse_config(path).op("parse_config").map_err(|e| (e, fallback_out))?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    if lemma.is_some() {
        config.lemma = lemma;
    }
    let out = config.out_dir();
    run_experiment(&config, Some(mode)).map_err(|e| (e, out))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TQG_LOG", "error")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match run(&cli) {
        Ok(summary) => {
            for f in &summary.files {
                println!("{}", f.display());
            }
            if summary.violations > 0 {
                log::warn!("{} violation(s) recorded", summary.violations);
                if cli.strict {
                    return ExitCode::from(EXIT_NUMERICAL);
                }
            }
            ExitCode::SUCCESS
        }
        Err((err, out)) => {
            let report = err.report();
            eprintln!("{}", serde_json::to_string(&report).expect("plain strings serialize"));
            if let Err(e) = write_error_report(&out, &err) {
                log::error!("could not write error.json: {e}");
            }
            ExitCode::from(if err.is_configuration() { EXIT_CONFIG } else { EXIT_NUMERICAL })
        }
    }
}
