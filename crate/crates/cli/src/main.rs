use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "afsearch", version, about = "Search, evaluate and compare acquisition functions")]
struct Cli {
    /// Log filter, e.g. `info` or `afsearch=debug`. Overrides RUST_LOG.
    #[arg(long, global = true)]
    log: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an evolutionary search described by a TOML config.
    Search {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run BO with one acquisition function on a benchmark preset.
    Eval {
        /// Builtin name, a `.afdsl` file, or inline program text.
        #[arg(long)]
        af: String,
        #[arg(long)]
        preset: String,
        /// TOML file with extra `[[preset]]` tables.
        #[arg(long)]
        preset_file: Option<PathBuf>,
        /// Defaults to the preset's trial count.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value = "eval-out")]
        out: PathBuf,
    },
    /// List the builtin acquisition functions.
    ListAfs,
    /// Summarize a per-run curve CSV into mean and half-std bands.
    ExportCurves {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a search config without running it.
    ValidateConfig { path: PathBuf },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Search { config, out } => commands::search(&config, out),
        Command::Eval { af, preset, preset_file, trials, instances, seed, beta, out } => {
            if instances == 0 {
                bail!("--instances must be at least 1");
            }
            commands::eval(&commands::EvalArgs {
                af,
                preset,
                preset_file,
                trials,
                instances,
                seed,
                beta,
                out,
            })
        }
        Command::ListAfs => {
            commands::list_afs(&mut std::io::stdout().lock()).context("writing to stdout")
        }
        Command::ExportCurves { input, out } => commands::export_curves(&input, &out),
        Command::ValidateConfig { path } => commands::validate_config(&path),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut logger = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"));
    if let Some(filter) = &cli.log {
        logger.parse_filters(filter);
    }
    logger.init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
