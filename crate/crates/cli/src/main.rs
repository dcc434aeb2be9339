mod config;
mod error;
mod experiments;
mod figures;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{CommandFactory, Parser, Subcommand};

use config::{RunConfig, DEFAULT_SEED};
use error::{CliError, Result};
use output::Output;

#[derive(Parser)]
#[command(name = "magnon", version, about = "Long-range XXZ magnon dynamics and spectra")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Root seed for sampling; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML file.
    Run { config: PathBuf },
    /// Regenerate a preset figure data set.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(figures::PRESETS))]
        figure: String,
    },
}

fn init_threads(n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Config("threads must be ≥ 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn run_config(cli: &Cli, path: &Path) -> Result<PathBuf> {
    let text = std::fs::read_to_string(path)?;
    let cfg = RunConfig::parse(&text)?;
    init_threads(cli.threads.or(cfg.threads))?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(cfg.experiment.name()));
    let start = Instant::now();
    let artifacts = experiments::run(&cfg, seed, "")?;
    let mut out = Output::create(&dir)?;
    out.write_all(artifacts)?;
    // settings that do not change results stay out of the hash
    let echo = RunConfig {
        seed: Some(seed),
        out: None,
        threads: None,
        ..cfg
    };
    out.finish("run", &serde_json::to_value(&echo)?, seed, start.elapsed())
}

fn reproduce(cli: &Cli, figure: &str) -> Result<PathBuf> {
    init_threads(cli.threads)?;
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(figure));
    let start = Instant::now();
    let artifacts = figures::run(figure, seed)?.ok_or_else(|| CliError::Config(format!("unknown figure {figure}")))?;
    let mut out = Output::create(&dir)?;
    out.write_all(artifacts)?;
    let parts: Vec<_> = figures::runs(figure)
        .unwrap_or_default()
        .into_iter()
        .map(|(prefix, c)| serde_json::json!({ "prefix": prefix, "config": c }))
        .collect();
    let echo = serde_json::json!({ "figure": figure, "runs": parts });
    out.finish("reproduce", &echo, seed, start.elapsed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run { config } => run_config(&cli, config),
        Command::Reproduce { figure } => reproduce(&cli, figure),
    };
    match res {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::EmptyConfig) {
                eprintln!("\n{}", Cli::command().render_help());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
