//! Config-driven command line for the varphi toolkit. Every command reads one
//! TOML config, runs deterministically for a fixed seed, prints to stdout and
//! optionally writes machine-readable files under `--out`.

mod commands;
mod config;
mod expr;
mod fail;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::Ctx;
use config::RunConfig;
use fail::CliError;

#[derive(Parser)]
#[command(
    name = "varphi-cli",
    version,
    about = "Eigenvalue and potential-optimization runs for double-phase problems"
)]
struct Cli {
    /// TOML run configuration (required by every subcommand).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for machine-readable outputs (created if missing).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// With `eig`: also write the A-minimizer as minimizer.csv (needs --out).
    #[arg(long, global = true)]
    emit_minimizer: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the structural conditions; exit 0 only if all hold.
    Check,
    /// Solve for A, B and lambda_m; emit a JSON summary.
    Eig,
    /// Classify each configured lambda against the computed [B, A] interval.
    Family,
    /// Lower-envelope sweep over potential-ball radii; CSV output.
    Sweep,
    /// Young-function growth indices and doubling estimates.
    Indices,
    /// Luxemburg norms and modulars of the configured instance.
    Norms,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => fail::EXIT_VALIDATION,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Validation("missing required option --config <PATH>".into()))?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let cfg = RunConfig::from_toml(&text)?;
    let config_hash = output::sha256_hex(text.as_bytes());
    let seed = cfg.effective_seed(cli.seed);
    let ctx = Ctx {
        cfg,
        config_hash,
        seed,
        emit_minimizer: cli.emit_minimizer,
        has_out: cli.out.is_some(),
    };

    let rendered = match cli.command {
        Command::Check => commands::check::run(&ctx)?,
        Command::Eig => commands::eig::run(&ctx)?,
        Command::Family => commands::family::run(&ctx)?,
        Command::Sweep => commands::sweep::run(&ctx)?,
        Command::Indices => commands::indices::run(&ctx)?,
        Command::Norms => commands::norms::run(&ctx)?,
    };

    print!("{}", rendered.stdout);
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        for (name, contents) in &rendered.files {
            let target = dir.join(name);
            std::fs::write(&target, contents)
                .map_err(|e| CliError::Io(format!("{}: {e}", target.display())))?;
        }
    }
    match rendered.failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}
