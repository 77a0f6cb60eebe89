mod args;
mod commands;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;

use args::{Cli, Command};
use commands::RunContext;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'a str,
    argv: Vec<String>,
    run: &'a Cli,
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(gridgrowth::Error::Config("--threads must be >= 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    std::fs::create_dir_all(&cli.out_dir)
        .with_context(|| format!("creating {}", cli.out_dir.display()))?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        argv: std::env::args().collect(),
        run: cli,
    };
    let path = cli.out_dir.join("manifest.toml");
    std::fs::write(&path, toml::to_string(&manifest)?)
        .with_context(|| path.display().to_string())?;

    let ctx = RunContext {
        out_dir: cli.out_dir.clone(),
    };
    match &cli.command {
        Command::Generate(a) => commands::generate(&ctx, a),
        Command::Analyze(a) => commands::analyze(&ctx, a),
        Command::Fit(a) => commands::fit(&ctx, a),
        Command::Epidemic(a) => commands::epidemic(&ctx, a),
        Command::Compare(a) => commands::compare(&ctx, a),
        Command::Scaling(a) => commands::scaling(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e
                .downcast_ref::<gridgrowth::Error>()
                .is_some_and(gridgrowth::Error::is_usage);
            ExitCode::from(if usage { EXIT_USAGE } else { EXIT_DATA })
        }
    }
}
