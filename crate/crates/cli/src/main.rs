mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use output::{CliError, Manifest};

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    match run(raw) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(raw: Vec<String>) -> Result<(), CliError> {
    let argv = output::apply_config(raw)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string().trim().to_string())),
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let mut manifest = Manifest::start(&cli);
    let outputs = commands::dispatch(&cli.command)?;
    manifest.finish(outputs.files);
    let path = cli
        .manifest
        .clone()
        .or(outputs.manifest_dir.map(|d| d.join("manifest.json")));
    if let Some(path) = path {
        manifest.write(&path)?;
    }
    Ok(())
}
