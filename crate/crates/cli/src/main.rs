//! `occusim`: ingest sensor logs, fit Markov models, simulate door states
//! and compare the results. Every output gets a `<output>.manifest.json`
//! that `occusim rerun` can replay.
//!
//! Exit codes: 0 success, 2 invalid input or flags, 3 file I/O failure.

mod commands;
mod error;
mod manifest;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use commands::{digests, Command, RerunArgs};
use error::{CliError, CliResult};
use manifest::{manifest_path, now, RunManifest};

#[derive(Debug, Parser)]
#[command(
    name = "occusim",
    version,
    about = "Office door-state simulation pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn current_dir() -> CliResult<std::path::PathBuf> {
    std::env::current_dir().map_err(|source| CliError::Io {
        path: ".".into(),
        source,
    })
}

/// Executes `command` in `cwd` and writes its manifest.
fn execute_recorded(command: &Command, cwd: &Path) -> CliResult<RunManifest> {
    let started_at = now();
    let outcome = command.execute(cwd)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        command: command.name().to_owned(),
        args: command.clone(),
        cwd: cwd.to_owned(),
        inputs: digests(cwd, &outcome.inputs)?,
        outputs: digests(cwd, &outcome.outputs)?,
        seed: outcome.seed,
        config_sha256: outcome.config_sha256,
        started_at,
        finished_at: now(),
    };
    let primary = &outcome.outputs[0].1;
    manifest.write(&manifest_path(&cwd.join(primary)))?;
    println!("{}: {}", command.name(), outcome.summary);
    Ok(manifest)
}

fn rerun(args: &RerunArgs) -> CliResult<()> {
    let recorded = RunManifest::read(&args.manifest)?;
    let cwd = &recorded.cwd;
    for (before, now) in recorded.inputs.iter().zip(digests(
        cwd,
        &recorded
            .inputs
            .iter()
            .map(|d| (d.role.clone(), d.path.clone()))
            .collect::<Vec<_>>(),
    )?) {
        if before.sha256 != now.sha256 {
            return Err(CliError::input(format!(
                "input {} changed since the recorded run",
                before.path.display()
            )));
        }
    }
    let scratch = tempfile::tempdir().map_err(|source| CliError::Io {
        path: std::env::temp_dir(),
        source,
    })?;
    let mut command = recorded.args.clone();
    command.redirect_outputs(scratch.path());
    let replay = execute_recorded(&command, cwd)?;
    let mut mismatches = Vec::new();
    for want in &recorded.outputs {
        match replay.outputs.iter().find(|d| d.role == want.role) {
            Some(got) if got.sha256 == want.sha256 => {
                println!("identical {} {}", want.role, want.path.display())
            }
            _ => mismatches.push(want.path.display().to_string()),
        }
    }
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(CliError::input(format!(
            "rerun differs: {}",
            mismatches.join(", ")
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Rerun(args) => rerun(args),
        command => current_dir().and_then(|cwd| execute_recorded(command, &cwd).map(drop)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
