use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use invphase::{execute, load, presets, CliError};

/// Geometric phases of a two-level system under decoherence.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV outputs. Relative output paths are
    /// taken from the scenario file's directory.
    Run { scenario: PathBuf },
    /// Parse and check a scenario without running it.
    Validate { scenario: PathBuf },
    /// Print the bundled scenarios, or one of them by name.
    Presets { name: Option<String> },
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { scenario } => {
            let (s, hash) = load(&scenario)?;
            let mut warnings = Vec::new();
            let result = execute(&s, &hash, &mut warnings);
            for w in &warnings {
                eprintln!("{w}");
            }
            for a in result? {
                std::fs::write(&a.path, a.contents).map_err(|source| CliError::Io { path: a.path.clone(), source })?;
                println!("wrote {}", a.path.display());
            }
        }
        Command::Validate { scenario } => {
            let (s, hash) = load(&scenario)?;
            println!(
                "ok: {} channel, {} points, {} outputs, sha256 {hash}",
                s.channel.kind,
                s.points().len(),
                s.outputs.len()
            );
        }
        Command::Presets { name: Some(name) } => match presets::find(&name) {
            Some(text) => print!("{text}"),
            None => {
                let known: Vec<_> = presets::PRESETS.iter().map(|(n, _)| *n).collect();
                return Err(CliError::Validation(format!(
                    "no preset `{name}` (known: {})",
                    known.join(", ")
                )));
            }
        },
        Command::Presets { name: None } => {
            for (i, (name, text)) in presets::PRESETS.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                println!("## {name}");
                print!("{text}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
