use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use compfdr_cli::config::{Command, RunConfig};
use compfdr_cli::error::{CliError, Result};
use compfdr_cli::run::{execute, write_artifacts};

#[derive(Parser, Debug)]
#[command(name = "compfdr", version, about = "FDR control with competition statistics")]
struct Cli {
    /// Directory receiving config.json, summary.json and result tables
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Top,
}

#[derive(Subcommand, Debug)]
enum Top {
    #[command(flatten)]
    Task(Command),
    /// Replays a stored config.json
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.clone(),
        source,
    })?;
    RunConfig::from_json(&text)
}

fn main_inner(cli: Cli) -> Result<()> {
    let mut cfg = match cli.command {
        Top::Task(command) => RunConfig {
            command,
            out_dir: PathBuf::from("."),
        },
        Top::Run { config } => load(&config)?,
    };
    if let Some(dir) = cli.out_dir {
        cfg.out_dir = dir;
    }
    cfg.resolve_seed();
    let artifacts = execute(&cfg)?;
    write_artifacts(&cfg, &artifacts)?;
    print!("{}", artifacts.summary_text());
    Ok(())
}

fn fail(err: &CliError) -> ExitCode {
    eprintln!("{}", serde_json::to_string(&err.report()).expect("report serializes"));
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Config(e.to_string())),
    };
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
