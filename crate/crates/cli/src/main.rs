use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gnc_cli::commands::{self, ClassifyOptions, Output, TransformOp};
use gnc_cli::{exit, CliError};

/// Classify finite-dimensional quantum processes as classical or nonclassical.
#[derive(Parser)]
#[command(name = "gnc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the decider matching the process type.
    Classify {
        path: PathBuf,
        /// Override the document's process kind.
        #[arg(long = "type")]
        kind: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated frame and parent-POVM names.
        #[arg(long, value_delimiter = ',')]
        frames: Option<Vec<String>>,
        /// Comma-separated probe names.
        #[arg(long, value_delimiter = ',')]
        probes: Option<Vec<String>>,
        /// Regenerate the document from its generator with `name=value`.
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long, conflicts_with = "text")]
        json: bool,
        #[arg(long)]
        text: bool,
        /// Include wall-clock time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Basis of the operational identities.
    Identities { path: PathBuf },
    /// Rewrite a process through a structural transform.
    Transform {
        path: PathBuf,
        /// choi, flag, dephase or associated.
        #[arg(long)]
        op: String,
    },
    /// Check a certificate against a process.
    VerifyCert {
        process: PathBuf,
        certificate: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        text: bool,
    },
    /// Re-run registry examples against their expected verdicts.
    Reproduce {
        id: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        text: bool,
    },
    /// Built-in frame and probe libraries.
    Frames {
        #[command(subcommand)]
        action: FramesAction,
    },
    /// Write a registry example as a process document.
    Generate {
        id: String,
        #[arg(long = "param")]
        params: Vec<String>,
    },
}

#[derive(Subcommand)]
enum FramesAction {
    List {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 24)]
        net: usize,
    },
}

fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Classify { path, kind, tol, seed, frames, probes, params, json: _, text, timing } => {
            let opts = ClassifyOptions {
                kind,
                tol,
                seed,
                frames,
                probes,
                params: commands::parse_params(&params)?,
                text,
                timing,
            };
            commands::classify(&path, &opts)
        }
        Command::Identities { path } => commands::identities(&path),
        Command::Transform { path, op } => commands::transform(&path, TransformOp::parse(&op)?),
        Command::VerifyCert { process, certificate, tol, text } => commands::verify_cert(&process, &certificate, tol, text),
        Command::Reproduce { id, all, seed, params, text } => {
            commands::reproduce(id.as_deref(), all, seed, &commands::parse_params(&params)?, text)
        }
        Command::Frames { action: FramesAction::List { dim, net } } => commands::frames_list(dim, net),
        Command::Generate { id, params } => commands::generate(&id, &commands::parse_params(&params)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(exit::PARSE as u8) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
