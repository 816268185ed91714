//! `cpqr`: Casimir-Polder potentials and quantum reflection of antihydrogen
//! from the command line. Exit codes are listed in `docs/cli.md`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use commands::Ctx;
use config::{Command, Options, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "cpqr", version, about = "Casimir-Polder potentials and quantum reflection of antihydrogen")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

enum Failure {
    Core(cpqr::Error),
    Output(PathBuf, std::io::Error),
}

impl From<cpqr::Error> for Failure {
    fn from(e: cpqr::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    /// (kind, exit code)
    fn classify(&self) -> (&'static str, u8) {
        use cpqr::Error::*;
        match self {
            Failure::Core(e) => match e {
                Config(_) => ("config", 2),
                Domain(_) => ("domain", 3),
                Extrapolation { .. } => ("extrapolation", 4),
                Quadrature { .. } | Accuracy { .. } => ("accuracy", 5),
                Asymptote(_) | TableBuild(_) => ("table", 6),
                Asymptotics { .. } | Integration(_) | Coverage(_) => ("reflection", 7),
                Sampling { .. } | WindowTooWide { .. } => ("threshold", 8),
                Cache(_) => ("cache", 9),
            },
            Failure::Output(..) => ("output", 10),
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Output(p, e) => format!("{}: {e}", p.display()),
        }
    }
}

fn write_out(path: &std::path::Path, contents: &str) -> Result<(), Failure> {
    output::write_atomic(path, contents).map_err(|e| Failure::Output(path.to_path_buf(), e))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(cli.command, cli.options)?;
    let ctx = Ctx { cfg };
    if let Command::FigData = ctx.cfg.command {
        let (files, summary) = commands::fig_data(&ctx)?;
        let dir = ctx.cfg.out.clone().unwrap_or_else(|| PathBuf::from("fig-data"));
        std::fs::create_dir_all(&dir).map_err(|e| Failure::Output(dir.clone(), e))?;
        for (name, contents) in &files {
            write_out(&dir.join(name), contents)?;
        }
        write_out(&dir.join("manifest.json"), &output::render_records(&ctx.cfg, &summary))?;
        println!("wrote {} files to {}", files.len() + 1, dir.display());
        return Ok(());
    }
    let out = commands::run(&ctx)?;
    let text = output::render(&ctx.cfg, &out);
    match &ctx.cfg.out {
        Some(path) => write_out(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (kind, code) = f.classify();
            let record = json!({"error": {"kind": kind, "exit_code": code, "message": f.message()}});
            eprintln!("{record}");
            ExitCode::from(code)
        }
    }
}
