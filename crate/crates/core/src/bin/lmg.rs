use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use lmg_sim::runner::{run, CommandKind, Invocation, OverwritePolicy, WORKERS_ENV};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Bifurcation,
    Heatmap,
    Lyapunov,
    Poincare,
    Sweep,
    Scaling,
    Spectrum,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Overwrite {
    Deny,
    Replace,
}

/// LMG model simulator: writes CSV data and a manifest for one experiment.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    command: Command,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "lmg-out")]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value = "deny")]
    overwrite: Overwrite,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let command = match cli.command {
        Command::Bifurcation => CommandKind::Bifurcation,
        Command::Heatmap => CommandKind::Heatmap,
        Command::Lyapunov => CommandKind::Lyapunov,
        Command::Poincare => CommandKind::Poincare,
        Command::Sweep => CommandKind::Sweep,
        Command::Scaling => CommandKind::Scaling,
        Command::Spectrum => CommandKind::Spectrum,
    };
    let inv = Invocation {
        command,
        config: cli.config,
        out_dir: cli.out,
        workers: cli.workers,
        overwrite: match cli.overwrite {
            Overwrite::Deny => OverwritePolicy::Deny,
            Overwrite::Replace => OverwritePolicy::Replace,
        },
    };
    match run(&inv) {
        Ok(m) => {
            for f in &m.files {
                println!("{}/{} ({} rows, sha256 {})", inv.out_dir.display(), f.name, f.rows, f.sha256);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
