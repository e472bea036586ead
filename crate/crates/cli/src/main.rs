use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod analyze;
mod common;
mod jod;
mod lf;
mod optimize;
mod reconstruct;

use common::UsageError;

/// Binary-amplitude CGH optimization, viewing simulation and analysis.
#[derive(Parser, Debug)]
#[command(name = "holocgh", version, arg_required_else_help = true)]
struct Cli {
    /// Override every random seed (config seeds, bootstrap seeds).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(0..=i64::MAX as u64))]
    seed: Option<u64>,
    /// Output directory. Defaults to $HOLOCGH_OUT_DIR, then the config's
    /// output dir, then ./holocgh-out.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize binary SLM frames from a run config.
    Optimize(optimize::Args),
    /// Simulate retinal images of a hologram for pupil states from a CSV.
    Reconstruct(reconstruct::Args),
    /// Extract the STFT light field and eyebox energy tiles of a hologram.
    LfExtract(lf::Args),
    /// Display geometry, light-field sampling, parallax and luminance.
    #[command(subcommand, arg_required_else_help = true)]
    Analyze(analyze::Command),
    /// Pairwise-comparison scaling in JOD units.
    #[command(subcommand, arg_required_else_help = true)]
    Jod(jod::Command),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            if ok {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprint!("{}", e.render());
            return ExitCode::from(1);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let ctx = common::Context { seed: cli.seed, out: cli.out.clone(), argv: std::env::args().collect() };
    let result = match cli.command {
        Command::Optimize(a) => optimize::run(&ctx, a),
        Command::Reconstruct(a) => reconstruct::run(&ctx, a),
        Command::LfExtract(a) => lf::run(&ctx, a),
        Command::Analyze(c) => analyze::run(&ctx, c),
        Command::Jod(c) => jod::run(&ctx, c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
