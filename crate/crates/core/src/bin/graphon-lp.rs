use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use graphon_linkpred::experiment::{load_config, run, validate_spec_file, Command};

#[derive(Parser)]
#[command(version, about = "SBM sampling, MPNN convergence and link prediction experiments")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample one graph and write its edge list and block labels.
    Sample(RunArgs),
    /// Discrete vs continuous embedding gaps across graph sizes.
    Converge(RunArgs),
    /// Embedding gaps between isomorphic and non-isomorphic blocks.
    Stability(RunArgs),
    /// Link prediction across scenarios and methods.
    Table(RunArgs),
    /// Check an SBM spec (or a config's [sbm] section).
    ValidateSpec { path: PathBuf },
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML config (a previous run's manifest.toml works too).
    config: PathBuf,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let (command, args) = match cli.command {
        Cmd::Sample(a) => (Command::Sample, a),
        Cmd::Converge(a) => (Command::Converge, a),
        Cmd::Stability(a) => (Command::Stability, a),
        Cmd::Table(a) => (Command::Table, a),
        Cmd::ValidateSpec { path } => {
            return match validate_spec_file(&path) {
                Ok(report) => {
                    print!("{report}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    };
    let result = load_config(&args.config)
        .and_then(|(cfg, base)| run(command, &cfg, &base, args.out.as_deref()));
    match result {
        Ok(out) => {
            for f in &out.files {
                println!("{}", out.dir.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn fail(e: graphon_linkpred::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
