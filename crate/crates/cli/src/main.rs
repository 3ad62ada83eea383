use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod output;
mod verify;

#[derive(Parser, Debug)]
#[command(name = "srg", version, about = "Spectral renormalization group on truncated Fock spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Common {
    /// Model configuration (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for results.json, flow.csv and kernels/.
    #[arg(long, default_value = "srg-out")]
    pub out: PathBuf,
    /// Pass/fail tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Deformation parameter "re,im"; repeat for several values.
    #[arg(long, value_parser = parse_theta)]
    pub theta: Vec<(f64, f64)>,
    /// Scale ρ, overriding the config.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Seed for randomized suites.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ground-state energy by the kernel pipeline, checked against the oracle.
    GroundState(Common),
    /// Resonance of the dilated model for each θ.
    Resonance(Common),
    /// Iterate the renormalization map and write the trace.
    Flow(Common),
    /// Run an invariant suite: ccr, feshbach, wick, norms, pf, spectral.
    Verify {
        suite: String,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_theta(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected \"re,im\", got {s:?}"))?;
    let re = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let im = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((re, im))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.command {
        Command::GroundState(c) => commands::ground_state(&c),
        Command::Resonance(c) => commands::resonance(&c),
        Command::Flow(c) => commands::flow(&c),
        Command::Verify { suite, common } => verify::run(&suite, &common),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("srg: {e}");
            ExitCode::from(e.code())
        }
    }
}
