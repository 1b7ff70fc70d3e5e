use std::path::PathBuf;
use std::process::ExitCode;

use bellport::cli::{run_campaign, CampaignConfig, InputSpec, Mode};
use clap::Parser;

/// Monte-Carlo and exhaustive campaigns for Bell-pair teleportation.
#[derive(Debug, Parser)]
#[command(name = "bellport", version)]
struct Args {
    /// Number of qubits to teleport.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Sampled runs (sample mode) or validation states (derive-table, certify).
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Sample)]
    mode: Mode,
    /// `random`, a fixture name (`zero`, `uniform`, `ghz`) or a state file.
    #[arg(long, default_value = "random")]
    input: InputSpec,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fail on any operator mismatch against the reference table.
    #[arg(long)]
    strict: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = CampaignConfig {
        n: args.n,
        trials: args.trials,
        seed: args.seed,
        mode: args.mode,
        input: args.input,
        strict: args.strict,
    };
    let report = match run_campaign(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let json = report.to_json();
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json + "\n") {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => println!("{json}"),
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
