use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::Parser;
use spinlink_cli::{emit, load_config, run_command, CliError, Command, Format};

/// Polarization-qubit to spin transfer: fidelity, rate, sweeps and Monte Carlo.
#[derive(Debug, Parser)]
#[command(name = "spinlink", version)]
struct Args {
    /// JSON configuration file, merged over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset to start from (default reference).
    #[arg(long)]
    preset: Option<String>,
    /// Override a configuration value; dotted path or unique bare key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json (default csv)
    #[arg(long)]
    format: Option<Format>,
    /// Monte Carlo master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// fidelity | rate | sweep | montecarlo | diagnose
    #[arg(long)]
    command: Command,
}

fn run(args: Args) -> Result<(), CliError> {
    let mut overrides = args.set.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("monte_carlo.seed={seed}"));
    }
    if let Some(trials) = args.trials {
        overrides.push(format!("monte_carlo.trials={trials}"));
    }
    let mut config = load_config(args.config.as_deref(), args.preset.as_deref(), &overrides)?;
    if let Some(out) = args.out {
        config.output.path = Some(out);
    }
    if let Some(format) = args.format {
        config.output.format = format;
    }
    let artifact = run_command(&config, args.command)?;
    emit(&config, args.command, &artifact)?;
    Ok(())
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.record());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion) => e.exit(),
        Err(e) => return fail(&CliError::Config(e.to_string().trim().to_owned())),
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
