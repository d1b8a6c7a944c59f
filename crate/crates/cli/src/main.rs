use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use skewlab::commands::{run_command, Command};
use skewlab::config::{preset_names, ExperimentConfig, Overrides};
use skewlab::error::{CliError, Result};

/// Experiments on intermittent toral skew products.
#[derive(Parser, Debug)]
#[command(name = "skewlab", version)]
struct Args {
    /// One of: tails, spectrum, resolvent, renewal, tower-identity, correlate,
    /// check-finite, check-infinite, eigen-probe, good-asymptotics, verify.
    command: String,

    /// TOML file layered over the defaults (and the preset, if any).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Named starting configuration.
    #[arg(long)]
    preset: Option<String>,

    /// Output directory.
    #[arg(long)]
    out: Option<String>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    threads: Option<usize>,

    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn run(args: Args) -> Result<bool> {
    let cmd = Command::parse(&args.command).ok_or_else(|| CliError::Config {
        field: "command".into(),
        message: format!(
            "unknown command {:?}; expected one of: {}",
            args.command,
            Command::ALL.map(Command::name).join(", ")
        ),
    })?;
    let user = args.config.as_ref().map(std::fs::read_to_string).transpose()?;
    let overrides = Overrides { out: args.out, seed: args.seed, threads: args.threads };
    let cfg = ExperimentConfig::load(args.preset.as_deref(), user.as_deref(), &overrides)?;
    if args.print_config {
        print!("{}", cfg.to_toml());
        return Ok(true);
    }
    let manifest = run_command(cmd, &cfg, &mut |r| println!("{}", r.line()))?;
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    if cmd != Command::Verify {
        for c in &manifest.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            println!("[{tag}] {}: {} ({})", c.name, c.measured, c.tolerance);
        }
    }
    println!("wrote {} files and manifest.json to {}", manifest.files.len(), cfg.output.dir);
    Ok(manifest.all_passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Config { field, .. } = &e {
                if field == "preset" {
                    eprintln!("presets: {}", preset_names().join(", "));
                }
            }
            ExitCode::FAILURE
        }
    }
}
