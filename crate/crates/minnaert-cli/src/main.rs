//! `minnaert` command-line front end.

mod config;
mod experiments;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::RunConfig;
use failure::Failure;

#[derive(Parser)]
#[command(name = "minnaert", version, about = "Acoustic scattering by a small high-contrast bubble")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacitance, volume and area of the reference surface.
    Capacitance(Common),
    /// Minnaert frequency of the configured bubble.
    Minnaert(Common),
    /// Plane-wave scattering solve and field samples.
    Scatter(Common),
    /// Scattered amplitude at a point over a frequency range.
    Sweep(Common),
    /// Bubble resolvent against its leading-order expansion.
    Resolvent(Common),
    /// Resonance pairs over a list of bubble sizes.
    Resonances(Common),
    /// Error of the point-scatterer approximation over bubble sizes.
    Convergence(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Exit with status 4 if an acceptance threshold is violated.
    #[arg(long)]
    check: bool,
    /// Directory for the JSON and CSV artifacts.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

const EXIT_CHECK: u8 = 4;

fn execute(name: &str, args: &Common) -> Result<bool, Failure> {
    let cfg = RunConfig::load(&args.config, name)?;
    let outcome = experiments::run(&cfg)?;
    let mut artifacts = Vec::new();
    if let Some(table) = &outcome.table {
        let path = output::write(&args.out_dir, &format!("{name}.csv"), &table.render())?;
        artifacts.push(path.display().to_string());
    }
    let doc = json!({
        "schema_version": output::SCHEMA_VERSION,
        "experiment": name,
        "config": cfg,
        "results": outcome.results,
        "checks": outcome.checks,
        "artifacts": artifacts,
    });
    let text = serde_json::to_string_pretty(&doc).expect("serialisable document") + "\n";
    output::write(&args.out_dir, &format!("{name}.json"), &text)?;
    print!("{text}");
    let failed: Vec<_> = outcome.checks.iter().filter(|c| !c.pass).collect();
    for c in &failed {
        eprintln!("check failed: {} = {} (want {})", c.name, c.value, c.threshold);
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Capacitance(a) => ("capacitance", a),
        Command::Minnaert(a) => ("minnaert", a),
        Command::Scatter(a) => ("scatter", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Resolvent(a) => ("resolvent", a),
        Command::Resonances(a) => ("resonances", a),
        Command::Convergence(a) => ("convergence", a),
    };
    match execute(name, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) if args.check => ExitCode::from(EXIT_CHECK),
        Ok(false) => ExitCode::SUCCESS,
        Err(f) => {
            match f.diagnostics() {
                Some(d) => eprintln!("{d}"),
                None => eprintln!("{f}"),
            }
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
