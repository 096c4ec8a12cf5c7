use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use potwell_cli::commands::{self, Overrides};
use potwell_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "potwell", version, about = "Potential-well thresholds and blow-up runs for doubly dispersive waves")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Wave speed; overrides `gamma` in the config.
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<f64>,

    /// Output directory; overrides `outputs.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for random initial data; overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// List the model presets and their parameters.
    PresetList,
    /// Check coercivity and index conditions of the configured model.
    Validate,
    /// Compute m(gamma) and d(gamma) and write the threshold file.
    Threshold,
    /// Classify the configured initial data.
    Classify,
    /// Integrate the configured initial data.
    Simulate,
    /// Run one simulation per value of the configured sweep parameter.
    Sweep,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    Overrides {
        gamma: cli.gamma,
        out: cli.out.clone(),
        seed: cli.seed,
    }
    .apply(&mut cfg);
    cfg.check()?;
    Ok(cfg)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).unwrap_or_default()
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::PresetList => print!("{}", commands::cmd_preset_list()),
        Command::Validate => {
            let report = commands::cmd_validate(&load(cli)?)?;
            println!("{}", json(&report));
            if !report.valid {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Threshold => {
            let cfg = load(cli)?;
            let file = commands::cmd_threshold(&cfg)?;
            println!("{:>24} {:>24} {:>24}", "gamma", "m", "d");
            for e in &file.entries {
                println!("{:>24.16e} {:>24.16e} {:>24.16e}", e.gamma, e.m, e.d);
            }
            println!("written {}", cfg.outputs.threshold_path().display());
        }
        Command::Classify => {
            let rows = commands::cmd_classify(&load(cli)?)?;
            println!("{}", json(&rows));
        }
        Command::Simulate => {
            let cfg = load(cli)?;
            let s = commands::cmd_simulate(&cfg)?;
            println!(
                "initial {} (E_used = {:.6e}, d = {:.6e}); outcome {:?} at t = {:.6}; drift E {:.2e}, M {:.2e}",
                s.initial.label, s.initial.energy_used, s.initial.d, s.outcome, s.t_final, s.energy_drift, s.momentum_drift
            );
            println!("invariance: {}", s.invariance.note);
            if let Some(l) = &s.levine {
                println!("levine: {}", l.note);
            }
            println!("written {}", cfg.outputs.dir.display());
        }
        Command::Sweep => {
            let cfg = load(cli)?;
            let r = commands::cmd_sweep(&cfg, cli.threads)?;
            for row in &r.rows {
                println!(
                    "{:>14.6e} {:>10} {:>14}",
                    row.value,
                    row.outcome,
                    row.label.map(|l| l.as_str()).unwrap_or("-")
                );
            }
            println!("{}", r.note);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
