use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use multirc::config::{parse_override, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "multirc", about = "Multifunctional reservoir computing experiments")]
struct Args {
    /// gen-data, train, predict, sweep-rho, sweep-grid, ngrc-beta-sweep, lorenz-halvorsen,
    /// floquet or stm
    command: String,
    /// TOML file with run settings.
    #[arg(long)]
    config: Option<String>,
    /// Named parameter set, e.g. table1-fig3.
    #[arg(long)]
    preset: Option<String>,
    /// `key=value` override, applied after the preset and the file. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
}

fn build_config(args: &Args) -> Result<RunConfig, Box<dyn std::error::Error>> {
    let file = args.config.as_ref().map(std::fs::read_to_string).transpose()?;
    let mut overrides = vec![("command".to_string(), toml::Value::String(args.command.clone()))];
    for s in &args.set {
        overrides.push(parse_override(s)?);
    }
    if let Some(s) = args.seed {
        overrides.push(("seed0".into(), toml::Value::Integer(s as i64)));
    }
    if let Some(n) = args.trials {
        overrides.push(("n_trials".into(), toml::Value::Integer(n as i64)));
    }
    if let Some(w) = args.workers {
        overrides.push(("workers".into(), toml::Value::Integer(w as i64)));
    }
    if let Some(o) = &args.out {
        overrides.push(("output_dir".into(), toml::Value::String(o.display().to_string())));
    }
    Ok(RunConfig::parse(file.as_deref(), args.preset.as_deref(), &overrides)?)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match build_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let run = multirc_cli::execute(&cfg).and_then(|a| multirc_cli::persist(&cfg, cfg.output_dir.as_ref(), &a));
    match run {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
