use std::path::PathBuf;
use std::process::ExitCode;

use binls::config::{parse_config_with, Command as RunCommand};
use binls::run::run;
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    GnConstant,
    GroundState,
    GammaCurve,
    Evolve,
    GlobalExistence,
    Instability,
    Concentration,
    Threshold,
}

impl From<Cmd> for RunCommand {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::GnConstant => RunCommand::GnConstant,
            Cmd::GroundState => RunCommand::GroundState,
            Cmd::GammaCurve => RunCommand::GammaCurve,
            Cmd::Evolve => RunCommand::Evolve,
            Cmd::GlobalExistence => RunCommand::GlobalExistence,
            Cmd::Instability => RunCommand::Instability,
            Cmd::Concentration => RunCommand::Concentration,
            Cmd::Threshold => RunCommand::Threshold,
        }
    }
}

/// Ground states, critical masses and blow-up runs for the mixed-dispersion
/// biharmonic NLS.
#[derive(Debug, Parser)]
#[command(name = "binls", version)]
struct Args {
    /// Experiment to run; overrides `command` in the config file.
    command: Cmd,
    /// Flat key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Seed for the random test fields.
    #[arg(long)]
    seed: Option<u64>,
    /// Grid points per axis.
    #[arg(long = "grid-points")]
    grid_points: Option<usize>,
    /// Box side length.
    #[arg(long)]
    extent: Option<f64>,
    /// Extra `key=value` override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn configure_threads() {
    if let Some(n) = std::env::var("BINLS_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    configure_threads();
    let text = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("IoError: cannot read {}: {e}", path.display());
                return ExitCode::from(5);
            }
        },
        None => String::new(),
    };
    let command: RunCommand = args.command.into();
    let mut overrides = vec![("command".to_string(), command.as_str().to_string())];
    for kv in &args.set {
        match kv.split_once('=') {
            Some((k, v)) => overrides.push((k.trim().to_string(), v.trim().to_string())),
            None => {
                eprintln!("ConfigError: --set expects KEY=VALUE, got `{kv}`");
                return ExitCode::from(2);
            }
        }
    }
    if let Some(o) = &args.output {
        overrides.push(("output_dir".to_string(), o.display().to_string()));
    }
    if let Some(s) = args.seed {
        overrides.push(("rng_seed".to_string(), s.to_string()));
    }
    if let Some(m) = args.grid_points {
        overrides.push(("grid.points".to_string(), m.to_string()));
    }
    if let Some(l) = args.extent {
        overrides.push(("grid.extent".to_string(), l.to_string()));
    }
    let cfg = match parse_config_with(&text, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", e.category());
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let out = run(&cfg);
    match &out.error {
        None => {
            println!(
                "{} finished in {:.2} s; artifacts in {}",
                cfg.command,
                out.wall_seconds,
                cfg.output_dir.display()
            );
            ExitCode::SUCCESS
        }
        Some(e) => {
            eprintln!("{}: {e}", e.category());
            ExitCode::from(out.exit_code as u8)
        }
    }
}
