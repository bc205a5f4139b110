use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use vlasov1d_cli::config::{parse_config, Command};
use vlasov1d_cli::run::execute;

/// Particle, grid and transport experiments for the 1D periodic
/// Vlasov-Poisson system.
#[derive(Parser, Debug)]
#[command(name = "vlasov1d", version)]
struct Cli {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output root; results go to `<out>/<config-hash>/`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write plot.svg.
    #[arg(long)]
    emit_svg: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text, cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let base = cli.config.parent().map(PathBuf::from).unwrap_or_default();
    match execute(&cfg, &base, &out, cli.emit_svg) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.pass {
                eprintln!("pass; outputs in {}", outcome.dir.display());
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "FAIL: inequality violated; outputs in {}",
                    outcome.dir.display()
                );
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
