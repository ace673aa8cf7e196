use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ris_bench::{run_experiment, write_outputs, BenchError, ExperimentConfig};
use ris_secrecy::circuit::{fit_ris_params, CircuitParams, FIT_SAMPLES};

#[derive(Parser)]
#[command(name = "ris-bench", version, about = "Secrecy-rate experiments for lossy RIS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; all cores when omitted.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Fit the amplitude-phase law at one resistance and print it as JSON.
    FitRis {
        /// Element resistance in ohm.
        #[arg(long = "R", value_name = "OHMS")]
        resistance: f64,
        /// TOML file with circuit values replacing the reference circuit.
        #[arg(long)]
        circuit_file: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Run { config, out, threads } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out.unwrap_or_else(|| cfg.output.clone());
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = threads {
                if n == 0 {
                    return Err(BenchError::Config("--threads must be at least 1".into()));
                }
                pool = pool.num_threads(n);
            }
            let pool = pool.build().map_err(|e| BenchError::Config(e.to_string()))?;
            let result = pool.install(|| run_experiment(&cfg))?;
            write_outputs(&cfg, &result, &dir)?;
            let missing = result.results.missing.len();
            eprintln!(
                "{}: {} rows written to {}{}",
                cfg.family.name(),
                result.results.rows.len(),
                dir.display(),
                if missing > 0 { format!(", {missing} failed cells") } else { String::new() }
            );
            Ok(())
        }
        Command::FitRis { resistance, circuit_file } => {
            let circuit = match circuit_file {
                Some(p) => {
                    let text = std::fs::read_to_string(&p)
                        .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", p.display())))?;
                    toml::from_str::<CircuitParams>(&text).map_err(|e| BenchError::Config(e.to_string()))?
                }
                None => CircuitParams::reference(resistance),
            };
            let fit = fit_ris_params(&circuit.with_resistance(resistance), FIT_SAMPLES)?;
            println!("{}", serde_json::to_string_pretty(&fit.params).expect("params serialize"));
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            println!("{}: ok ({} sweep points, {} seeds)", cfg.family.name(), cfg.sweep.len(), cfg.n_seeds);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
