use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use plaquette_core::harness::{
    exact_reference, experiment_circuit, run_experiment, write_exact_csv, write_outputs,
    ExperimentConfig,
};
use plaquette_core::mitigation::calibrate;
use plaquette_core::sim::NoiseModel;
use plaquette_core::transpile::{transpile, volume_report, Topology};
use plaquette_core::Error;

/// Plaquette gauge-model dynamics on a simulated noisy device.
#[derive(Parser)]
#[command(name = "plaquette", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full raw / readout / ZNE pipeline and write results.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write exact curves for the config's observables.
    Exact {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Number of time points (at least 200).
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Measure a readout response matrix and save it as JSON.
    Calibrate {
        #[arg(long)]
        qubits: usize,
        /// JSON noise model `{p2, e01, e10}`.
        #[arg(long)]
        noise: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 8192)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print circuit size and volume for a config.
    Inspect {
        #[arg(long)]
        config: PathBuf,
        /// Route onto this topology instead of the config's.
        #[arg(long)]
        topology: Option<String>,
        /// Also print the gate listing.
        #[arg(long)]
        circuit_dump: bool,
    },
}

fn load_noise(path: &Path) -> Result<NoiseModel, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let noise: NoiseModel = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    noise.validate()?;
    Ok(noise)
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run { config, out, seed } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let result = run_experiment(&cfg)?;
            let curve = exact_reference(&cfg, 200)?;
            let written = write_outputs(&out, &cfg, &result, Some(&curve))?;
            for p in written {
                info!("wrote {}", p.display());
            }
            println!(
                "{} rows, {} circuits executed, results in {}",
                result.table.rows.len(),
                result.executed_circuits,
                out.display()
            );
        }
        Command::Exact {
            config,
            out,
            points,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let curve = exact_reference(&cfg, points)?;
            fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            let path = out.join("exact.csv");
            write_exact_csv(&curve, &path)?;
            println!("{} points written to {}", curve.times.len(), path.display());
        }
        Command::Calibrate {
            qubits,
            noise,
            out,
            shots,
            seed,
        } => {
            let noise = load_noise(&noise)?;
            let p = calibrate(qubits, &noise, shots, seed)?;
            p.save(&out)?;
            println!("{}x{} response matrix written to {}", p.dim(), p.dim(), out.display());
        }
        Command::Inspect {
            config,
            topology,
            circuit_dump,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(t) = topology {
                cfg.topology = t;
            }
            let t0 = cfg.times.values()[0];
            let logical = {
                let mut c = cfg.clone();
                c.topology = "none".into();
                experiment_circuit(&c, t0)?
            };
            let m = logical.metrics();
            let v = volume_report(&logical);
            println!("model: {} {} g={}", cfg.model, cfg.geometry, cfg.g);
            println!(
                "logical circuit: {} qubits, {} CNOTs, two-qubit depth {}",
                m.qubit_count, m.cnot_count, m.two_qubit_depth
            );
            println!(
                "logical volume: m={} d={} circuit volume {} (square equivalent 2^{} = {})",
                v.m, v.d, v.circuit_volume, v.qv_exponent, v.quantum_volume
            );
            let mut shown = logical;
            if cfg.topology != "none" {
                let topo = Topology::resolve(&cfg.topology)?;
                let routed = transpile(&shown, &topo, None)?;
                let v = volume_report(&routed.circuit);
                println!(
                    "routed on {}: {} swaps (+{} CNOTs), layout {:?}",
                    topo.name,
                    routed.swaps,
                    routed.added_cnots(),
                    routed.initial_layout.as_slice()
                );
                println!("m={} d={} circuit volume {}", v.m, v.d, v.circuit_volume);
                match topo.quantum_volume {
                    Some(qv) => println!(
                        "device V_Q {qv}: circuit volume {} the device's",
                        if v.circuit_volume as u64 > qv { "exceeds" } else { "is within" }
                    ),
                    None => println!("device V_Q unknown"),
                }
                shown = routed.circuit;
            }
            if circuit_dump {
                print!("{}", shown.to_text());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
