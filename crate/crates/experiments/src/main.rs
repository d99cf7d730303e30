use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use holomimo::io::save_channel;
use holomimo_experiments::arrays::{central_efficiency, default_edge_efficiency, pattern_file_bytes, structure_geometry};
use holomimo_experiments::scenarios::synthetic_measurement;
use holomimo_experiments::{replay, run, Manifest, RunError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "holomimo", version, about = "Seeded holographic MIMO experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its outputs with a manifest.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Re-run a manifest and verify every output checksum.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write a synthetic 256 x 16 probe measurement as a channel CSV.
    SynthMeasurement {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Write a pattern file for a dipole array structure such as `8x16`.
    MakePatterns {
        #[arg(long)]
        structure: String,
        #[arg(long, default_value_t = 4.0)]
        aperture_x_wl: f64,
        #[arg(long, default_value_t = 4.0)]
        aperture_y_wl: f64,
        /// Efficiency of interior elements; defaults to the tabulated value
        /// for 8x8, 8x16 and 8x32 on a 4 x 4 wavelength aperture.
        #[arg(long)]
        central: Option<f64>,
        /// Efficiency of the outer ring; defaults to twice the transmission
        /// bound, capped at 1.
        #[arg(long)]
        edge: Option<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,0")]
        axis: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        step_deg: f64,
        #[arg(long)]
        output: PathBuf,
    },
}

fn parse_structure(s: &str) -> Result<[usize; 2], RunError> {
    let bad = || RunError::Config(format!("--structure: expected ROWSxCOLS, got {s:?}"));
    let (a, b) = s.split_once('x').ok_or_else(bad)?;
    Ok([a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?])
}

fn report(manifest: &Manifest) {
    for f in &manifest.outputs {
        println!("{}  {}", f.sha256, manifest.config.output.join(&f.file).display());
    }
    println!("config_hash {}", manifest.config_hash);
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Run {
            config,
            seed,
            trials,
            output,
            threads,
        } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(o) = output {
                cfg.output = o;
            }
            report(&run(&cfg, threads)?);
        }
        Command::Replay { manifest, output, threads } => {
            let m = replay(&manifest, output.as_deref(), threads)?;
            report(&m);
            println!("replay matches {} output files", m.outputs.len());
        }
        Command::SynthMeasurement { seed, output } => {
            save_channel(&output, &synthetic_measurement(seed)?)?;
            println!("{}", output.display());
        }
        Command::MakePatterns {
            structure,
            aperture_x_wl,
            aperture_y_wl,
            central,
            edge,
            axis,
            step_deg,
            output,
        } => {
            let s = parse_structure(&structure)?;
            let axis: [f64; 3] = axis
                .try_into()
                .map_err(|_| RunError::Config("--axis: expected three components".into()))?;
            let tabulated = if (aperture_x_wl, aperture_y_wl) == (4.0, 4.0) {
                central_efficiency(s)
            } else {
                None
            };
            let central = central
                .or(tabulated)
                .ok_or_else(|| RunError::Config(format!("--central: no tabulated efficiency for {structure}")))?;
            let g = structure_geometry(s, aperture_x_wl, aperture_y_wl)?;
            let edge = match edge {
                Some(e) => e,
                None => default_edge_efficiency(&g, central)?,
            };
            std::fs::write(&output, pattern_file_bytes(&g, axis, central, edge, step_deg)?)?;
            println!("{}", output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
