//! `cpbscope`: run the CPB-microscope simulations from the command line.
//!
//! Exit status: 0 success, 1 configuration or usage error, 2 I/O error,
//! 3 infeasible device.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, CliResult};
use config::{parse_k_list, parse_planck, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "cpbscope", version, about = "Simulate CPB-enhanced electron microscopy")]
struct Cli {
    /// Configuration file (`section.key = value`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use noise-free expectations instead of sampling.
    #[arg(long, global = true)]
    analytic: bool,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scan a specimen with the CPB protocol.
    Simulate {
        #[arg(long)]
        k: Option<u32>,
        /// e/nm².
        #[arg(long)]
        dose: Option<f64>,
        /// disks, bars or blob-noise.
        #[arg(long)]
        specimen: Option<String>,
        #[arg(long)]
        phase_map: Option<PathBuf>,
    },
    /// Conventional phase-contrast image at the same dose.
    Baseline {
        #[arg(long)]
        dose: Option<f64>,
        #[arg(long)]
        specimen: Option<String>,
        #[arg(long)]
        phase_map: Option<PathBuf>,
    },
    /// Device-physics feasibility report.
    Feasibility {
        /// Mirror field, V/m.
        #[arg(long)]
        e_mirror: Option<f64>,
        /// `h` or `hbar`.
        #[arg(long)]
        planck: Option<String>,
    },
    /// Precision versus k at a fixed electron budget.
    Scaling {
        /// Comma-separated, e.g. `1,2,4,8`.
        #[arg(long)]
        ks: Option<String>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        replicates: Option<u32>,
    },
    /// Gaussian or difference-of-Gaussians filter of a phase map.
    Filter {
        #[arg(long)]
        input: PathBuf,
        /// Single Gaussian width, nm; omit for the configured DoG.
        #[arg(long)]
        sigma: Option<f64>,
    },
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn apply_specimen(cfg: &mut RunConfig, specimen: &Option<String>, phase_map: &Option<PathBuf>) -> CliResult<()> {
    if let Some(s) = specimen {
        cfg.specimen.kind = cpbscope::imaging::SpecimenKind::parse(s)
            .ok_or_else(|| CliError::Config(format!("unknown specimen `{s}`")))?;
        cfg.specimen.phase_map = None;
    }
    if let Some(p) = phase_map {
        cfg.specimen.phase_map = Some(p.clone());
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    let mut cfg = load_config(&cli)?;
    match &cli.command {
        Command::Simulate { k, dose, specimen, phase_map } => {
            if let Some(k) = k {
                cfg.protocol.k = *k;
            }
            if let Some(d) = dose {
                cfg.scan.dose = *d;
            }
            apply_specimen(&mut cfg, specimen, phase_map)?;
            commands::simulate(&cfg, cli.analytic)
        }
        Command::Baseline { dose, specimen, phase_map } => {
            if let Some(d) = dose {
                cfg.scan.dose = *d;
            }
            apply_specimen(&mut cfg, specimen, phase_map)?;
            commands::baseline(&cfg, cli.analytic)
        }
        Command::Feasibility { e_mirror, planck } => {
            if let Some(e) = e_mirror {
                cfg.device.e_mirror = *e;
            }
            if let Some(p) = planck {
                cfg.device.planck = parse_planck(p).map_err(CliError::Config)?;
            }
            commands::feasibility(&cfg)
        }
        Command::Scaling { ks, budget, replicates } => {
            if let Some(ks) = ks {
                cfg.scaling.ks = parse_k_list(ks).map_err(CliError::Config)?;
            }
            if let Some(b) = budget {
                cfg.scaling.budget = *b;
            }
            if let Some(r) = replicates {
                cfg.scaling.replicates = *r;
            }
            commands::scaling(&cfg)
        }
        Command::Filter { input, sigma } => commands::filter(&cfg, input, *sigma),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
