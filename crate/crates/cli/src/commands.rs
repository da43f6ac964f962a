use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cpbscope::detector::DetectorModel;
use cpbscope::dose::{entangled_resolution, sql_resolution};
use cpbscope::feasibility::feasibility_report;
use cpbscope::imaging::io::{load_phase_map, save_phase_map, write_image};
use cpbscope::imaging::{
    dog_target, extract_high_res, simulate_baseline, simulate_proposed, synth_specimen, ImageKind, ImageResult,
    SamplingMode, ScanPlan, SpecimenPhaseMap,
};
use cpbscope::protocol::ProtocolConfig;
use cpbscope::rng::{Domain, StreamFactory};
use cpbscope::scaling::{scaling_sweep, ScalingConfig};

use crate::config::RunConfig;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments.
    Config(String),
    /// Unreadable input or unwritable output.
    Io(String),
    /// The device report has at least one failed constraint.
    Infeasible,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Infeasible => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Infeasible => write!(f, "device is infeasible (see report)"),
        }
    }
}

impl From<cpbscope::Error> for CliError {
    fn from(e: cpbscope::Error) -> Self {
        match e {
            cpbscope::Error::Io(_) | cpbscope::Error::Parse(_) => CliError::Io(e.to_string()),
            e => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn prepare_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_text(path: PathBuf, text: &str) -> CliResult<()> {
    fs::write(&path, text).map_err(|e| io_err(&path, e))
}

fn save_image(img: &ImageResult, dir: &Path, stem: &str) -> CliResult<()> {
    write_image(img, dir, stem).map_err(|e| io_err(&dir.join(stem), e))?;
    Ok(())
}

fn load_map(path: &Path) -> CliResult<SpecimenPhaseMap> {
    load_phase_map(path).map_err(|e| io_err(path, e))
}

/// Phase-map file if configured, otherwise the synthetic specimen.
fn specimen(cfg: &RunConfig, streams: &StreamFactory) -> CliResult<SpecimenPhaseMap> {
    match &cfg.specimen.phase_map {
        Some(path) => load_map(path),
        None => {
            let mut rng = streams.stream(Domain::Specimen, 0);
            Ok(synth_specimen(cfg.specimen.kind, &cfg.specimen.synth, &mut rng)?)
        }
    }
}

fn detector(cfg: &RunConfig, streams: &StreamFactory) -> CliResult<DetectorModel> {
    let mut rng = streams.stream(Domain::Detector, 0);
    Ok(DetectorModel::build(cfg.detector.n_pixels, cfg.detector.eta, &mut rng)?)
}

fn mode_name(analytic: bool) -> &'static str {
    if analytic {
        "analytic"
    } else {
        "sampled"
    }
}

pub fn simulate(cfg: &RunConfig, analytic: bool) -> CliResult<()> {
    let streams = StreamFactory::new(cfg.seed);
    let map = specimen(cfg, &streams)?;
    let det = detector(cfg, &streams)?;
    let step = cfg.scan.step.unwrap_or(map.pixel_size);
    let plan = ScanPlan::raster(&map, step, cfg.scan.dose, cfg.protocol.k)?;
    let mode = if analytic { SamplingMode::Analytic } else { SamplingMode::Sampled };
    let run = simulate_proposed(&map, &cfg.beam, &plan, &cfg.protocol, &det, &streams, mode)?;
    let target = dog_target(&map, cfg.filter.sigma_fine, cfg.filter.sigma_coarse)?;

    let k = cfg.protocol.k as f64;
    let max_phase = run.delta_theta.iter().fold(0.0f64, |m, d| m.max((k * d).abs()));
    let wraps = max_phase > std::f64::consts::FRAC_PI_2;
    if wraps {
        eprintln!("warning: max |k·Δθ| = {max_phase:.4} rad exceeds π/2; the readout is ambiguous");
    }

    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    save_image(&run.image, dir, "proposed")?;
    // Display copy, smoothed like the fine branch of the target.
    save_image(&run.image.gaussian_filter(cfg.filter.sigma_fine)?, dir, "proposed_smoothed")?;
    save_image(&target, dir, "target")?;
    let map_path = dir.join("specimen.phasemap");
    save_phase_map(&map, &map_path).map_err(|e| io_err(&map_path, e))?;

    let mut meta = String::new();
    let _ = writeln!(meta, "seed = {}", cfg.seed);
    let _ = writeln!(meta, "mode = {}", mode_name(analytic));
    let _ = writeln!(meta, "k = {}", cfg.protocol.k);
    let _ = writeln!(meta, "dose = {}", cfg.scan.dose);
    let _ = writeln!(meta, "step_nm = {}", plan.step);
    let _ = writeln!(meta, "positions = {}", plan.positions.len());
    let _ = writeln!(meta, "nominal_electrons_per_position = {}", plan.nominal_electrons_per_position);
    let _ = writeln!(meta, "electrons_per_position = {}", plan.electrons_per_position);
    let _ = writeln!(meta, "measurements_per_position = {}", plan.measurements_per_position);
    let _ = writeln!(meta, "total_electrons = {}", run.electrons);
    let _ = writeln!(meta, "total_measurements = {}", run.measurements);
    let _ = writeln!(meta, "discarded_measurements = {}", run.discarded);
    let _ = writeln!(meta, "effective_dose = {}", plan.effective_dose());
    let _ = writeln!(meta, "max_accumulated_phase = {max_phase}");
    let _ = writeln!(meta, "phase_wrap_warning = {wraps}");
    write_text(dir.join("metadata.txt"), &meta)?;
    write_text(dir.join("config.toml"), &cfg.echo())?;
    println!(
        "simulate: {}x{} positions, {} electrons, {} readouts ({} discarded) -> {}",
        plan.nx,
        plan.ny,
        run.electrons,
        run.measurements,
        run.discarded,
        dir.display()
    );
    Ok(())
}

pub fn baseline(cfg: &RunConfig, analytic: bool) -> CliResult<()> {
    let streams = StreamFactory::new(cfg.seed);
    let map = specimen(cfg, &streams)?;
    let counts = if analytic {
        // Validate the weak-phase condition with one sampled pass, then report expectations.
        simulate_baseline(&map, cfg.scan.dose, &streams)?;
        let per_pixel = cfg.scan.dose * map.pixel_size * map.pixel_size;
        let mean = map.mean();
        ImageResult {
            width: map.width,
            height: map.height,
            pixel_size: map.pixel_size,
            values: map.theta.iter().map(|t| per_pixel * (1.0 + 2.0 * (t - mean))).collect(),
            kind: ImageKind::ElectronCount,
        }
    } else {
        simulate_baseline(&map, cfg.scan.dose, &streams)?
    };
    let dog = extract_high_res(&counts, cfg.filter.sigma_fine, cfg.filter.sigma_coarse)?;
    let target = dog_target(&map, cfg.filter.sigma_fine, cfg.filter.sigma_coarse)?;

    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    save_image(&counts, dir, "baseline_counts")?;
    save_image(&dog, dir, "baseline_dog")?;
    save_image(&target, dir, "target")?;
    let mut meta = String::new();
    let _ = writeln!(meta, "seed = {}", cfg.seed);
    let _ = writeln!(meta, "mode = {}", mode_name(analytic));
    let _ = writeln!(meta, "dose = {}", cfg.scan.dose);
    let _ = writeln!(meta, "total_electrons = {}", counts.values.iter().sum::<f64>());
    write_text(dir.join("metadata.txt"), &meta)?;
    write_text(dir.join("config.toml"), &cfg.echo())?;
    println!("baseline: {}x{} pixels -> {}", map.width, map.height, dir.display());
    Ok(())
}

pub fn feasibility(cfg: &RunConfig) -> CliResult<()> {
    let report = feasibility_report(&cfg.device)?;
    let text = report.to_kv_text();
    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    write_text(dir.join("feasibility.txt"), &text)?;
    write_text(dir.join("config.toml"), &cfg.echo())?;
    print!("{text}");
    if report.ok() {
        Ok(())
    } else {
        Err(CliError::Infeasible)
    }
}

pub fn scaling(cfg: &RunConfig) -> CliResult<()> {
    let streams = StreamFactory::new(cfg.seed);
    let det = detector(cfg, &streams)?;
    let sc = ScalingConfig {
        ks: cfg.scaling.ks.clone(),
        budget: cfg.scaling.budget,
        replicates: cfg.scaling.replicates,
        protocol: ProtocolConfig {
            delta_theta: cfg.scaling.delta_theta,
            ..cfg.protocol
        },
    };
    let result = scaling_sweep(&sc, &det, &streams)?;

    let mut csv = String::from("k,measurements,mean_estimate,std_estimate,predicted,resolution_nm\n");
    for p in &result.points {
        let resolution = entangled_resolution(&cfg.specimen_model, p.k as f64)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            p.k, p.measurements, p.mean_estimate, p.std_estimate, p.predicted, resolution
        );
    }
    let mut summary = String::new();
    let _ = writeln!(summary, "seed = {}", cfg.seed);
    let _ = writeln!(summary, "budget = {}", cfg.scaling.budget);
    let _ = writeln!(summary, "replicates = {}", cfg.scaling.replicates);
    let _ = writeln!(summary, "delta_theta = {}", cfg.scaling.delta_theta);
    let _ = writeln!(summary, "sql_resolution_nm = {}", sql_resolution(&cfg.specimen_model));
    match &result.fit {
        Some(fit) => {
            let _ = writeln!(summary, "loglog_slope = {}", fit.slope);
            let _ = writeln!(summary, "loglog_slope_stderr = {}", fit.slope_stderr);
            let _ = writeln!(summary, "loglog_intercept = {}", fit.intercept);
        }
        None => {
            let _ = writeln!(summary, "loglog_slope = n/a");
        }
    }

    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    write_text(dir.join("scaling.csv"), &csv)?;
    write_text(dir.join("summary.txt"), &summary)?;
    write_text(dir.join("config.toml"), &cfg.echo())?;
    print!("{csv}{summary}");
    Ok(())
}

/// Single Gaussian blur when `sigma` is given, otherwise the configured
/// difference of Gaussians.
pub fn filter(cfg: &RunConfig, input: &Path, sigma: Option<f64>) -> CliResult<()> {
    let map = load_map(input)?;
    let out = match sigma {
        Some(s) => {
            let blurred = map.gaussian_filter(s)?;
            ImageResult {
                width: blurred.width,
                height: blurred.height,
                pixel_size: blurred.pixel_size,
                values: blurred.theta,
                kind: ImageKind::PhaseTarget,
            }
        }
        None => dog_target(&map, cfg.filter.sigma_fine, cfg.filter.sigma_coarse)?,
    };
    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    save_image(&out, dir, "filtered")?;
    let mut meta = format!("input = {}\n", input.display());
    match sigma {
        Some(s) => meta.push_str(&format!("filter = gaussian\nsigma_nm = {s}\n")),
        None => meta.push_str(&format!(
            "filter = dog\nsigma_fine_nm = {}\nsigma_coarse_nm = {}\n",
            cfg.filter.sigma_fine, cfg.filter.sigma_coarse
        )),
    }
    write_text(dir.join("metadata.txt"), &meta)?;
    write_text(dir.join("config.toml"), &cfg.echo())?;
    println!("filter: {}x{} -> {}", out.width, out.height, dir.display());
    Ok(())
}
