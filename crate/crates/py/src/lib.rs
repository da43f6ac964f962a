//! Python bindings: `import cpbscope`.

use std::collections::HashMap;
use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use cpbscope::dose::{self, SpecimenModelConstants};
use cpbscope::feasibility::{self as feas, DeviceParams};
use cpbscope::imaging::{self, io, SamplingMode, SpecimenKind, SynthParams};
use cpbscope::protocol::{self, CorrectionMode, InelasticModel};
use cpbscope::scaling::{self, ScalingConfig};
use cpbscope::{Domain, StreamFactory};

fn to_py(e: cpbscope::Error) -> PyErr {
    match e {
        cpbscope::Error::Io(_) | cpbscope::Error::Parse(_) => PyIOError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

/// Two-level box state `amp0|0⟩ + amp1|1⟩`.
#[pyclass(name = "CpbState", module = "cpbscope", frozen, from_py_object)]
#[derive(Clone)]
struct PyCpbState(cpbscope::CpbState);

#[pymethods]
impl PyCpbState {
    /// Normalized from complex amplitudes.
    #[new]
    fn new(amp0: Complex64, amp1: Complex64) -> PyResult<Self> {
        cpbscope::CpbState::normalized(amp0, amp1).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn zero() -> Self {
        Self(cpbscope::CpbState::zero())
    }

    #[staticmethod]
    fn one() -> Self {
        Self(cpbscope::CpbState::one())
    }

    #[staticmethod]
    fn symmetric() -> Self {
        Self(cpbscope::CpbState::symmetric())
    }

    /// `(|0⟩ + e^{iφ}|1⟩)/√2`.
    #[staticmethod]
    fn equator(phi: f64) -> Self {
        Self(cpbscope::CpbState::equator(phi))
    }

    #[getter]
    fn amplitudes(&self) -> (Complex64, Complex64) {
        (self.0.amp0, self.0.amp1)
    }

    fn prob_one(&self) -> f64 {
        self.0.prob_one()
    }

    fn relative_phase(&self) -> f64 {
        self.0.relative_phase()
    }

    fn phase_shift(&self, kappa: f64) -> Self {
        Self(self.0.phase_shift(kappa))
    }

    fn to_energy_basis(&self) -> Self {
        Self(self.0.to_energy_basis())
    }

    fn readout_transform(&self) -> Self {
        Self(protocol::readout_transform(&self.0))
    }

    #[pyo3(signature = (other, tol = 1e-9))]
    fn canonical_equal(&self, other: &Self, tol: f64) -> bool {
        self.0.canonical_equal(&other.0, tol)
    }

    fn __repr__(&self) -> String {
        format!("CpbState(amp0={}, amp1={})", self.0.amp0, self.0.amp1)
    }
}

/// Electron-round settings; all fields are read/write.
#[pyclass(name = "ProtocolConfig", module = "cpbscope", from_py_object)]
#[derive(Clone)]
struct PyProtocolConfig(protocol::ProtocolConfig);

#[pymethods]
impl PyProtocolConfig {
    #[new]
    #[pyo3(signature = (k = 9, delta_theta = 0.0, p_inelastic = 0.0, xi_precision = 0.0, p_loss = 0.0, correction = "per-round", inelastic_model = "delocalized"))]
    fn new(
        k: u32,
        delta_theta: f64,
        p_inelastic: f64,
        xi_precision: f64,
        p_loss: f64,
        correction: &str,
        inelastic_model: &str,
    ) -> PyResult<Self> {
        let correction = match correction {
            "per-round" => CorrectionMode::PerRound,
            "deferred" => CorrectionMode::Deferred,
            c => return Err(PyValueError::new_err(format!("unknown correction `{c}`"))),
        };
        let inelastic_model = match inelastic_model {
            "delocalized" => InelasticModel::Delocalized,
            "localized" => InelasticModel::Localized,
            m => return Err(PyValueError::new_err(format!("unknown inelastic model `{m}`"))),
        };
        let cfg = protocol::ProtocolConfig {
            k,
            delta_theta,
            p_inelastic,
            xi_precision,
            p_loss,
            correction,
            inelastic_model,
            ..protocol::ProtocolConfig::default()
        };
        cfg.validate().map_err(to_py)?;
        Ok(Self(cfg))
    }

    #[getter]
    fn k(&self) -> u32 {
        self.0.k
    }

    #[setter]
    fn set_k(&mut self, k: u32) {
        self.0.k = k;
    }

    #[getter]
    fn delta_theta(&self) -> f64 {
        self.0.delta_theta
    }

    #[setter]
    fn set_delta_theta(&mut self, v: f64) {
        self.0.delta_theta = v;
    }

    #[getter]
    fn p_inelastic(&self) -> f64 {
        self.0.p_inelastic
    }

    #[setter]
    fn set_p_inelastic(&mut self, v: f64) {
        self.0.p_inelastic = v;
    }

    #[getter]
    fn xi_precision(&self) -> f64 {
        self.0.xi_precision
    }

    #[setter]
    fn set_xi_precision(&mut self, v: f64) {
        self.0.xi_precision = v;
    }

    #[getter]
    fn p_loss(&self) -> f64 {
        self.0.p_loss
    }

    #[setter]
    fn set_p_loss(&mut self, v: f64) {
        self.0.p_loss = v;
    }

    /// `[1 + sin kΔθ]/2`.
    fn ideal_prob_one(&self) -> f64 {
        self.0.ideal_prob_one()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// Detector with random per-pixel phases.
#[pyclass(name = "DetectorModel", module = "cpbscope", frozen, from_py_object)]
#[derive(Clone)]
struct PyDetectorModel(cpbscope::DetectorModel);

#[pymethods]
impl PyDetectorModel {
    #[new]
    #[pyo3(signature = (n_pixels = 64, eta = 0.0, seed = 0))]
    fn new(n_pixels: usize, eta: f64, seed: u64) -> PyResult<Self> {
        let mut rng = StreamFactory::new(seed).stream(Domain::Detector, 0);
        cpbscope::DetectorModel::build(n_pixels, eta, &mut rng)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn n_pixels(&self) -> usize {
        self.0.n_pixels()
    }

    #[getter]
    fn betas(&self) -> Vec<f64> {
        self.0.betas().to_vec()
    }
}

/// Specimen phase map, row-major, rad.
#[pyclass(name = "PhaseMap", module = "cpbscope", frozen, from_py_object)]
#[derive(Clone)]
struct PyPhaseMap(imaging::SpecimenPhaseMap);

#[pymethods]
impl PyPhaseMap {
    #[new]
    fn new(width: usize, height: usize, pixel_size: f64, theta: Vec<f64>) -> PyResult<Self> {
        imaging::SpecimenPhaseMap::new(width, height, pixel_size, theta)
            .map(Self)
            .map_err(to_py)
    }

    /// Synthetic specimen: `disks`, `bars` or `blob-noise`.
    #[staticmethod]
    #[pyo3(signature = (kind = "blob-noise", width = 100, height = 100, pixel_size = 0.3, amplitude = 0.2, radius = 10.0, count = 60, seed = 0))]
    #[allow(clippy::too_many_arguments)]
    fn synthetic(
        kind: &str,
        width: usize,
        height: usize,
        pixel_size: f64,
        amplitude: f64,
        radius: f64,
        count: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let kind = SpecimenKind::parse(kind).ok_or_else(|| PyValueError::new_err(format!("unknown specimen `{kind}`")))?;
        let params = SynthParams { width, height, pixel_size, amplitude, radius, count };
        let mut rng = StreamFactory::new(seed).stream(Domain::Specimen, 0);
        imaging::synth_specimen(kind, &params, &mut rng).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        io::load_phase_map(&path).map(Self).map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_phase_map(&self.0, &path).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height
    }

    #[getter]
    fn pixel_size(&self) -> f64 {
        self.0.pixel_size
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.0.theta.clone()
    }

    fn gaussian_filter(&self, sigma_nm: f64) -> PyResult<Self> {
        self.0.gaussian_filter(sigma_nm).map(Self).map_err(to_py)
    }

    /// Fine minus coarse Gaussian blur.
    #[pyo3(signature = (sigma_fine = 0.3, sigma_coarse = 1.5))]
    fn dog_target(&self, sigma_fine: f64, sigma_coarse: f64) -> PyResult<PyImage> {
        imaging::dog_target(&self.0, sigma_fine, sigma_coarse)
            .map(PyImage)
            .map_err(to_py)
    }
}

/// Simulated or filtered image, row-major.
#[pyclass(name = "Image", module = "cpbscope", frozen, from_py_object)]
#[derive(Clone)]
struct PyImage(imaging::ImageResult);

#[pymethods]
impl PyImage {
    #[getter]
    fn width(&self) -> usize {
        self.0.width
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height
    }

    #[getter]
    fn pixel_size(&self) -> f64 {
        self.0.pixel_size
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values.clone()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind.name()
    }

    fn mean(&self) -> f64 {
        self.0.mean()
    }

    fn gaussian_filter(&self, sigma_nm: f64) -> PyResult<Self> {
        self.0.gaussian_filter(sigma_nm).map(Self).map_err(to_py)
    }

    #[pyo3(signature = (sigma_fine = 0.3, sigma_coarse = 1.5))]
    fn extract_high_res(&self, sigma_fine: f64, sigma_coarse: f64) -> PyResult<Self> {
        imaging::extract_high_res(&self.0, sigma_fine, sigma_coarse)
            .map(Self)
            .map_err(to_py)
    }

    /// Writes `<stem>.pgm`, `<stem>.pgm.txt` and `<stem>.csv` into `dir`.
    fn write(&self, dir: PathBuf, stem: &str) -> PyResult<Vec<PathBuf>> {
        io::write_image(&self.0, &dir, stem).map_err(to_py)
    }
}

/// `n` readouts with the given settings; `None` marks a
/// discarded measurement.
#[pyfunction]
#[pyo3(signature = (config, detector, n, seed = 0))]
fn run_measurements(
    config: &PyProtocolConfig,
    detector: &PyDetectorModel,
    n: usize,
    seed: u64,
) -> PyResult<Vec<Option<u8>>> {
    let mut rng = StreamFactory::new(seed).stream(Domain::Measurement, 0);
    (0..n)
        .map(|_| protocol::run_measurement(&config.0, &detector.0, &mut rng).map_err(to_py))
        .collect()
}

/// Box state right before readout, or `None` if an electron was lost.
#[pyfunction]
#[pyo3(signature = (config, detector, seed = 0))]
fn run_chain(config: &PyProtocolConfig, detector: &PyDetectorModel, seed: u64) -> PyResult<Option<PyCpbState>> {
    let mut rng = StreamFactory::new(seed).stream(Domain::Measurement, 0);
    protocol::run_chain(&config.0, &detector.0, &mut rng)
        .map(|s| s.map(PyCpbState))
        .map_err(to_py)
}

/// `arcsin(2·mean(bits) − 1)/k`.
#[pyfunction]
fn estimate_phase(bits: Vec<u8>, k: u32) -> PyResult<f64> {
    protocol::estimate_phase(&bits, k).map_err(to_py)
}

/// Raster scan with the CPB protocol; returns the frequency image.
#[pyfunction]
#[pyo3(signature = (phase_map, k = 9, dose = 180.0, seed = 0, analytic = false, step = None, sigma0 = 1.5, sigma1 = 0.3, n_pixels = 64))]
#[allow(clippy::too_many_arguments)]
fn simulate_proposed(
    py: Python<'_>,
    phase_map: &PyPhaseMap,
    k: u32,
    dose: f64,
    seed: u64,
    analytic: bool,
    step: Option<f64>,
    sigma0: f64,
    sigma1: f64,
    n_pixels: usize,
) -> PyResult<PyImage> {
    let map = &phase_map.0;
    let streams = StreamFactory::new(seed);
    let beam = imaging::BeamProfile::new(sigma0, sigma1, (0.0, 0.0)).map_err(to_py)?;
    let plan = imaging::ScanPlan::raster(map, step.unwrap_or(map.pixel_size), dose, k).map_err(to_py)?;
    let det = cpbscope::DetectorModel::build(n_pixels, 0.0, &mut streams.stream(Domain::Detector, 0)).map_err(to_py)?;
    let cfg = protocol::ProtocolConfig { k, ..protocol::ProtocolConfig::default() };
    let mode = if analytic { SamplingMode::Analytic } else { SamplingMode::Sampled };
    let run = py
        .detach(|| imaging::simulate_proposed(map, &beam, &plan, &cfg, &det, &streams, mode))
        .map_err(to_py)?;
    Ok(PyImage(run.image))
}

/// Poisson counts of idealized in-focus phase contrast.
#[pyfunction]
#[pyo3(signature = (phase_map, dose = 180.0, seed = 0))]
fn simulate_baseline(py: Python<'_>, phase_map: &PyPhaseMap, dose: f64, seed: u64) -> PyResult<PyImage> {
    let streams = StreamFactory::new(seed);
    py.detach(|| imaging::simulate_baseline(&phase_map.0, dose, &streams))
        .map(PyImage)
        .map_err(to_py)
}

/// Device feasibility report: `(values, flags, ok)`. `overrides` sets
/// numeric device fields by name; `planck` is `"h"` or `"hbar"`.
#[pyfunction]
#[pyo3(signature = (overrides = None, planck = "h"))]
fn feasibility_report(
    overrides: Option<HashMap<String, f64>>,
    planck: &str,
) -> PyResult<(HashMap<String, f64>, HashMap<String, bool>, bool)> {
    let mut p = DeviceParams::default();
    p.planck = match planck {
        "h" => feas::PlanckConvention::Full,
        "hbar" => feas::PlanckConvention::Reduced,
        other => return Err(PyValueError::new_err(format!("planck must be `h` or `hbar`, got `{other}`"))),
    };
    for (name, v) in overrides.unwrap_or_default() {
        let slot = match name.as_str() {
            "c_sigma" => &mut p.c_sigma,
            "c_g" => &mut p.c_g,
            "v_g" => &mut p.v_g,
            "e_j" => &mut p.e_j,
            "temperature" => &mut p.temperature,
            "e_mirror" => &mut p.e_mirror,
            "l_cpb" => &mut p.l_cpb,
            "delta_e" => &mut p.delta_e,
            "path_length" => &mut p.path_length,
            "electron_speed" => &mut p.electron_speed,
            "imaging_energy" => &mut p.imaging_energy,
            "beam_angle_beta" => &mut p.beam_angle_beta,
            "magnification" => &mut p.magnification,
            "defocus_d" => &mut p.defocus_d,
            "pulse_rate" => &mut p.pulse_rate,
            "qubit_lifetime" => &mut p.qubit_lifetime,
            "k" => {
                p.k = v as u32;
                continue;
            }
            "interaction_time" => {
                p.interaction_time = Some(v);
                continue;
            }
            _ => return Err(PyValueError::new_err(format!("unknown device parameter `{name}`"))),
        };
        *slot = v;
    }
    let r = feas::feasibility_report(&p).map_err(to_py)?;
    let ok = r.ok();
    let values = r.values.iter().map(|v| (v.name.to_string(), v.value)).collect();
    let flags = r.flags.iter().map(|(n, f)| (n.to_string(), *f)).collect();
    Ok((values, flags, ok))
}

/// `(γ/α²)^{1/5}`, nm.
#[pyfunction]
#[pyo3(signature = (alpha = 10e-3, gamma = 1e-3))]
fn sql_resolution(alpha: f64, gamma: f64) -> PyResult<f64> {
    let c = SpecimenModelConstants::new(alpha, gamma).map_err(to_py)?;
    Ok(dose::sql_resolution(&c))
}

/// `(γ/(kα²))^{1/5}`, nm.
#[pyfunction]
#[pyo3(signature = (k, alpha = 10e-3, gamma = 1e-3))]
fn entangled_resolution(k: f64, alpha: f64, gamma: f64) -> PyResult<f64> {
    let c = SpecimenModelConstants::new(alpha, gamma).map_err(to_py)?;
    dose::entangled_resolution(&c, k).map_err(to_py)
}

/// `(resolution_nm, k_required)` at the Heisenberg bound.
#[pyfunction]
#[pyo3(signature = (alpha = 10e-3, gamma = 1e-3))]
fn heisenberg_bound(alpha: f64, gamma: f64) -> PyResult<(f64, f64)> {
    let c = SpecimenModelConstants::new(alpha, gamma).map_err(to_py)?;
    let b = dose::heisenberg_bound_resolution(&c);
    Ok((b.resolution, b.k_required))
}

/// Estimator spread versus `k` at a fixed electron budget. Returns
/// `(rows, slope)` with rows `(k, measurements, mean, std, predicted)`.
#[pyfunction]
#[pyo3(signature = (ks = vec![1, 2, 4, 8, 16], budget = 4096, replicates = 200, delta_theta = 0.01, seed = 0))]
#[allow(clippy::type_complexity)]
fn scaling_sweep(
    py: Python<'_>,
    ks: Vec<u32>,
    budget: u64,
    replicates: u32,
    delta_theta: f64,
    seed: u64,
) -> PyResult<(Vec<(u32, u64, f64, f64, f64)>, Option<f64>)> {
    let streams = StreamFactory::new(seed);
    let det = cpbscope::DetectorModel::build(64, 0.0, &mut streams.stream(Domain::Detector, 0)).map_err(to_py)?;
    let cfg = ScalingConfig {
        ks,
        budget,
        replicates,
        protocol: protocol::ProtocolConfig::elastic(1, delta_theta),
    };
    let r = py.detach(|| scaling::scaling_sweep(&cfg, &det, &streams)).map_err(to_py)?;
    let rows = r
        .points
        .iter()
        .map(|p| (p.k, p.measurements, p.mean_estimate, p.std_estimate, p.predicted))
        .collect();
    Ok((rows, r.fit.map(|f| f.slope)))
}

#[pymodule(name = "cpbscope")]
fn cpbscope_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCpbState>()?;
    m.add_class::<PyProtocolConfig>()?;
    m.add_class::<PyDetectorModel>()?;
    m.add_class::<PyPhaseMap>()?;
    m.add_class::<PyImage>()?;
    m.add_function(wrap_pyfunction!(run_measurements, m)?)?;
    m.add_function(wrap_pyfunction!(run_chain, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_phase, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_proposed, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(feasibility_report, m)?)?;
    m.add_function(wrap_pyfunction!(sql_resolution, m)?)?;
    m.add_function(wrap_pyfunction!(entangled_resolution, m)?)?;
    m.add_function(wrap_pyfunction!(heisenberg_bound, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_sweep, m)?)?;
    Ok(())
}
