//! Raster scanning with the S0/S1 beam pair, and the conventional baseline.

use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::filter::{reflect, TRUNCATION_SIGMAS};
use super::{ImageKind, ImageResult, SpecimenPhaseMap};
use crate::detector::DetectorModel;
use crate::error::{invalid, Error, Result};
use crate::protocol::{ideal_prob_one, run_measurement, ProtocolConfig};
use crate::rng::{Domain, StreamFactory};

/// Gaussian intensity profiles of the large region S0 and the small region S1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamProfile {
    /// S0 std, nm.
    pub sigma0: f64,
    /// S1 std, nm.
    pub sigma1: f64,
    /// S1 center relative to S0 center, nm.
    pub offset: (f64, f64),
}

impl Default for BeamProfile {
    fn default() -> Self {
        Self {
            sigma0: 1.5,
            sigma1: 0.3,
            offset: (0.0, 0.0),
        }
    }
}

impl BeamProfile {
    pub fn new(sigma0: f64, sigma1: f64, offset: (f64, f64)) -> Result<Self> {
        let b = Self { sigma0, sigma1, offset };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma1 > 0.0 && self.sigma1.is_finite()) {
            return Err(invalid("sigma1", "must be positive"));
        }
        if !(self.sigma0 > self.sigma1 && self.sigma0.is_finite()) {
            return Err(invalid("sigma0", "must exceed sigma1"));
        }
        if !(self.offset.0.is_finite() && self.offset.1.is_finite()) {
            return Err(invalid("offset", "must be finite"));
        }
        Ok(())
    }
}

/// Raster of beam positions with the electron budget split into readouts.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPlan {
    /// Beam centers, nm, row-major over an `nx × ny` grid.
    pub positions: Vec<(f64, f64)>,
    pub nx: usize,
    pub ny: usize,
    /// Raster step, nm; also the output pixel size.
    pub step: f64,
    pub k: u32,
    pub measurements_per_position: u32,
    /// Electrons actually sent per position, `k · measurements_per_position`.
    pub electrons_per_position: u64,
    /// `round(dose · step²)` before rounding to whole readouts.
    pub nominal_electrons_per_position: u64,
}

impl ScanPlan {
    /// Raster covering `map` with pixel-centered positions every `step` nm.
    /// `dose` is in electrons/nm².
    pub fn raster(map: &SpecimenPhaseMap, step: f64, dose: f64, k: u32) -> Result<Self> {
        map.validate()?;
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid("step", "must be positive"));
        }
        if !(dose > 0.0 && dose.is_finite()) {
            return Err(invalid("dose", "must be positive"));
        }
        if k == 0 {
            return Err(invalid("k", "must be at least 1"));
        }
        let (ex, ey) = map.extent();
        // Tolerate round-off so that step == pixel_size reproduces the map grid.
        let nx = (ex / step + 1e-9).floor() as usize;
        let ny = (ey / step + 1e-9).floor() as usize;
        if nx == 0 || ny == 0 {
            return Err(invalid("step", "larger than the map"));
        }
        let positions = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| ((i as f64 + 0.5) * step, (j as f64 + 0.5) * step)))
            .collect();
        let nominal = (dose * step * step).round() as u64;
        let m = ((nominal as f64 / k as f64).round() as u32).max(1);
        Ok(Self {
            positions,
            nx,
            ny,
            step,
            k,
            measurements_per_position: m,
            electrons_per_position: k as u64 * m as u64,
            nominal_electrons_per_position: nominal,
        })
    }

    pub fn total_measurements(&self) -> u64 {
        self.positions.len() as u64 * self.measurements_per_position as u64
    }

    pub fn total_electrons(&self) -> u64 {
        self.positions.len() as u64 * self.electrons_per_position
    }

    /// Dose actually delivered, electrons/nm².
    pub fn effective_dose(&self) -> f64 {
        self.electrons_per_position as f64 / (self.step * self.step)
    }
}

/// Unit-sum Gaussian weights along one axis, `(pixel index, weight)`.
fn axis_weights(center: f64, sigma: f64, pixel: f64, n: usize) -> Vec<(usize, f64)> {
    let c = center / pixel - 0.5;
    let s = sigma / pixel;
    // The slack keeps a support edge that lands on a sample, up to round-off,
    // from flipping in or out.
    let reach = TRUNCATION_SIGMAS * s + 1e-9;
    let lo = (c - reach).ceil() as i64;
    let hi = (c + reach).floor() as i64;
    if hi < lo {
        return vec![(reflect(c.round() as i64, n), 1.0)];
    }
    let two_var = 2.0 * s * s;
    let mut w: Vec<(usize, f64)> = (lo..=hi)
        .map(|i| (reflect(i, n), (-(i as f64 - c).powi(2) / two_var).exp()))
        .collect();
    let total: f64 = w.iter().map(|p| p.1).sum();
    w.iter_mut().for_each(|p| p.1 /= total);
    w
}

fn weighted_phase(map: &SpecimenPhaseMap, center: (f64, f64), sigma: f64) -> f64 {
    let wx = axis_weights(center.0, sigma, map.pixel_size, map.width);
    let wy = axis_weights(center.1, sigma, map.pixel_size, map.height);
    wy.iter()
        .map(|&(y, wyv)| {
            let row = &map.theta[y * map.width..(y + 1) * map.width];
            wyv * wx.iter().map(|&(x, wxv)| wxv * row[x]).sum::<f64>()
        })
        .sum()
}

/// Phase of S1 relative to the S0 average, for S0 centered at `center` (nm).
pub fn effective_delta_theta(map: &SpecimenPhaseMap, beam: &BeamProfile, center: (f64, f64)) -> Result<f64> {
    let (ex, ey) = map.extent();
    let inside = |v: f64, e: f64| (0.0..=e).contains(&v);
    if !(inside(center.0, ex) && inside(center.1, ey)) {
        return Err(Error::OutsideMap {
            x: center.0,
            y: center.1,
        });
    }
    let s1 = (center.0 + beam.offset.0, center.1 + beam.offset.1);
    Ok(weighted_phase(map, s1, beam.sigma1) - weighted_phase(map, center, beam.sigma0))
}

/// `Δθ` at every plan position, row-major.
pub fn delta_theta_field(map: &SpecimenPhaseMap, beam: &BeamProfile, plan: &ScanPlan) -> Result<Vec<f64>> {
    beam.validate()?;
    plan.positions
        .par_iter()
        .map(|&c| effective_delta_theta(map, beam, c))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    /// Monte-Carlo readouts through the full protocol.
    #[default]
    Sampled,
    /// Noise-free expectation `[1 + sin kΔθ]/2`.
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProposedRun {
    pub image: ImageResult,
    /// `Δθ` per position, rad.
    pub delta_theta: Vec<f64>,
    pub electrons: u64,
    pub measurements: u64,
    /// Readouts thrown away because an electron was lost.
    pub discarded: u64,
}

/// Scan `map` with the CPB protocol. Position `i` draws from
/// `streams.stream(Domain::Measurement, i)`.
pub fn simulate_proposed(
    map: &SpecimenPhaseMap,
    beam: &BeamProfile,
    plan: &ScanPlan,
    cfg: &ProtocolConfig,
    det: &DetectorModel,
    streams: &StreamFactory,
    mode: SamplingMode,
) -> Result<ProposedRun> {
    cfg.validate()?;
    if cfg.k != plan.k {
        return Err(invalid("k", format!("protocol k = {} but plan k = {}", cfg.k, plan.k)));
    }
    let delta_theta = delta_theta_field(map, beam, plan)?;
    let m = plan.measurements_per_position;
    let per_pos: Vec<(f64, u64)> = match mode {
        SamplingMode::Analytic => delta_theta
            .iter()
            .map(|&d| (ideal_prob_one(cfg.k as f64 * d), 0))
            .collect(),
        SamplingMode::Sampled => delta_theta
            .par_iter()
            .enumerate()
            .map(|(i, &d)| {
                let local = ProtocolConfig { delta_theta: d, ..*cfg };
                let mut rng = streams.stream(Domain::Measurement, i as u64);
                let (mut ones, mut valid) = (0u64, 0u64);
                for _ in 0..m {
                    if let Some(bit) = run_measurement(&local, det, &mut rng)? {
                        ones += bit as u64;
                        valid += 1;
                    }
                }
                let freq = if valid == 0 { 0.5 } else { ones as f64 / valid as f64 };
                Ok((freq, m as u64 - valid))
            })
            .collect::<Result<_>>()?,
    };
    let discarded = per_pos.iter().map(|p| p.1).sum();
    Ok(ProposedRun {
        image: ImageResult {
            width: plan.nx,
            height: plan.ny,
            pixel_size: plan.step,
            values: per_pos.into_iter().map(|p| p.0).collect(),
            kind: ImageKind::CpbFrequency,
        },
        delta_theta,
        electrons: plan.total_electrons(),
        measurements: plan.total_measurements(),
        discarded,
    })
}

/// Idealized in-focus phase contrast: Poisson counts with mean
/// `dose · p² · (1 + 2δθ)`. Pixel `i` draws from `streams.stream(Domain::Baseline, i)`.
pub fn simulate_baseline(map: &SpecimenPhaseMap, dose: f64, streams: &StreamFactory) -> Result<ImageResult> {
    map.validate()?;
    if !(dose > 0.0 && dose.is_finite()) {
        return Err(invalid("dose", "must be positive"));
    }
    let mean = map.mean();
    let per_pixel = dose * map.pixel_size * map.pixel_size;
    for (i, t) in map.theta.iter().enumerate() {
        let value = 1.0 + 2.0 * (t - mean);
        if value < 0.0 {
            return Err(Error::WeakPhaseViolated {
                x: i % map.width,
                y: i / map.width,
                value,
            });
        }
    }
    let values = map
        .theta
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let lambda = per_pixel * (1.0 + 2.0 * (t - mean));
            if lambda <= 0.0 {
                return 0.0;
            }
            let mut rng = streams.stream(Domain::Baseline, i as u64);
            Poisson::new(lambda).expect("positive finite mean").sample(&mut rng)
        })
        .collect();
    Ok(ImageResult {
        width: map.width,
        height: map.height,
        pixel_size: map.pixel_size,
        values,
        kind: ImageKind::ElectronCount,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::dog_target;
    use rand::SeedableRng;

    fn ramp(w: usize, h: usize) -> SpecimenPhaseMap {
        let theta = (0..w * h).map(|i| 0.01 * ((i * 7919) % 23) as f64).collect();
        SpecimenPhaseMap::new(w, h, 0.3, theta).unwrap()
    }

    #[test]
    fn beam_invariants() {
        assert!(BeamProfile::default().validate().is_ok());
        assert!(BeamProfile::new(0.3, 0.3, (0.0, 0.0)).is_err());
        assert!(BeamProfile::new(1.5, 0.0, (0.0, 0.0)).is_err());
        assert!(BeamProfile::new(0.2, 0.3, (0.0, 0.0)).is_err());
    }

    #[test]
    fn reference_dose_accounting() {
        let map = SpecimenPhaseMap::flat(100, 100, 0.3, 0.0).unwrap();
        let p9 = ScanPlan::raster(&map, 0.3, 180.0, 9).unwrap();
        let p18 = ScanPlan::raster(&map, 0.3, 180.0, 18).unwrap();
        assert_eq!((p9.nx, p9.ny), (100, 100));
        assert_eq!(p9.nominal_electrons_per_position, 16);
        assert_eq!(p9.measurements_per_position, 2);
        assert_eq!(p18.measurements_per_position, 1);
        for p in [&p9, &p18] {
            assert_eq!(p.electrons_per_position, p.k as u64 * p.measurements_per_position as u64);
        }
        assert_eq!(p9.total_measurements(), 20_000);
        assert_eq!(p9.positions[0], (0.15, 0.15));
        assert!(ScanPlan::raster(&map, 0.3, 0.0, 9).is_err());
        assert!(ScanPlan::raster(&map, 0.3, 180.0, 0).is_err());
    }

    #[test]
    fn constant_map_has_no_contrast() {
        let map = SpecimenPhaseMap::flat(12, 9, 0.3, 0.7).unwrap();
        let d = effective_delta_theta(&map, &BeamProfile::default(), (1.0, 2.0)).unwrap();
        assert!(d.abs() < 1e-14);
    }

    #[test]
    fn outside_map_is_an_error() {
        let map = SpecimenPhaseMap::flat(10, 10, 0.3, 0.0).unwrap();
        let b = BeamProfile::default();
        assert!(matches!(effective_delta_theta(&map, &b, (-0.1, 1.0)), Err(Error::OutsideMap { .. })));
        assert!(effective_delta_theta(&map, &b, (1.0, 3.01)).is_err());
        assert!(effective_delta_theta(&map, &b, (3.0, 3.0)).is_ok());
    }

    #[test]
    fn matches_dog_at_pixel_centers() {
        let map = ramp(24, 20);
        let target = dog_target(&map, 0.3, 1.5).unwrap();
        let beam = BeamProfile::default();
        for y in 0..20 {
            for x in 0..24 {
                let c = ((x as f64 + 0.5) * 0.3, (y as f64 + 0.5) * 0.3);
                let d = effective_delta_theta(&map, &beam, c).unwrap();
                assert!((d - target.get(x, y)).abs() < 1e-12, "{x} {y} {d} {}", target.get(x, y));
            }
        }
    }

    #[test]
    fn analytic_mode_is_the_probability_law() {
        let map = ramp(16, 16);
        let plan = ScanPlan::raster(&map, 0.3, 180.0, 9).unwrap();
        let det = DetectorModel::build(8, 0.0, &mut rand_chacha::ChaCha8Rng::seed_from_u64(1)).unwrap();
        let cfg = ProtocolConfig::elastic(9, 0.0);
        let run = simulate_proposed(
            &map,
            &BeamProfile::default(),
            &plan,
            &cfg,
            &det,
            &StreamFactory::new(3),
            SamplingMode::Analytic,
        )
        .unwrap();
        let target = dog_target(&map, 0.3, 1.5).unwrap();
        for (v, t) in run.image.values.iter().zip(&target.values) {
            assert!((v - (1.0 + (9.0 * t).sin()) / 2.0).abs() < 1e-12);
        }
        assert_eq!(run.discarded, 0);
    }

    #[test]
    fn mismatched_k_is_rejected() {
        let map = ramp(8, 8);
        let plan = ScanPlan::raster(&map, 0.3, 180.0, 9).unwrap();
        let det = DetectorModel::build(4, 0.0, &mut rand_chacha::ChaCha8Rng::seed_from_u64(1)).unwrap();
        let cfg = ProtocolConfig::elastic(18, 0.0);
        let r = simulate_proposed(&map, &BeamProfile::default(), &plan, &cfg, &det, &StreamFactory::new(0), SamplingMode::Sampled);
        assert!(r.is_err());
    }

    #[test]
    fn baseline_flat_mean() {
        let map = SpecimenPhaseMap::flat(100, 100, 0.3, 0.2).unwrap();
        let img = simulate_baseline(&map, 180.0, &StreamFactory::new(11)).unwrap();
        let lambda = 180.0 * 0.09;
        let sigma_mean = (lambda / 10_000f64).sqrt();
        assert!((img.mean() - lambda).abs() < 4.0 * sigma_mean, "{}", img.mean());
        assert!(img.values.iter().all(|&v| v >= 0.0 && v.fract() == 0.0));
    }

    #[test]
    fn baseline_rejects_strong_phase() {
        let mut theta = vec![0.0; 16];
        theta[5] = -2.0;
        let map = SpecimenPhaseMap::new(4, 4, 0.3, theta).unwrap();
        let err = simulate_baseline(&map, 180.0, &StreamFactory::new(0)).unwrap_err();
        assert!(matches!(err, Error::WeakPhaseViolated { x: 1, y: 1, .. }));
    }
}
