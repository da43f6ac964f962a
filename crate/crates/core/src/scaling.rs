//! Estimator precision versus `k` at a fixed electron budget.

use rayon::prelude::*;

use crate::detector::DetectorModel;
use crate::dose::entangled_precision;
use crate::error::{invalid, Result};
use crate::protocol::{estimate_from_frequency, run_measurement, ProtocolConfig};
use crate::rng::{Domain, StreamFactory};
use crate::stats::{loglog_fit, mean, std_dev, LinearFit};

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub ks: Vec<u32>,
    /// Electrons per replicate; each `k` gets `budget / k` readouts.
    pub budget: u64,
    pub replicates: u32,
    /// Everything except `k` is taken from here.
    pub protocol: ProtocolConfig,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            ks: vec![1, 2, 4, 8, 16],
            budget: 4096,
            replicates: 200,
            protocol: ProtocolConfig::elastic(1, 0.01),
        }
    }
}

impl ScalingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ks.is_empty() {
            return Err(invalid("ks", "at least one k is required"));
        }
        if self.ks.contains(&0) {
            return Err(invalid("ks", "k must be at least 1"));
        }
        let kmax = *self.ks.iter().max().expect("non-empty");
        if self.budget < kmax as u64 {
            return Err(invalid("budget", format!("{} is smaller than max k = {kmax}", self.budget)));
        }
        if self.replicates < 2 {
            return Err(invalid("replicates", "need at least two"));
        }
        ProtocolConfig { k: kmax, ..self.protocol }.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub k: u32,
    pub measurements: u64,
    pub mean_estimate: f64,
    pub std_estimate: f64,
    /// `1/√(N k)`.
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub points: Vec<ScalingPoint>,
    /// Log-log fit of `std_estimate` against `k`; `None` for a single `k`.
    pub fit: Option<LinearFit>,
}

/// Replicate `r` at `k` draws from `streams.stream(Domain::Scaling, (k << 32) | r)`.
pub fn scaling_sweep(cfg: &ScalingConfig, det: &DetectorModel, streams: &StreamFactory) -> Result<ScalingResult> {
    cfg.validate()?;
    let mut points = Vec::with_capacity(cfg.ks.len());
    for &k in &cfg.ks {
        let proto = ProtocolConfig { k, ..cfg.protocol };
        let m = cfg.budget / k as u64;
        let estimates: Vec<f64> = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = streams.stream(Domain::Scaling, ((k as u64) << 32) | r as u64);
                let (mut ones, mut valid) = (0u64, 0u64);
                for _ in 0..m {
                    if let Some(bit) = run_measurement(&proto, det, &mut rng)? {
                        ones += bit as u64;
                        valid += 1;
                    }
                }
                let freq = if valid == 0 { 0.5 } else { ones as f64 / valid as f64 };
                Ok(estimate_from_frequency(freq, k))
            })
            .collect::<Result<_>>()?;
        let electrons = (m * k as u64) as f64;
        points.push(ScalingPoint {
            k,
            measurements: m,
            mean_estimate: mean(&estimates),
            std_estimate: std_dev(&estimates),
            predicted: entangled_precision(electrons, k as f64)?,
        });
    }
    let fit = (points.len() >= 2).then(|| {
        let ks: Vec<f64> = points.iter().map(|p| p.k as f64).collect();
        let sd: Vec<f64> = points.iter().map(|p| p.std_estimate).collect();
        loglog_fit(&ks, &sd)
    });
    Ok(ScalingResult { points, fit })
}
