//! Synthetic weak-phase specimens.

use rand::Rng;

use super::{filter, SpecimenPhaseMap};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpecimenKind {
    /// Flat-topped disks of height `amplitude`. One disk is centered; more are
    /// placed at random. Overlaps take the maximum.
    #[default]
    Disks,
    /// Vertical line grating: bars of width `radius`, period `2 · radius`.
    Bars,
    /// Smooth particle envelope of radius `radius` decorated with `count`
    /// sub-nanometer Gaussian blobs, rescaled so the peak equals `amplitude`.
    BlobNoise,
}

impl SpecimenKind {
    pub fn name(self) -> &'static str {
        match self {
            SpecimenKind::Disks => "disks",
            SpecimenKind::Bars => "bars",
            SpecimenKind::BlobNoise => "blob-noise",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "disks" => Some(SpecimenKind::Disks),
            "bars" => Some(SpecimenKind::Bars),
            "blob-noise" | "blob_noise" | "blobs" => Some(SpecimenKind::BlobNoise),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub width: usize,
    pub height: usize,
    /// nm.
    pub pixel_size: f64,
    /// Peak phase, rad.
    pub amplitude: f64,
    /// Feature size, nm; see [`SpecimenKind`].
    pub radius: f64,
    /// Number of disks or blobs.
    pub count: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            width: 100,
            height: 100,
            pixel_size: 0.3,
            amplitude: 0.2,
            radius: 3.0,
            count: 1,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(invalid("dimensions", "width and height must be positive"));
        }
        if !(self.pixel_size > 0.0 && self.pixel_size.is_finite()) {
            return Err(invalid("pixel_size", "must be positive"));
        }
        if !self.amplitude.is_finite() {
            return Err(invalid("amplitude", "must be finite"));
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(invalid("radius", "must be non-negative"));
        }
        Ok(())
    }

    fn center(&self, x: usize, y: usize) -> (f64, f64) {
        ((x as f64 + 0.5) * self.pixel_size, (y as f64 + 0.5) * self.pixel_size)
    }
}

pub fn synth_specimen<R: Rng + ?Sized>(kind: SpecimenKind, params: &SynthParams, rng: &mut R) -> Result<SpecimenPhaseMap> {
    params.validate()?;
    let p = params;
    let (ex, ey) = (p.width as f64 * p.pixel_size, p.height as f64 * p.pixel_size);
    let mut theta = vec![0.0; p.width * p.height];
    match kind {
        SpecimenKind::Disks => {
            if p.radius > 0.0 && p.count > 0 {
                let centers: Vec<(f64, f64)> = if p.count == 1 {
                    vec![(ex / 2.0, ey / 2.0)]
                } else {
                    (0..p.count).map(|_| (rng.random::<f64>() * ex, rng.random::<f64>() * ey)).collect()
                };
                for y in 0..p.height {
                    for x in 0..p.width {
                        let (px, py) = p.center(x, y);
                        if centers.iter().any(|c| (px - c.0).hypot(py - c.1) < p.radius) {
                            theta[y * p.width + x] = p.amplitude;
                        }
                    }
                }
            }
        }
        SpecimenKind::Bars => {
            if p.radius > 0.0 {
                for y in 0..p.height {
                    for x in 0..p.width {
                        let px = p.center(x, y).0;
                        if (px / p.radius).floor() as i64 % 2 == 0 {
                            theta[y * p.width + x] = p.amplitude;
                        }
                    }
                }
            }
        }
        SpecimenKind::BlobNoise => {
            let (cx, cy) = (ex / 2.0, ey / 2.0);
            let mut envelope = vec![0.0; theta.len()];
            for y in 0..p.height {
                for x in 0..p.width {
                    let (px, py) = p.center(x, y);
                    if (px - cx).hypot(py - cy) < p.radius {
                        envelope[y * p.width + x] = 0.5;
                    }
                }
            }
            // Soften the particle edge so the envelope carries low frequencies only.
            theta = filter::gaussian_blur(&envelope, p.width, p.height, 1.0 / p.pixel_size);
            for _ in 0..p.count {
                let r = p.radius * rng.random::<f64>().sqrt();
                let phi = rng.random::<f64>() * std::f64::consts::TAU;
                let (bx, by) = (cx + r * phi.cos(), cy + r * phi.sin());
                let sigma = 0.3 + 0.3 * rng.random::<f64>();
                let height = 0.15 + 0.35 * rng.random::<f64>();
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let reach = 4.0 * sigma;
                for y in 0..p.height {
                    for x in 0..p.width {
                        let (px, py) = p.center(x, y);
                        let d2 = (px - bx).powi(2) + (py - by).powi(2);
                        if d2 <= reach * reach {
                            theta[y * p.width + x] += sign * height * (-d2 / (2.0 * sigma * sigma)).exp();
                        }
                    }
                }
            }
            let peak = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if peak > 0.0 {
                theta.iter_mut().for_each(|v| *v *= p.amplitude / peak);
            }
        }
    }
    SpecimenPhaseMap::new(p.width, p.height, p.pixel_size, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(5)
    }

    #[test]
    fn zero_radius_disks_are_flat() {
        let p = SynthParams { radius: 0.0, count: 4, ..Default::default() };
        let m = synth_specimen(SpecimenKind::Disks, &p, &mut rng()).unwrap();
        assert!(m.theta.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn single_disk() {
        let p = SynthParams::default();
        let m = synth_specimen(SpecimenKind::Disks, &p, &mut rng()).unwrap();
        let max = m.theta.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(max, 0.2);
        assert!(m.theta.iter().all(|&t| t == 0.0 || t == 0.2));
        assert_eq!(m.get(50, 50), 0.2);
        assert_eq!(m.get(0, 0), 0.0);
        // Area ≈ π r² in pixel units.
        let n = m.theta.iter().filter(|&&t| t > 0.0).count() as f64;
        let expect = std::f64::consts::PI * 100.0;
        assert!((n - expect).abs() / expect < 0.05, "{n}");
    }

    #[test]
    fn bars_alternate() {
        let p = SynthParams { width: 20, height: 2, pixel_size: 0.5, radius: 1.0, ..Default::default() };
        let m = synth_specimen(SpecimenKind::Bars, &p, &mut rng()).unwrap();
        let row: Vec<f64> = (0..8).map(|x| m.get(x, 1)).collect();
        assert_eq!(row, vec![0.2, 0.2, 0.0, 0.0, 0.2, 0.2, 0.0, 0.0]);
    }

    #[test]
    fn blob_noise_is_seeded() {
        let p = SynthParams { radius: 10.0, count: 40, ..Default::default() };
        let a = synth_specimen(SpecimenKind::BlobNoise, &p, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = synth_specimen(SpecimenKind::BlobNoise, &p, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let c = synth_specimen(SpecimenKind::BlobNoise, &p, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let peak = a.theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - 0.2).abs() < 1e-12);
    }

    #[test]
    fn invalid_dimensions() {
        let p = SynthParams { width: 0, ..Default::default() };
        assert!(synth_specimen(SpecimenKind::Disks, &p, &mut rng()).is_err());
        let p = SynthParams { radius: -1.0, ..Default::default() };
        assert!(synth_specimen(SpecimenKind::Bars, &p, &mut rng()).is_err());
    }
}
