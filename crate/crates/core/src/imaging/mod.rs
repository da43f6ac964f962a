//! Specimen phase maps, raster-scanned imaging and the conventional
//! in-focus phase contrast baseline.
//!
//! Grids are row-major with the origin at the top-left pixel. Pixel `(i, j)`
//! covers `[i·p, (i+1)·p) × [j·p, (j+1)·p)` nm, so its center sits at
//! `((i + ½)p, (j + ½)p)`.

pub mod filter;
pub mod io;
pub mod scan;
pub mod specimen;

pub use scan::{
    effective_delta_theta, simulate_baseline, simulate_proposed, BeamProfile, ProposedRun, SamplingMode, ScanPlan,
};
pub use specimen::{synth_specimen, SpecimenKind, SynthParams};

use crate::error::{invalid, Result};

/// Reference scenario filter widths, nm.
pub const DEFAULT_SIGMA_FINE: f64 = 0.3;
pub const DEFAULT_SIGMA_COARSE: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SpecimenPhaseMap {
    pub width: usize,
    pub height: usize,
    /// nm.
    pub pixel_size: f64,
    /// Phase shift per pixel, rad.
    pub theta: Vec<f64>,
}

impl SpecimenPhaseMap {
    pub fn new(width: usize, height: usize, pixel_size: f64, theta: Vec<f64>) -> Result<Self> {
        let map = Self {
            width,
            height,
            pixel_size,
            theta,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn flat(width: usize, height: usize, pixel_size: f64, value: f64) -> Result<Self> {
        Self::new(width, height, pixel_size, vec![value; width * height])
    }

    pub fn validate(&self) -> Result<()> {
        check_grid(self.width, self.height, self.pixel_size, self.theta.len())?;
        if let Some(bad) = self.theta.iter().position(|t| !t.is_finite()) {
            return Err(invalid("theta", format!("non-finite value at index {bad}")));
        }
        Ok(())
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.theta[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.theta.iter().sum::<f64>() / self.theta.len() as f64
    }

    /// Physical extent, nm.
    pub fn extent(&self) -> (f64, f64) {
        (self.width as f64 * self.pixel_size, self.height as f64 * self.pixel_size)
    }

    pub fn gaussian_filter(&self, sigma_nm: f64) -> Result<Self> {
        check_sigma(sigma_nm)?;
        Ok(Self {
            theta: filter::gaussian_blur(&self.theta, self.width, self.height, sigma_nm / self.pixel_size),
            ..self.clone()
        })
    }

    fn as_image(&self) -> ImageResult {
        ImageResult {
            width: self.width,
            height: self.height,
            pixel_size: self.pixel_size,
            values: self.theta.clone(),
            kind: ImageKind::PhaseTarget,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageKind {
    /// Frequency of reading `|1⟩_b`, in `[0, 1]`.
    CpbFrequency,
    /// Detected electrons per pixel.
    ElectronCount,
    /// Infinite-dose difference-of-Gaussians phase map, rad.
    PhaseTarget,
    /// Difference-of-Gaussians of a recorded image.
    DogFiltered,
}

impl ImageKind {
    pub fn name(self) -> &'static str {
        match self {
            ImageKind::CpbFrequency => "cpb_frequency",
            ImageKind::ElectronCount => "electron_count",
            ImageKind::PhaseTarget => "phase_target",
            ImageKind::DogFiltered => "dog_filtered",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageResult {
    pub width: usize,
    pub height: usize,
    /// nm.
    pub pixel_size: f64,
    pub values: Vec<f64>,
    pub kind: ImageKind,
}

impl ImageResult {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Smoothed copy; the kind is unchanged.
    pub fn gaussian_filter(&self, sigma_nm: f64) -> Result<Self> {
        check_sigma(sigma_nm)?;
        Ok(Self {
            values: filter::gaussian_blur(&self.values, self.width, self.height, sigma_nm / self.pixel_size),
            ..self.clone()
        })
    }
}

fn check_grid(width: usize, height: usize, pixel_size: f64, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(invalid("dimensions", "width and height must be positive"));
    }
    if !(pixel_size > 0.0 && pixel_size.is_finite()) {
        return Err(invalid("pixel_size", "must be positive"));
    }
    if len != width * height {
        return Err(invalid("values", format!("expected {} values, got {len}", width * height)));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma >= 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(invalid("sigma", format!("{sigma} must be finite and non-negative")))
    }
}

fn dog(img: &ImageResult, sigma_fine: f64, sigma_coarse: f64, kind: ImageKind) -> Result<ImageResult> {
    check_sigma(sigma_fine)?;
    check_sigma(sigma_coarse)?;
    if sigma_fine >= sigma_coarse {
        return Err(invalid("sigma_fine", "must be smaller than sigma_coarse"));
    }
    let values = filter::difference_of_gaussians(
        &img.values,
        img.width,
        img.height,
        sigma_fine / img.pixel_size,
        sigma_coarse / img.pixel_size,
    );
    Ok(ImageResult {
        values,
        kind,
        ..img.clone()
    })
}

/// Infinite-dose image of the proposed method: fine minus coarse smoothing.
pub fn dog_target(map: &SpecimenPhaseMap, sigma_fine: f64, sigma_coarse: f64) -> Result<ImageResult> {
    dog(&map.as_image(), sigma_fine, sigma_coarse, ImageKind::PhaseTarget)
}

/// High-resolution part of a recorded image, by the same filter as [`dog_target`].
pub fn extract_high_res(img: &ImageResult, sigma_fine: f64, sigma_coarse: f64) -> Result<ImageResult> {
    dog(img, sigma_fine, sigma_coarse, ImageKind::DogFiltered)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_map_survives_filtering() {
        let m = SpecimenPhaseMap::flat(20, 13, 0.3, 0.42).unwrap();
        for s in [0.0, 0.3, 1.5, 4.0] {
            let f = m.gaussian_filter(s).unwrap();
            assert!(f.theta.iter().all(|v| (v - 0.42).abs() < 1e-14));
        }
        let d = dog_target(&m, 0.3, 1.5).unwrap();
        assert!(d.values.iter().all(|v| v.abs() < 1e-14));
        assert_eq!(d.kind, ImageKind::PhaseTarget);
    }

    #[test]
    fn rejects_bad_sigmas() {
        let m = SpecimenPhaseMap::flat(8, 8, 0.3, 0.0).unwrap();
        assert!(m.gaussian_filter(-0.1).is_err());
        assert!(dog_target(&m, 1.5, 0.3).is_err());
        assert!(dog_target(&m, 0.3, 0.3).is_err());
    }

    #[test]
    fn rejects_bad_maps() {
        assert!(SpecimenPhaseMap::new(0, 4, 0.3, vec![]).is_err());
        assert!(SpecimenPhaseMap::new(2, 2, 0.0, vec![0.0; 4]).is_err());
        assert!(SpecimenPhaseMap::new(2, 2, 0.3, vec![0.0; 3]).is_err());
        assert!(SpecimenPhaseMap::new(2, 2, 0.3, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn extract_high_res_shares_the_filter() {
        let m = SpecimenPhaseMap::new(16, 16, 0.3, (0..256).map(|i| ((i * 37) % 11) as f64 * 0.01).collect()).unwrap();
        let a = dog_target(&m, 0.3, 1.5).unwrap();
        let b = extract_high_res(&m.as_image(), 0.3, 1.5).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(b.kind, ImageKind::DogFiltered);
        let flat = ImageResult { values: vec![3.0; 256], kind: ImageKind::ElectronCount, ..b.clone() };
        assert!(extract_high_res(&flat, 0.3, 1.5).unwrap().values.iter().all(|v| v.abs() < 1e-13));
    }
}
