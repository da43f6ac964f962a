//! Area detector on the diffraction plane and the "measurement by the
//! specimen" that inelastic scattering performs.
//!
//! The two electron branches expand over the detector pixels as
//! `|0⟩ = Σ a_j |j⟩_d` and `|1⟩ = Σ b_j |j⟩_d`. Detecting the electron at pixel
//! `j` leaves the box in `(a_j c0 |0⟩_b + b_j c1 |1⟩_b)` up to normalization.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::qubit::CpbState;

/// Default inelastic scattering angle spread, rad.
pub const DEFAULT_INELASTIC_ANGLE: f64 = 1e-3;

/// Joint box/electron state `c0 |0⟩_b|0⟩ + c1 |1⟩_b|1⟩` produced by the mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entangled {
    pub c0: Complex64,
    pub c1: Complex64,
}

impl Entangled {
    /// Mirror reflection `|0⟩_b|i⟩ → |0⟩_b|0⟩`, `|1⟩_b|i⟩ → |1⟩_b|1⟩`.
    pub fn reflect(cpb: &CpbState) -> Self {
        Self {
            c0: cpb.amp0,
            c1: cpb.amp1,
        }
    }

    /// Specimen transmission: the `|1⟩` branch picks up `e^{iΔθ}` relative to `|0⟩`.
    pub fn transmit(self, delta_theta: f64) -> Self {
        Self {
            c0: self.c0,
            c1: self.c1 * Complex64::from_polar(1.0, delta_theta),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c0.norm_sqr() + self.c1.norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel {
    mag_a: Vec<f64>,
    mag_b: Vec<f64>,
    phase_a: Vec<f64>,
    beta: Vec<f64>,
    similarity_violation: f64,
    cdf_a: Vec<f64>,
    cdf_b: Vec<f64>,
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w / total;
            acc
        })
        .collect();
    // Guard the tail against rounding so every u ∈ [0, 1) lands on a pixel
    // with nonzero weight.
    if let Some(last) = weights.iter().rposition(|&w| w > 0.0) {
        for v in &mut cdf[last..] {
            *v = f64::INFINITY;
        }
    }
    cdf
}

fn sample_cdf(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

impl DetectorModel {
    /// Random detector with a uniform intensity profile `|a_j| = 1/√n`, random
    /// optical phases, `β_j ~ U[0, 2π)` and `|b_j| ∝ |a_j|(1 + η z_j)`.
    pub fn build<R: Rng + ?Sized>(n_pixels: usize, eta: f64, rng: &mut R) -> Result<Self> {
        if n_pixels < 2 {
            return Err(invalid("n_pixels", "detector needs at least two pixels"));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(invalid("eta", "must be finite and non-negative"));
        }
        let mag = (n_pixels as f64).sqrt().recip();
        let mag_a = vec![mag; n_pixels];
        let mut phase_a = Vec::with_capacity(n_pixels);
        let mut beta = Vec::with_capacity(n_pixels);
        let mut mag_b = Vec::with_capacity(n_pixels);
        for _ in 0..n_pixels {
            phase_a.push(rng.random::<f64>() * TAU);
            beta.push(rng.random::<f64>() * TAU);
            let z: f64 = rng.sample(StandardNormal);
            mag_b.push(mag * (1.0 + eta * z));
        }
        if eta == 0.0 {
            mag_b.copy_from_slice(&mag_a);
        } else {
            let norm = mag_b.iter().map(|m| m * m).sum::<f64>().sqrt();
            for m in &mut mag_b {
                *m /= norm;
            }
        }
        Ok(Self::assemble(mag_a, mag_b, phase_a, beta, eta))
    }

    /// Detector from explicit coefficient sets; both must be normalized.
    pub fn from_coefficients(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(invalid("coefficients", "a and b differ in length"));
        }
        if a.len() < 2 {
            return Err(invalid("n_pixels", "detector needs at least two pixels"));
        }
        for (name, set) in [("a", a), ("b", b)] {
            let total: f64 = set.iter().map(|z| z.norm_sqr()).sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(invalid("coefficients", format!("Σ|{name}_j|² = {total}")));
            }
        }
        let mag_a: Vec<f64> = a.iter().map(|z| z.norm()).collect();
        let mag_b: Vec<f64> = b.iter().map(|z| z.norm()).collect();
        let phase_a: Vec<f64> = a.iter().map(|z| z.arg()).collect();
        let beta: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(za, zb)| (zb * za.conj()).arg())
            .collect();
        let eta = mag_a
            .iter()
            .zip(&mag_b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        Ok(Self::assemble(mag_a, mag_b, phase_a, beta, eta))
    }

    fn assemble(mag_a: Vec<f64>, mag_b: Vec<f64>, phase_a: Vec<f64>, beta: Vec<f64>, eta: f64) -> Self {
        let wa: Vec<f64> = mag_a.iter().map(|m| m * m).collect();
        let wb: Vec<f64> = mag_b.iter().map(|m| m * m).collect();
        Self {
            cdf_a: cumulative(&wa),
            cdf_b: cumulative(&wb),
            mag_a,
            mag_b,
            phase_a,
            beta,
            similarity_violation: eta,
        }
    }

    pub fn n_pixels(&self) -> usize {
        self.mag_a.len()
    }

    pub fn similarity_violation(&self) -> f64 {
        self.similarity_violation
    }

    pub fn amp_a(&self, j: usize) -> Complex64 {
        Complex64::from_polar(self.mag_a[j], self.phase_a[j])
    }

    pub fn amp_b(&self, j: usize) -> Complex64 {
        Complex64::from_polar(self.mag_b[j], self.phase_a[j] + self.beta[j])
    }

    pub fn mag_a(&self) -> &[f64] {
        &self.mag_a
    }

    pub fn mag_b(&self) -> &[f64] {
        &self.mag_b
    }

    /// `β_j = arg(b_j / a_j)`, known to the experimenter from the optics.
    pub fn beta(&self, j: usize) -> f64 {
        self.beta[j]
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }

    /// Same magnitudes, different phase map.
    pub fn with_betas(&self, beta: Vec<f64>) -> Result<Self> {
        if beta.len() != self.n_pixels() {
            return Err(invalid("beta", "length must equal n_pixels"));
        }
        Ok(Self {
            beta,
            ..self.clone()
        })
    }

    /// Pixel detection probability `|a_j c0|² + |b_j c1|²`.
    pub fn pixel_probability(&self, pair: &Entangled, j: usize) -> f64 {
        self.mag_a[j].powi(2) * pair.c0.norm_sqr() + self.mag_b[j].powi(2) * pair.c1.norm_sqr()
    }

    /// Samples the detection pixel and returns the uncorrected box state left behind.
    pub fn project_elastic<R: Rng + ?Sized>(&self, pair: &Entangled, rng: &mut R) -> (usize, CpbState) {
        // Mixture sampling: branch by |c|², then pixel by that branch's intensity map.
        let branch_u: f64 = rng.random();
        let pixel_u: f64 = rng.random();
        let p0 = pair.c0.norm_sqr() / pair.norm_sqr();
        let j = if branch_u < p0 {
            sample_cdf(&self.cdf_a, pixel_u)
        } else {
            sample_cdf(&self.cdf_b, pixel_u)
        };
        (j, self.collapse_on_pixel(pair, j))
    }

    /// Box state after detection at pixel `j`, normalized.
    pub fn collapse_on_pixel(&self, pair: &Entangled, j: usize) -> CpbState {
        let amp0 = self.amp_a(j) * pair.c0;
        let amp1 = self.amp_b(j) * pair.c1;
        let n = (amp0.norm_sqr() + amp1.norm_sqr()).sqrt();
        CpbState::from_raw(amp0 / n, amp1 / n)
    }
}

/// An inelastic event under the delocalization hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InelasticEvent {
    pub xi_true: f64,
    pub xi_reported: f64,
    pub scatter_angle: f64,
}

/// Projects the electron onto `|ξ⟩ = (|0⟩ + e^{iξ}|1⟩)/√2` with `ξ ~ U[0, 2π)`,
/// leaving the box in `c0|0⟩_b + c1 e^{−iξ}|1⟩_b`. The reported `ξ` carries
/// Gaussian error of std `xi_precision`.
pub fn project_inelastic<R: Rng + ?Sized>(
    pair: &Entangled,
    xi_precision: f64,
    delta_theta_inel: f64,
    rng: &mut R,
) -> (InelasticEvent, CpbState) {
    let xi = rng.random::<f64>() * TAU;
    let noise: f64 = rng.sample(StandardNormal);
    let angle: f64 = rng.sample(StandardNormal);
    let event = InelasticEvent {
        xi_true: xi,
        xi_reported: xi + xi_precision * noise,
        scatter_angle: delta_theta_inel * angle,
    };
    let amp1 = pair.c1 * Complex64::from_polar(1.0, -xi);
    let n = (pair.c0.norm_sqr() + amp1.norm_sqr()).sqrt();
    (event, CpbState::from_raw(pair.c0 / n, amp1 / n))
}

/// Worst case: the electron localizes in one region, collapsing the box.
pub fn localized_projection<R: Rng + ?Sized>(pair: &Entangled, rng: &mut R) -> (u8, CpbState) {
    let p1 = pair.c1.norm_sqr() / pair.norm_sqr();
    if rng.random::<f64>() < p1 {
        (1, CpbState::one())
    } else {
        (0, CpbState::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Domain, StreamFactory};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rng(i: u64) -> crate::rng::SimRng {
        StreamFactory::new(9).stream(Domain::Custom(1), i)
    }

    #[test]
    fn exact_similarity_when_eta_zero() {
        let d = DetectorModel::build(1024, 0.0, &mut rng(0)).unwrap();
        let worst = (0..d.n_pixels())
            .map(|j| (d.mag_b()[j] - d.mag_a()[j]).abs())
            .fold(0.0, f64::max);
        assert_eq!(worst, 0.0);
    }

    #[test]
    fn two_pixel_profile_is_uniform() {
        let d = DetectorModel::build(2, 0.0, &mut rng(1)).unwrap();
        for j in 0..2 {
            assert!((d.amp_a(j).norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        }
    }

    #[test]
    fn violated_similarity_stays_normalized() {
        let d = DetectorModel::build(1024, 0.1, &mut rng(2)).unwrap();
        let sa: f64 = d.mag_a().iter().map(|m| m * m).sum();
        let sb: f64 = d.mag_b().iter().map(|m| m * m).sum();
        assert!((sa - 1.0).abs() < 1e-12);
        assert!((sb - 1.0).abs() < 1e-12);
        assert!(d.mag_a().iter().zip(d.mag_b()).any(|(a, b)| a != b));
    }

    #[test]
    fn too_few_pixels() {
        assert!(DetectorModel::build(1, 0.0, &mut rng(3)).is_err());
        assert!(DetectorModel::build(8, -0.1, &mut rng(3)).is_err());
    }

    #[test]
    fn unentangled_branch_is_untouched() {
        let d = DetectorModel::build(64, 0.0, &mut rng(4)).unwrap();
        let pair = Entangled { c0: c(1.0, 0.0), c1: c(0.0, 0.0) };
        let mut r = rng(5);
        for _ in 0..100 {
            let (_, post) = d.project_elastic(&pair, &mut r);
            assert!(post.canonical_equal(&CpbState::zero(), 1e-12));
        }
    }

    #[test]
    fn elastic_post_state_carries_beta() {
        let d = DetectorModel::build(256, 0.0, &mut rng(6)).unwrap();
        let pair = Entangled {
            c0: Complex64::from_polar(FRAC_1_SQRT_2, 0.3),
            c1: Complex64::from_polar(FRAC_1_SQRT_2, 1.1),
        };
        let mut r = rng(7);
        for _ in 0..200 {
            let (j, post) = d.project_elastic(&pair, &mut r);
            let expected = CpbState::equator(1.1 - 0.3 + d.beta(j));
            assert!(post.canonical_equal(&expected, 1e-12));
        }
    }

    #[test]
    fn two_pixel_enumeration() {
        // Hand enumeration: a = (1/√2, 1/√2), β = (0, π), c0 = c1 = 1/√2.
        let s = FRAC_1_SQRT_2;
        let a = [c(s, 0.0), c(s, 0.0)];
        let b = [c(s, 0.0), c(-s, 0.0)];
        let d = DetectorModel::from_coefficients(&a, &b).unwrap();
        assert!((d.beta(1).abs() - PI).abs() < 1e-15);
        let pair = Entangled { c0: c(s, 0.0), c1: c(s, 0.0) };
        assert!((d.pixel_probability(&pair, 0) - 0.5).abs() < 1e-15);
        assert!((d.pixel_probability(&pair, 1) - 0.5).abs() < 1e-15);
        assert!(d.collapse_on_pixel(&pair, 0).canonical_equal(&CpbState::symmetric(), 1e-15));
        assert!(d.collapse_on_pixel(&pair, 1).canonical_equal(&CpbState::antisymmetric(), 1e-15));
    }

    #[test]
    fn from_coefficients_validates() {
        let a = [c(1.0, 0.0), c(0.0, 0.0)];
        let bad = [c(1.0, 0.0), c(1.0, 0.0)];
        assert!(DetectorModel::from_coefficients(&a, &bad).is_err());
        assert!(DetectorModel::from_coefficients(&a[..1], &a[..1]).is_err());
    }

    #[test]
    fn inelastic_examples() {
        let mut r = rng(8);
        let ground = Entangled { c0: c(1.0, 0.0), c1: c(0.0, 0.0) };
        for _ in 0..50 {
            let (_, post) = project_inelastic(&ground, 0.0, DEFAULT_INELASTIC_ANGLE, &mut r);
            assert!(post.canonical_equal(&CpbState::zero(), 1e-12));
        }

        let s = FRAC_1_SQRT_2;
        let pair = Entangled { c0: c(s, 0.0), c1: Complex64::from_polar(s, 0.4) };
        let (event, post) = project_inelastic(&pair, 0.0, DEFAULT_INELASTIC_ANGLE, &mut r);
        assert_eq!(event.xi_reported, event.xi_true);
        assert!(post.canonical_equal(&CpbState::equator(0.4 - event.xi_true), 1e-12));
        let restored = post.phase_shift(event.xi_reported);
        assert!(restored.canonical_equal(&CpbState::equator(0.4), 1e-12));
    }

    #[test]
    fn localized_projection_collapses() {
        let mut r = rng(10);
        let s = FRAC_1_SQRT_2;
        let excited = Entangled { c0: c(0.0, 0.0), c1: c(0.0, 1.0) };
        for _ in 0..50 {
            let (branch, post) = localized_projection(&excited, &mut r);
            assert_eq!(branch, 1);
            assert!(post.canonical_equal(&CpbState::one(), 0.0));
        }
        let pair = Entangled { c0: c(s, 0.0), c1: c(s, 0.0) };
        let mut ones = 0u32;
        let n = 100_000;
        for _ in 0..n {
            let (branch, post) = localized_projection(&pair, &mut r);
            assert_eq!(post.amp0.norm() * post.amp1.norm(), 0.0);
            ones += u32::from(branch);
        }
        let sigma = (0.25 / n as f64).sqrt();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 4.0 * sigma);
    }
}
