//! Dose-limited resolution scaling laws.
//!
//! The relations here are order-of-magnitude estimates with unity prefactors
//! dropped. Lengths are in nm, phases in rad, doses in electrons/nm².
//!
//! Resolution follows from solving, at a pixel of side `l`:
//!
//! * `Δθ = α l` (phase contrast grows with feature separation),
//! * `l = γ n` (features finer than `γ n` are destroyed by dose `n`),
//! * `N = n l²` electrons cross the pixel,
//! * `Δθ = 1/√(N k)` (precision with `k` electrons per readout).
//!
//! Eliminating `n`, `N` and `Δθ` gives `l⁵ = γ/(k α²)`. With `k = N` the
//! precision becomes `1/N` and `l⁴ = γ/α`; the required `k` is then
//! `N = l³/γ`.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecimenModelConstants {
    /// Phase gradient, rad/nm.
    pub alpha: f64,
    /// Damage constant, nm³.
    pub gamma: f64,
}

impl Default for SpecimenModelConstants {
    fn default() -> Self {
        Self {
            alpha: 10e-3,
            gamma: 1e-3,
        }
    }
}

impl SpecimenModelConstants {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        let c = Self { alpha, gamma };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma", "must be positive"));
        }
        Ok(())
    }
}

/// Shot-noise limited precision `1/(2√N)`.
pub fn sql_precision(n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(invalid("n", "electron count must be positive"));
    }
    Ok(0.5 / n.sqrt())
}

/// Precision `1/√(N k)` with `k` electrons per readout; `1/N` at `k = N`.
///
/// Unlike [`sql_precision`] this carries no factor 1/2, so at `k = 1` the two
/// differ by exactly 2.
pub fn entangled_precision(n: f64, k: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(invalid("n", "electron count must be positive"));
    }
    if !(k >= 1.0) {
        return Err(invalid("k", "must be at least 1"));
    }
    if k > n {
        return Err(invalid("k", format!("k = {k} exceeds the electron count {n}")));
    }
    Ok((n * k).sqrt().recip())
}

/// `(γ/α²)^{1/5}`, nm.
pub fn sql_resolution(c: &SpecimenModelConstants) -> f64 {
    (c.gamma / (c.alpha * c.alpha)).powf(0.2)
}

/// `(γ/(k α²))^{1/5}`, nm.
pub fn entangled_resolution(c: &SpecimenModelConstants, k: f64) -> Result<f64> {
    if !(k >= 1.0) {
        return Err(invalid("k", "must be at least 1"));
    }
    Ok(sql_resolution(c) / k.powf(0.2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergBound {
    /// Resolution `(γ/α)^{1/4}`, nm.
    pub resolution: f64,
    /// Electrons per readout needed to reach it, `l³/γ`.
    pub k_required: f64,
}

pub fn heisenberg_bound_resolution(c: &SpecimenModelConstants) -> HeisenbergBound {
    let l = (c.gamma / c.alpha).powf(0.25);
    HeisenbergBound {
        resolution: l,
        k_required: l.powi(3) / c.gamma,
    }
}

/// Rose criterion `C √N > 5`.
pub fn rose_detectable(contrast: f64, n: f64) -> Result<bool> {
    if !(n > 0.0) {
        return Err(invalid("n", "electron count must be positive"));
    }
    if !(contrast >= 0.0) {
        return Err(invalid("contrast", "must be non-negative"));
    }
    Ok(contrast * n.sqrt() > 5.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sql_precision_examples() {
        assert_eq!(sql_precision(100.0).unwrap(), 0.05);
        assert_eq!(sql_precision(1.0).unwrap(), 0.5);
        let a = sql_precision(37.0).unwrap();
        let b = sql_precision(148.0).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        assert!(sql_precision(0.0).is_err());
        assert!(sql_precision(-3.0).is_err());
    }

    #[test]
    fn entangled_precision_examples() {
        let n = 400.0;
        assert!((entangled_precision(n, 1.0).unwrap() - 2.0 * sql_precision(n).unwrap()).abs() < 1e-15);
        assert!((entangled_precision(100.0, 100.0).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(entangled_precision(64.0, 4.0).unwrap(), 1.0 / 16.0);
        assert!(entangled_precision(10.0, 11.0).is_err());
        assert!(entangled_precision(10.0, 0.5).is_err());
    }

    #[test]
    fn resolution_scaling_laws() {
        let c = SpecimenModelConstants::default();
        let base = sql_resolution(&c);
        let bigger = SpecimenModelConstants { gamma: c.gamma * 32.0, ..c };
        assert!((sql_resolution(&bigger) / base - 2.0).abs() < 1e-12);
        let same = SpecimenModelConstants { alpha: c.alpha * 10f64.sqrt(), gamma: c.gamma * 10.0 };
        assert!((sql_resolution(&same) / base - 1.0).abs() < 1e-12);

        assert!((entangled_resolution(&c, 32.0).unwrap() - base / 2.0).abs() < 1e-12);
        assert_eq!(entangled_resolution(&c, 1.0).unwrap(), base);
        assert!(entangled_resolution(&c, 0.0).is_err());

        let scaled = SpecimenModelConstants { alpha: c.alpha * 16.0, gamma: c.gamma * 16.0 };
        let h0 = heisenberg_bound_resolution(&c).resolution;
        let h1 = heisenberg_bound_resolution(&scaled).resolution;
        assert!((h0 - h1).abs() < 1e-12);
    }

    #[test]
    fn rose_examples() {
        assert!(!rose_detectable(0.5, 100.0).unwrap());
        assert!(rose_detectable(1.0, 26.0).unwrap());
        assert!(rose_detectable(-0.1, 10.0).is_err());
        // Contrast ∝ k at a fixed electron budget: large enough k always wins.
        let n = 1e4;
        let hits: Vec<bool> = [1.0, 2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|k| rose_detectable(0.04 * k, n / k).unwrap())
            .collect();
        assert!(!hits[0]);
        assert!(*hits.last().unwrap());
    }

    #[test]
    fn constants_validation() {
        assert!(SpecimenModelConstants::new(0.0, 1.0).is_err());
        assert!(SpecimenModelConstants::new(1.0, -1.0).is_err());
    }
}
