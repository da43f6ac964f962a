//! Two-level state of the Cooper-pair box in the charge basis `{|0⟩_b, |1⟩_b}`.
//!
//! States carry an arbitrary global phase. Anything that compares states goes
//! through [`CpbState::canonical_equal`].

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Closure tolerance for 2×2 unitaries in double precision.
pub const NORM_TOLERANCE: f64 = 1e-12;

pub type Matrix2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpbState {
    pub amp0: Complex64,
    pub amp1: Complex64,
}

impl CpbState {
    /// Builds a state from raw amplitudes without normalizing.
    pub const fn from_raw(amp0: Complex64, amp1: Complex64) -> Self {
        Self { amp0, amp1 }
    }

    /// Builds a normalized state from unnormalized amplitudes.
    pub fn normalized(amp0: Complex64, amp1: Complex64) -> Result<Self> {
        let n = (amp0.norm_sqr() + amp1.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(invalid("amplitudes", "zero or non-finite norm"));
        }
        Ok(Self {
            amp0: amp0 / n,
            amp1: amp1 / n,
        })
    }

    /// `|0⟩_b`, the neutral island.
    pub fn zero() -> Self {
        Self::from_raw(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// `|1⟩_b`, one excess Cooper pair.
    pub fn one() -> Self {
        Self::from_raw(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    /// `(|0⟩_b + e^{iφ}|1⟩_b)/√2`.
    pub fn equator(phi: f64) -> Self {
        Self::from_raw(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::from_polar(FRAC_1_SQRT_2, phi),
        )
    }

    /// Symmetric energy eigenstate `|s⟩_b`.
    pub fn symmetric() -> Self {
        Self::equator(0.0)
    }

    /// Antisymmetric energy eigenstate `|a⟩_b`.
    pub fn antisymmetric() -> Self {
        Self::from_raw(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(-FRAC_1_SQRT_2, 0.0),
        )
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub(crate) fn require_normalized(&self, tol: f64) -> Result<()> {
        if self.is_normalized(tol) {
            Ok(())
        } else {
            Err(Error::Unnormalized(self.norm_sqr()))
        }
    }

    /// Probability of reading `|1⟩_b` in a charge measurement.
    pub fn prob_one(&self) -> f64 {
        self.amp1.norm_sqr()
    }

    /// `arg(amp1/amp0)`, the phase accumulated on the charged branch.
    pub fn relative_phase(&self) -> f64 {
        (self.amp1 * self.amp0.conj()).arg()
    }

    /// Removes the global phase: `amp0` real and non-negative, or `amp1` when
    /// `amp0` vanishes.
    pub fn canonical(&self) -> Self {
        let pivot = if self.amp0.norm() > NORM_TOLERANCE {
            self.amp0
        } else {
            self.amp1
        };
        if pivot.norm() == 0.0 {
            return *self;
        }
        let rot = pivot.conj() / pivot.norm();
        Self::from_raw(self.amp0 * rot, self.amp1 * rot)
    }

    /// Equality up to a global phase, componentwise within `tol`.
    pub fn canonical_equal(&self, other: &Self, tol: f64) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        (a.amp0 - b.amp0).norm() <= tol && (a.amp1 - b.amp1).norm() <= tol
    }

    /// Phase shift operation: `|0⟩_b → |0⟩_b`, `|1⟩_b → e^{iκ}|1⟩_b`.
    pub fn phase_shift(&self, kappa: f64) -> Self {
        Self::from_raw(self.amp0, self.amp1 * Complex64::from_polar(1.0, kappa))
    }

    /// `|0⟩_b → |s⟩_b`, `|1⟩_b → |a⟩_b`. Self-inverse.
    pub fn to_energy_basis(&self) -> Self {
        let (a, b) = (self.amp0, self.amp1);
        Self::from_raw((a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2)
    }

    pub fn apply(&self, m: &Matrix2) -> Self {
        Self::from_raw(
            m[0][0] * self.amp0 + m[0][1] * self.amp1,
            m[1][0] * self.amp0 + m[1][1] * self.amp1,
        )
    }

    /// Charge readout against a uniform draw `u ∈ [0, 1)`: 1 iff `u < |amp1|²`.
    pub fn measure_charge(&self, u: f64) -> u8 {
        u8::from(u < self.prob_one())
    }
}

impl fmt::Display for CpbState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})|0⟩ + ({})|1⟩", self.amp0, self.amp1)
    }
}

/// Box Hamiltonian near the charge degeneracy point, energies in eV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpbHamiltonianParams {
    pub e_c: f64,
    pub e_j: f64,
    /// Bias offset `C_g V_g / e − 1`.
    pub rho: f64,
}

impl CpbHamiltonianParams {
    pub fn new(e_c: f64, e_j: f64, rho: f64) -> Result<Self> {
        if !(e_c > 0.0 && e_c.is_finite()) {
            return Err(invalid("e_c", "must be positive"));
        }
        if !(e_j > 0.0 && e_j.is_finite()) {
            return Err(invalid("e_j", "must be positive"));
        }
        if !rho.is_finite() {
            return Err(invalid("rho", "must be finite"));
        }
        Ok(Self { e_c, e_j, rho })
    }

    /// Well-defined charge regime, `E_J < E_C`.
    pub fn in_charge_regime(&self) -> bool {
        self.e_j < self.e_c
    }

    /// `2E_Cρ(|0⟩⟨0| − |1⟩⟨1|) − (E_J/2)(|0⟩⟨1| + |1⟩⟨0|)` in the charge basis.
    pub fn hamiltonian_matrix(&self) -> Matrix2 {
        let d = 2.0 * self.e_c * self.rho;
        let off = Complex64::new(-self.e_j / 2.0, 0.0);
        [
            [Complex64::new(d, 0.0), off],
            [off, Complex64::new(-d, 0.0)],
        ]
    }

    /// Splitting of the two eigenvalues, `√((4E_Cρ)² + E_J²)`.
    pub fn eigen_gap(&self) -> f64 {
        (4.0 * self.e_c * self.rho).hypot(self.e_j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const S: f64 = FRAC_1_SQRT_2;

    #[test]
    fn canonical_equal_examples() {
        let one = CpbState::zero();
        let rotated = CpbState::from_raw(Complex64::from_polar(1.0, FRAC_PI_3), c(0.0, 0.0));
        assert!(one.canonical_equal(&rotated, 1e-12));

        assert!(!CpbState::symmetric().canonical_equal(&CpbState::antisymmetric(), 1e-12));

        let g = Complex64::from_polar(1.0, 0.7);
        let a = CpbState::from_raw(c(S, 0.0), c(0.0, S));
        let b = CpbState::from_raw(g * S, g * c(0.0, S));
        assert!(a.canonical_equal(&b, 1e-12));
    }

    #[test]
    fn canonical_form_when_amp0_vanishes() {
        let a = CpbState::from_raw(c(0.0, 0.0), Complex64::from_polar(1.0, 2.0));
        let can = a.canonical();
        assert!((can.amp1 - c(1.0, 0.0)).norm() < 1e-15);
        assert!(a.canonical_equal(&CpbState::one(), 1e-12));
    }

    #[test]
    fn phase_shift_examples() {
        let s = CpbState::symmetric();
        assert!(s.phase_shift(0.0).canonical_equal(&s, 1e-15));
        let flipped = s.phase_shift(PI);
        assert!((flipped.amp0 - c(S, 0.0)).norm() < 1e-15);
        assert!((flipped.amp1 - c(-S, 0.0)).norm() < 1e-15);
        assert_eq!(CpbState::zero().phase_shift(1.234), CpbState::zero());
    }

    #[test]
    fn energy_basis_examples() {
        let s = CpbState::zero().to_energy_basis();
        assert!((s.amp0 - c(S, 0.0)).norm() < 1e-15 && (s.amp1 - c(S, 0.0)).norm() < 1e-15);
        let back = CpbState::symmetric().to_energy_basis();
        assert!(back.canonical_equal(&CpbState::zero(), 1e-15));
    }

    #[test]
    fn energy_basis_matches_matrix_product() {
        // Oracle: explicit [[1, 1], [1, -1]]/√2 times (1, i)/√2.
        let h = [[c(S, 0.0), c(S, 0.0)], [c(S, 0.0), c(-S, 0.0)]];
        let input = CpbState::from_raw(c(S, 0.0), Complex64::from_polar(S, FRAC_PI_2));
        let via_matrix = input.apply(&h);
        let direct = input.to_energy_basis();
        let expected0 = c(0.5, 0.5);
        let expected1 = c(0.5, -0.5);
        assert!((via_matrix.amp0 - expected0).norm() < 1e-15);
        assert!((via_matrix.amp1 - expected1).norm() < 1e-15);
        assert!((direct.amp0 - expected0).norm() < 1e-15);
        assert!((direct.amp1 - expected1).norm() < 1e-15);
    }

    #[test]
    fn measure_charge_examples() {
        assert_eq!(CpbState::one().measure_charge(0.99), 1);
        assert_eq!(CpbState::zero().measure_charge(0.0), 0);
        let s = CpbState::symmetric();
        assert_eq!(s.measure_charge(0.49), 1);
        assert_eq!(s.measure_charge(0.51), 0);
    }

    #[test]
    fn hamiltonian_examples() {
        let p = CpbHamiltonianParams::new(100e-6, 10e-6, 0.0).unwrap();
        let h = p.hamiltonian_matrix();
        assert_eq!(h[0][0], c(0.0, 0.0));
        assert_eq!(h[1][1], c(0.0, 0.0));
        assert!((h[0][1].re + 5e-6).abs() < 1e-18);
        assert!((h[1][0].re + 5e-6).abs() < 1e-18);
        assert_eq!(p.eigen_gap(), 10e-6);
        assert!(p.in_charge_regime());

        let zero = CpbHamiltonianParams { e_c: 3.0, e_j: 0.0, rho: 0.0 };
        assert!(zero.hamiltonian_matrix().iter().flatten().all(|z| z.norm() == 0.0));

        let biased = CpbHamiltonianParams::new(100e-6, 10e-6, 0.05).unwrap();
        assert!((biased.eigen_gap() - 22.360_679_774_997_9e-6).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_rejects_nonpositive() {
        assert!(CpbHamiltonianParams::new(0.0, 1.0, 0.0).is_err());
        assert!(CpbHamiltonianParams::new(1.0, -1.0, 0.0).is_err());
    }
}
