//! Per-electron measurement rounds and the terminal readout.
//!
//! One measurement starts the box in `|s⟩_b`, lets `k` electrons reflect off
//! the mirror, cross the specimen and hit the detector, corrects the known
//! phases, then converts the accumulated phase `kΔθ` into a charge population
//! and reads one bit. In the noiseless elastic case `P(bit = 1) = [1 + sin kΔθ]/2`.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::detector::{localized_projection, project_inelastic, DetectorModel, Entangled, DEFAULT_INELASTIC_ANGLE};
use crate::error::{invalid, Error, Result};
use crate::qubit::CpbState;

/// Input states further than this from unit norm are rejected.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrectionMode {
    /// Apply `−β_j` (or `+ξ̂`) right after each detection.
    #[default]
    PerRound,
    /// Record the corrections and apply their sum once, just before readout.
    Deferred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InelasticModel {
    /// Projection onto `(|0⟩ + e^{iξ}|1⟩)/√2`.
    #[default]
    Delocalized,
    /// Projection onto `|0⟩` or `|1⟩`; destroys the superposition.
    Localized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    /// Electrons per box readout.
    pub k: u32,
    /// True phase difference between regions S1 and S0, rad.
    pub delta_theta: f64,
    pub p_inelastic: f64,
    /// Std of the experimenter's estimate of ξ, rad.
    pub xi_precision: f64,
    /// Amplitude imbalance scale per inelastic event.
    pub localization_epsilon: f64,
    /// Probability that the detector misses an electron.
    pub p_loss: f64,
    pub delta_theta_inel: f64,
    pub inelastic_model: InelasticModel,
    pub correction: CorrectionMode,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            k: 9,
            delta_theta: 0.0,
            p_inelastic: 0.0,
            xi_precision: 0.0,
            localization_epsilon: 0.0,
            p_loss: 0.0,
            delta_theta_inel: DEFAULT_INELASTIC_ANGLE,
            inelastic_model: InelasticModel::Delocalized,
            correction: CorrectionMode::PerRound,
        }
    }
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(name, format!("{p} is not in [0, 1]")))
    }
}

fn check_non_negative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} must be finite and non-negative")))
    }
}

impl ProtocolConfig {
    pub fn elastic(k: u32, delta_theta: f64) -> Self {
        Self {
            k,
            delta_theta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(invalid("k", "must be at least 1"));
        }
        if !self.delta_theta.is_finite() {
            return Err(invalid("delta_theta", "must be finite"));
        }
        check_probability("p_inelastic", self.p_inelastic)?;
        check_probability("p_loss", self.p_loss)?;
        check_non_negative("xi_precision", self.xi_precision)?;
        check_non_negative("localization_epsilon", self.localization_epsilon)?;
        check_non_negative("delta_theta_inel", self.delta_theta_inel)?;
        Ok(())
    }

    pub fn accumulated_phase(&self) -> f64 {
        self.k as f64 * self.delta_theta
    }

    /// True when `|kΔθ| > π/2`, outside the branch the sine estimator inverts.
    pub fn phase_wrap_warning(&self) -> bool {
        self.accumulated_phase().abs() > FRAC_PI_2
    }

    /// `[1 + sin(kΔθ)]/2`, the noiseless elastic readout probability.
    pub fn ideal_prob_one(&self) -> f64 {
        ideal_prob_one(self.accumulated_phase())
    }
}

pub fn ideal_prob_one(accumulated_phase: f64) -> f64 {
    0.5 * (1.0 + accumulated_phase.sin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOutcome {
    /// Detection pixel; `None` for inelastic or lost electrons.
    pub pixel_index: Option<usize>,
    pub inelastic: bool,
    /// Estimated ξ credited to the inelastic channel; 0 when elastic.
    pub xi_applied: f64,
    /// Phase shift angle that undoes the known detection phase.
    pub correction: f64,
    /// Electron missed by the detector; the measurement must be discarded.
    pub lost: bool,
    pub cpb_after: CpbState,
}

/// `(|0⟩_b + |1⟩_b)/√2`.
pub fn init_round_state() -> CpbState {
    CpbState::symmetric()
}

/// One electron, without applying the correction.
fn interact<R: Rng + ?Sized>(
    state: &CpbState,
    cfg: &ProtocolConfig,
    det: &DetectorModel,
    rng: &mut R,
) -> Result<RoundOutcome> {
    state.require_normalized(INPUT_NORM_TOLERANCE)?;
    let pair = Entangled::reflect(state).transmit(cfg.delta_theta);

    let inelastic = rng.random::<f64>() < cfg.p_inelastic;
    let (pixel_index, xi_applied, correction, mut post) = if inelastic {
        match cfg.inelastic_model {
            InelasticModel::Delocalized => {
                let (event, post) = project_inelastic(&pair, cfg.xi_precision, cfg.delta_theta_inel, rng);
                (None, event.xi_reported, event.xi_reported, post)
            }
            InelasticModel::Localized => {
                let (_, post) = localized_projection(&pair, rng);
                (None, 0.0, 0.0, post)
            }
        }
    } else {
        let (j, post) = det.project_elastic(&pair, rng);
        (Some(j), 0.0, -det.beta(j), post)
    };

    if inelastic && cfg.localization_epsilon > 0.0 {
        let z: f64 = rng.sample(StandardNormal);
        let e = cfg.localization_epsilon * z;
        post = CpbState::normalized(post.amp0 * (1.0 + e), post.amp1 * (1.0 - e)).unwrap_or(post);
    }

    let lost = cfg.p_loss > 0.0 && rng.random::<f64>() < cfg.p_loss;
    Ok(RoundOutcome {
        pixel_index: if lost { None } else { pixel_index },
        inelastic,
        xi_applied,
        correction,
        lost,
        cpb_after: post,
    })
}

/// One electron round: reflection, specimen imprint, detection and the
/// per-round phase correction. `cpb_after` is the corrected state.
pub fn run_electron_round<R: Rng + ?Sized>(
    state: &CpbState,
    cfg: &ProtocolConfig,
    det: &DetectorModel,
    rng: &mut R,
) -> Result<(CpbState, RoundOutcome)> {
    let mut out = interact(state, cfg, det, rng)?;
    out.cpb_after = out.cpb_after.phase_shift(out.correction);
    Ok((out.cpb_after, out))
}

/// Phase shift by π/2 followed by `|0⟩_b → |s⟩_b`, `|1⟩_b → |a⟩_b`.
pub fn readout_transform(state: &CpbState) -> CpbState {
    state.phase_shift(FRAC_PI_2).to_energy_basis()
}

/// Box state right before readout after `k` rounds, or `None` if an electron
/// was lost. Honors `cfg.correction`.
pub fn run_chain<R: Rng + ?Sized>(
    cfg: &ProtocolConfig,
    det: &DetectorModel,
    rng: &mut R,
) -> Result<Option<CpbState>> {
    let mut state = init_round_state();
    let mut pending = 0.0;
    for _ in 0..cfg.k {
        let out = interact(&state, cfg, det, rng)?;
        if out.lost {
            return Ok(None);
        }
        state = match cfg.correction {
            CorrectionMode::PerRound => out.cpb_after.phase_shift(out.correction),
            CorrectionMode::Deferred => {
                pending += out.correction;
                out.cpb_after
            }
        };
    }
    Ok(Some(state.phase_shift(pending)))
}

/// One full measurement. Returns `None` when the measurement had to be
/// discarded because the detector lost an electron.
pub fn run_measurement<R: Rng + ?Sized>(
    cfg: &ProtocolConfig,
    det: &DetectorModel,
    rng: &mut R,
) -> Result<Option<u8>> {
    let Some(state) = run_chain(cfg, det, rng)? else {
        return Ok(None);
    };
    let u: f64 = rng.random();
    Ok(Some(readout_transform(&state).measure_charge(u)))
}

/// Inverse-sine estimate of Δθ from a readout frequency.
pub fn estimate_from_frequency(freq: f64, k: u32) -> f64 {
    (2.0 * freq - 1.0).clamp(-1.0, 1.0).asin() / k as f64
}

/// `arcsin(2·mean(bits) − 1)/k`.
pub fn estimate_phase(bits: &[u8], k: u32) -> Result<f64> {
    if bits.is_empty() {
        return Err(Error::NoMeasurements);
    }
    if k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    let ones = bits.iter().filter(|&&b| b != 0).count();
    Ok(estimate_from_frequency(ones as f64 / bits.len() as f64, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Domain, StreamFactory, SimRng};
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_PI_6, PI};

    fn rng(i: u64) -> SimRng {
        StreamFactory::new(11).stream(Domain::Custom(2), i)
    }

    fn detector(eta: f64) -> DetectorModel {
        DetectorModel::build(512, eta, &mut rng(999)).unwrap()
    }

    #[test]
    fn init_is_symmetric() {
        let s = init_round_state();
        assert!((s.amp0.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-16);
        assert!(s.canonical_equal(&CpbState::zero().to_energy_basis(), 1e-15));
        assert!((s.prob_one() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn null_phase_round_is_identity() {
        let det = detector(0.0);
        let cfg = ProtocolConfig::elastic(1, 0.0);
        let start = CpbState::equator(0.8);
        let mut r = rng(1);
        for _ in 0..100 {
            let (after, out) = run_electron_round(&start, &cfg, &det, &mut r).unwrap();
            assert!(!out.inelastic);
            assert!(out.pixel_index.is_some());
            assert_eq!(out.xi_applied, 0.0);
            assert!(after.canonical_equal(&start, 1e-12));
        }
    }

    #[test]
    fn single_round_adds_delta_theta() {
        let det = detector(0.0);
        let cfg = ProtocolConfig::elastic(1, 0.3);
        let mut r = rng(2);
        let (after, _) = run_electron_round(&init_round_state(), &cfg, &det, &mut r).unwrap();
        assert!(after.canonical_equal(&CpbState::equator(0.3), 1e-12));
    }

    #[test]
    fn ten_rounds_accumulate_linearly() {
        let det = detector(0.0);
        let cfg = ProtocolConfig::elastic(10, 0.1);
        let final_state = run_chain(&cfg, &det, &mut rng(3)).unwrap().unwrap();
        assert!(final_state.canonical_equal(&CpbState::equator(1.0), 1e-12));
    }

    #[test]
    fn rejects_unnormalized_input() {
        let det = detector(0.0);
        let cfg = ProtocolConfig::elastic(1, 0.0);
        let bad = CpbState::from_raw(Complex64::new(1.0, 0.0), Complex64::new(0.1, 0.0));
        assert!(matches!(
            run_electron_round(&bad, &cfg, &det, &mut rng(4)),
            Err(Error::Unnormalized(_))
        ));
    }

    #[test]
    fn readout_examples() {
        for (phi, p) in [(0.0, 0.5), (FRAC_PI_2, 1.0), (-FRAC_PI_6, 0.25)] {
            let out = readout_transform(&CpbState::equator(phi));
            assert!((out.prob_one() - p).abs() < 1e-15, "φ={phi}");
        }
    }

    #[test]
    fn readout_matches_explicit_matrices() {
        // Oracle: H · diag(1, e^{iπ/2}) applied as explicit 2×2 products.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let h = [[Complex64::new(s, 0.0), Complex64::new(s, 0.0)], [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)]];
        let p = [[Complex64::new(1.0, 0.0), z], [z, Complex64::new(0.0, 1.0)]];
        for phi in [-1.3, -FRAC_PI_6, 0.0, 0.4, 2.5] {
            let st = CpbState::equator(phi);
            let oracle = st.apply(&p).apply(&h);
            assert!((oracle.prob_one() - (1.0 + f64::sin(phi)) / 2.0).abs() < 1e-15);
            assert!(oracle.canonical_equal(&readout_transform(&st), 1e-15));
        }
    }

    #[test]
    fn readout_state_matches_closed_form() {
        // {[cos(x/2) − sin(x/2)]|0⟩ − i[cos(x/2) + sin(x/2)]|1⟩}/√2
        let x: f64 = 0.77;
        let (c, s) = ((x / 2.0).cos(), (x / 2.0).sin());
        let expected = CpbState::from_raw(
            Complex64::new((c - s) / 2f64.sqrt(), 0.0),
            Complex64::new(0.0, -(c + s) / 2f64.sqrt()),
        );
        assert!(readout_transform(&CpbState::equator(x)).canonical_equal(&expected, 1e-15));
    }

    #[test]
    fn certain_readout_at_quarter_turn() {
        let det = detector(0.0);
        let cfg = ProtocolConfig::elastic(5, PI / 10.0);
        let mut r = rng(5);
        for _ in 0..2000 {
            assert_eq!(run_measurement(&cfg, &det, &mut r).unwrap(), Some(1));
        }
    }

    #[test]
    fn estimator_examples() {
        assert!((estimate_phase(&[1, 1, 1, 1], 2).unwrap() - PI / 4.0).abs() < 1e-15);
        assert_eq!(estimate_phase(&[1, 0, 1, 0], 9).unwrap(), 0.0);
        assert_eq!(estimate_phase(&[], 3), Err(Error::NoMeasurements));
        assert!((estimate_phase(&[0, 0], 1).unwrap() + FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(ProtocolConfig::default().validate().is_ok());
        assert!(ProtocolConfig { k: 0, ..Default::default() }.validate().is_err());
        assert!(ProtocolConfig { p_inelastic: 1.5, ..Default::default() }.validate().is_err());
        assert!(ProtocolConfig { xi_precision: -1.0, ..Default::default() }.validate().is_err());
        assert!(ProtocolConfig { localization_epsilon: f64::NAN, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn phase_wrap_flag() {
        assert!(!ProtocolConfig::elastic(9, 0.1).phase_wrap_warning());
        assert!(ProtocolConfig::elastic(18, 0.1).phase_wrap_warning());
    }

    #[test]
    fn lost_electron_discards_measurement() {
        let det = detector(0.0);
        let cfg = ProtocolConfig { p_loss: 1.0, ..ProtocolConfig::elastic(3, 0.1) };
        assert_eq!(run_measurement(&cfg, &det, &mut rng(6)).unwrap(), None);
    }

    #[test]
    fn localized_inelastic_collapses_chain() {
        let det = detector(0.0);
        let cfg = ProtocolConfig {
            p_inelastic: 1.0,
            inelastic_model: InelasticModel::Localized,
            ..ProtocolConfig::elastic(4, 0.2)
        };
        let st = run_chain(&cfg, &det, &mut rng(7)).unwrap().unwrap();
        assert_eq!(st.amp0.norm() * st.amp1.norm(), 0.0);
    }
}
