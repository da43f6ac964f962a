//! Closed-form device estimates for the box-on-mirror design and a go/no-go
//! report over a parameter set.
//!
//! Inputs are SI except energies, which are in eV. The estimates are
//! order-of-magnitude relations; [`PlanckConvention`] selects whether the
//! quantum scales (`D`, `τ₁`, the precession time) use `h` or `ħ`.

use std::fmt::Write as _;

use crate::error::{invalid, Result};
use crate::qubit::CpbHamiltonianParams;

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / std::f64::consts::TAU;
pub const BOLTZMANN: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlanckConvention {
    /// `ħ`.
    Reduced,
    /// `h`; reproduces the reference design numbers.
    #[default]
    Full,
}

impl PlanckConvention {
    pub fn value(self) -> f64 {
        match self {
            PlanckConvention::Reduced => HBAR,
            PlanckConvention::Full => PLANCK,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlanckConvention::Reduced => "hbar",
            PlanckConvention::Full => "h",
        }
    }
}

/// Ratios standing in for "much less than".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub much_less: f64,
    pub charge_regime: f64,
    /// Largest tolerable arrival-time spread, s.
    pub max_delta_tau: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            much_less: 0.1,
            charge_regime: 0.2,
            max_delta_tau: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    /// Total island capacitance `C_J + C_g`, F.
    pub c_sigma: f64,
    /// Gate capacitance, F.
    pub c_g: f64,
    /// Gate voltage, V.
    pub v_g: f64,
    /// Josephson energy, eV.
    pub e_j: f64,
    /// K.
    pub temperature: f64,
    /// Mirror field `E_M`, V/m.
    pub e_mirror: f64,
    /// Island size, m.
    pub l_cpb: f64,
    /// Beam energy spread, eV.
    pub delta_e: f64,
    /// Flight path through the microscope, m.
    pub path_length: f64,
    /// Electron speed in the entangling section, m/s.
    pub electron_speed: f64,
    /// eV.
    pub imaging_energy: f64,
    /// Propagation angle on the mirror side of the lens system, rad.
    pub beam_angle_beta: f64,
    pub magnification: f64,
    /// Separation of the two focal points P and Q, m.
    pub defocus_d: f64,
    /// Electrons per box readout.
    pub k: u32,
    /// Pulsed source repetition rate, Hz.
    pub pulse_rate: f64,
    /// Box coherence lifetime, s.
    pub qubit_lifetime: f64,
    /// Electron/box interaction time `τ₀`, s, if known.
    pub interaction_time: Option<f64>,
    pub planck: PlanckConvention,
    pub thresholds: Thresholds,
}

impl Default for DeviceParams {
    /// Nominal design: `E_C = 100 μeV`, `E_J = 10 μeV`, 10 mK, biased at the
    /// charge degeneracy point, 4 kV/m mirror field, 0.1 μm island.
    fn default() -> Self {
        let c_sigma = ELEMENTARY_CHARGE / (2.0 * 100e-6);
        let c_g = 1e-16;
        Self {
            c_sigma,
            c_g,
            v_g: ELEMENTARY_CHARGE / c_g,
            e_j: 10e-6,
            temperature: 0.01,
            e_mirror: 4e3,
            l_cpb: 0.1e-6,
            delta_e: 0.5e-3,
            path_length: 1.0,
            electron_speed: 2e6,
            imaging_energy: 100e3,
            beam_angle_beta: 5e-5,
            magnification: 1.0 / 200.0,
            defocus_d: 1e-6,
            k: 18,
            pulse_rate: 80e6,
            qubit_lifetime: 2e-6,
            interaction_time: None,
            planck: PlanckConvention::Full,
            thresholds: Thresholds::default(),
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c_sigma", self.c_sigma),
            ("c_g", self.c_g),
            ("v_g", self.v_g),
            ("e_j", self.e_j),
            ("temperature", self.temperature),
            ("e_mirror", self.e_mirror),
            ("l_cpb", self.l_cpb),
            ("delta_e", self.delta_e),
            ("path_length", self.path_length),
            ("electron_speed", self.electron_speed),
            ("imaging_energy", self.imaging_energy),
            ("beam_angle_beta", self.beam_angle_beta),
            ("magnification", self.magnification),
            ("defocus_d", self.defocus_d),
            ("pulse_rate", self.pulse_rate),
            ("qubit_lifetime", self.qubit_lifetime),
            ("thresholds.much_less", self.thresholds.much_less),
            ("thresholds.charge_regime", self.thresholds.charge_regime),
            ("thresholds.max_delta_tau", self.thresholds.max_delta_tau),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("{v} must be strictly positive")));
            }
        }
        if let Some(t) = self.interaction_time {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("interaction_time", format!("{t} must be strictly positive")));
            }
        }
        if self.k == 0 {
            return Err(invalid("k", "must be at least 1"));
        }
        if self.c_g >= self.c_sigma {
            return Err(invalid("c_g", "must be smaller than c_sigma"));
        }
        Ok(())
    }

    /// `E_C = e²/(2C_Σ)`, eV.
    pub fn charging_energy(&self) -> f64 {
        ELEMENTARY_CHARGE / (2.0 * self.c_sigma)
    }

    /// `ρ = C_g V_g / e − 1`.
    pub fn rho(&self) -> f64 {
        self.c_g * self.v_g / ELEMENTARY_CHARGE - 1.0
    }

    pub fn hamiltonian(&self) -> CpbHamiltonianParams {
        CpbHamiltonianParams {
            e_c: self.charging_energy(),
            e_j: self.e_j,
            rho: self.rho(),
        }
    }
}

/// `(−2 n_C e + C_g V_g)²/(2C_Σ)`, eV.
pub fn electrostatic_energy(n_c: i32, p: &DeviceParams) -> f64 {
    let q = -2.0 * n_c as f64 * ELEMENTARY_CHARGE + p.c_g * p.v_g;
    q * q / (2.0 * p.c_sigma) / ELEMENTARY_CHARGE
}

/// Island potential difference between the two charge states, `2e/C_Σ`, V.
pub fn potential_swing(p: &DeviceParams) -> f64 {
    2.0 * ELEMENTARY_CHARGE / p.c_sigma
}

/// Electron wavelength at the turning point, `(ħ²/(m e E_M))^{1/3}`, m.
pub fn wkb_wavelength(p: &DeviceParams) -> f64 {
    wkb_wavelength_at(p.e_mirror, p.planck)
}

pub fn wkb_wavelength_at(e_mirror: f64, planck: PlanckConvention) -> f64 {
    let h = planck.value();
    (h * h / (ELECTRON_MASS * ELEMENTARY_CHARGE * e_mirror)).cbrt()
}

/// Largest field keeping `Δφ > D E_M`: `(m e Δφ³)^{1/2}/ħ`, V/m.
pub fn max_mirror_field(delta_phi: f64, planck: PlanckConvention) -> f64 {
    (ELECTRON_MASS * ELEMENTARY_CHARGE * delta_phi.powi(3)).sqrt() / planck.value()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldWindow {
    /// V/m.
    pub min: f64,
    /// V/m.
    pub max: f64,
}

impl FieldWindow {
    pub fn is_nonempty(&self) -> bool {
        self.min < self.max
    }

    pub fn contains(&self, e_mirror: f64) -> bool {
        self.min <= e_mirror && e_mirror <= self.max
    }
}

/// Perpendicular-energy spread `E β²` must drop over the island size; the
/// turning-point bump must exceed the WKB wavelength.
pub fn mirror_field_window(p: &DeviceParams) -> FieldWindow {
    let perpendicular = p.imaging_energy * p.beam_angle_beta * p.beam_angle_beta;
    FieldWindow {
        min: perpendicular / p.l_cpb,
        max: max_mirror_field(potential_swing(p), p.planck),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingBudget {
    /// Flight time `L/v`, s.
    pub tau: f64,
    /// Flight time spread `τ ΔE/E`, s.
    pub delta_tau: f64,
    /// Energy-spread time `h/ΔE` (Planck constant per `planck`), s.
    pub tau1: f64,
    /// Reflection time `(m l/(e E_M))^{1/2}`, s.
    pub tau2: f64,
    /// Box precession time `h/E_J` (Planck constant per `planck`), s.
    pub h_over_ej: f64,
    /// Kinetic energy in the entangling section, eV.
    pub electron_energy: f64,
    /// Source pulses that fit in the box lifetime.
    pub pulses_within_lifetime: f64,
    pub delta_tau_ok: bool,
    pub tau1_ok: bool,
    pub tau2_ok: bool,
    pub thermal_ok: bool,
    pub charge_regime_ok: bool,
    pub energy_spread_ok: bool,
    pub lifetime_ok: bool,
}

pub fn timing_budget(p: &DeviceParams) -> TimingBudget {
    let planck = p.planck.value();
    let th = &p.thresholds;
    let tau = p.path_length / p.electron_speed;
    let electron_energy = 0.5 * ELECTRON_MASS * p.electron_speed.powi(2) / ELEMENTARY_CHARGE;
    let delta_tau = tau * p.delta_e / electron_energy;
    let tau1 = planck / (p.delta_e * ELEMENTARY_CHARGE);
    let tau2 = (ELECTRON_MASS * p.l_cpb / (ELEMENTARY_CHARGE * p.e_mirror)).sqrt();
    let h_over_ej = planck / (p.e_j * ELEMENTARY_CHARGE);
    let thermal = BOLTZMANN * p.temperature / ELEMENTARY_CHARGE;
    let readout_time = p.k as f64 / p.pulse_rate;
    TimingBudget {
        tau,
        delta_tau,
        tau1,
        tau2,
        h_over_ej,
        electron_energy,
        pulses_within_lifetime: p.qubit_lifetime * p.pulse_rate,
        delta_tau_ok: delta_tau < th.max_delta_tau,
        tau1_ok: tau1 / h_over_ej < th.much_less,
        tau2_ok: tau2 / h_over_ej < th.much_less,
        thermal_ok: thermal / p.e_j < th.much_less,
        charge_regime_ok: p.e_j / p.charging_energy() < th.charge_regime,
        energy_spread_ok: p.e_j / p.delta_e < th.much_less,
        lifetime_ok: readout_time < p.qubit_lifetime,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportValue {
    pub name: &'static str,
    pub value: f64,
    pub unit: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub values: Vec<ReportValue>,
    pub flags: Vec<(&'static str, bool)>,
}

impl FeasibilityReport {
    pub fn ok(&self) -> bool {
        self.flags.iter().all(|(_, ok)| *ok)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|v| v.name == name).map(|v| v.value)
    }

    pub fn flag(&self, name: &str) -> Option<bool> {
        self.flags.iter().find(|(n, _)| *n == name).map(|(_, ok)| *ok)
    }

    /// One `name = value unit` line per quantity, then `ok.<constraint> = bool`.
    pub fn to_kv_text(&self) -> String {
        let mut out = String::new();
        for v in &self.values {
            if v.unit.is_empty() {
                let _ = writeln!(out, "{} = {:.6e}", v.name, v.value);
            } else {
                let _ = writeln!(out, "{} = {:.6e} {}", v.name, v.value, v.unit);
            }
        }
        for (name, ok) in &self.flags {
            let _ = writeln!(out, "ok.{name} = {ok}");
        }
        let _ = writeln!(out, "ok.overall = {}", self.ok());
        out
    }
}

pub fn feasibility_report(p: &DeviceParams) -> Result<FeasibilityReport> {
    p.validate()?;
    let e_c = p.charging_energy();
    let dphi = potential_swing(p);
    let d = wkb_wavelength(p);
    let window = mirror_field_window(p);
    let t = timing_budget(p);
    let h = p.hamiltonian();

    let mut values = vec![
        ReportValue { name: "charging_energy", value: e_c, unit: "eV" },
        ReportValue { name: "charging_energy_4ec", value: 4.0 * e_c, unit: "eV" },
        ReportValue { name: "rho", value: p.rho(), unit: "" },
        ReportValue { name: "energy_n0", value: electrostatic_energy(0, p), unit: "eV" },
        ReportValue { name: "energy_n1", value: electrostatic_energy(1, p), unit: "eV" },
        ReportValue { name: "eigen_gap", value: h.eigen_gap(), unit: "eV" },
        ReportValue { name: "potential_swing", value: dphi, unit: "V" },
        ReportValue { name: "wkb_wavelength", value: d, unit: "m" },
        ReportValue { name: "wkb_bump", value: d * p.e_mirror, unit: "V" },
        ReportValue { name: "field_min", value: window.min, unit: "V/m" },
        ReportValue { name: "field_max", value: window.max, unit: "V/m" },
        ReportValue { name: "e_mirror", value: p.e_mirror, unit: "V/m" },
        ReportValue { name: "s1_angle", value: p.beam_angle_beta / p.magnification, unit: "rad" },
        ReportValue { name: "tau", value: t.tau, unit: "s" },
        ReportValue { name: "delta_tau", value: t.delta_tau, unit: "s" },
        ReportValue { name: "tau1", value: t.tau1, unit: "s" },
        ReportValue { name: "tau2", value: t.tau2, unit: "s" },
        ReportValue { name: "h_over_ej", value: t.h_over_ej, unit: "s" },
        ReportValue { name: "electron_energy", value: t.electron_energy, unit: "eV" },
        ReportValue {
            name: "thermal_energy",
            value: BOLTZMANN * p.temperature / ELEMENTARY_CHARGE,
            unit: "eV",
        },
        ReportValue { name: "pulses_within_lifetime", value: t.pulses_within_lifetime, unit: "" },
        ReportValue { name: "readout_time", value: p.k as f64 / p.pulse_rate, unit: "s" },
    ];
    let mut flags = vec![
        ("field_window_nonempty", window.is_nonempty()),
        ("field_in_window", window.contains(p.e_mirror)),
        ("potential_exceeds_wkb_bump", dphi > d * p.e_mirror),
        ("delta_tau", t.delta_tau_ok),
        ("tau1", t.tau1_ok),
        ("tau2", t.tau2_ok),
        ("thermal", t.thermal_ok),
        ("charge_regime", t.charge_regime_ok),
        ("energy_spread", t.energy_spread_ok),
        ("lifetime", t.lifetime_ok),
    ];
    if let Some(tau0) = p.interaction_time {
        values.push(ReportValue { name: "interaction_time", value: tau0, unit: "s" });
        flags.push(("interaction_time", tau0 / t.h_over_ej < p.thresholds.much_less));
    }
    Ok(FeasibilityReport { values, flags })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn degeneracy_point_balances_charge_states() {
        let p = DeviceParams::default();
        assert!(rel(electrostatic_energy(0, &p), electrostatic_energy(1, &p)) < 1e-12);
        assert!(p.rho().abs() < 1e-12);
    }

    #[test]
    fn unbiased_single_pair_costs_4ec() {
        let p = DeviceParams { v_g: 0.0, ..DeviceParams::default() };
        assert!(rel(electrostatic_energy(1, &p), 4.0 * p.charging_energy()) < 1e-12);
        assert_eq!(electrostatic_energy(0, &p), 0.0);
    }

    #[test]
    fn potential_swing_examples() {
        let p = DeviceParams::default();
        assert!(rel(potential_swing(&p), 400e-6) < 1e-12);
        let doubled = DeviceParams { c_sigma: 2.0 * p.c_sigma, ..p };
        assert!(rel(potential_swing(&doubled), 200e-6) < 1e-12);
        let unit = DeviceParams { c_sigma: 1.602_176_634e-19, ..p };
        assert!(rel(potential_swing(&unit), 2.0) < 1e-15);
    }

    #[test]
    fn wkb_cube_root_law() {
        let a = wkb_wavelength_at(3e3, PlanckConvention::Reduced);
        let b = wkb_wavelength_at(24e3, PlanckConvention::Reduced);
        assert!(rel(a / b, 2.0) < 1e-12);
    }

    #[test]
    fn wkb_wavelength_against_folded_constants() {
        // ħ² = 1.112121e-68 J²s², m e = 1.459470e-49 kg·C, E_M = 3000 V/m
        // → D³ = 2.540010e-23 m³, D = 2.93953e-8 m.
        let d = wkb_wavelength_at(3e3, PlanckConvention::Reduced);
        assert!(rel(d, 2.939_53e-8) < 1e-4, "{d}");
    }

    #[test]
    fn field_window_scalings() {
        let p = DeviceParams::default();
        let w = mirror_field_window(&p);
        let wide = mirror_field_window(&DeviceParams { beam_angle_beta: 2.0 * p.beam_angle_beta, ..p });
        assert!(rel(wide.min / w.min, 4.0) < 1e-12);
        let half = mirror_field_window(&DeviceParams { c_sigma: 2.0 * p.c_sigma, ..p });
        assert!(rel(w.max / half.max, 2f64.powf(1.5)) < 1e-12);
    }

    #[test]
    fn nominal_design_is_feasible() {
        let r = feasibility_report(&DeviceParams::default()).unwrap();
        assert!(r.ok(), "{}", r.to_kv_text());
    }

    #[test]
    fn strong_mirror_field_fails() {
        let p = DeviceParams { e_mirror: 1e5, ..DeviceParams::default() };
        let r = feasibility_report(&p).unwrap();
        assert_eq!(r.flag("potential_exceeds_wkb_bump"), Some(false));
        assert!(!r.ok());
    }

    #[test]
    fn warm_fridge_fails() {
        let p = DeviceParams { temperature: 1.0, ..DeviceParams::default() };
        let r = feasibility_report(&p).unwrap();
        assert_eq!(r.flag("thermal"), Some(false));
        assert!(!r.ok());
    }

    #[test]
    fn nonphysical_params_rejected() {
        assert!(feasibility_report(&DeviceParams { c_sigma: 0.0, ..DeviceParams::default() }).is_err());
        assert!(feasibility_report(&DeviceParams { c_g: 1e-15, ..DeviceParams::default() }).is_err());
        assert!(feasibility_report(&DeviceParams { e_mirror: -1.0, ..DeviceParams::default() }).is_err());
    }

    #[test]
    fn report_text_is_stable() {
        let a = feasibility_report(&DeviceParams::default()).unwrap().to_kv_text();
        let b = feasibility_report(&DeviceParams::default()).unwrap().to_kv_text();
        assert_eq!(a, b);
        assert!(a.contains("tau = 5.000000e-7 s\n"));
        assert!(a.contains("ok.overall = true\n"));
    }
}
