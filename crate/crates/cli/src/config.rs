//! Run configuration: flat `section.key = value` text (a TOML subset).
//!
//! Every key has a default equal to the reference scenario, so an empty file
//! is a valid configuration. [`RunConfig::echo`] writes every effective value
//! back out in the same format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use cpbscope::dose::SpecimenModelConstants;
use cpbscope::feasibility::{DeviceParams, PlanckConvention};
use cpbscope::imaging::{BeamProfile, SpecimenKind, SynthParams};
use cpbscope::protocol::{CorrectionMode, InelasticModel, ProtocolConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSettings {
    pub n_pixels: usize,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSettings {
    /// e/nm².
    pub dose: f64,
    /// nm; `None` means the map pixel size.
    pub step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecimenSettings {
    pub kind: SpecimenKind,
    /// Phase-map file; overrides the synthetic specimen when set.
    pub phase_map: Option<PathBuf>,
    pub synth: SynthParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterSettings {
    pub sigma_fine: f64,
    pub sigma_coarse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSettings {
    pub ks: Vec<u32>,
    pub budget: u64,
    pub replicates: u32,
    pub delta_theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub protocol: ProtocolConfig,
    pub detector: DetectorSettings,
    pub beam: BeamProfile,
    pub scan: ScanSettings,
    pub specimen: SpecimenSettings,
    pub filter: FilterSettings,
    pub scaling: ScalingSettings,
    pub device: DeviceParams,
    pub specimen_model: SpecimenModelConstants,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("out"),
            protocol: ProtocolConfig::default(),
            detector: DetectorSettings { n_pixels: 64, eta: 0.0 },
            beam: BeamProfile::default(),
            scan: ScanSettings { dose: 180.0, step: None },
            specimen: SpecimenSettings {
                kind: SpecimenKind::BlobNoise,
                phase_map: None,
                synth: SynthParams {
                    width: 100,
                    height: 100,
                    pixel_size: 0.3,
                    amplitude: 0.2,
                    radius: 10.0,
                    count: 60,
                },
            },
            filter: FilterSettings { sigma_fine: 0.3, sigma_coarse: 1.5 },
            scaling: ScalingSettings {
                ks: vec![1, 2, 4, 8, 16],
                budget: 4096,
                replicates: 200,
                delta_theta: 0.01,
            },
            device: DeviceParams::default(),
            specimen_model: SpecimenModelConstants::default(),
        }
    }
}

/// Flattened `dotted.key → value` view that tracks which keys were used.
struct Flat(BTreeMap<String, toml::Value>);

fn flatten(prefix: &str, table: toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            v => {
                out.insert(key, v);
            }
        }
    }
}

impl Flat {
    fn take(&mut self, key: &str) -> Option<toml::Value> {
        self.0.remove(key)
    }

    fn f64(&mut self, key: &str, into: &mut f64) -> Result<(), String> {
        match self.take(key) {
            None => Ok(()),
            Some(toml::Value::Float(f)) => {
                *into = f;
                Ok(())
            }
            Some(toml::Value::Integer(i)) => {
                *into = i as f64;
                Ok(())
            }
            Some(v) => Err(format!("`{key}` must be a number, got {v}")),
        }
    }

    fn opt_f64(&mut self, key: &str, into: &mut Option<f64>) -> Result<(), String> {
        if self.0.contains_key(key) {
            let mut v = 0.0;
            self.f64(key, &mut v)?;
            *into = Some(v);
        }
        Ok(())
    }

    fn int<T: TryFrom<i64>>(&mut self, key: &str, into: &mut T) -> Result<(), String> {
        match self.take(key) {
            None => Ok(()),
            Some(toml::Value::Integer(i)) => {
                *into = T::try_from(i).map_err(|_| format!("`{key}` = {i} is out of range"))?;
                Ok(())
            }
            Some(v) => Err(format!("`{key}` must be an integer, got {v}")),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>, String> {
        match self.take(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(format!("`{key}` must be a string, got {v}")),
        }
    }

    fn int_list(&mut self, key: &str, into: &mut Vec<u32>) -> Result<(), String> {
        match self.take(key) {
            None => Ok(()),
            Some(toml::Value::Array(items)) => {
                *into = items
                    .into_iter()
                    .map(|v| match v {
                        toml::Value::Integer(i) => u32::try_from(i).map_err(|_| format!("`{key}`: {i} out of range")),
                        v => Err(format!("`{key}` must list integers, got {v}")),
                    })
                    .collect::<Result<_, _>>()?;
                Ok(())
            }
            Some(toml::Value::String(s)) => {
                *into = parse_k_list(&s).map_err(|e| format!("`{key}`: {e}"))?;
                Ok(())
            }
            Some(v) => Err(format!("`{key}` must be a list, got {v}")),
        }
    }
}

/// `"1,2,4"` → `[1, 2, 4]`; empty input gives an empty list.
pub fn parse_k_list(s: &str) -> Result<Vec<u32>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| format!("invalid k `{t}`")))
        .collect()
}

pub fn parse_planck(s: &str) -> Result<PlanckConvention, String> {
    match s {
        "h" => Ok(PlanckConvention::Full),
        "hbar" => Ok(PlanckConvention::Reduced),
        _ => Err(format!("planck must be `h` or `hbar`, got `{s}`")),
    }
}

fn correction_name(c: CorrectionMode) -> &'static str {
    match c {
        CorrectionMode::PerRound => "per-round",
        CorrectionMode::Deferred => "deferred",
    }
}

fn inelastic_name(m: InelasticModel) -> &'static str {
    match m {
        InelasticModel::Delocalized => "delocalized",
        InelasticModel::Localized => "localized",
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
        let mut map = BTreeMap::new();
        flatten("", table, &mut map);
        let mut f = Flat(map);
        let mut c = RunConfig::default();

        // TOML integers are i64, so seeds above that range are written as strings.
        match f.take("seed") {
            None => {}
            Some(toml::Value::Integer(i)) => c.seed = u64::try_from(i).map_err(|_| format!("`seed` = {i} is negative"))?,
            Some(toml::Value::String(t)) => c.seed = t.parse().map_err(|_| format!("invalid seed `{t}`"))?,
            Some(v) => return Err(format!("`seed` must be an integer, got {v}")),
        }
        if let Some(dir) = f.string("output_dir")? {
            c.output_dir = PathBuf::from(dir);
        }

        let p = &mut c.protocol;
        f.int("protocol.k", &mut p.k)?;
        f.f64("protocol.delta_theta", &mut p.delta_theta)?;
        f.f64("protocol.p_inelastic", &mut p.p_inelastic)?;
        f.f64("protocol.xi_precision", &mut p.xi_precision)?;
        f.f64("protocol.localization_epsilon", &mut p.localization_epsilon)?;
        f.f64("protocol.p_loss", &mut p.p_loss)?;
        f.f64("protocol.delta_theta_inel", &mut p.delta_theta_inel)?;
        if let Some(m) = f.string("protocol.inelastic_model")? {
            p.inelastic_model = match m.as_str() {
                "delocalized" => InelasticModel::Delocalized,
                "localized" => InelasticModel::Localized,
                _ => return Err(format!("unknown protocol.inelastic_model `{m}`")),
            };
        }
        if let Some(m) = f.string("protocol.correction")? {
            p.correction = match m.as_str() {
                "per-round" => CorrectionMode::PerRound,
                "deferred" => CorrectionMode::Deferred,
                _ => return Err(format!("unknown protocol.correction `{m}`")),
            };
        }

        f.int("detector.n_pixels", &mut c.detector.n_pixels)?;
        f.f64("detector.eta", &mut c.detector.eta)?;

        f.f64("beam.sigma0", &mut c.beam.sigma0)?;
        f.f64("beam.sigma1", &mut c.beam.sigma1)?;
        f.f64("beam.offset_x", &mut c.beam.offset.0)?;
        f.f64("beam.offset_y", &mut c.beam.offset.1)?;

        f.f64("scan.dose", &mut c.scan.dose)?;
        f.opt_f64("scan.step", &mut c.scan.step)?;

        if let Some(k) = f.string("specimen.kind")? {
            c.specimen.kind = SpecimenKind::parse(&k).ok_or_else(|| format!("unknown specimen.kind `{k}`"))?;
        }
        if let Some(path) = f.string("specimen.phase_map")? {
            c.specimen.phase_map = Some(PathBuf::from(path));
        }
        let s = &mut c.specimen.synth;
        f.int("specimen.width", &mut s.width)?;
        f.int("specimen.height", &mut s.height)?;
        f.f64("specimen.pixel_size", &mut s.pixel_size)?;
        f.f64("specimen.amplitude", &mut s.amplitude)?;
        f.f64("specimen.radius", &mut s.radius)?;
        f.int("specimen.count", &mut s.count)?;

        f.f64("filter.sigma_fine", &mut c.filter.sigma_fine)?;
        f.f64("filter.sigma_coarse", &mut c.filter.sigma_coarse)?;

        f.int_list("scaling.ks", &mut c.scaling.ks)?;
        f.int("scaling.budget", &mut c.scaling.budget)?;
        f.int("scaling.replicates", &mut c.scaling.replicates)?;
        f.f64("scaling.delta_theta", &mut c.scaling.delta_theta)?;

        let d = &mut c.device;
        f.f64("device.c_sigma", &mut d.c_sigma)?;
        f.f64("device.c_g", &mut d.c_g)?;
        f.f64("device.v_g", &mut d.v_g)?;
        f.f64("device.e_j", &mut d.e_j)?;
        f.f64("device.temperature", &mut d.temperature)?;
        f.f64("device.e_mirror", &mut d.e_mirror)?;
        f.f64("device.l_cpb", &mut d.l_cpb)?;
        f.f64("device.delta_e", &mut d.delta_e)?;
        f.f64("device.path_length", &mut d.path_length)?;
        f.f64("device.electron_speed", &mut d.electron_speed)?;
        f.f64("device.imaging_energy", &mut d.imaging_energy)?;
        f.f64("device.beam_angle_beta", &mut d.beam_angle_beta)?;
        f.f64("device.magnification", &mut d.magnification)?;
        f.f64("device.defocus_d", &mut d.defocus_d)?;
        f.int("device.k", &mut d.k)?;
        f.f64("device.pulse_rate", &mut d.pulse_rate)?;
        f.f64("device.qubit_lifetime", &mut d.qubit_lifetime)?;
        f.opt_f64("device.interaction_time", &mut d.interaction_time)?;
        if let Some(pc) = f.string("device.planck")? {
            d.planck = parse_planck(&pc)?;
        }
        f.f64("device.thresholds.much_less", &mut d.thresholds.much_less)?;
        f.f64("device.thresholds.charge_regime", &mut d.thresholds.charge_regime)?;
        f.f64("device.thresholds.max_delta_tau", &mut d.thresholds.max_delta_tau)?;

        f.f64("specimen_model.alpha", &mut c.specimen_model.alpha)?;
        f.f64("specimen_model.gamma", &mut c.specimen_model.gamma)?;

        if let Some(key) = f.0.keys().next() {
            return Err(format!("unknown configuration key `{key}`"));
        }
        Ok(c)
    }

    /// Every effective setting, in a form [`RunConfig::parse`] reads back.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let q = |v: &str| format!("{v:?}");
        let num = |v: f64| format!("{v:?}");

        if i64::try_from(self.seed).is_ok() {
            kv("seed", self.seed.to_string());
        } else {
            kv("seed", q(&self.seed.to_string()));
        }
        kv("output_dir", q(&self.output_dir.display().to_string()));

        let p = &self.protocol;
        kv("protocol.k", p.k.to_string());
        kv("protocol.delta_theta", num(p.delta_theta));
        kv("protocol.p_inelastic", num(p.p_inelastic));
        kv("protocol.xi_precision", num(p.xi_precision));
        kv("protocol.localization_epsilon", num(p.localization_epsilon));
        kv("protocol.p_loss", num(p.p_loss));
        kv("protocol.delta_theta_inel", num(p.delta_theta_inel));
        kv("protocol.inelastic_model", q(inelastic_name(p.inelastic_model)));
        kv("protocol.correction", q(correction_name(p.correction)));

        kv("detector.n_pixels", self.detector.n_pixels.to_string());
        kv("detector.eta", num(self.detector.eta));

        kv("beam.sigma0", num(self.beam.sigma0));
        kv("beam.sigma1", num(self.beam.sigma1));
        kv("beam.offset_x", num(self.beam.offset.0));
        kv("beam.offset_y", num(self.beam.offset.1));

        kv("scan.dose", num(self.scan.dose));
        if let Some(step) = self.scan.step {
            kv("scan.step", num(step));
        }

        kv("specimen.kind", q(self.specimen.kind.name()));
        if let Some(path) = &self.specimen.phase_map {
            kv("specimen.phase_map", q(&path.display().to_string()));
        }
        let sp = &self.specimen.synth;
        kv("specimen.width", sp.width.to_string());
        kv("specimen.height", sp.height.to_string());
        kv("specimen.pixel_size", num(sp.pixel_size));
        kv("specimen.amplitude", num(sp.amplitude));
        kv("specimen.radius", num(sp.radius));
        kv("specimen.count", sp.count.to_string());

        kv("filter.sigma_fine", num(self.filter.sigma_fine));
        kv("filter.sigma_coarse", num(self.filter.sigma_coarse));

        let ks: Vec<String> = self.scaling.ks.iter().map(|k| k.to_string()).collect();
        kv("scaling.ks", format!("[{}]", ks.join(", ")));
        kv("scaling.budget", self.scaling.budget.to_string());
        kv("scaling.replicates", self.scaling.replicates.to_string());
        kv("scaling.delta_theta", num(self.scaling.delta_theta));

        let d = &self.device;
        kv("device.c_sigma", num(d.c_sigma));
        kv("device.c_g", num(d.c_g));
        kv("device.v_g", num(d.v_g));
        kv("device.e_j", num(d.e_j));
        kv("device.temperature", num(d.temperature));
        kv("device.e_mirror", num(d.e_mirror));
        kv("device.l_cpb", num(d.l_cpb));
        kv("device.delta_e", num(d.delta_e));
        kv("device.path_length", num(d.path_length));
        kv("device.electron_speed", num(d.electron_speed));
        kv("device.imaging_energy", num(d.imaging_energy));
        kv("device.beam_angle_beta", num(d.beam_angle_beta));
        kv("device.magnification", num(d.magnification));
        kv("device.defocus_d", num(d.defocus_d));
        kv("device.k", d.k.to_string());
        kv("device.pulse_rate", num(d.pulse_rate));
        kv("device.qubit_lifetime", num(d.qubit_lifetime));
        if let Some(t) = d.interaction_time {
            kv("device.interaction_time", num(t));
        }
        kv("device.planck", q(d.planck.name()));
        kv("device.thresholds.much_less", num(d.thresholds.much_less));
        kv("device.thresholds.charge_regime", num(d.thresholds.charge_regime));
        kv("device.thresholds.max_delta_tau", num(d.thresholds.max_delta_tau));

        kv("specimen_model.alpha", num(self.specimen_model.alpha));
        kv("specimen_model.gamma", num(self.specimen_model.gamma));
        s
    }
}
