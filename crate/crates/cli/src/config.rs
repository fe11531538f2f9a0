//! Run configuration: a TOML document whose physical keys carry their unit
//! as a suffix (`radius_m`, `frequency_hz`, ...).

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use metareactor::circuit::CoilSpec;
use metareactor::constants::COPPER_CONDUCTIVITY;
use metareactor::effmed::{ConductivityProfile, DEFAULT_CORE_FRACTION};
use metareactor::emfield::SusceptorSpec;
use metareactor::reactorsim::{
    BedSpec, ControlOptions, GhsvSpec, GridSpec, HeatingMode, InsulationSpec, ReactorCase, SolverOptions,
};
use metareactor::scaleup::{FeedTemplate, ReactorType, ScaleRules, SweepConfig, SweepTargets};
use metareactor::thermo::KineticsParams;

use crate::error::CliError;

/// Key suffixes accepted as units.
pub const UNIT_SUFFIXES: [&str; 10] = [
    "_m",
    "_hz",
    "_s_per_m",
    "_k",
    "_pa",
    "_per_h",
    "_w_per_m_k",
    "_j_per_mol",
    "_a",
    "_mol_per_s_m3_pa2",
];

/// Keys that are dimensionless or not physical quantities.
pub const DIMENSIONLESS_KEYS: [&str; 21] = [
    "heating",
    "kind",
    "p",
    "A",
    "core_fraction",
    "turns",
    "h2_co2_ratio",
    "void_fraction",
    "betas",
    "reactor_types",
    "target_conversion",
    "target_eta",
    "tailoring_floor",
    "eta_power_electronics",
    "workers",
    "grid_nr",
    "grid_nz",
    "relaxation",
    "tolerance",
    "conversion_tolerance",
    "max_iterations",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub susceptor: Option<SusceptorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coil: Option<CoilSection>,
    #[serde(default)]
    pub feed: FeedSection,
    #[serde(default)]
    pub bed: BedSection,
    #[serde(default)]
    pub insulation: InsulationSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub numerics: NumericsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SusceptorSection {
    pub radius_m: f64,
    pub length_m: f64,
    pub sigma_eff_s_per_m: f64,
    /// Drive frequency.
    pub frequency_hz: f64,
    #[serde(default = "default_heating")]
    pub heating: HeatingMode,
    #[serde(default)]
    pub profile: ProfileSection,
}

fn default_heating() -> HeatingMode {
    HeatingMode::Induction
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Uniform,
    PowerLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub kind: ProfileKind,
    #[serde(default = "default_exponent")]
    pub p: f64,
    #[serde(rename = "A", default = "default_amplitude")]
    pub a: f64,
    #[serde(default = "default_core_fraction")]
    pub core_fraction: f64,
}

fn default_exponent() -> f64 {
    2.0
}
fn default_amplitude() -> f64 {
    1.0
}
fn default_core_fraction() -> f64 {
    DEFAULT_CORE_FRACTION
}

impl Default for ProfileSection {
    fn default() -> Self {
        Self { kind: ProfileKind::Uniform, p: default_exponent(), a: default_amplitude(), core_fraction: DEFAULT_CORE_FRACTION }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoilSection {
    pub turns: u32,
    /// Radius to the conductor centreline.
    pub coil_radius_m: f64,
    pub half_length_m: f64,
    pub pitch_m: f64,
    pub wire_diameter_m: f64,
    #[serde(default = "default_copper")]
    pub conductor_conductivity_s_per_m: f64,
}

fn default_copper() -> f64 {
    COPPER_CONDUCTIVITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeedSection {
    pub h2_co2_ratio: f64,
    pub inlet_temperature_k: f64,
    pub pressure_pa: f64,
    /// Space velocity used by `simulate`.
    pub ghsv_per_h: f64,
}

impl Default for FeedSection {
    fn default() -> Self {
        let t = FeedTemplate::default();
        Self { h2_co2_ratio: t.h2_co2_ratio, inlet_temperature_k: t.inlet_temperature, pressure_pa: t.pressure, ghsv_per_h: 1800.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BedSection {
    pub void_fraction: f64,
    pub k_eff_w_per_m_k: f64,
    pub pre_exponential_mol_per_s_m3_pa2: f64,
    pub activation_energy_j_per_mol: f64,
    pub light_off_temperature_k: f64,
    pub light_off_width_k: f64,
}

impl Default for BedSection {
    fn default() -> Self {
        let b = BedSpec::default();
        Self {
            void_fraction: b.void_fraction,
            k_eff_w_per_m_k: b.k_eff,
            pre_exponential_mol_per_s_m3_pa2: b.kinetics.pre_exponential,
            activation_energy_j_per_mol: b.kinetics.activation_energy,
            light_off_temperature_k: b.kinetics.light_off_temperature,
            light_off_width_k: b.kinetics.light_off_width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InsulationSection {
    pub thickness_m: f64,
    pub k_ins_w_per_m_k: f64,
    pub ambient_temperature_k: f64,
}

impl Default for InsulationSection {
    fn default() -> Self {
        let i = InsulationSpec::default();
        Self { thickness_m: i.thickness, k_ins_w_per_m_k: i.k_ins, ambient_temperature_k: 298.15 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub betas: Vec<f64>,
    pub reactor_types: Vec<String>,
    pub target_conversion: f64,
    /// Outlet temperature setpoint, also used by `simulate`.
    pub target_temperature_k: f64,
    pub target_eta: f64,
    pub tailoring_floor: f64,
    pub eta_power_electronics: f64,
    /// 0 picks the number of available cores.
    pub workers: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        let c = SweepConfig::default();
        Self {
            betas: c.betas,
            reactor_types: c.reactor_types.iter().map(|t| t.as_str().to_string()).collect(),
            target_conversion: c.targets.conversion,
            target_temperature_k: c.targets.temperature,
            target_eta: c.target_eta,
            tailoring_floor: c.tailoring_floor,
            eta_power_electronics: c.eta_power_electronics,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub grid_nr: usize,
    pub grid_nz: usize,
    pub relaxation: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub temperature_tolerance_k: f64,
    pub conversion_tolerance: f64,
    pub max_current_a: f64,
    pub initial_ghsv_per_h: f64,
}

impl Default for NumericsSection {
    fn default() -> Self {
        let g = GridSpec::default();
        let c = ControlOptions::default();
        Self {
            grid_nr: g.nr,
            grid_nz: g.nz,
            relaxation: c.solver.relaxation,
            tolerance: c.solver.tolerance,
            max_iterations: c.solver.max_iterations,
            temperature_tolerance_k: c.temperature_tolerance,
            conversion_tolerance: c.conversion_tolerance,
            max_current_a: c.max_current,
            initial_ghsv_per_h: c.initial_ghsv,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            susceptor: None,
            coil: None,
            feed: FeedSection::default(),
            bed: BedSection::default(),
            insulation: InsulationSection::default(),
            sweep: SweepSection::default(),
            numerics: NumericsSection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| {
            let mut msg = e.to_string().trim_end().to_string();
            if let Some(hint) = unit_hint(text) {
                msg.push('\n');
                msg.push_str(&hint);
            }
            CliError::Config(msg)
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical TOML with every default filled in.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// SHA-256 of the canonical form, so formatting and comments do not
    /// matter. The worker count does not change results and is left out.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.sweep.workers = 0;
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |m: String| CliError::Config(m);
        if let Some(s) = &self.susceptor {
            self.susceptor_spec_from(s)?;
            if !(s.frequency_hz > 0.0 && s.frequency_hz.is_finite()) {
                return Err(cfg(format!("[susceptor] frequency_hz must be positive, got {}", s.frequency_hz)));
            }
        }
        if self.coil.is_some() {
            self.coil_spec()?;
        }
        self.sweep_config()?;
        if !(self.feed.ghsv_per_h > 0.0) {
            return Err(cfg(format!("[feed] ghsv_per_h must be positive, got {}", self.feed.ghsv_per_h)));
        }
        Ok(())
    }

    fn susceptor_spec_from(&self, s: &SusceptorSection) -> Result<SusceptorSpec, CliError> {
        let profile = match s.profile.kind {
            ProfileKind::Uniform => ConductivityProfile::uniform(s.sigma_eff_s_per_m),
            ProfileKind::PowerLaw => ConductivityProfile::PowerLaw {
                sigma_ref: s.sigma_eff_s_per_m,
                exponent: s.profile.p,
                amplitude: s.profile.a,
                core_fraction: s.profile.core_fraction,
            },
        };
        SusceptorSpec::new(s.radius_m, s.length_m, profile).map_err(|e| CliError::Config(format!("[susceptor] {e}")))
    }

    pub fn susceptor(&self) -> Result<&SusceptorSection, CliError> {
        self.susceptor.as_ref().ok_or_else(|| CliError::Config("this command needs a [susceptor] section".into()))
    }

    pub fn susceptor_spec(&self) -> Result<SusceptorSpec, CliError> {
        self.susceptor_spec_from(self.susceptor()?)
    }

    pub fn coil_spec(&self) -> Result<CoilSpec, CliError> {
        let c = self.coil.as_ref().ok_or_else(|| CliError::Config("this command needs a [coil] section".into()))?;
        let mut coil = CoilSpec::new(c.turns, c.coil_radius_m, c.half_length_m, c.pitch_m, c.wire_diameter_m)
            .map_err(|e| CliError::Config(format!("[coil] {e}; increase pitch_m or reduce wire_diameter_m")))?;
        coil.conductor_conductivity = c.conductor_conductivity_s_per_m;
        coil.validate().map_err(|e| CliError::Config(format!("[coil] {e}")))?;
        Ok(coil)
    }

    pub fn bed(&self) -> BedSpec {
        let b = &self.bed;
        BedSpec {
            void_fraction: b.void_fraction,
            k_eff: b.k_eff_w_per_m_k,
            kinetics: KineticsParams {
                pre_exponential: b.pre_exponential_mol_per_s_m3_pa2,
                activation_energy: b.activation_energy_j_per_mol,
                light_off_temperature: b.light_off_temperature_k,
                light_off_width: b.light_off_width_k,
            },
        }
    }

    pub fn insulation(&self) -> InsulationSpec {
        InsulationSpec { thickness: self.insulation.thickness_m, k_ins: self.insulation.k_ins_w_per_m_k }
    }

    pub fn feed_template(&self) -> FeedTemplate {
        FeedTemplate {
            h2_co2_ratio: self.feed.h2_co2_ratio,
            inlet_temperature: self.feed.inlet_temperature_k,
            pressure: self.feed.pressure_pa,
        }
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.numerics.grid_nr, self.numerics.grid_nz).map_err(|e| CliError::Config(format!("[numerics] {e}")))
    }

    pub fn control(&self) -> ControlOptions {
        let n = &self.numerics;
        ControlOptions {
            temperature_tolerance: n.temperature_tolerance_k,
            conversion_tolerance: n.conversion_tolerance,
            max_current: n.max_current_a,
            initial_ghsv: n.initial_ghsv_per_h,
            solver: SolverOptions { relaxation: n.relaxation, tolerance: n.tolerance, max_iterations: n.max_iterations },
        }
    }

    pub fn scale_rules(&self) -> ScaleRules {
        ScaleRules { insulation: self.insulation(), ..ScaleRules::default() }
    }

    /// Reactor described by the `[susceptor]` and `[coil]` sections at `[feed] ghsv_per_h`.
    pub fn reactor_case(&self) -> Result<ReactorCase, CliError> {
        let s = self.susceptor()?;
        let case = ReactorCase {
            susceptor: self.susceptor_spec()?,
            coil: self.coil_spec()?,
            feed: self.feed_template().feed(1.0).map_err(|e| CliError::Config(format!("[feed] {e}")))?,
            bed: self.bed(),
            insulation: self.insulation(),
            ambient_temperature: self.insulation.ambient_temperature_k,
            heating_mode: s.heating,
        };
        case.validate().map_err(|e| CliError::Config(e.to_string()))?;
        case.with_ghsv(&GhsvSpec::new(self.feed.ghsv_per_h)).map_err(|e| CliError::Config(format!("[feed] {e}")))
    }

    pub fn sweep_config(&self) -> Result<SweepConfig, CliError> {
        let s = &self.sweep;
        let cfg = |m: String| CliError::Config(format!("[sweep] {m}"));
        let mut types = Vec::new();
        for name in &s.reactor_types {
            let t: ReactorType = name.parse().map_err(|e: metareactor::Error| cfg(e.to_string()))?;
            types.push(t);
        }
        if s.betas.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
            return Err(cfg(format!("betas must be positive, got {:?}", s.betas)));
        }
        if !(s.target_conversion > 0.0 && s.target_conversion < 1.0) {
            return Err(cfg(format!("target_conversion must lie in (0, 1), got {}", s.target_conversion)));
        }
        for (name, v) in [
            ("target_eta", s.target_eta),
            ("tailoring_floor", s.tailoring_floor),
            ("eta_power_electronics", s.eta_power_electronics),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(cfg(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        let mut betas = s.betas.clone();
        betas.sort_by(f64::total_cmp);
        betas.dedup();
        Ok(SweepConfig {
            betas,
            reactor_types: types,
            targets: SweepTargets { conversion: s.target_conversion, temperature: s.target_temperature_k },
            target_eta: s.target_eta,
            tailoring_floor: s.tailoring_floor,
            eta_power_electronics: s.eta_power_electronics,
            rules: self.scale_rules(),
            feed: self.feed_template(),
            bed: self.bed(),
            ambient_temperature: self.insulation.ambient_temperature_k,
            grid: self.grid()?,
            control: self.control(),
        })
    }
}

fn has_unit_suffix(key: &str) -> bool {
    UNIT_SUFFIXES.iter().any(|s| key.ends_with(s))
}

/// Names a key that is missing its unit suffix, if there is one.
fn unit_hint(text: &str) -> Option<String> {
    let doc: toml::Table = text.parse().ok()?;
    let known = known_keys();
    let mut stack: Vec<(String, &toml::Table)> = vec![(String::new(), &doc)];
    while let Some((prefix, table)) = stack.pop() {
        for (key, value) in table {
            let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
            if let toml::Value::Table(t) = value {
                stack.push((path, t));
                continue;
            }
            if known.contains(&path) || has_unit_suffix(key) || DIMENSIONLESS_KEYS.contains(&key.as_str()) {
                continue;
            }
            let candidates: Vec<&String> =
                known.iter().filter(|k| k.starts_with(&format!("{path}_")) && has_unit_suffix(k)).collect();
            return Some(match candidates.first() {
                Some(c) => format!("key `{path}` has no unit suffix; did you mean `{c}`?"),
                None => format!("key `{path}` has no unit suffix (expected one of {UNIT_SUFFIXES:?})"),
            });
        }
    }
    None
}

/// Dotted key paths of a fully populated configuration.
pub fn known_keys() -> Vec<String> {
    let full = RunConfig { susceptor: Some(example_susceptor()), coil: Some(example_coil()), ..RunConfig::default() };
    let doc: toml::Table = full.to_toml().parse().expect("canonical form parses");
    let mut out = Vec::new();
    let mut stack: Vec<(String, toml::Table)> = vec![(String::new(), doc)];
    while let Some((prefix, table)) = stack.pop() {
        for (key, value) in table {
            let path = if prefix.is_empty() { key } else { format!("{prefix}.{key}") };
            match value {
                toml::Value::Table(t) => stack.push((path, t)),
                _ => out.push(path),
            }
        }
    }
    out.sort();
    out
}

fn example_susceptor() -> SusceptorSection {
    SusceptorSection {
        radius_m: 0.019,
        length_m: 0.15,
        sigma_eff_s_per_m: 400.0,
        frequency_hz: 6.78e6,
        heating: HeatingMode::Induction,
        profile: ProfileSection::default(),
    }
}

fn example_coil() -> CoilSection {
    CoilSection {
        turns: 7,
        coil_radius_m: 0.052,
        half_length_m: 0.1125,
        pitch_m: 0.0375,
        wire_diameter_m: 0.006,
        conductor_conductivity_s_per_m: COPPER_CONDUCTIVITY,
    }
}
