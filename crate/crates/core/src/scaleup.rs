//! Scale-up harness: geometry rules in the scale factor `beta`, design points
//! on a fixed-coupling contour, radial tailoring, and GHSV/efficiency sweeps.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use crate::circuit::{self, circuit_report, coil_srf, CircuitReport, CoilSpec};
use crate::effmed::{sigma_for_delta_ratio, ConductivityProfile};
use crate::emfield::{fmt, uniformity_metric, SusceptorSpec};
use crate::error::{ensure_positive, Error, Result};
use crate::reactorsim::{
    find_ghsv_for_conversion, BedSpec, ControlOptions, GhsvSpec, GridSpec, HeatingMode, InsulationSpec,
    ReactorCase, SimulationResult,
};
use crate::thermo::{self, GasFeed, ThermoTable};

/// Skin depth over radius on the design manifold.
pub const DESIGN_DELTA_RATIO: f64 = 0.5;
/// Inner fraction of the radius left out of the uniformity metric.
pub const UNIFORMITY_CUTOFF: f64 = 0.2;

/// Geometric rules linking every reactor dimension to `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleRules {
    /// Susceptor diameter per unit beta [m].
    pub diameter_per_beta: f64,
    pub length_over_diameter: f64,
    pub insulation: InsulationSpec,
    /// Radial gap between the insulation and the coil conductor [m].
    pub coil_gap: f64,
    /// Wire diameter at beta = 1 [m]; scales as sqrt(beta).
    pub wire_diameter: f64,
    pub turns: u32,
    /// Coil pitch as a fraction of the susceptor length.
    pub pitch_fraction: f64,
}

impl Default for ScaleRules {
    fn default() -> Self {
        Self {
            diameter_per_beta: 0.075 / 4.0,
            length_over_diameter: 150.0 / 38.0,
            insulation: InsulationSpec::default(),
            coil_gap: 0.005,
            wire_diameter: 0.006,
            turns: 7,
            pitch_fraction: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleGeometry {
    pub beta: f64,
    pub radius: f64,
    pub length: f64,
    pub coil: CoilSpec,
    pub insulation: InsulationSpec,
}

impl ScaleGeometry {
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn susceptor(&self, profile: ConductivityProfile) -> Result<SusceptorSpec> {
        SusceptorSpec::new(self.radius, self.length, profile)
    }
}

impl ScaleRules {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("diameter_per_beta", self.diameter_per_beta)?;
        ensure_positive("length_over_diameter", self.length_over_diameter)?;
        ensure_positive("wire_diameter", self.wire_diameter)?;
        ensure_positive("pitch_fraction", self.pitch_fraction)?;
        if !(self.coil_gap >= 0.0 && self.insulation.thickness >= 0.0) {
            return Err(Error::Domain("coil gap and insulation thickness must be non-negative".into()));
        }
        ensure_positive("k_ins", self.insulation.k_ins)?;
        if self.turns < 2 {
            return Err(Error::Domain("scale rules need at least two coil turns".into()));
        }
        Ok(())
    }

    pub fn geometry(&self, beta: f64) -> Result<ScaleGeometry> {
        ensure_positive("beta", beta)?;
        self.geometry_for_diameter(beta, self.diameter_per_beta * beta, beta)
    }

    /// Geometry built around an explicit susceptor diameter; the wire scales
    /// with `sqrt(wire_beta)`.
    pub fn geometry_for_diameter(&self, beta: f64, diameter: f64, wire_beta: f64) -> Result<ScaleGeometry> {
        self.validate()?;
        ensure_positive("diameter", diameter)?;
        ensure_positive("wire_beta", wire_beta)?;
        let radius = 0.5 * diameter;
        let length = diameter * self.length_over_diameter;
        let wire = self.wire_diameter * wire_beta.sqrt();
        let coil_radius = radius + self.insulation.thickness + self.coil_gap + 0.5 * wire;
        let pitch = self.pitch_fraction * length;
        let half_length = 0.5 * (self.turns - 1) as f64 * pitch;
        let coil = CoilSpec::new(self.turns, coil_radius, half_length, pitch, wire)?;
        Ok(ScaleGeometry { beta, radius, length, coil, insulation: self.insulation })
    }
}

/// Geometry at scale `beta` under the default rules.
pub fn scale_geometry(beta: f64) -> Result<ScaleGeometry> {
    ScaleRules::default().geometry(beta)
}

/// Bench-scale series: 38 mm x 150 mm susceptors multiplied by `beta_lab`.
pub fn lab_geometry(beta_lab: f64) -> Result<ScaleGeometry> {
    ensure_positive("beta_lab", beta_lab)?;
    let rules = ScaleRules::default();
    rules.geometry_for_diameter(beta_lab, 0.038 * beta_lab, beta_lab)
}

/// Drive frequency of the bench-scale series [Hz].
pub const LAB_FREQUENCY: f64 = 6.78e6;
/// `(beta_lab, sigma_eff)` of the bench-scale susceptors.
pub const LAB_SERIES: [(f64, f64); 3] = [(1.0, 400.0), (2.0, 201.0), (3.7, 70.0)];

/// Bench-scale reactor with a uniform susceptor; the feed flow is a
/// placeholder until a GHSV is applied.
pub fn lab_case(beta_lab: f64, sigma_eff: f64, heating_mode: HeatingMode) -> Result<ReactorCase> {
    let geo = lab_geometry(beta_lab)?;
    let defaults = SweepConfig::default();
    let case = ReactorCase {
        susceptor: geo.susceptor(ConductivityProfile::uniform(sigma_eff))?,
        coil: geo.coil,
        feed: defaults.feed.feed(1.0)?,
        bed: defaults.bed,
        insulation: geo.insulation,
        ambient_temperature: defaults.ambient_temperature,
        heating_mode,
    };
    case.validate()?;
    Ok(case)
}

/// One row of the scale-up design table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub beta: f64,
    pub susceptor_diameter: f64,
    pub frequency: f64,
    pub sigma_eff_uniform: f64,
    pub tailored_a: f64,
    pub eta_coupling_uniform: f64,
    pub eta_coupling_tailored: f64,
}

fn uniform_eta(geo: &ScaleGeometry, frequency: f64) -> Result<(f64, f64)> {
    let sigma = sigma_for_delta_ratio(geo.radius, frequency, DESIGN_DELTA_RATIO)?;
    let spec = geo.susceptor(ConductivityProfile::uniform(sigma))?;
    Ok((sigma, circuit_report(geo.beta, &spec, &geo.coil, frequency)?.eta_coupling))
}

/// Frequency on the `delta = R/2` manifold where coupling equals `target_eta`.
pub fn contour_frequency(geo: &ScaleGeometry, target_eta: f64) -> Result<f64> {
    if !(target_eta > 0.0 && target_eta < 1.0) {
        return Err(Error::Domain(format!("target coupling {target_eta} outside (0, 1)")));
    }
    let (mut lo, mut hi) = (1e-6_f64, 1e10_f64);
    let eta_hi = uniform_eta(geo, hi)?.1;
    if eta_hi < target_eta {
        return Err(Error::Infeasible(format!(
            "coupling {target_eta} not reached below {hi:.1e} Hz (max {eta_hi:.4})"
        )));
    }
    if uniform_eta(geo, lo)?.1 >= target_eta {
        return Err(Error::Infeasible(format!("coupling {target_eta} already exceeded at {lo} Hz")));
    }
    while hi / lo - 1.0 > 1e-9 {
        let mid = (lo * hi).sqrt();
        if uniform_eta(geo, mid)?.1 < target_eta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Uniform design point of `geo` at `target_eta`, rejected above the coil
/// self-resonance.
pub fn uniform_design_point(geo: &ScaleGeometry, target_eta: f64) -> Result<ScalePoint> {
    let f = contour_frequency(geo, target_eta)?;
    let srf = coil_srf(&geo.coil)?;
    if !circuit::operable_region(geo.beta, f, &geo.coil)? {
        return Err(Error::Infeasible(format!(
            "design frequency {f:.4e} Hz lies above the coil self-resonance {:.4e} Hz",
            srf.f_res
        )));
    }
    let (sigma, eta) = uniform_eta(geo, f)?;
    Ok(ScalePoint {
        beta: geo.beta,
        susceptor_diameter: geo.diameter(),
        frequency: f,
        sigma_eff_uniform: sigma,
        tailored_a: f64::NAN,
        eta_coupling_uniform: eta,
        eta_coupling_tailored: f64::NAN,
    })
}

/// Full design point with default rules; the tailored columns use a
/// coupling floor two points below `target_eta`.
pub fn design_point_on_contour(beta: f64, target_eta: f64) -> Result<ScalePoint> {
    let geo = scale_geometry(beta)?;
    design_point_with_tailoring(&geo, target_eta, target_eta - 0.02)
}

pub fn design_point_with_tailoring(geo: &ScaleGeometry, target_eta: f64, floor: f64) -> Result<ScalePoint> {
    let mut point = uniform_design_point(geo, target_eta)?;
    let t = optimize_tailoring_for(geo, point.frequency, point.sigma_eff_uniform, floor)?;
    point.tailored_a = t.amplitude;
    point.eta_coupling_tailored = t.eta;
    Ok(point)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tailoring {
    pub amplitude: f64,
    pub eta: f64,
    pub uniformity_cv: f64,
}

/// Coupling and outer-region power CV of the `1/r^2` profile with amplitude `a`.
pub fn tailoring_metrics(geo: &ScaleGeometry, frequency: f64, sigma_ref: f64, a: f64) -> Result<(f64, f64)> {
    let spec = geo.susceptor(ConductivityProfile::inverse_square(sigma_ref, a))?;
    let eta = circuit_report(geo.beta, &spec, &geo.coil, frequency)?.eta_coupling;
    let field = circuit::radial_unit_field(&spec, frequency)?;
    Ok((eta, uniformity_metric(&field, UNIFORMITY_CUTOFF)?))
}

/// Tailoring amplitude with the smallest power CV whose coupling stays at or
/// above `floor`, reference conductivity from the design manifold.
pub fn optimize_tailoring_a(beta: f64, frequency: f64, floor: f64) -> Result<Tailoring> {
    let geo = scale_geometry(beta)?;
    let sigma = sigma_for_delta_ratio(geo.radius, frequency, DESIGN_DELTA_RATIO)?;
    optimize_tailoring_for(&geo, frequency, sigma, floor)
}

pub fn optimize_tailoring_for(geo: &ScaleGeometry, frequency: f64, sigma_ref: f64, floor: f64) -> Result<Tailoring> {
    let spec = geo.susceptor(ConductivityProfile::uniform(sigma_ref))?;
    let eta_u = circuit_report(geo.beta, &spec, &geo.coil, frequency)?.eta_coupling;
    if !(floor < eta_u) {
        return Err(Error::Infeasible(format!(
            "coupling floor {floor} is not below the uniform coupling {eta_u:.4}"
        )));
    }
    let (a_min, a_max, n) = (0.1_f64, 1e4_f64, 81);
    let grid: Vec<f64> = (0..n).map(|k| a_min * (a_max / a_min).powf(k as f64 / (n - 1) as f64)).collect();
    let mut evals = Vec::with_capacity(n);
    for &a in &grid {
        evals.push(tailoring_metrics(geo, frequency, sigma_ref, a)?);
    }
    let best = (0..n)
        .filter(|&k| evals[k].0 >= floor)
        .min_by(|&x, &y| evals[x].1.total_cmp(&evals[y].1))
        .ok_or_else(|| Error::Infeasible(format!("no amplitude in [{a_min}, {a_max}] keeps coupling >= {floor}")))?;
    let mut choice = Tailoring { amplitude: grid[best], eta: evals[best].0, uniformity_cv: evals[best].1 };
    // Refine towards the floor when the next grid point would lower the CV
    // further but breaks the coupling constraint.
    for nb in [best.wrapping_sub(1), best + 1] {
        if nb >= n || evals[nb].0 >= floor || evals[nb].1 >= evals[best].1 {
            continue;
        }
        let (mut ok, mut bad) = (grid[best].ln(), grid[nb].ln());
        for _ in 0..30 {
            let mid = 0.5 * (ok + bad);
            if tailoring_metrics(geo, frequency, sigma_ref, mid.exp())?.0 >= floor {
                ok = mid;
            } else {
                bad = mid;
            }
        }
        let a = ok.exp();
        let (eta, cv) = tailoring_metrics(geo, frequency, sigma_ref, a)?;
        if cv < choice.uniformity_cv {
            choice = Tailoring { amplitude: a, eta, uniformity_cv: cv };
        }
    }
    Ok(choice)
}

/// Stored reference design table used as a regression fixture.
pub fn reference_design_table() -> Vec<ScalePoint> {
    let text = include_str!("../data/scale_reference.csv");
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.records()
        .map(|rec| {
            let rec = rec.expect("embedded reference table is well formed");
            let num = |i: usize| rec[i].trim().parse::<f64>().unwrap_or(f64::NAN);
            ScalePoint {
                beta: num(0),
                susceptor_diameter: num(1),
                frequency: num(2),
                sigma_eff_uniform: num(3),
                tailored_a: num(4),
                eta_coupling_uniform: num(5),
                eta_coupling_tailored: num(6),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub eta_coupling: f64,
    pub eta_power_electronics: f64,
    pub q_sensible: f64,
    pub q_reaction: f64,
    pub q_insulation_loss: f64,
    pub p_susceptor: f64,
    pub p_coil_loss: f64,
    pub p_electrical_in: f64,
    pub eta_total: f64,
}

/// Wall-plug efficiency of a converged solve.
pub fn total_efficiency(result: &SimulationResult, circuit: &CircuitReport, eta_pe: f64) -> EfficiencyReport {
    efficiency_from_duties(
        result.ledger.p_susceptor,
        result.ledger.q_sensible,
        result.ledger.q_reaction,
        result.ledger.q_insulation_loss,
        circuit.eta_coupling,
        eta_pe,
    )
}

fn efficiency_from_duties(p_susc: f64, q_sens: f64, q_rxn: f64, q_loss: f64, eta_c: f64, eta_pe: f64) -> EfficiencyReport {
    let p_coil = if eta_c > 0.0 { p_susc * (1.0 - eta_c) / eta_c } else { f64::INFINITY };
    let p_in = (p_susc + p_coil) / eta_pe;
    let eta_total = if p_in > 0.0 && p_in.is_finite() { (q_sens + q_rxn) / p_in } else { 0.0 };
    EfficiencyReport {
        eta_coupling: eta_c,
        eta_power_electronics: eta_pe,
        q_sensible: q_sens,
        q_reaction: q_rxn,
        q_insulation_loss: q_loss,
        p_susceptor: p_susc,
        p_coil_loss: p_coil,
        p_electrical_in: p_in,
        eta_total,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReactorType {
    Uniform,
    Tailored,
    Wall,
}

impl ReactorType {
    pub const ALL: [ReactorType; 3] = [ReactorType::Uniform, ReactorType::Tailored, ReactorType::Wall];

    pub fn as_str(self) -> &'static str {
        match self {
            ReactorType::Uniform => "uniform",
            ReactorType::Tailored => "tailored",
            ReactorType::Wall => "wall",
        }
    }
}

impl std::str::FromStr for ReactorType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(ReactorType::Uniform),
            "tailored" => Ok(ReactorType::Tailored),
            "wall" => Ok(ReactorType::Wall),
            other => Err(Error::Domain(format!("unknown reactor type {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepTargets {
    pub conversion: f64,
    pub temperature: f64,
}

impl Default for SweepTargets {
    fn default() -> Self {
        Self { conversion: 0.5, temperature: 823.15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedTemplate {
    pub h2_co2_ratio: f64,
    pub inlet_temperature: f64,
    pub pressure: f64,
}

impl Default for FeedTemplate {
    fn default() -> Self {
        Self {
            h2_co2_ratio: thermo::CALIBRATED_H2_CO2_RATIO,
            inlet_temperature: 298.15,
            pressure: crate::constants::ATM,
        }
    }
}

impl FeedTemplate {
    pub fn feed(&self, molar_flow: f64) -> Result<GasFeed> {
        GasFeed::h2_co2(molar_flow, self.h2_co2_ratio, self.inlet_temperature, self.pressure)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub betas: Vec<f64>,
    pub reactor_types: Vec<ReactorType>,
    pub targets: SweepTargets,
    pub target_eta: f64,
    pub tailoring_floor: f64,
    pub eta_power_electronics: f64,
    pub rules: ScaleRules,
    pub feed: FeedTemplate,
    pub bed: BedSpec,
    pub ambient_temperature: f64,
    pub grid: GridSpec,
    pub control: ControlOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            betas: vec![4.0, 8.0, 16.0, 20.0, 24.0, 28.0, 32.0],
            reactor_types: ReactorType::ALL.to_vec(),
            targets: SweepTargets::default(),
            target_eta: 0.95,
            tailoring_floor: 0.93,
            eta_power_electronics: 0.95,
            rules: ScaleRules::default(),
            feed: FeedTemplate::default(),
            bed: BedSpec::default(),
            ambient_temperature: 298.15,
            grid: GridSpec::default(),
            control: ControlOptions::default(),
        }
    }
}

impl SweepConfig {
    pub fn design_point(&self, beta: f64) -> Result<(ScaleGeometry, ScalePoint)> {
        let geo = self.rules.geometry(beta)?;
        let point = design_point_with_tailoring(&geo, self.target_eta, self.tailoring_floor)?;
        Ok((geo, point))
    }

    /// Reactor case of one type at a design point; the feed flow is a
    /// placeholder until a GHSV is applied.
    pub fn build_case(&self, geo: &ScaleGeometry, point: &ScalePoint, kind: ReactorType) -> Result<ReactorCase> {
        let profile = match kind {
            ReactorType::Tailored => ConductivityProfile::inverse_square(point.sigma_eff_uniform, point.tailored_a),
            _ => ConductivityProfile::uniform(point.sigma_eff_uniform),
        };
        let case = ReactorCase {
            susceptor: geo.susceptor(profile)?,
            coil: geo.coil,
            feed: self.feed.feed(1.0)?,
            bed: self.bed,
            insulation: geo.insulation,
            ambient_temperature: self.ambient_temperature,
            heating_mode: if kind == ReactorType::Wall { HeatingMode::Wall } else { HeatingMode::Induction },
        };
        case.validate()?;
        Ok(case)
    }

    /// Runs one `(beta, type)` combination.
    pub fn run_row(&self, geo: &ScaleGeometry, point: &ScalePoint, kind: ReactorType) -> Result<(SweepRow, EfficiencyReport)> {
        let case = self.build_case(geo, point, kind)?;
        let search = find_ghsv_for_conversion(
            &case,
            point.frequency,
            self.targets.conversion,
            self.targets.temperature,
            self.grid,
            &self.control,
        )?;
        // Wall heating is costed as an induction-heated shell at the uniform coupling.
        let report = circuit_report(geo.beta, &case.susceptor, &case.coil, point.frequency)?;
        let eff = total_efficiency(&search.result, &report, self.eta_power_electronics);
        let row = SweepRow {
            beta: geo.beta,
            reactor_type: kind,
            frequency: point.frequency,
            sigma_eff: point.sigma_eff_uniform,
            a: if kind == ReactorType::Tailored { point.tailored_a } else { f64::NAN },
            ghsv: search.ghsv,
            x_co2: search.result.x_co2_outlet,
            t_out_max: search.result.t_outlet_max,
            eta_coupling: report.eta_coupling,
            eta_total: eff.eta_total,
            error: String::new(),
        };
        Ok((row, eff))
    }

    /// Isothermal plug-flow bound at the space velocity `ghsv_ref`.
    pub fn plugflow_limit(&self, beta: f64, ghsv_ref: f64) -> Result<f64> {
        let (geo, point) = self.design_point(beta)?;
        self.plugflow_limit_for(&geo, point.eta_coupling_uniform, ghsv_ref)
    }

    pub fn plugflow_limit_for(&self, geo: &ScaleGeometry, eta_coupling: f64, ghsv_ref: f64) -> Result<f64> {
        ensure_positive("ghsv_ref", ghsv_ref)?;
        let table = ThermoTable::builtin();
        let volume = PI * geo.radius * geo.radius * geo.length;
        let flow = crate::reactorsim::ghsv_to_molar_flow(&GhsvSpec::new(ghsv_ref), volume)?;
        let feed = self.feed.feed(flow)?;
        let t = self.targets.temperature;
        let n_in = feed.species_flows();
        let q_sens = thermo::sensible_heat_duty(&feed, t, &table)?;
        let q_rxn = thermo::reaction_heat_duty(self.targets.conversion * n_in[0], t, &table)?;
        let ins = geo.insulation;
        let shell = 2.0 * PI * geo.radius * geo.length * ins.k_ins / (geo.radius * (1.0 + ins.thickness / geo.radius).ln());
        let q_loss = shell * (t - self.ambient_temperature);
        let p_susc = q_sens + q_rxn + q_loss;
        Ok(efficiency_from_duties(p_susc, q_sens, q_rxn, q_loss, eta_coupling, self.eta_power_electronics).eta_total)
    }
}

/// Plug-flow efficiency bound under the default sweep configuration.
pub fn plugflow_limit_efficiency(beta: f64, ghsv_ref: f64) -> Result<f64> {
    SweepConfig::default().plugflow_limit(beta, ghsv_ref)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    pub reactor_type: ReactorType,
    pub frequency: f64,
    pub sigma_eff: f64,
    pub a: f64,
    pub ghsv: f64,
    pub x_co2: f64,
    pub t_out_max: f64,
    pub eta_coupling: f64,
    pub eta_total: f64,
    /// Empty on success.
    pub error: String,
}

impl SweepRow {
    pub const CSV_HEADER: [&'static str; 11] = [
        "beta",
        "reactor_type",
        "f_Hz",
        "sigma_eff",
        "A",
        "ghsv_per_h",
        "X_CO2",
        "T_out_max_K",
        "eta_coupling",
        "eta_total",
        "error",
    ];

    pub fn failed(beta: f64, kind: ReactorType, point: Option<&ScalePoint>, err: &Error) -> Self {
        let nan = f64::NAN;
        Self {
            beta,
            reactor_type: kind,
            frequency: point.map_or(nan, |p| p.frequency),
            sigma_eff: point.map_or(nan, |p| p.sigma_eff_uniform),
            a: point.filter(|_| kind == ReactorType::Tailored).map_or(nan, |p| p.tailored_a),
            ghsv: nan,
            x_co2: nan,
            t_out_max: nan,
            eta_coupling: nan,
            eta_total: nan,
            error: err.to_string(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_empty()
    }

    pub fn csv_record(&self) -> [String; 11] {
        [
            fmt(self.beta),
            self.reactor_type.as_str().to_string(),
            fmt(self.frequency),
            fmt(self.sigma_eff),
            fmt(self.a),
            fmt(self.ghsv),
            fmt(self.x_co2),
            fmt(self.t_out_max),
            fmt(self.eta_coupling),
            fmt(self.eta_total),
            self.error.clone(),
        ]
    }

    pub fn from_record(rec: &csv::StringRecord) -> Result<Self> {
        if rec.len() != 11 {
            return Err(Error::Data(format!("sweep row has {} fields, expected 11", rec.len())));
        }
        let num = |i: usize| -> Result<f64> {
            rec[i].trim().parse::<f64>().map_err(|_| Error::Data(format!("bad number {:?} in sweep row", &rec[i])))
        };
        Ok(Self {
            beta: num(0)?,
            reactor_type: rec[1].parse()?,
            frequency: num(2)?,
            sigma_eff: num(3)?,
            a: num(4)?,
            ghsv: num(5)?,
            x_co2: num(6)?,
            t_out_max: num(7)?,
            eta_coupling: num(8)?,
            eta_total: num(9)?,
            error: rec[10].to_string(),
        })
    }

    fn key(&self) -> (u64, ReactorType) {
        (self.beta.to_bits(), self.reactor_type)
    }
}

fn sort_rows(rows: &mut [SweepRow]) {
    rows.sort_by(|a, b| a.beta.total_cmp(&b.beta).then(a.reactor_type.cmp(&b.reactor_type)));
}

/// Runs every `(beta, type)` combination on up to `workers` threads. Rows
/// whose key is already in `done` are skipped; `on_row` sees each new row as
/// it completes. The result is sorted by `(beta, type)`.
pub fn sweep_with(
    config: &SweepConfig,
    workers: usize,
    done: &[SweepRow],
    on_row: &(dyn Fn(&SweepRow) + Sync),
) -> Vec<SweepRow> {
    let have: std::collections::HashSet<_> = done.iter().map(SweepRow::key).collect();
    let mut tasks = Vec::new();
    for &beta in &config.betas {
        for &kind in &config.reactor_types {
            if !have.contains(&(beta.to_bits(), kind)) {
                tasks.push((beta, kind));
            }
        }
    }
    let mut designs: BTreeMap<u64, std::result::Result<(ScaleGeometry, ScalePoint), Error>> = BTreeMap::new();
    for &(beta, _) in &tasks {
        designs.entry(beta.to_bits()).or_insert_with(|| config.design_point(beta));
    }
    let queue = Mutex::new(tasks.into_iter());
    let out = Mutex::new(done.to_vec());
    let run = |beta: f64, kind: ReactorType| -> SweepRow {
        match &designs[&beta.to_bits()] {
            Ok((geo, point)) => match config.run_row(geo, point, kind) {
                Ok((row, _)) => row,
                Err(e) => SweepRow::failed(beta, kind, Some(point), &e),
            },
            Err(e) => SweepRow::failed(beta, kind, None, e),
        }
    };
    std::thread::scope(|s| {
        for _ in 0..workers.max(1) {
            s.spawn(|| loop {
                let next = queue.lock().expect("queue lock").next();
                let Some((beta, kind)) = next else { break };
                let row = run(beta, kind);
                on_row(&row);
                out.lock().expect("row lock").push(row);
            });
        }
    });
    let mut rows = out.into_inner().expect("row lock");
    sort_rows(&mut rows);
    rows
}

/// In-memory sweep on one thread.
pub fn sweep(config: &SweepConfig) -> Vec<SweepRow> {
    sweep_with(config, 1, &[], &|_| {})
}

const HASH_PREFIX: &str = "# config_hash=";

/// Resumable sweep backed by a CSV file. The first line records
/// `config_hash`; rows already present are kept, the remaining ones are
/// appended as they finish and the file is finally rewritten in key order.
pub fn sweep_resumable(config: &SweepConfig, workers: usize, path: &Path, config_hash: &str, version: &str) -> Result<Vec<SweepRow>> {
    let io = |e: std::io::Error| Error::Data(format!("{}: {e}", path.display()));
    let header_line = format!("{HASH_PREFIX}{config_hash} version={version}");
    let mut done = Vec::new();
    if path.exists() {
        let text = fs::read_to_string(path).map_err(io)?;
        let first = text.lines().next().unwrap_or("");
        let recorded = first.strip_prefix(HASH_PREFIX).and_then(|r| r.split_whitespace().next());
        if recorded != Some(config_hash) {
            return Err(Error::Data(format!(
                "{} was written for a different configuration; refusing to mix results",
                path.display()
            )));
        }
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Data(e.to_string()))?;
            let row = SweepRow::from_record(&rec)?;
            if row.is_ok() {
                done.push(row);
            }
        }
    }
    // Start from a clean file holding only the retained rows.
    write_sweep_csv(path, &header_line, &done)?;
    let file = fs::OpenOptions::new().append(true).open(path).map_err(io)?;
    let sink = Mutex::new(csv::WriterBuilder::new().has_headers(false).from_writer(file));
    let rows = sweep_with(config, workers, &done, &|row| {
        let mut w = sink.lock().expect("csv lock");
        if w.write_record(row.csv_record()).and_then(|_| Ok(w.flush()?)).is_err() {
            log::warn!("could not append sweep row for beta {}", row.beta);
        }
    });
    drop(sink);
    write_sweep_csv(path, &header_line, &rows)?;
    Ok(rows)
}

fn write_sweep_csv(path: &Path, header_line: &str, rows: &[SweepRow]) -> Result<()> {
    let io = |e: std::io::Error| Error::Data(format!("{}: {e}", path.display()));
    let tmp = path.with_extension("csv.tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        writeln!(f, "{header_line}").map_err(io)?;
        let mut w = csv::Writer::from_writer(f);
        let csv_err = |e: csv::Error| Error::Data(e.to_string());
        w.write_record(SweepRow::CSV_HEADER).map_err(csv_err)?;
        for row in rows {
            w.write_record(row.csv_record()).map_err(csv_err)?;
        }
        w.flush().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}
