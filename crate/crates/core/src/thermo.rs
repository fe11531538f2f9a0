//! RWGS thermochemistry and kinetics: `CO2 + H2 <=> CO + H2O`.
//!
//! Ideal-gas properties come from two-range NASA 7-coefficient heat capacity
//! fits shipped in `data/nasa7_rwgs.csv`; enthalpy and entropy are integrated
//! from the 298.15 K formation values.

use serde::{Deserialize, Serialize};

use crate::constants::R_GAS;
use crate::error::{ensure_positive, Error, Result};

pub const T_REF: f64 = 298.15;
/// Validity of the property table [K].
pub const T_MIN: f64 = 250.0;
pub const T_MAX: f64 = 1400.0;
/// Validity of the equilibrium constant [K].
pub const KEQ_T_MIN: f64 = 400.0;
pub const KEQ_T_MAX: f64 = 1400.0;

/// H2:CO2 molar feed ratio whose equilibrium conversion at 823.15 K is 0.55.
pub const CALIBRATED_H2_CO2_RATIO: f64 = 2.978_85;

const BUILTIN_TABLE: &str = include_str!("../data/nasa7_rwgs.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Species {
    CO2,
    H2,
    CO,
    H2O,
    Inert,
}

impl Species {
    pub const ALL: [Species; 5] = [Species::CO2, Species::H2, Species::CO, Species::H2O, Species::Inert];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Stoichiometric coefficient in the forward reaction.
    pub fn nu(self) -> f64 {
        match self {
            Species::CO2 | Species::H2 => -1.0,
            Species::CO | Species::H2O => 1.0,
            Species::Inert => 0.0,
        }
    }

    fn table_name(self) -> &'static str {
        match self {
            Species::CO2 => "CO2",
            Species::H2 => "H2",
            Species::CO => "CO",
            Species::H2O => "H2O",
            Species::Inert => "N2",
        }
    }

    /// (C, H, O) atoms per molecule.
    pub fn atoms(self) -> [f64; 3] {
        match self {
            Species::CO2 => [1.0, 0.0, 2.0],
            Species::H2 => [0.0, 2.0, 0.0],
            Species::CO => [1.0, 0.0, 1.0],
            Species::H2O => [0.0, 2.0, 1.0],
            Species::Inert => [0.0, 0.0, 0.0],
        }
    }
}

/// Per-species amounts, indexed by [`Species::index`].
pub type Composition = [f64; 5];

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Deserialize)]
struct Row {
    species: String,
    t_low_K: f64,
    t_mid_K: f64,
    t_high_K: f64,
    lo_a1: f64,
    lo_a2: f64,
    lo_a3: f64,
    lo_a4: f64,
    lo_a5: f64,
    hi_a1: f64,
    hi_a2: f64,
    hi_a3: f64,
    hi_a4: f64,
    hi_a5: f64,
    h_f_298_J_per_mol: f64,
    s_298_J_per_mol_K: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesData {
    pub name: String,
    pub t_mid: f64,
    pub low: [f64; 5],
    pub high: [f64; 5],
    pub h_f: f64,
    pub s_298: f64,
}

impl SpeciesData {
    fn coeffs(&self, t: f64) -> &[f64; 5] {
        if t <= self.t_mid {
            &self.low
        } else {
            &self.high
        }
    }

    /// `cp / R` from a coefficient set.
    fn cp_r(a: &[f64; 5], t: f64) -> f64 {
        a[0] + t * (a[1] + t * (a[2] + t * (a[3] + t * a[4])))
    }

    /// Antiderivative of `cp / R`.
    fn h_r(a: &[f64; 5], t: f64) -> f64 {
        t * (a[0] + t * (a[1] / 2.0 + t * (a[2] / 3.0 + t * (a[3] / 4.0 + t * a[4] / 5.0))))
    }

    /// Antiderivative of `cp / (R T)`.
    fn s_r(a: &[f64; 5], t: f64) -> f64 {
        a[0] * t.ln() + t * (a[1] + t * (a[2] / 2.0 + t * (a[3] / 3.0 + t * a[4] / 4.0)))
    }

    pub fn cp(&self, t: f64) -> f64 {
        R_GAS * Self::cp_r(self.coeffs(t), t)
    }

    fn integrate(&self, t0: f64, t1: f64, f: fn(&[f64; 5], f64) -> f64) -> f64 {
        let (lo, hi, sign) = if t1 >= t0 { (t0, t1, 1.0) } else { (t1, t0, -1.0) };
        let mut acc = 0.0;
        if lo < self.t_mid {
            let top = hi.min(self.t_mid);
            acc += f(&self.low, top) - f(&self.low, lo);
        }
        if hi > self.t_mid {
            let bottom = lo.max(self.t_mid);
            acc += f(&self.high, hi) - f(&self.high, bottom);
        }
        sign * R_GAS * acc
    }

    /// Molar enthalpy including formation enthalpy [J/mol].
    pub fn enthalpy(&self, t: f64) -> f64 {
        self.h_f + self.integrate(T_REF, t, Self::h_r)
    }

    /// Standard molar entropy [J/(mol K)].
    pub fn entropy(&self, t: f64) -> f64 {
        self.s_298 + self.integrate(T_REF, t, Self::s_r)
    }
}

/// Thermochemical table for the five gas species.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoTable {
    species: Vec<SpeciesData>,
}

impl ThermoTable {
    /// The table embedded in the crate.
    pub fn builtin() -> Self {
        Self::from_csv_str(BUILTIN_TABLE).expect("embedded thermo table is valid")
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        Self::from_reader(text.as_bytes())
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.deserialize::<Row>() {
            rows.push(rec.map_err(|e| Error::Data(e.to_string()))?);
        }
        let mut species = Vec::with_capacity(5);
        for s in Species::ALL {
            let row = rows
                .iter()
                .find(|r| r.species == s.table_name())
                .ok_or_else(|| Error::Data(format!("thermo table lacks species {}", s.table_name())))?;
            if row.t_low_K > T_MIN || row.t_high_K < T_MAX || !(row.t_mid_K > row.t_low_K && row.t_mid_K < row.t_high_K) {
                return Err(Error::Data(format!("{}: fit range does not cover [{T_MIN}, {T_MAX}] K", row.species)));
            }
            species.push(SpeciesData {
                name: row.species.clone(),
                t_mid: row.t_mid_K,
                low: [row.lo_a1, row.lo_a2, row.lo_a3, row.lo_a4, row.lo_a5],
                high: [row.hi_a1, row.hi_a2, row.hi_a3, row.hi_a4, row.hi_a5],
                h_f: row.h_f_298_J_per_mol,
                s_298: row.s_298_J_per_mol_K,
            });
        }
        let table = Self { species };
        for s in &table.species {
            let mut t = T_MIN;
            while t <= T_MAX {
                if !(s.cp(t) > 0.0) {
                    return Err(Error::Data(format!("{}: non-positive cp at {t} K", s.name)));
                }
                t += 10.0;
            }
        }
        Ok(table)
    }

    pub fn species(&self, s: Species) -> &SpeciesData {
        &self.species[s.index()]
    }

    fn check(t: f64, min: f64, max: f64) -> Result<()> {
        if t.is_finite() && t >= min && t <= max {
            Ok(())
        } else {
            Err(Error::Range { temperature: t, min, max })
        }
    }

    pub fn cp(&self, s: Species, t: f64) -> Result<f64> {
        Self::check(t, T_MIN, T_MAX)?;
        Ok(self.species(s).cp(t))
    }

    pub fn enthalpy(&self, s: Species, t: f64) -> Result<f64> {
        Self::check(t, T_MIN, T_MAX)?;
        Ok(self.species(s).enthalpy(t))
    }

    pub fn entropy(&self, s: Species, t: f64) -> Result<f64> {
        Self::check(t, T_MIN, T_MAX)?;
        Ok(self.species(s).entropy(t))
    }

    /// Reaction enthalpy [J/mol].
    pub fn delta_h(&self, t: f64) -> Result<f64> {
        Self::check(t, T_MIN, T_MAX)?;
        Ok(Species::ALL.iter().map(|&s| s.nu() * self.species(s).enthalpy(t)).sum())
    }

    /// Standard reaction Gibbs energy [J/mol].
    pub fn delta_g(&self, t: f64) -> Result<f64> {
        Self::check(t, T_MIN, T_MAX)?;
        Ok(Species::ALL
            .iter()
            .map(|&s| s.nu() * (self.species(s).enthalpy(t) - t * self.species(s).entropy(t)))
            .sum())
    }

    /// Mixture molar enthalpy of the amounts `n` [J].
    pub fn mixture_enthalpy(&self, n: &Composition, t: f64) -> Result<f64> {
        Self::check(t, T_MIN, T_MAX)?;
        Ok(Species::ALL.iter().map(|&s| n[s.index()] * self.species(s).enthalpy(t)).sum())
    }

    /// Mixture heat capacity of the amounts `n` [J/K].
    pub fn mixture_cp(&self, n: &Composition, t: f64) -> Result<f64> {
        Self::check(t, T_MIN, T_MAX)?;
        Ok(Species::ALL.iter().map(|&s| n[s.index()] * self.species(s).cp(t)).sum())
    }

    /// Mixture enthalpy with the table range clamped; used inside solvers
    /// whose iterates may briefly leave the table range.
    pub(crate) fn mixture_enthalpy_clamped(&self, n: &Composition, t: f64) -> f64 {
        let tc = t.clamp(T_MIN, T_MAX);
        let base: f64 = Species::ALL.iter().map(|&s| n[s.index()] * self.species(s).enthalpy(tc)).sum();
        if t == tc {
            base
        } else {
            let cp: f64 = Species::ALL.iter().map(|&s| n[s.index()] * self.species(s).cp(tc)).sum();
            base + cp * (t - tc)
        }
    }

    pub(crate) fn mixture_cp_clamped(&self, n: &Composition, t: f64) -> f64 {
        let tc = t.clamp(T_MIN, T_MAX);
        Species::ALL.iter().map(|&s| n[s.index()] * self.species(s).cp(tc)).sum()
    }
}

/// `Keq = exp(-dG(T) / (R T))`.
pub fn rwgs_equilibrium_constant(t: f64, table: &ThermoTable) -> Result<f64> {
    ThermoTable::check(t, KEQ_T_MIN, KEQ_T_MAX)?;
    Ok((-table.delta_g(t)? / (R_GAS * t)).exp())
}

/// Inlet gas stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasFeed {
    /// Total molar flow [mol/s].
    pub molar_flow: f64,
    pub mole_fractions: Composition,
    pub inlet_temperature: f64,
    pub pressure: f64,
}

impl GasFeed {
    pub fn new(molar_flow: f64, mole_fractions: Composition, inlet_temperature: f64, pressure: f64) -> Result<Self> {
        let feed = Self { molar_flow, mole_fractions, inlet_temperature, pressure };
        feed.validate()?;
        Ok(feed)
    }

    /// `H2:CO2 = ratio:1`, no products or inert.
    pub fn h2_co2(molar_flow: f64, ratio: f64, inlet_temperature: f64, pressure: f64) -> Result<Self> {
        if !(ratio >= 0.0) {
            return Err(Error::Domain(format!("feed ratio must be non-negative, got {ratio}")));
        }
        let y_co2 = 1.0 / (1.0 + ratio);
        Self::new(molar_flow, [y_co2, 1.0 - y_co2, 0.0, 0.0, 0.0], inlet_temperature, pressure)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.molar_flow >= 0.0) || !self.molar_flow.is_finite() {
            return Err(Error::Domain(format!("molar flow must be non-negative, got {}", self.molar_flow)));
        }
        ensure_positive("pressure", self.pressure)?;
        ensure_positive("inlet_temperature", self.inlet_temperature)?;
        if self.mole_fractions.iter().any(|&y| !(0.0..=1.0).contains(&y)) {
            return Err(Error::Domain("mole fractions must lie in [0, 1]".into()));
        }
        let sum: f64 = self.mole_fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("mole fractions sum to {sum}, expected 1")));
        }
        Ok(())
    }

    /// Species molar flows [mol/s].
    pub fn species_flows(&self) -> Composition {
        self.mole_fractions.map(|y| y * self.molar_flow)
    }

    pub fn with_flow(&self, molar_flow: f64) -> Self {
        Self { molar_flow, ..*self }
    }
}

/// Amounts after advancing the reaction by `xi` from `n`.
pub fn advance(n: &Composition, xi: f64) -> Composition {
    let mut out = *n;
    for s in Species::ALL {
        out[s.index()] += s.nu() * xi;
    }
    out
}

/// Equilibrium extent from amounts `n` at equilibrium constant `keq`.
///
/// Equimolar reaction, so `Keq = (n_CO + xi)(n_H2O + xi) / ((n_CO2 - xi)(n_H2 - xi))`;
/// the residual is strictly increasing in `xi` and is bisected between the
/// reverse and forward limiting-reagent bounds.
pub fn equilibrium_extent(n: &Composition, keq: f64) -> f64 {
    let (a, b, c, d) = (n[0], n[1], n[2], n[3]);
    let hi = a.min(b);
    let lo = -c.min(d);
    if hi - lo <= 0.0 {
        return 0.0;
    }
    let g = |x: f64| (c + x) * (d + x) - keq * (a - x) * (b - x);
    if g(0.0) == 0.0 {
        return 0.0;
    }
    let (mut l, mut h) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (l + h);
        if g(m) > 0.0 {
            h = m;
        } else {
            l = m;
        }
        if h - l <= 1e-15 * (hi - lo).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    0.5 * (l + h)
}

/// Equilibrium CO2 conversion of a feed at temperature `t`.
pub fn equilibrium_conversion(feed: &GasFeed, t: f64, table: &ThermoTable) -> Result<f64> {
    feed.validate()?;
    let y = feed.mole_fractions;
    if y[Species::CO2.index()] <= 0.0 {
        return Err(Error::NoRoot("feed contains no CO2".into()));
    }
    let keq = rwgs_equilibrium_constant(t, table)?;
    if y[Species::H2.index()] <= 0.0 && y[Species::CO.index()] * y[Species::H2O.index()] == 0.0 {
        return Ok(0.0);
    }
    Ok(equilibrium_extent(&y, keq) / y[Species::CO2.index()])
}

/// H2:CO2 ratio giving the requested equilibrium conversion at `t`.
pub fn feed_ratio_for_equilibrium(target: f64, t: f64, table: &ThermoTable) -> Result<f64> {
    let keq = rwgs_equilibrium_constant(t, table)?;
    let x_at = |ratio: f64| equilibrium_extent(&[1.0, ratio, 0.0, 0.0, 0.0], keq);
    let (mut lo, mut hi) = (1e-6, 1e3);
    if !(target > x_at(lo) && target < x_at(hi)) {
        return Err(Error::NoRoot(format!("conversion {target} unreachable by H2 excess at {t} K")));
    }
    while hi / lo - 1.0 > 1e-12 {
        let mid = (lo * hi).sqrt();
        if x_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Arrhenius reversible mass-action kinetics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticsParams {
    /// [mol / (s m^3 Pa^2)] per catalyst volume.
    pub pre_exponential: f64,
    /// [J/mol]
    pub activation_energy: f64,
    /// Below this temperature the catalyst is inactive [K].
    pub light_off_temperature: f64,
    /// Activity ramps smoothly from zero to one over this span above light-off [K].
    pub light_off_width: f64,
}

impl KineticsParams {
    pub fn new(pre_exponential: f64, activation_energy: f64) -> Result<Self> {
        let p = Self { pre_exponential, activation_energy, ..Self::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("pre_exponential", self.pre_exponential)?;
        ensure_positive("activation_energy", self.activation_energy)?;
        if !(self.light_off_temperature >= 0.0) {
            return Err(Error::Domain("light_off_temperature must be non-negative".into()));
        }
        if !(self.light_off_width >= 0.0) {
            return Err(Error::Domain("light_off_width must be non-negative".into()));
        }
        Ok(())
    }

    pub fn rate_constant(&self, t: f64) -> f64 {
        self.pre_exponential * (-self.activation_energy / (R_GAS * t)).exp()
    }

    /// Catalyst activity in [0, 1]: zero below light-off, a smoothstep across
    /// `light_off_width`, one above.
    pub fn activity(&self, t: f64) -> f64 {
        let x = t - self.light_off_temperature;
        if x < 0.0 {
            0.0
        } else if x >= self.light_off_width {
            1.0
        } else {
            let u = x / self.light_off_width;
            u * u * (3.0 - 2.0 * u)
        }
    }

    /// Rate constant including the light-off activity.
    pub fn effective_rate_constant(&self, t: f64) -> f64 {
        self.activity(t) * self.rate_constant(t)
    }
}

/// 430 degC.
pub const DEFAULT_LIGHT_OFF: f64 = 703.15;
pub const DEFAULT_LIGHT_OFF_WIDTH: f64 = 10.0;

impl Default for KineticsParams {
    /// Calibrated against the lab-scale behaviour of the K2CO3/Al2O3 bed.
    fn default() -> Self {
        Self {
            pre_exponential: 6.0e-3,
            activation_energy: 80_000.0,
            light_off_temperature: DEFAULT_LIGHT_OFF,
            light_off_width: DEFAULT_LIGHT_OFF_WIDTH,
        }
    }
}

/// `k(T) (p_CO2 p_H2 - p_CO p_H2O / Keq)` [mol/(s m^3)], zero below light-off.
pub fn rwgs_rate(t: f64, partial_pressures: &Composition, params: &KineticsParams, keq: f64) -> f64 {
    if t < params.light_off_temperature {
        return 0.0;
    }
    let p = partial_pressures;
    params.effective_rate_constant(t) * (p[0] * p[1] - p[2] * p[3] / keq)
}

/// `sum_i n_i int cp_i dT` from the inlet to `t_out` [W].
pub fn sensible_heat_duty(feed: &GasFeed, t_out: f64, table: &ThermoTable) -> Result<f64> {
    feed.validate()?;
    if t_out < feed.inlet_temperature {
        return Err(Error::Domain(format!("outlet {t_out} K below inlet {} K", feed.inlet_temperature)));
    }
    let n = feed.species_flows();
    Ok(table.mixture_enthalpy(&n, t_out)? - table.mixture_enthalpy(&n, feed.inlet_temperature)?)
}

/// `extent_flow * dH_rxn(T)` [W].
pub fn reaction_heat_duty(extent_flow: f64, t: f64, table: &ThermoTable) -> Result<f64> {
    if !(extent_flow >= 0.0) {
        return Err(Error::Domain(format!("extent flow must be non-negative, got {extent_flow}")));
    }
    Ok(extent_flow * table.delta_h(t)?)
}
