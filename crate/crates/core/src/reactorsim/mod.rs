//! Axisymmetric steady-state reactor model.
//!
//! Plug flow through a cylindrical catalyst bed that is heated either by
//! eddy currents in the susceptor lattice or through a fixed-temperature
//! wall. Energy is solved in conservative total-enthalpy form on an
//! `Nr x Nz` cell grid; species are advanced along each radial streamline.

mod control;
mod solver;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::circuit::CoilSpec;
use crate::constants::{ATM, R_GAS, ZERO_CELSIUS};
use crate::emfield::{fmt, SusceptorSpec};
use crate::error::{ensure_positive, Error, Result};
use crate::thermo::{GasFeed, KineticsParams};

pub use control::{find_ghsv_for_conversion, power_control, ControlOptions, GhsvSearch, PowerControlled};
pub use solver::{solve_steady, solve_steady_with, wall_heated_solve, HeatSource, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BedSpec {
    pub void_fraction: f64,
    /// Effective bed thermal conductivity [W/(m K)].
    pub k_eff: f64,
    pub kinetics: KineticsParams,
}

impl Default for BedSpec {
    fn default() -> Self {
        Self { void_fraction: 0.5, k_eff: 11.0, kinetics: KineticsParams::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InsulationSpec {
    pub thickness: f64,
    pub k_ins: f64,
}

impl Default for InsulationSpec {
    fn default() -> Self {
        Self { thickness: 0.025, k_ins: 0.15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatingMode {
    Induction,
    Wall,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactorCase {
    pub susceptor: SusceptorSpec,
    pub coil: CoilSpec,
    pub feed: GasFeed,
    pub bed: BedSpec,
    pub insulation: InsulationSpec,
    pub ambient_temperature: f64,
    pub heating_mode: HeatingMode,
}

impl ReactorCase {
    pub fn validate(&self) -> Result<()> {
        self.susceptor.validate()?;
        self.coil.validate()?;
        self.feed.validate()?;
        self.bed.kinetics.validate()?;
        if !(self.bed.void_fraction > 0.0 && self.bed.void_fraction < 1.0) {
            return Err(Error::Domain(format!("void fraction {} outside (0, 1)", self.bed.void_fraction)));
        }
        ensure_positive("k_eff", self.bed.k_eff)?;
        if !(self.insulation.thickness >= 0.0) {
            return Err(Error::Domain("insulation thickness must be non-negative".into()));
        }
        ensure_positive("k_ins", self.insulation.k_ins)?;
        ensure_positive("ambient_temperature", self.ambient_temperature)
    }

    pub fn bed_volume(&self) -> f64 {
        self.susceptor.volume()
    }

    /// Same case with the feed flow set from a space velocity.
    pub fn with_ghsv(&self, ghsv: &GhsvSpec) -> Result<Self> {
        let flow = ghsv_to_molar_flow(ghsv, self.bed_volume())?;
        Ok(Self { feed: self.feed.with_flow(flow), ..*self })
    }

    pub fn ghsv(&self, reference: &ReferenceConditions) -> f64 {
        self.feed.molar_flow * R_GAS * reference.temperature / reference.pressure / self.bed_volume() * 3600.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nr: usize,
    pub nz: usize,
}

impl GridSpec {
    pub const MIN_NR: usize = 32;
    pub const MIN_NZ: usize = 64;

    pub fn new(nr: usize, nz: usize) -> Result<Self> {
        if nr < Self::MIN_NR || nz < Self::MIN_NZ {
            return Err(Error::Domain(format!(
                "grid {nr} x {nz} below the minimum {} x {}",
                Self::MIN_NR,
                Self::MIN_NZ
            )));
        }
        Ok(Self { nr, nz })
    }

    pub fn cells(&self) -> usize {
        self.nr * self.nz
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nr: 64, nz: 128 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConditions {
    pub temperature: f64,
    pub pressure: f64,
}

impl Default for ReferenceConditions {
    fn default() -> Self {
        Self { temperature: ZERO_CELSIUS, pressure: ATM }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhsvSpec {
    /// [1/h]
    pub ghsv: f64,
    pub reference: ReferenceConditions,
}

impl GhsvSpec {
    pub fn new(ghsv: f64) -> Self {
        Self { ghsv, reference: ReferenceConditions::default() }
    }
}

/// Molar feed flow [mol/s] for a space velocity over `bed_volume`.
pub fn ghsv_to_molar_flow(ghsv: &GhsvSpec, bed_volume: f64) -> Result<f64> {
    ensure_positive("bed_volume", bed_volume)?;
    if !(ghsv.ghsv >= 0.0) || !ghsv.ghsv.is_finite() {
        return Err(Error::Domain(format!("GHSV must be non-negative, got {}", ghsv.ghsv)));
    }
    ensure_positive("reference temperature", ghsv.reference.temperature)?;
    ensure_positive("reference pressure", ghsv.reference.pressure)?;
    let volumetric = ghsv.ghsv * bed_volume / 3600.0;
    Ok(ghsv.reference.pressure * volumetric / (R_GAS * ghsv.reference.temperature))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub p_susceptor: f64,
    pub q_sensible: f64,
    pub q_reaction: f64,
    pub q_insulation_loss: f64,
}

impl EnergyLedger {
    /// `|P - Q_sens - Q_rxn - Q_loss| / P`.
    pub fn closure(&self) -> f64 {
        let imbalance = self.p_susceptor - self.q_sensible - self.q_reaction - self.q_insulation_loss;
        if self.p_susceptor == 0.0 {
            imbalance.abs()
        } else {
            (imbalance / self.p_susceptor).abs()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub grid: GridSpec,
    /// Cell-centre radii [m].
    pub r: Vec<f64>,
    /// Cell-centre axial positions from the inlet [m].
    pub z: Vec<f64>,
    /// Temperature per cell, index `j * nr + i` [K].
    pub temperature: Vec<f64>,
    /// Local CO2 conversion per cell.
    pub conversion: Vec<f64>,
    /// Flow-averaged outlet conversion.
    pub x_co2_outlet: f64,
    pub t_outlet_max: f64,
    pub ledger: EnergyLedger,
    /// Outlet species flows [mol/s].
    pub outlet_flows: [f64; 5],
    pub inlet_flows: [f64; 5],
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    /// RMS coil current used [A]; zero in wall mode.
    pub current: f64,
}

impl SimulationResult {
    pub fn t(&self, i: usize, j: usize) -> f64 {
        self.temperature[j * self.grid.nr + i]
    }

    pub fn x(&self, i: usize, j: usize) -> f64 {
        self.conversion[j * self.grid.nr + i]
    }

    pub fn outlet_radial_temperature(&self) -> Vec<f64> {
        let j = self.grid.nz - 1;
        (0..self.grid.nr).map(|i| self.t(i, j)).collect()
    }

    pub fn axis_temperature(&self) -> Vec<f64> {
        (0..self.grid.nz).map(|j| self.t(0, j)).collect()
    }

    /// Atom flows (C, H, O) at inlet and outlet.
    pub fn atom_flows(&self) -> ([f64; 3], [f64; 3]) {
        let f = |n: &[f64; 5]| {
            let mut a = [0.0; 3];
            for s in crate::thermo::Species::ALL {
                for (k, v) in s.atoms().iter().enumerate() {
                    a[k] += v * n[s.index()];
                }
            }
            a
        };
        (f(&self.inlet_flows), f(&self.outlet_flows))
    }

    pub fn write_field_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Data(e.to_string());
        w.write_record(["r_m", "z_m", "T_K", "X_local"]).map_err(io)?;
        for j in 0..self.grid.nz {
            for i in 0..self.grid.nr {
                w.write_record([fmt(self.r[i]), fmt(self.z[j]), fmt(self.t(i, j)), fmt(self.x(i, j))]).map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::Data(e.to_string()))
    }

    pub fn write_profile_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Data(e.to_string());
        w.write_record(["profile", "coordinate_m", "T_K"]).map_err(io)?;
        for (i, t) in self.outlet_radial_temperature().iter().enumerate() {
            w.write_record(["outlet_radial".to_string(), fmt(self.r[i]), fmt(*t)]).map_err(io)?;
        }
        for (j, t) in self.axis_temperature().iter().enumerate() {
            w.write_record(["axis_axial".to_string(), fmt(self.z[j]), fmt(*t)]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Data(e.to_string()))
    }

    pub fn write_ledger_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Data(e.to_string());
        w.write_record([
            "P_susceptor_W",
            "Q_sensible_W",
            "Q_reaction_W",
            "Q_insulation_loss_W",
            "closure_rel",
            "X_CO2_outlet",
            "T_outlet_max_K",
            "current_A",
            "iterations",
        ])
        .map_err(io)?;
        let l = &self.ledger;
        w.write_record([
            fmt(l.p_susceptor),
            fmt(l.q_sensible),
            fmt(l.q_reaction),
            fmt(l.q_insulation_loss),
            fmt(l.closure()),
            fmt(self.x_co2_outlet),
            fmt(self.t_outlet_max),
            fmt(self.current),
            self.iterations.to_string(),
        ])
        .map_err(io)?;
        w.flush().map_err(|e| Error::Data(e.to_string()))
    }
}

/// Ring cross-section areas of the radial cells.
pub(crate) fn ring_areas(radius: f64, nr: usize) -> Vec<f64> {
    let dr = radius / nr as f64;
    (0..nr)
        .map(|i| {
            let (a, b) = (i as f64 * dr, (i + 1) as f64 * dr);
            PI * (b * b - a * a)
        })
        .collect()
}
