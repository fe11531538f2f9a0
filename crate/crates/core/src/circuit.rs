//! Coil-side model: axial field, AC resistances, coupling and self-resonance.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::constants::{COPPER_CONDUCTIVITY, INCH, MU0};
use crate::effmed::{skin_depth, ConductivityProfile};
use crate::emfield::{self, fmt, SusceptorSpec};
use crate::error::{ensure_positive, Error, Result};

/// Helical induction coil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoilSpec {
    pub turns: u32,
    /// Radius to the conductor centreline [m].
    pub coil_radius: f64,
    /// Half of the winding length [m].
    pub half_length: f64,
    /// Radius of the copper tube [m].
    pub conductor_radius: f64,
    pub pitch: f64,
    pub conductor_conductivity: f64,
    pub wire_diameter: f64,
}

impl CoilSpec {
    /// Coil wound from round wire of diameter `wire_diameter`, copper by default.
    pub fn new(turns: u32, coil_radius: f64, half_length: f64, pitch: f64, wire_diameter: f64) -> Result<Self> {
        let coil = Self {
            turns,
            coil_radius,
            half_length,
            conductor_radius: wire_diameter / 2.0,
            pitch,
            conductor_conductivity: COPPER_CONDUCTIVITY,
            wire_diameter,
        };
        coil.validate()?;
        Ok(coil)
    }

    pub fn validate(&self) -> Result<()> {
        if self.turns < 1 {
            return Err(Error::Domain("coil needs at least one turn".into()));
        }
        ensure_positive("coil_radius", self.coil_radius)?;
        ensure_positive("half_length", self.half_length)?;
        ensure_positive("conductor_radius", self.conductor_radius)?;
        ensure_positive("pitch", self.pitch)?;
        ensure_positive("conductor_conductivity", self.conductor_conductivity)?;
        ensure_positive("wire_diameter", self.wire_diameter)?;
        if self.pitch <= 2.0 * self.conductor_radius {
            return Err(Error::Domain(format!(
                "pitch {} m does not clear the conductor diameter {} m",
                self.pitch,
                2.0 * self.conductor_radius
            )));
        }
        Ok(())
    }

    pub fn winding_length(&self) -> f64 {
        2.0 * self.half_length
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivePoint {
    pub frequency: f64,
    /// RMS coil current [A].
    pub current: f64,
}

impl DrivePoint {
    pub fn new(frequency: f64, current: f64) -> Result<Self> {
        ensure_positive("frequency", frequency)?;
        if !(current >= 0.0) || !current.is_finite() {
            return Err(Error::Domain(format!("current must be non-negative, got {current}")));
        }
        Ok(Self { frequency, current })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitReport {
    pub beta: f64,
    pub frequency: f64,
    /// Reference (uniform or outer-wall) conductivity of the profile.
    pub sigma_eff: f64,
    pub r_susc: f64,
    pub r_coil: f64,
    pub eta_coupling: f64,
}

impl CircuitReport {
    pub const CSV_HEADER: [&'static str; 6] =
        ["beta", "f_Hz", "sigma_eff_S_per_m", "R_susc_ohm", "R_coil_ohm", "eta_coupling"];

    pub fn csv_record(&self) -> [String; 6] {
        [
            fmt(self.beta),
            fmt(self.frequency),
            fmt(self.sigma_eff),
            fmt(self.r_susc),
            fmt(self.r_coil),
            fmt(self.eta_coupling),
        ]
    }
}

pub fn write_reports_csv<W: Write>(reports: &[CircuitReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Data(e.to_string());
    w.write_record(CircuitReport::CSV_HEADER).map_err(io)?;
    for r in reports {
        w.write_record(r.csv_record()).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Data(e.to_string()))
}

/// Axial field of a finite solenoid on its axis, `z` from the coil centre.
///
/// `mu0 N I / (4 Lc) [ (z + Lc) / sqrt((z + Lc)^2 + Rc^2) + (Lc - z) / sqrt((Lc - z)^2 + Rc^2) ]`,
/// evaluated with the RMS current, so the result is an RMS field.
pub fn biot_savart_bz(coil: &CoilSpec, current: f64, z: f64) -> f64 {
    let lc = coil.half_length;
    let rc2 = coil.coil_radius * coil.coil_radius;
    let a = z + lc;
    let b = lc - z;
    MU0 * coil.turns as f64 * current / (4.0 * lc) * (a / (a * a + rc2).sqrt() + b / (b * b + rc2).sqrt())
}

/// `int B0_peak(z)^2 dz` over a centred susceptor of the given length,
/// with `B0_peak = sqrt(2) B_rms` (composite Simpson, 400 panels).
pub fn axial_field_integral(coil: &CoilSpec, length: f64, current: f64) -> f64 {
    let n = 400;
    let h = length / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let z = -0.5 * length + i as f64 * h;
        let b = biot_savart_bz(coil, current, z);
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * 2.0 * b * b;
    }
    acc * h / 3.0
}

/// Peak applied field at each of `n_slices` cell-centred axial slices.
pub fn slice_fields(coil: &CoilSpec, length: f64, current: f64, n_slices: usize) -> Vec<(f64, f64)> {
    let dz = length / n_slices as f64;
    (0..n_slices)
        .map(|j| {
            let z = -0.5 * length + (j as f64 + 0.5) * dz;
            (z, 2f64.sqrt() * biot_savart_bz(coil, current, z))
        })
        .collect()
}

/// Dissipated power per unit length for a unit peak applied field [W/(m T^2)].
///
/// Closed form for uniform profiles; otherwise a radial solve, refined until
/// the solver accepts its own error estimate.
pub fn unit_power_per_length(spec: &SusceptorSpec, frequency: f64) -> Result<f64> {
    spec.validate()?;
    match spec.profile {
        ConductivityProfile::Uniform { sigma_eff } => {
            emfield::uniform_power_per_length(sigma_eff, frequency, spec.radius, 1.0)
        }
        _ => {
            let field = radial_unit_field(spec, frequency)?;
            emfield::total_power_from_field(&field, 1.0)
        }
    }
}

/// Radial field for a unit applied peak field, refining the grid on demand.
pub fn radial_unit_field(spec: &SusceptorSpec, frequency: f64) -> Result<emfield::RadialField> {
    let mut n = emfield::DEFAULT_NODES;
    loop {
        match emfield::solve_radial_helmholtz(spec, frequency, 1.0, n) {
            Err(Error::Convergence { .. }) if n < 16_385 => n = 2 * n - 1,
            other => return other,
        }
    }
}

/// `R_susc = P_diss / I_rms^2`.
///
/// The susceptor is centred in the coil and sliced axially; each slice sees
/// the local peak field. The radial problem is linear in the applied field,
/// so one unit solve is scaled by `B0(z)^2` and integrated along the axis.
pub fn susceptor_resistance(spec: &SusceptorSpec, coil: &CoilSpec, frequency: f64) -> Result<f64> {
    coil.validate()?;
    ensure_positive("frequency", frequency)?;
    let per_len = unit_power_per_length(spec, frequency)?;
    Ok(per_len * axial_field_integral(coil, spec.length, 1.0))
}

/// Improved Dowell expression `pi^(3/4) d N^(3/2) / (sigma_c delta_c sqrt(2 a_c L))`.
pub fn dowell_resistance(d: f64, turns: u32, sigma_c: f64, a_c: f64, length: f64, frequency: f64) -> Result<f64> {
    ensure_positive("d", d)?;
    ensure_positive("a_c", a_c)?;
    ensure_positive("length", length)?;
    let delta_c = skin_depth(sigma_c, frequency)?;
    Ok(PI.powf(0.75) * d * (turns as f64).powf(1.5) / (sigma_c * delta_c * (2.0 * a_c * length).sqrt()))
}

/// Coil AC resistance, with both length symbols read as the winding length `2 Lc`.
pub fn coil_resistance_dowell(coil: &CoilSpec, frequency: f64) -> Result<f64> {
    coil.validate()?;
    if !dowell_valid(coil, frequency)? {
        log::warn!(
            "copper skin depth exceeds a third of the conductor radius at {frequency:.3e} Hz; Dowell estimate is outside its range"
        );
    }
    let l = coil.winding_length();
    dowell_resistance(l, coil.turns, coil.conductor_conductivity, coil.conductor_radius, l, frequency)
}

/// Whether the copper skin depth is below a third of the conductor radius.
pub fn dowell_valid(coil: &CoilSpec, frequency: f64) -> Result<bool> {
    Ok(skin_depth(coil.conductor_conductivity, frequency)? <= coil.conductor_radius / 3.0)
}

pub fn coupling_efficiency(r_susc: f64, r_coil: f64) -> Result<f64> {
    if !(r_susc >= 0.0 && r_coil >= 0.0) || !r_susc.is_finite() || !r_coil.is_finite() {
        return Err(Error::Domain(format!("resistances must be non-negative, got {r_susc}, {r_coil}")));
    }
    if r_susc + r_coil == 0.0 {
        return Err(Error::Degenerate("both resistances are zero".into()));
    }
    Ok(r_susc / (r_susc + r_coil))
}

/// Susceptor and coil resistances with coupling efficiency at one frequency.
pub fn circuit_report(beta: f64, spec: &SusceptorSpec, coil: &CoilSpec, frequency: f64) -> Result<CircuitReport> {
    let r_susc = susceptor_resistance(spec, coil, frequency)?;
    let r_coil = coil_resistance_dowell(coil, frequency)?;
    let sigma_eff = match spec.profile {
        ConductivityProfile::Uniform { sigma_eff } => sigma_eff,
        ConductivityProfile::PowerLaw { sigma_ref, .. } => sigma_ref,
        ConductivityProfile::Unclamped { .. } => spec.profile.sigma_unchecked(spec.radius, spec.radius),
    };
    Ok(CircuitReport { beta, frequency, sigma_eff, r_susc, r_coil, eta_coupling: coupling_efficiency(r_susc, r_coil)? })
}

/// Frequency at which the skin depth equals `R/2`: `4 / (pi sigma mu0 R^2)`.
pub fn f_ideal_uniform(sigma: f64, radius: f64) -> Result<f64> {
    ensure_positive("sigma", sigma)?;
    ensure_positive("radius", radius)?;
    Ok(4.0 / (PI * sigma * MU0 * radius * radius))
}

/// Bisection in `ln f` for `skin_depth(sigma, f) = R/2`, to 1e-6 relative.
pub fn find_f_ideal(spec: &SusceptorSpec, bracket: (f64, f64)) -> Result<f64> {
    spec.validate()?;
    let sigma = match spec.profile {
        ConductivityProfile::Uniform { sigma_eff } => sigma_eff,
        _ => return Err(Error::Domain("f_ideal is defined for uniform profiles".into())),
    };
    ensure_positive("bracket low", bracket.0)?;
    ensure_positive("bracket high", bracket.1)?;
    let g = |f: f64| -> Result<f64> { Ok(skin_depth(sigma, f)? - 0.5 * spec.radius) };
    let (mut lo, mut hi) = (bracket.0.min(bracket.1), bracket.0.max(bracket.1));
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::Bracket { lo, hi });
    }
    while hi / lo - 1.0 > 1e-7 {
        let mid = (lo * hi).sqrt();
        let gm = g(mid)?;
        if gm.signum() == g_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrfEstimate {
    pub inductance: f64,
    pub capacitance: f64,
    pub f_res: f64,
}

/// Wheeler's single-layer inductance in microhenries; dimensions in inches.
pub fn wheeler_inductance_uh(radius_in: f64, turns: u32, length_in: f64) -> f64 {
    let n = turns as f64;
    radius_in * radius_in * n * n / (9.0 * radius_in + 10.0 * length_in)
}

/// Medhurst self-capacitance in picofarads, coil diameter in centimetres.
pub fn medhurst_capacitance_pf(diameter_cm: f64, pitch_over_wire: f64) -> Result<f64> {
    if !(pitch_over_wire > 1.0) {
        return Err(Error::Domain(format!(
            "pitch / wire diameter = {pitch_over_wire} must exceed 1 (increase the pitch or use thinner wire)"
        )));
    }
    Ok(2.0 * PI * diameter_cm / pitch_over_wire.acosh())
}

pub fn resonant_frequency(inductance: f64, capacitance: f64) -> f64 {
    1.0 / (2.0 * PI * (inductance * capacitance).sqrt())
}

/// Self-resonant frequency from Wheeler's inductance and Medhurst's capacitance.
pub fn coil_srf(coil: &CoilSpec) -> Result<SrfEstimate> {
    ensure_positive("coil_radius", coil.coil_radius)?;
    ensure_positive("half_length", coil.half_length)?;
    ensure_positive("pitch", coil.pitch)?;
    ensure_positive("wire_diameter", coil.wire_diameter)?;
    let l_uh = wheeler_inductance_uh(coil.coil_radius / INCH, coil.turns, coil.winding_length() / INCH);
    let c_pf = medhurst_capacitance_pf(2.0 * coil.coil_radius * 100.0, coil.pitch / coil.wire_diameter)?;
    let inductance = l_uh * 1e-6;
    let capacitance = c_pf * 1e-12;
    Ok(SrfEstimate { inductance, capacitance, f_res: resonant_frequency(inductance, capacitance) })
}

/// True below the coil self-resonance.
pub fn operable_region(_beta: f64, frequency: f64, coil: &CoilSpec) -> Result<bool> {
    Ok(frequency < coil_srf(coil)?.f_res)
}
