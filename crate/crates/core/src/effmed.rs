//! Effective-medium conductivity of lattice susceptors.
//!
//! A lattice baffle is homogenised into a medium with an effective
//! electrical conductivity. This module holds the lattice-to-conductivity
//! model, radially tailored conductivity profiles, skin depth relations and
//! the inverse problem of recovering `sigma_eff` from a measured resistance
//! curve.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::circuit::{self, CoilSpec};
use crate::constants::MU0;
use crate::emfield::SusceptorSpec;
use crate::error::{ensure_positive, Error, Result};

/// Solid material and geometry of an open-cell lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Conductivity of the strut material [S/m].
    pub solid_conductivity: f64,
    /// Void fraction of the lattice.
    pub porosity: f64,
    /// Path-length factor of the struts, >= 1.
    pub tortuosity: f64,
}

impl LatticeSpec {
    pub fn new(solid_conductivity: f64, porosity: f64, tortuosity: f64) -> Result<Self> {
        let spec = Self { solid_conductivity, porosity, tortuosity };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("solid_conductivity", self.solid_conductivity)?;
        if !(self.porosity > 0.0 && self.porosity < 1.0) {
            return Err(Error::Domain(format!("porosity must lie in (0, 1), got {}", self.porosity)));
        }
        if !(self.tortuosity >= 1.0) || !self.tortuosity.is_finite() {
            return Err(Error::Domain(format!("tortuosity must be >= 1, got {}", self.tortuosity)));
        }
        Ok(())
    }
}

/// Lemlich limit with a tortuosity divisor: `sigma_s (1 - eps) / (3 tau)`.
pub fn lemlich_sigma_eff(lattice: &LatticeSpec) -> Result<f64> {
    lattice.validate()?;
    Ok(lattice.solid_conductivity * (1.0 - lattice.porosity) / (3.0 * lattice.tortuosity))
}

/// Default clamp radius (as a fraction of the susceptor radius) of the
/// tailored profile.
pub const DEFAULT_CORE_FRACTION: f64 = 0.2;

/// Radial effective-conductivity profile of a cylindrical susceptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConductivityProfile {
    /// Constant conductivity.
    Uniform { sigma_eff: f64 },
    /// `(sigma_ref / A) (R / r)^p` outside the core, held at its core-radius
    /// value inside `r <= core_fraction R`.
    PowerLaw { sigma_ref: f64, exponent: f64, amplitude: f64, core_fraction: f64 },
    /// `coefficient / r^p` all the way to the axis (diverges at `r = 0`).
    Unclamped { coefficient: f64, exponent: f64 },
}

impl ConductivityProfile {
    pub fn uniform(sigma_eff: f64) -> Self {
        Self::Uniform { sigma_eff }
    }

    /// The `1/r^2` profile clamped at `R/5` with amplitude divisor `A`.
    pub fn inverse_square(sigma_eff: f64, amplitude: f64) -> Self {
        Self::PowerLaw { sigma_ref: sigma_eff, exponent: 2.0, amplitude, core_fraction: DEFAULT_CORE_FRACTION }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Uniform { sigma_eff } => ensure_positive("sigma_eff", sigma_eff),
            Self::PowerLaw { sigma_ref, exponent, amplitude, core_fraction } => {
                ensure_positive("sigma_ref", sigma_ref)?;
                ensure_positive("amplitude A", amplitude)?;
                if !exponent.is_finite() {
                    return Err(Error::Domain("exponent p must be finite".into()));
                }
                if !(core_fraction > 0.0 && core_fraction < 1.0) {
                    return Err(Error::Domain(format!("core_fraction must lie in (0, 1), got {core_fraction}")));
                }
                Ok(())
            }
            Self::Unclamped { coefficient, exponent } => {
                ensure_positive("coefficient", coefficient)?;
                if !(exponent >= 0.0) || !exponent.is_finite() {
                    return Err(Error::Domain(format!("exponent must be >= 0, got {exponent}")));
                }
                Ok(())
            }
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Self::Uniform { .. })
    }

    /// Conductivity at radius `r` in a susceptor of radius `radius`.
    pub fn sigma_at(&self, r: f64, radius: f64) -> Result<f64> {
        ensure_positive("radius", radius)?;
        if !(r >= 0.0) || r > radius * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("r = {r} outside [0, {radius}]")));
        }
        Ok(self.sigma_unchecked(r.min(radius), radius))
    }

    pub(crate) fn sigma_unchecked(&self, r: f64, radius: f64) -> f64 {
        match *self {
            Self::Uniform { sigma_eff } => sigma_eff,
            Self::PowerLaw { sigma_ref, exponent, amplitude, core_fraction } => {
                let rr = r.max(core_fraction * radius);
                sigma_ref / amplitude * (radius / rr).powf(exponent)
            }
            Self::Unclamped { coefficient, exponent } => {
                if r == 0.0 {
                    f64::INFINITY
                } else {
                    coefficient / r.powf(exponent)
                }
            }
        }
    }
}

/// Skin depth `sqrt(1 / (pi sigma f mu0))` [m].
pub fn skin_depth(sigma: f64, frequency: f64) -> Result<f64> {
    ensure_positive("sigma", sigma)?;
    ensure_positive("frequency", frequency)?;
    Ok((1.0 / (PI * sigma * frequency * MU0)).sqrt())
}

/// Conductivity whose skin depth at `frequency` equals `ratio * radius`.
pub fn sigma_for_delta_ratio(radius: f64, frequency: f64, ratio: f64) -> Result<f64> {
    ensure_positive("radius", radius)?;
    ensure_positive("frequency", frequency)?;
    ensure_positive("ratio", ratio)?;
    let delta = ratio * radius;
    Ok(1.0 / (PI * frequency * MU0 * delta * delta))
}

/// One point of a measured resistance curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceSample {
    pub frequency: f64,
    pub resistance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Largest accepted RMS log-residual.
    pub max_residual: f64,
    /// Search interval for `sigma_eff` [S/m].
    pub sigma_bounds: (f64, f64),
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_residual: 0.25, sigma_bounds: (1e-2, 1e7) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaFit {
    pub sigma_eff: f64,
    /// RMS of `ln R_measured - ln R_model`.
    pub residual: f64,
    pub evaluations: usize,
}

/// Recover `sigma_eff` from a resistance-vs-frequency curve.
///
/// The model is [`circuit::susceptor_resistance`] with a uniform profile on
/// the given geometry; the objective is the squared log residual. A coarse
/// logarithmic scan locates the basin (the per-frequency response is not
/// monotone in sigma) and golden-section search polishes it.
pub fn fit_sigma_from_impedance(
    samples: &[ImpedanceSample],
    radius: f64,
    length: f64,
    coil: &CoilSpec,
    options: &FitOptions,
) -> Result<SigmaFit> {
    if samples.len() < 5 {
        return Err(Error::FitFailure(format!("need at least 5 samples, got {}", samples.len())));
    }
    for s in samples {
        ensure_positive("sample frequency", s.frequency)?;
        ensure_positive("sample resistance", s.resistance)?;
    }
    ensure_positive("radius", radius)?;
    ensure_positive("length", length)?;
    coil.validate()?;

    let field_integral = circuit::axial_field_integral(coil, length, 1.0);
    let log_meas: Vec<f64> = samples.iter().map(|s| s.resistance.ln()).collect();
    let mut evaluations = 0usize;
    let mut objective = |u: f64| -> Result<f64> {
        evaluations += 1;
        let sigma = u.exp();
        let mut acc = 0.0;
        for (s, lm) in samples.iter().zip(&log_meas) {
            let per_len = crate::emfield::uniform_power_per_length(sigma, s.frequency, radius, 1.0)?;
            let model = per_len * field_integral;
            let d = lm - model.ln();
            acc += d * d;
        }
        Ok(acc)
    };

    let (lo, hi) = (options.sigma_bounds.0.ln(), options.sigma_bounds.1.ln());
    let n_scan = 241;
    let mut best = (f64::INFINITY, 0usize);
    let grid: Vec<f64> = (0..n_scan).map(|i| lo + (hi - lo) * i as f64 / (n_scan - 1) as f64).collect();
    for (i, &u) in grid.iter().enumerate() {
        let v = objective(u)?;
        if v < best.0 {
            best = (v, i);
        }
    }
    if best.1 == 0 || best.1 == n_scan - 1 {
        return Err(Error::FitFailure(format!(
            "optimum at the edge of the sigma search interval [{:.3e}, {:.3e}] S/m",
            options.sigma_bounds.0, options.sigma_bounds.1
        )));
    }
    let (mut a, mut b) = (grid[best.1 - 1], grid[best.1 + 1]);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    let mut converged = false;
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 {
            converged = true;
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d)?;
        }
    }
    if !converged {
        return Err(Error::FitFailure("golden-section search did not converge".into()));
    }
    let u = 0.5 * (a + b);
    let sse = objective(u)?;
    let residual = (sse / samples.len() as f64).sqrt();
    let sigma_eff = u.exp();
    if residual > options.max_residual {
        return Err(Error::FitFailure(format!(
            "RMS log residual {residual:.3} exceeds threshold {:.3}",
            options.max_residual
        )));
    }
    let f_ideal = circuit::f_ideal_uniform(sigma_eff, radius)?;
    let (f_min, f_max) = samples
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), s| (lo.min(s.frequency), hi.max(s.frequency)));
    if !(f_min < f_ideal && f_ideal < f_max) {
        return Err(Error::FitFailure(format!(
            "samples span [{f_min:.3e}, {f_max:.3e}] Hz but the fitted f_ideal is {f_ideal:.3e} Hz; both regimes are needed"
        )));
    }
    Ok(SigmaFit { sigma_eff, residual, evaluations })
}

/// Uniform-profile susceptor used when fitting.
pub fn uniform_susceptor(radius: f64, length: f64, sigma_eff: f64) -> SusceptorSpec {
    SusceptorSpec { radius, length, profile: ConductivityProfile::uniform(sigma_eff) }
}
