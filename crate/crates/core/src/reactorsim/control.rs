//! Control loops: coil current for a target outlet temperature, and space
//! velocity for a target conversion.

use super::solver::{solve_steady_with, HeatSource, SolverOptions};
use super::{GhsvSpec, GridSpec, HeatingMode, ReactorCase, SimulationResult};
use crate::circuit::{coil_srf, DrivePoint};
use crate::error::{Error, Result};
use crate::thermo::{self, ThermoTable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOptions {
    /// Accepted outlet-temperature error [K].
    pub temperature_tolerance: f64,
    /// Accepted conversion error (absolute fraction).
    pub conversion_tolerance: f64,
    /// Largest coil current the supply can deliver [A RMS].
    pub max_current: f64,
    pub initial_ghsv: f64,
    pub solver: SolverOptions,
}

impl Default for ControlOptions {
    fn default() -> Self {
        Self {
            temperature_tolerance: 0.05,
            conversion_tolerance: 0.002,
            max_current: 1e5,
            initial_ghsv: 300.0,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerControlled {
    pub drive: DrivePoint,
    pub result: SimulationResult,
    pub r_susc: f64,
    pub(crate) kappa: f64,
}

/// Coil current that holds the maximum outlet temperature at `target`.
///
/// The heating shape is fixed, so only its amplitude `I^2` is searched:
/// a safeguarded secant on `T_out,max(I^2)` with the previous temperature
/// field as the warm start.
pub fn power_control(
    case: &ReactorCase,
    frequency: f64,
    target: f64,
    grid: GridSpec,
    options: &ControlOptions,
) -> Result<PowerControlled> {
    power_control_warm(case, frequency, target, grid, options, None)
}

pub(crate) fn power_control_warm(
    case: &ReactorCase,
    frequency: f64,
    target: f64,
    grid: GridSpec,
    options: &ControlOptions,
    warm: Option<(&[f64], f64)>,
) -> Result<PowerControlled> {
    // `warm` carries a temperature field and the ratio of the last converged
    // current^2 to its energy-balance first guess.
    case.validate()?;
    GridSpec::new(grid.nr, grid.nz)?;
    if case.heating_mode != HeatingMode::Induction {
        return Err(Error::Domain("power control needs induction heating".into()));
    }
    if !(target > case.ambient_temperature && target > case.feed.inlet_temperature) {
        return Err(Error::Domain(format!("target {target} K must exceed ambient and inlet temperatures")));
    }
    let srf = coil_srf(&case.coil)?;
    if frequency >= srf.f_res {
        return Err(Error::UnreachableTarget(format!(
            "drive frequency {frequency:.3e} Hz is above the coil self-resonance {:.3e} Hz",
            srf.f_res
        )));
    }
    let source = HeatSource::induction(case, frequency, grid)?;
    if !(source.r_susc > 0.0) {
        return Err(Error::UnreachableTarget("susceptor absorbs no power".into()));
    }
    let s_max = options.max_current * options.max_current;

    let mut field: Option<Vec<f64>> = warm.map(|(t, _)| t.to_vec());
    let solve = |s: f64, field: &mut Option<Vec<f64>>| -> Result<SimulationResult> {
        let r = solve_steady_with(case, &source, s.sqrt(), None, &options.solver, field.as_deref())?;
        *field = Some(r.temperature.clone());
        Ok(r)
    };

    let guess = first_guess(case, target, source.r_susc);
    let mut s = match warm {
        Some((_, kappa)) if kappa > 0.0 => kappa * guess,
        _ => guess,
    }
    .min(s_max);
    let mut lo: Option<(f64, f64)> = None;
    let mut hi: Option<(f64, f64)> = None;
    let mut prev: Option<(f64, f64)> = None;
    for _ in 0..80 {
        let r = solve(s, &mut field)?;
        let err = r.t_outlet_max - target;
        if err.abs() <= options.temperature_tolerance {
            return Ok(PowerControlled {
                drive: DrivePoint { frequency, current: s.sqrt() },
                result: r,
                r_susc: source.r_susc,
                kappa: s / guess,
            });
        }
        if err < 0.0 {
            lo = Some((s, err));
        } else {
            hi = Some((s, err));
        }
        let secant = prev.and_then(|(sp, ep)| {
            let d = err - ep;
            if d != 0.0 {
                Some(s - err * (s - sp) / d)
            } else {
                None
            }
        });
        prev = Some((s, err));
        let next = match (lo, hi) {
            (Some((sl, el)), Some((sh, eh))) => {
                let inside = secant.filter(|&c| c > sl.min(sh) && c < sl.max(sh));
                inside.unwrap_or_else(|| sl - el * (sh - sl) / (eh - el))
            }
            (Some(_), None) => {
                if s >= s_max {
                    return Err(Error::UnreachableTarget(format!(
                        "outlet reaches only {:.1} K at the current cap {:.0} A",
                        r.t_outlet_max, options.max_current
                    )));
                }
                secant.filter(|&c| c > s && c < 4.0 * s).unwrap_or(2.0 * s).min(s_max)
            }
            (None, Some(_)) => secant.filter(|&c| c > 0.25 * s && c < s).unwrap_or(0.5 * s),
            (None, None) => unreachable!(),
        };
        s = next;
    }
    Err(Error::NonConvergence { iterations: 80, residual: prev.map(|p| p.1.abs()).unwrap_or(f64::NAN) })
}

fn first_guess(case: &ReactorCase, target: f64, r_susc: f64) -> f64 {
    let flow = case.feed.molar_flow;
    let sensible = flow * 32.0 * (target - case.feed.inlet_temperature);
    let rxn = 0.3 * flow * 37_000.0 * 0.25;
    let r = case.susceptor.radius;
    let area = 2.0 * std::f64::consts::PI * r * case.susceptor.length;
    let res = r * (1.0 + case.insulation.thickness / r).ln() / case.insulation.k_ins + 1e-6;
    let loss = area / res * (target - case.ambient_temperature);
    ((sensible + rxn + loss) / r_susc).max(1e-12)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GhsvSearch {
    pub ghsv: f64,
    pub drive: Option<DrivePoint>,
    pub result: SimulationResult,
}

/// Space velocity at which the flow-averaged outlet conversion equals
/// `target_x` while the hottest outlet cell sits at `target_t`.
///
/// Induction cases run [`power_control`] at every trial; wall-heated cases
/// hold the wall at `target_t`. Bisection in `ln GHSV`, accelerated by
/// interpolation once a bracket exists.
pub fn find_ghsv_for_conversion(
    case: &ReactorCase,
    frequency: f64,
    target_x: f64,
    target_t: f64,
    grid: GridSpec,
    options: &ControlOptions,
) -> Result<GhsvSearch> {
    case.validate()?;
    let table = ThermoTable::builtin();
    let x_eq = thermo::equilibrium_conversion(&case.feed, target_t, &table)?;
    if !(target_x > 0.0) || target_x >= x_eq {
        return Err(Error::Infeasible(format!(
            "target conversion {target_x} is not below the equilibrium value {x_eq:.4} at {target_t} K"
        )));
    }
    let mut warm: Option<(Vec<f64>, f64)> = None;
    let eval = |g: f64, warm: &mut Option<(Vec<f64>, f64)>| -> Result<(f64, Option<DrivePoint>, SimulationResult)> {
        let c = case.with_ghsv(&GhsvSpec::new(g))?;
        match case.heating_mode {
            HeatingMode::Induction => {
                let w = warm.as_ref().map(|(t, s)| (t.as_slice(), *s));
                let pc = power_control_warm(&c, frequency, target_t, grid, options, w)?;
                *warm = Some((pc.result.temperature.clone(), pc.kappa));
                Ok((pc.result.x_co2_outlet, Some(pc.drive), pc.result))
            }
            HeatingMode::Wall => {
                let r = solve_steady_with(
                    &c,
                    &HeatSource::none(grid),
                    0.0,
                    Some(target_t),
                    &options.solver,
                    warm.as_ref().map(|(t, _)| t.as_slice()),
                )?;
                *warm = Some((r.temperature.clone(), 0.0));
                Ok((r.x_co2_outlet, None, r))
            }
        }
    };
    let g_min = 1e-2;
    let g_max = 1e6;
    let mut g = options.initial_ghsv.clamp(g_min, g_max);
    let (mut x, mut drive, mut res) = eval(g, &mut warm)?;
    let mut lo: Option<(f64, f64, Option<DrivePoint>, SimulationResult)> = None; // x above target
    let mut hi: Option<(f64, f64, Option<DrivePoint>, SimulationResult)> = None; // x below target
    for _ in 0..80 {
        if (x - target_x).abs() <= options.conversion_tolerance {
            return Ok(GhsvSearch { ghsv: g, drive, result: res });
        }
        if x > target_x {
            lo = Some((g, x, drive, res));
        } else {
            hi = Some((g, x, drive, res));
        }
        g = match (&lo, &hi) {
            (Some((gl, xl, ..)), Some((gh, xh, ..))) => {
                let (ul, uh) = (gl.ln(), gh.ln());
                let t = (xl - target_x) / (xl - xh);
                let u = ul + t.clamp(0.1, 0.9) * (uh - ul);
                u.exp()
            }
            (Some((gl, ..)), None) => {
                if *gl >= g_max {
                    return Err(Error::Infeasible("conversion target exceeded even at the largest GHSV".into()));
                }
                (gl * 3.0).min(g_max)
            }
            (None, Some((gh, ..))) => {
                if *gh <= g_min {
                    return Err(Error::Infeasible(format!(
                        "outlet conversion stays below {target_x} even at GHSV {g_min} 1/h"
                    )));
                }
                (gh / 3.0).max(g_min)
            }
            (None, None) => unreachable!(),
        };
        let out = eval(g, &mut warm)?;
        x = out.0;
        drive = out.1;
        res = out.2;
        if let (Some((gl, ..)), Some((gh, ..))) = (&lo, &hi) {
            if (gh / gl - 1.0).abs() < 1e-6 {
                return Ok(GhsvSearch { ghsv: g, drive, result: res });
            }
        }
    }
    Err(Error::NonConvergence { iterations: 80, residual: (x - target_x).abs() })
}
