//! Fixed-point energy/species solver.
//!
//! Each sweep marches species along every streamline at the current
//! temperature, linearises the cell outflow enthalpy as
//! `H(T) ~ H* + C_eff (T - T*)` with `C_eff = cp + dH_rxn dxi/dT`, and solves
//! the resulting banded linear system for the new temperature field.

use std::f64::consts::PI;

use super::{ring_areas, EnergyLedger, GridSpec, HeatingMode, ReactorCase, SimulationResult};
use crate::circuit::{self, DrivePoint};
use crate::emfield::{self, RadialField};
use crate::error::{Error, Result};
use crate::thermo::{self, advance, equilibrium_extent, Composition, ThermoTable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub relaxation: f64,
    /// Largest accepted relative temperature change per sweep.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { relaxation: 0.7, tolerance: 1e-6, max_iterations: 10_000 }
    }
}

/// Cell-averaged volumetric heating per unit squared RMS current [W/(m^3 A^2)].
#[derive(Debug, Clone, PartialEq)]
pub struct HeatSource {
    pub grid: GridSpec,
    pub frequency: f64,
    pub q_unit: Vec<f64>,
    /// Susceptor resistance [ohm]; `sum q_unit V = r_susc`.
    pub r_susc: f64,
}

impl HeatSource {
    pub fn induction(case: &ReactorCase, frequency: f64, grid: GridSpec) -> Result<Self> {
        let spec = &case.susceptor;
        let field: RadialField = if spec.profile.is_uniform() {
            emfield::analytic_field_uniform(spec, frequency, 1.0, 32 * grid.nr + 1)?
        } else {
            circuit::radial_unit_field(spec, frequency)?
        };
        let radius = spec.radius;
        let dr = radius / grid.nr as f64;
        let p_bar: Vec<f64> = (0..grid.nr)
            .map(|i| ring_average(&field, i as f64 * dr, (i + 1) as f64 * dr))
            .collect();
        let length = spec.length;
        let dz = length / grid.nz as f64;
        let b2_bar: Vec<f64> = (0..grid.nz)
            .map(|j| {
                let z0 = -0.5 * length + j as f64 * dz;
                let m = 16;
                let h = dz / m as f64;
                let mut acc = 0.0;
                for k in 0..=m {
                    let b = circuit::biot_savart_bz(&case.coil, 1.0, z0 + k as f64 * h);
                    let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                    acc += w * 2.0 * b * b;
                }
                acc * h / 3.0 / dz
            })
            .collect();
        let areas = ring_areas(radius, grid.nr);
        let mut q_unit = vec![0.0; grid.cells()];
        let mut total = 0.0;
        for j in 0..grid.nz {
            for i in 0..grid.nr {
                let q = p_bar[i] * b2_bar[j];
                q_unit[j * grid.nr + i] = q;
                total += q * areas[i] * dz;
            }
        }
        let r_susc = circuit::susceptor_resistance(spec, &case.coil, frequency)?;
        if total > 0.0 {
            let s = r_susc / total;
            q_unit.iter_mut().for_each(|q| *q *= s);
        }
        Ok(Self { grid, frequency, q_unit, r_susc })
    }

    pub fn none(grid: GridSpec) -> Self {
        Self { grid, frequency: 0.0, q_unit: vec![0.0; grid.cells()], r_susc: 0.0 }
    }
}

/// Area-weighted mean of `p` over the ring `[a, b]` (linear interpolation).
fn ring_average(field: &RadialField, a: f64, b: f64) -> f64 {
    let m = 64;
    let h = (b - a) / m as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut k = 0usize;
    for s in 0..m {
        let r = a + (s as f64 + 0.5) * h;
        while k + 2 < field.r.len() && field.r[k + 1] < r {
            k += 1;
        }
        let (r0, r1) = (field.r[k], field.r[k + 1]);
        let t = ((r - r0) / (r1 - r0)).clamp(0.0, 1.0);
        let p = field.p_density[k] * (1.0 - t) + field.p_density[k + 1] * t;
        num += p * r;
        den += r;
    }
    num / den
}

/// Induction-heated steady state at a fixed drive point.
pub fn solve_steady(case: &ReactorCase, drive: &DrivePoint, grid: GridSpec) -> Result<SimulationResult> {
    case.validate()?;
    GridSpec::new(grid.nr, grid.nz)?;
    if case.heating_mode != HeatingMode::Induction {
        return Err(Error::Domain("solve_steady needs induction heating; use wall_heated_solve".into()));
    }
    let source = if drive.current > 0.0 {
        HeatSource::induction(case, drive.frequency, grid)?
    } else {
        HeatSource::none(grid)
    };
    solve_steady_with(case, &source, drive.current, None, &SolverOptions::default(), None)
}

/// Wall-heated steady state with the susceptor wall held at `t_wall`.
pub fn wall_heated_solve(case: &ReactorCase, t_wall: f64, grid: GridSpec) -> Result<SimulationResult> {
    case.validate()?;
    GridSpec::new(grid.nr, grid.nz)?;
    if case.heating_mode != HeatingMode::Wall {
        return Err(Error::Domain("wall_heated_solve needs heating_mode = wall".into()));
    }
    solve_steady_with(case, &HeatSource::none(grid), 0.0, Some(t_wall), &SolverOptions::default(), None)
}

struct Species {
    /// Outlet amounts of each cell [mol/s].
    n: Vec<Composition>,
    /// Extent in each cell [mol/s].
    xi: Vec<f64>,
}

struct Geometry {
    nr: usize,
    nz: usize,
    dz: f64,
    r: Vec<f64>,
    z: Vec<f64>,
    areas: Vec<f64>,
    /// Radial face conductances `G_{i+1/2}` [W/K].
    g_r: Vec<f64>,
    /// Axial face conductance per ring [W/K].
    g_z: Vec<f64>,
    /// Outer-wall conductance per axial cell [W/K].
    u_wall: f64,
}

impl Geometry {
    fn new(case: &ReactorCase, grid: GridSpec, wall_mode: bool) -> Self {
        let (nr, nz) = (grid.nr, grid.nz);
        let radius = case.susceptor.radius;
        let length = case.susceptor.length;
        let dr = radius / nr as f64;
        let dz = length / nz as f64;
        let k = case.bed.k_eff;
        let areas = ring_areas(radius, nr);
        let g_r = (0..nr - 1).map(|i| k * 2.0 * PI * (i + 1) as f64 * dr * dz / dr).collect();
        let g_z = areas.iter().map(|a| k * a / dz).collect();
        let half_cell = dr / (2.0 * k);
        let resistance = if wall_mode {
            half_cell
        } else {
            let t = case.insulation.thickness;
            half_cell + radius * (1.0 + t / radius).ln() / case.insulation.k_ins
        };
        let u_wall = 2.0 * PI * radius * dz / resistance;
        Self {
            nr,
            nz,
            dz,
            r: (0..nr).map(|i| (i as f64 + 0.5) * dr).collect(),
            z: (0..nz).map(|j| (j as f64 + 0.5) * dz).collect(),
            areas,
            g_r,
            g_z,
            u_wall,
        }
    }
}

struct Kinetic<'a> {
    case: &'a ReactorCase,
    table: &'a ThermoTable,
    pressure: f64,
}

impl Kinetic<'_> {
    /// Implicit extent of one cell: `xi = V_cat r(T, n_in + nu xi)`.
    fn extent(&self, n_in: &Composition, t: f64, v_cat: f64) -> f64 {
        let kin = &self.case.bed.kinetics;
        let flow: f64 = n_in.iter().sum();
        if flow <= 0.0 || t < kin.light_off_temperature {
            return 0.0;
        }
        let tk = t.clamp(thermo::KEQ_T_MIN, thermo::KEQ_T_MAX);
        let keq = thermo::rwgs_equilibrium_constant(tk, self.table).unwrap_or(1.0);
        let xi_eq = equilibrium_extent(n_in, keq);
        let (a, b, c, d) = (n_in[0], n_in[1], n_in[2], n_in[3]);
        let g = v_cat * kin.effective_rate_constant(t) * self.pressure * self.pressure / (flow * flow);
        // xi - g D(xi) = 0 with D(xi) = (a - xi)(b - xi) - (c + xi)(d + xi) / K.
        let qa = -g * (1.0 - 1.0 / keq);
        let qb = 1.0 + g * (a + b + (c + d) / keq);
        let qc = -g * (a * b - c * d / keq);
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
        let q = -0.5 * (qb + disc.sqrt());
        let (lo, hi) = if xi_eq >= 0.0 { (0.0, xi_eq) } else { (xi_eq, 0.0) };
        let xi = if q != 0.0 { qc / q } else { 0.0 };
        if xi.is_finite() && xi >= lo && xi <= hi {
            return xi;
        }
        // Bisection fallback on the monotone residual.
        let h = |x: f64| x - g * ((a - x) * (b - x) - (c + x) * (d + x) / keq);
        let (mut l, mut u) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (l + u);
            if h(m) > 0.0 {
                u = m;
            } else {
                l = m;
            }
        }
        0.5 * (l + u)
    }
}

fn march_species(geo: &Geometry, kin: &Kinetic, inlet: &[Composition], temps: &[f64], void: f64) -> Species {
    let n_cells = geo.nr * geo.nz;
    let mut n = vec![[0.0; 5]; n_cells];
    let mut xi = vec![0.0; n_cells];
    for i in 0..geo.nr {
        let v_cat = (1.0 - void) * geo.areas[i] * geo.dz;
        let mut up = inlet[i];
        for j in 0..geo.nz {
            let p = j * geo.nr + i;
            let x = kin.extent(&up, temps[p], v_cat);
            xi[p] = x;
            up = advance(&up, x);
            n[p] = up;
        }
    }
    Species { n, xi }
}

/// General steady solve. `wall_temperature = Some(T)` selects wall heating.
pub fn solve_steady_with(
    case: &ReactorCase,
    source: &HeatSource,
    current: f64,
    wall_temperature: Option<f64>,
    options: &SolverOptions,
    initial: Option<&[f64]>,
) -> Result<SimulationResult> {
    case.validate()?;
    let grid = source.grid;
    let table = ThermoTable::builtin();
    let wall_mode = wall_temperature.is_some();
    let geo = Geometry::new(case, grid, wall_mode);
    let (nr, nz) = (geo.nr, geo.nz);
    let n_cells = nr * nz;
    let t_in = case.feed.inlet_temperature;
    let t_sink = wall_temperature.unwrap_or(case.ambient_temperature);
    let kin = Kinetic { case, table: &table, pressure: case.feed.pressure };
    let void = case.bed.void_fraction;

    let total_area: f64 = geo.areas.iter().sum();
    let feed_flows = case.feed.species_flows();
    let inlet: Vec<Composition> = geo.areas.iter().map(|a| feed_flows.map(|f| f * a / total_area)).collect();
    let h_in: Vec<f64> = inlet.iter().map(|n| table.mixture_enthalpy_clamped(n, t_in)).collect();
    let i2 = current * current;
    let heat: Vec<f64> = (0..n_cells).map(|p| source.q_unit[p] * i2 * geo.areas[p % nr] * geo.dz).collect();

    let mut temps: Vec<f64> = match initial {
        Some(t0) if t0.len() == n_cells => t0.to_vec(),
        _ => vec![t_in; n_cells],
    };
    let dt_probe = 0.05;
    let mut band = BandMatrix::new(n_cells, nr);
    let mut rhs = vec![0.0; n_cells];
    let mut h_star = vec![0.0; n_cells];
    let mut c_eff = vec![0.0; n_cells];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut prev_residual = f64::INFINITY;
    let mut w = options.relaxation;
    // Residuals at iterations 1, 2, 4, 8, ... for diagnostics.
    let mut history: Vec<(usize, f64)> = Vec::new();
    while iterations < options.max_iterations {
        iterations += 1;
        let sp = march_species(&geo, &kin, &inlet, &temps, void);
        for i in 0..nr {
            let v_cat = (1.0 - void) * geo.areas[i] * geo.dz;
            let mut up = inlet[i];
            for j in 0..nz {
                let p = j * nr + i;
                let t = temps[p];
                h_star[p] = table.mixture_enthalpy_clamped(&sp.n[p], t);
                let mut c = table.mixture_cp_clamped(&sp.n[p], t);
                if sp.xi[p] != 0.0 || t + dt_probe >= case.bed.kinetics.light_off_temperature {
                    let xi2 = kin.extent(&up, t + dt_probe, v_cat);
                    let dh = table.delta_h(t.clamp(thermo::T_MIN, thermo::T_MAX)).unwrap_or(0.0);
                    c += (dh * (xi2 - sp.xi[p]) / dt_probe).max(0.0);
                }
                c_eff[p] = c;
                up = sp.n[p];
            }
        }
        band.clear();
        for j in 0..nz {
            for i in 0..nr {
                let p = j * nr + i;
                let mut diag = -c_eff[p];
                let mut b = -heat[p] + h_star[p] - c_eff[p] * temps[p];
                if j == 0 {
                    b -= h_in[i];
                } else {
                    let up = p - nr;
                    band.add(p, up, c_eff[up]);
                    b -= h_star[up] - c_eff[up] * temps[up];
                }
                if i > 0 {
                    diag -= geo.g_r[i - 1];
                    band.add(p, p - 1, geo.g_r[i - 1]);
                }
                if i + 1 < nr {
                    diag -= geo.g_r[i];
                    band.add(p, p + 1, geo.g_r[i]);
                } else {
                    diag -= geo.u_wall;
                    b -= geo.u_wall * t_sink;
                }
                if j > 0 {
                    diag -= geo.g_z[i];
                    band.add(p, p - nr, geo.g_z[i]);
                }
                if j + 1 < nz {
                    diag -= geo.g_z[i];
                    band.add(p, p + nr, geo.g_z[i]);
                }
                band.add(p, p, diag);
                rhs[p] = b;
            }
        }
        let solved = band.solve(&mut rhs)?;
        residual = 0.0;
        for p in 0..n_cells {
            residual = f64::max(residual, (solved[p] - temps[p]).abs() / solved[p].abs().max(1.0));
        }
        if iterations.is_power_of_two() {
            history.push((iterations, residual));
        }
        if !residual.is_finite() {
            break;
        }
        // Halve the relaxation whenever the update grows; recover slowly.
        if residual > prev_residual {
            w = (0.5 * w).max(0.05);
        } else {
            w = (1.1 * w).min(options.relaxation);
        }
        prev_residual = residual;
        for p in 0..n_cells {
            temps[p] += w * (solved[p] - temps[p]);
        }
        if residual < options.tolerance {
            break;
        }
    }
    if !(residual < options.tolerance) {
        history.push((iterations, residual));
        let trail: Vec<String> = history.iter().map(|(k, r)| format!("{k}:{r:.2e}")).collect();
        log::warn!("reactor solve residual history (sweep:residual) {}", trail.join(" "));
        return Err(Error::NonConvergence { iterations, residual });
    }
    log::debug!("reactor solve converged in {iterations} sweeps (residual {residual:.2e})");

    let sp = march_species(&geo, &kin, &inlet, &temps, void);
    let mut q_loss = 0.0;
    let mut p_in = 0.0;
    for j in 0..nz {
        let p = j * nr + nr - 1;
        let flux = geo.u_wall * (temps[p] - t_sink);
        if wall_mode {
            p_in -= flux;
        } else {
            q_loss += flux;
        }
    }
    if let Some(t_wall) = wall_temperature {
        // The heated wall also feeds the insulation shell.
        let t = case.insulation.thickness;
        let radius = case.susceptor.radius;
        let shell = 2.0 * PI * radius * case.susceptor.length * case.insulation.k_ins
            / (radius * (1.0 + t / radius).ln()).max(f64::MIN_POSITIVE);
        q_loss = shell * (t_wall - case.ambient_temperature);
        p_in += q_loss;
    } else {
        p_in = heat.iter().sum();
    }
    let mut q_sens = 0.0;
    let mut q_rxn = 0.0;
    let mut outlet = [0.0; 5];
    let mut t_out_max = f64::NEG_INFINITY;
    for i in 0..nr {
        let p = (nz - 1) * nr + i;
        let t_out = temps[p];
        t_out_max = t_out_max.max(t_out);
        q_sens += table.mixture_enthalpy_clamped(&inlet[i], t_out) - h_in[i];
        let xi_total = inlet[i][0] - sp.n[p][0];
        let dh = table.delta_h(t_out.clamp(thermo::T_MIN, thermo::T_MAX)).unwrap_or(0.0);
        q_rxn += xi_total * dh;
        for k in 0..5 {
            outlet[k] += sp.n[p][k];
        }
    }
    let conversion: Vec<f64> = (0..n_cells)
        .map(|p| {
            let a0 = inlet[p % nr][0];
            if a0 > 0.0 {
                (a0 - sp.n[p][0]) / a0
            } else {
                0.0
            }
        })
        .collect();
    let converted: f64 = (0..nr).map(|i| inlet[i][0] - sp.n[(nz - 1) * nr + i][0]).sum();
    let x_out = if feed_flows[0] > 0.0 { converted / feed_flows[0] } else { 0.0 };
    Ok(SimulationResult {
        grid,
        r: geo.r,
        z: geo.z,
        temperature: temps,
        conversion,
        x_co2_outlet: x_out,
        t_outlet_max: t_out_max,
        ledger: EnergyLedger { p_susceptor: p_in, q_sensible: q_sens, q_reaction: q_rxn, q_insulation_loss: q_loss },
        outlet_flows: outlet,
        inlet_flows: feed_flows,
        converged: true,
        iterations,
        residual,
        current: if wall_mode { 0.0 } else { current },
    })
}

/// Square banded matrix with equal lower and upper bandwidth.
pub(crate) struct BandMatrix {
    n: usize,
    w: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub(crate) fn new(n: usize, w: usize) -> Self {
        Self { n, w, data: vec![0.0; n * (2 * w + 1)] }
    }

    fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    fn idx(&self, row: usize, col: usize) -> usize {
        row * (2 * self.w + 1) + (col + self.w - row)
    }

    pub(crate) fn add(&mut self, row: usize, col: usize, v: f64) {
        let k = self.idx(row, col);
        self.data[k] += v;
    }

    /// In-place LU without pivoting; returns the solution.
    pub(crate) fn solve(&mut self, rhs: &mut [f64]) -> Result<Vec<f64>> {
        let (n, w) = (self.n, self.w);
        let stride = 2 * w + 1;
        for k in 0..n {
            let pivot = self.data[k * stride + w];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::Degenerate(format!("zero pivot in row {k}")));
            }
            let last = (k + w).min(n - 1);
            for i in k + 1..=last {
                let ik = i * stride + (k + w - i);
                let l = self.data[ik] / pivot;
                if l == 0.0 {
                    continue;
                }
                self.data[ik] = l;
                let (head, tail) = self.data.split_at_mut(i * stride);
                let krow = &head[k * stride..k * stride + stride];
                let irow = &mut tail[..stride];
                for c in (k + 1)..=last {
                    irow[c + w - i] -= l * krow[c + w - k];
                }
                rhs[i] -= l * rhs[k];
            }
        }
        let mut x = rhs.to_vec();
        for k in (0..n).rev() {
            let last = (k + w).min(n - 1);
            let row = &self.data[k * stride..(k + 1) * stride];
            let mut s = x[k];
            for c in k + 1..=last {
                s -= row[c + w - k] * x[c];
            }
            x[k] = s / row[w];
        }
        Ok(x)
    }
}
