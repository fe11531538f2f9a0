//! One function per subcommand.

use std::path::Path;

use metareactor::circuit::{
    biot_savart_bz, circuit_report, coil_resistance_dowell, coil_srf, f_ideal_uniform, radial_unit_field,
    susceptor_resistance, DrivePoint,
};
use metareactor::effmed::{fit_sigma_from_impedance, sigma_for_delta_ratio, ConductivityProfile, FitOptions, ImpedanceSample};
use metareactor::reactorsim::{power_control, solve_steady_with, HeatSource, HeatingMode, SimulationResult};
use metareactor::scaleup::{sweep_resumable, ReactorType, SweepRow, DESIGN_DELTA_RATIO};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, OutputDir, VERSION};
use crate::svg::{self, Lattice, Marker, PlotKind, PlotSpec, Scale, Series};

/// Contour bands for the coupling-efficiency map.
pub const CONTOUR_LEVELS: [f64; 5] = [0.5, 0.7, 0.8, 0.9, 0.95];

fn plot_spec(kind: PlotKind, title: &str, x: (&str, Scale), y: (&str, Scale)) -> PlotSpec {
    PlotSpec { kind, title: title.into(), x_label: x.0.into(), y_label: y.0.into(), x_scale: x.1, y_scale: y.1 }
}

/// `n` points from `lo` to `hi`, evenly spaced in `ln`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

pub fn check_range(name: &str, lo: f64, hi: f64, n: usize) -> Result<(), CliError> {
    if !(lo > 0.0 && lo.is_finite() && hi.is_finite()) {
        return Err(CliError::Config(format!("{name} range must be positive, got [{lo}, {hi}]")));
    }
    if n == 0 {
        return Err(CliError::Config(format!("{name} needs at least one point")));
    }
    if n > 1 && !(hi > lo) {
        return Err(CliError::Config(format!("{name} range must be ascending, got [{lo}, {hi}]")));
    }
    Ok(())
}

pub fn impedance(config: &RunConfig, out: &mut OutputDir, f_min: f64, f_max: f64, n: usize) -> Result<(), CliError> {
    check_range("frequency", f_min, f_max, n)?;
    let spec = config.susceptor_spec()?;
    let coil = config.coil_spec()?;
    let mut rows = Vec::new();
    let (mut r_s, mut r_c) = (Vec::new(), Vec::new());
    for f in log_space(f_min, f_max, n) {
        let rs = susceptor_resistance(&spec, &coil, f)?;
        let rc = coil_resistance_dowell(&coil, f)?;
        rows.push(vec![num(f), num(rs), num(rc), num(rs / (rs + rc))]);
        r_s.push((f, rs));
        r_c.push((f, rc));
    }
    out.table("impedance.csv", &["f_Hz", "R_susc_ohm", "R_coil_ohm", "eta_coupling"], &rows)?;
    let f_ideal = match spec.profile {
        ConductivityProfile::Uniform { sigma_eff } => Some(f_ideal_uniform(sigma_eff, spec.radius)?),
        _ => None,
    };
    if let Some(f) = f_ideal {
        println!("f_ideal (skin depth = R/2): {f:.4e} Hz");
    }
    if n > 1 {
        let markers: Vec<Marker> = f_ideal.map(|x| Marker { x, label: "f_ideal".into() }).into_iter().collect();
        let plot = svg::line_plot(
            &plot_spec(PlotKind::ImpedanceCurve, "Resistance vs frequency", ("f [Hz]", Scale::Log), ("R [ohm]", Scale::Log)),
            &[Series::new("R_susc", r_s), Series::new("R_coil", r_c)],
            &markers,
        )?;
        out.write("impedance.svg", plot.as_bytes())?;
    }
    Ok(())
}

pub fn contour(
    config: &RunConfig,
    out: &mut OutputDir,
    beta: (f64, f64, usize),
    freq: (f64, f64, usize),
) -> Result<(), CliError> {
    check_range("beta", beta.0, beta.1, beta.2)?;
    check_range("frequency", freq.0, freq.1, freq.2)?;
    let rules = config.scale_rules();
    let betas = log_space(beta.0, beta.1, beta.2);
    let freqs = log_space(freq.0, freq.1, freq.2);
    let mut rows = Vec::new();
    let mut values = vec![vec![f64::NAN; betas.len()]; freqs.len()];
    let mut masked = vec![vec![false; betas.len()]; freqs.len()];
    for (i, &b) in betas.iter().enumerate() {
        let geo = rules.geometry(b)?;
        let srf = coil_srf(&geo.coil)?.f_res;
        for (j, &f) in freqs.iter().enumerate() {
            let sigma = sigma_for_delta_ratio(geo.radius, f, DESIGN_DELTA_RATIO)?;
            let spec = geo.susceptor(ConductivityProfile::uniform(sigma))?;
            let eta = circuit_report(b, &spec, &geo.coil, f)?.eta_coupling;
            let above = f >= srf;
            values[j][i] = eta;
            masked[j][i] = above;
            rows.push(vec![num(b), num(f), num(sigma), num(eta), (above as u8).to_string()]);
        }
    }
    out.table("contour.csv", &["beta", "f_Hz", "sigma_eff", "eta_coupling", "above_srf"], &rows)?;
    if betas.len() > 1 && freqs.len() > 1 {
        let plot = svg::contour_plot(
            &plot_spec(
                PlotKind::CouplingContour,
                "Coupling efficiency on the skin-depth design rule",
                ("beta", Scale::Log),
                ("f [Hz]", Scale::Log),
            ),
            &Lattice { xs: betas, ys: freqs, values, masked },
            &CONTOUR_LEVELS,
        )?;
        out.write("contour.svg", plot.as_bytes())?;
    }
    Ok(())
}

pub fn simulate(config: &RunConfig, out: &mut OutputDir, current: Option<f64>) -> Result<(), CliError> {
    let case = config.reactor_case()?;
    let grid = config.grid()?;
    let frequency = config.susceptor()?.frequency_hz;
    let target = config.sweep.target_temperature_k;
    let control = config.control();
    let result: SimulationResult = match (case.heating_mode, current) {
        (HeatingMode::Wall, Some(_)) => {
            return Err(CliError::Config("--current-a applies to induction heating only".into()));
        }
        (HeatingMode::Wall, None) => {
            solve_steady_with(&case, &HeatSource::none(grid), 0.0, Some(target), &control.solver, None)?
        }
        (HeatingMode::Induction, Some(i)) => {
            let drive = DrivePoint::new(frequency, i)?;
            let source = HeatSource::induction(&case, drive.frequency, grid)?;
            solve_steady_with(&case, &source, drive.current, None, &control.solver, None)?
        }
        (HeatingMode::Induction, None) => power_control(&case, frequency, target, grid, &control)?.result,
    };
    out.csv("field.csv", |b| Ok(result.write_field_csv(b)?))?;
    out.csv("profile.csv", |b| Ok(result.write_profile_csv(b)?))?;
    out.csv("ledger.csv", |b| Ok(result.write_ledger_csv(b)?))?;

    let outlet: Vec<(f64, f64)> = result.r.iter().copied().zip(result.outlet_radial_temperature()).collect();
    let axis: Vec<(f64, f64)> = result.z.iter().copied().zip(result.axis_temperature()).collect();
    let plot = svg::line_plot(
        &plot_spec(PlotKind::RadialTemperature, "Outlet radial temperature", ("r [m]", Scale::Linear), ("T [K]", Scale::Linear)),
        &[Series::new("outlet", outlet)],
        &[],
    )?;
    out.write("radial_temperature.svg", plot.as_bytes())?;
    let plot = svg::line_plot(
        &plot_spec(PlotKind::AxialTemperature, "Axis temperature", ("z [m]", Scale::Linear), ("T [K]", Scale::Linear)),
        &[Series::new("axis", axis)],
        &[],
    )?;
    out.write("axial_temperature.svg", plot.as_bytes())?;
    if case.heating_mode == HeatingMode::Induction {
        let field = radial_unit_field(&case.susceptor, frequency)?;
        let b0 = 2f64.sqrt() * biot_savart_bz(&case.coil, result.current, 0.0);
        let p: Vec<(f64, f64)> = field.r.iter().zip(&field.p_density).map(|(r, q)| (*r, q * b0 * b0)).collect();
        let plot = svg::line_plot(
            &plot_spec(
                PlotKind::RadialPower,
                "Mid-plane power density",
                ("r [m]", Scale::Linear),
                ("p [W/m^3]", Scale::Linear),
            ),
            &[Series::new("p(r)", p)],
            &[],
        )?;
        out.write("radial_power.svg", plot.as_bytes())?;
    }
    let l = &result.ledger;
    println!("outlet conversion X_CO2 = {:.4}", result.x_co2_outlet);
    println!("max outlet temperature = {:.2} K", result.t_outlet_max);
    if case.heating_mode == HeatingMode::Induction {
        println!("coil current = {:.3} A (RMS) at {frequency:.4e} Hz", result.current);
    }
    println!(
        "heat input {:.4e} W = sensible {:.4e} + reaction {:.4e} + loss {:.4e} (closure {:.2e})",
        l.p_susceptor,
        l.q_sensible,
        l.q_reaction,
        l.q_insulation_loss,
        l.closure()
    );
    println!("converged in {} sweeps (residual {:.2e})", result.iterations, result.residual);
    Ok(())
}

pub fn sweep(config: &RunConfig, out: &mut OutputDir, workers: usize) -> Result<(), CliError> {
    let cfg = config.sweep_config()?;
    let path = out.path("sweep.csv");
    let rows = sweep_resumable(&cfg, workers, &path, &config.hash(), VERSION)?;
    out.note("sweep.csv");

    let failed: Vec<&SweepRow> = rows.iter().filter(|r| !r.is_ok()).collect();
    for r in &failed {
        log::warn!("beta {} {}: {}", r.beta, r.reactor_type.as_str(), r.error);
    }
    // Plug-flow bound at the highest throughput any reactor reached at the smallest scale.
    let beta_min = cfg.betas.first().copied();
    let ghsv_ref = rows
        .iter()
        .filter(|r| r.is_ok() && Some(r.beta) == beta_min)
        .map(|r| r.ghsv)
        .fold(f64::NAN, f64::max);
    let mut limit = Vec::new();
    if ghsv_ref.is_finite() {
        for &b in &cfg.betas {
            let (geo, point) = cfg.design_point(b)?;
            limit.push((b, cfg.plugflow_limit_for(&geo, point.eta_coupling_uniform, ghsv_ref)?));
        }
        let table: Vec<Vec<String>> = limit.iter().map(|(b, e)| vec![num(*b), num(ghsv_ref), num(*e)]).collect();
        out.table("plugflow.csv", &["beta", "ghsv_ref_per_h", "eta_plugflow"], &table)?;
    }

    let curve = |kind: ReactorType, value: fn(&SweepRow) -> f64| -> Vec<(f64, f64)> {
        rows.iter().filter(|r| r.reactor_type == kind && r.is_ok()).map(|r| (r.beta, value(r))).collect()
    };
    let ghsv: Vec<Series> =
        cfg.reactor_types.iter().map(|&k| Series::new(k.as_str(), curve(k, |r| r.ghsv))).collect();
    let mut eta = vec![Series { dashed: true, ..Series::new("plug flow", limit.clone()) }];
    eta.extend(cfg.reactor_types.iter().map(|&k| Series::new(k.as_str(), curve(k, |r| r.eta_total))));
    for (name, kind, title, y, series) in [
        ("ghsv_vs_beta.svg", PlotKind::GhsvVsBeta, "GHSV for the conversion target", ("GHSV [1/h]", Scale::Log), ghsv),
        ("efficiency_vs_beta.svg", PlotKind::EfficiencyVsBeta, "Total efficiency", ("eta_total", Scale::Linear), eta),
    ] {
        match svg::line_plot(&plot_spec(kind, title, ("beta", Scale::Linear), y), &series, &[]) {
            Ok(plot) => out.write(name, plot.as_bytes())?,
            Err(e) => log::warn!("{name} skipped: {e}"),
        }
    }
    println!("{:>6} {:>9} {:>12} {:>8} {:>10}", "beta", "type", "GHSV [1/h]", "X_CO2", "eta_total");
    for r in &rows {
        if r.is_ok() {
            println!("{:>6} {:>9} {:>12.1} {:>8.4} {:>10.4}", r.beta, r.reactor_type.as_str(), r.ghsv, r.x_co2, r.eta_total);
        } else {
            println!("{:>6} {:>9} failed: {}", r.beta, r.reactor_type.as_str(), r.error);
        }
    }
    if !failed.is_empty() {
        log::warn!("{} of {} rows failed; rerun to retry only those rows", failed.len(), rows.len());
    }
    Ok(())
}

pub fn srf(config: &RunConfig, out: &mut OutputDir, frequencies: &[f64]) -> Result<(), CliError> {
    let coil = config.coil_spec()?;
    let est = coil_srf(&coil).map_err(|e| {
        CliError::Config(format!("{e}; the pitch must exceed the wire diameter for the capacitance estimate"))
    })?;
    println!("inductance L = {:.4} uH", est.inductance * 1e6);
    println!("self-capacitance C = {:.4} pF", est.capacitance * 1e12);
    println!("self-resonant frequency = {:.4e} Hz", est.f_res);
    let mut freqs = frequencies.to_vec();
    if freqs.is_empty() {
        if let Some(s) = &config.susceptor {
            freqs.push(s.frequency_hz);
        }
    }
    let mut rows = Vec::new();
    for f in freqs {
        if !(f > 0.0 && f.is_finite()) {
            return Err(CliError::Config(format!("frequency must be positive, got {f}")));
        }
        let ok = f < est.f_res;
        println!("{f:.4e} Hz: {}", if ok { "operable" } else { "non-operable (at or above the self-resonance)" });
        rows.push(vec![num(f), (ok as u8).to_string()]);
    }
    out.table(
        "srf.csv",
        &["inductance_H", "capacitance_F", "f_res_Hz"],
        &[vec![num(est.inductance), num(est.capacitance), num(est.f_res)]],
    )?;
    if !rows.is_empty() {
        out.table("srf_verdicts.csv", &["f_Hz", "operable"], &rows)?;
    }
    Ok(())
}

pub fn read_samples(path: &Path) -> Result<Vec<ImpedanceSample>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Config(format!("{}: missing column `{name}` (need f_Hz and R_ohm)", path.display()))
        })
    };
    let (fi, ri) = (col("f_Hz")?, col("R_ohm")?);
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| {
            rec.get(i).and_then(|v| v.parse::<f64>().ok()).ok_or_else(|| {
                CliError::Config(format!("{}: row {} has a non-numeric value", path.display(), k + 1))
            })
        };
        out.push(ImpedanceSample { frequency: parse(fi)?, resistance: parse(ri)? });
    }
    Ok(out)
}

pub fn fit(config: &RunConfig, out: &mut OutputDir, data: &Path, max_residual: f64) -> Result<(), CliError> {
    let samples = read_samples(data)?;
    let s = config.susceptor()?;
    let coil = config.coil_spec()?;
    let options = FitOptions { max_residual, ..FitOptions::default() };
    let fitted = fit_sigma_from_impedance(&samples, s.radius_m, s.length_m, &coil, &options)?;
    println!("sigma_eff = {:.6e} S/m (RMS log residual {:.3e}, {} evaluations)", fitted.sigma_eff, fitted.residual, fitted.evaluations);
    let spec = config.susceptor_spec()?.with_profile(ConductivityProfile::uniform(fitted.sigma_eff));
    let mut rows = Vec::new();
    let (mut measured, mut model) = (Vec::new(), Vec::new());
    for smp in &samples {
        let r = susceptor_resistance(&spec, &coil, smp.frequency)?;
        rows.push(vec![num(smp.frequency), num(smp.resistance), num(r)]);
        measured.push((smp.frequency, smp.resistance));
        model.push((smp.frequency, r));
    }
    out.table("fit.csv", &["f_Hz", "R_measured_ohm", "R_model_ohm"], &rows)?;
    out.table(
        "fit_summary.csv",
        &["sigma_eff", "rms_log_residual", "evaluations"],
        &[vec![num(fitted.sigma_eff), num(fitted.residual), fitted.evaluations.to_string()]],
    )?;
    let plot = svg::line_plot(
        &plot_spec(PlotKind::ImpedanceCurve, "Impedance fit", ("f [Hz]", Scale::Log), ("R_susc [ohm]", Scale::Log)),
        &[Series::new("measured", measured), Series { dashed: true, ..Series::new("model", model) }],
        &[],
    )?;
    out.write("fit.svg", plot.as_bytes())?;
    Ok(())
}

/// Config echo and grid report for `--dry-run`.
pub fn dry_run_report(config: &RunConfig) -> Result<String, CliError> {
    let grid = config.grid()?;
    let mut text = format!("# config_hash={} version={VERSION}\n{}", config.hash(), config.to_toml());
    text.push_str(&format!("\ngrid: {} radial x {} axial = {} cells\n", grid.nr, grid.nz, grid.cells()));
    if let Some(s) = &config.susceptor {
        text.push_str(&format!(
            "cell size: dr = {:.4e} m, dz = {:.4e} m\n",
            s.radius_m / grid.nr as f64,
            s.length_m / grid.nz as f64
        ));
    }
    Ok(text)
}
