use metareactor::circuit::DrivePoint;
use metareactor::reactorsim::*;
use metareactor::scaleup::{lab_case, LAB_FREQUENCY};
use metareactor::thermo::{equilibrium_conversion, equilibrium_extent, rwgs_equilibrium_constant, ThermoTable};
use metareactor::Error;

const TARGET: f64 = 823.15;

fn coarse() -> GridSpec {
    GridSpec::new(32, 64).unwrap()
}

fn lab(ghsv: f64) -> ReactorCase {
    lab_case(1.0, 400.0, HeatingMode::Induction).unwrap().with_ghsv(&GhsvSpec::new(ghsv)).unwrap()
}

fn lab_wall(ghsv: f64) -> ReactorCase {
    lab_case(1.0, 400.0, HeatingMode::Wall).unwrap().with_ghsv(&GhsvSpec::new(ghsv)).unwrap()
}

fn check_invariants(r: &SimulationResult, case: &ReactorCase) {
    assert!(r.converged);
    assert!(r.ledger.closure() < 0.01, "ledger closure {}", r.ledger.closure());
    let (a_in, a_out) = r.atom_flows();
    for k in 0..3 {
        assert!((a_in[k] - a_out[k]).abs() <= 1e-8 * a_in[k].abs().max(1e-30), "atom {k}");
    }
    // Conversion never exceeds the equilibrium value at the hottest point
    // seen so far along its streamline.
    let table = ThermoTable::builtin();
    let y = case.feed.mole_fractions;
    for i in 0..r.grid.nr {
        let mut t_hot = f64::MIN;
        for j in 0..r.grid.nz {
            t_hot = t_hot.max(r.t(i, j));
            let k = rwgs_equilibrium_constant(t_hot.clamp(400.0, 1400.0), &table).unwrap();
            let x_eq = equilibrium_extent(&y, k) / y[0];
            assert!(r.x(i, j) <= x_eq + 1e-6, "cell ({i},{j}) X {} > eq {x_eq}", r.x(i, j));
        }
    }
}

#[test]
fn zero_current_leaves_feed_untouched() {
    let case = lab(600.0);
    let r = solve_steady(&case, &DrivePoint::new(LAB_FREQUENCY, 0.0).unwrap(), coarse()).unwrap();
    for t in &r.temperature {
        assert!((t - 298.15).abs() < 1e-6);
    }
    assert_eq!(r.x_co2_outlet, 0.0);
}

#[test]
fn lab_reactor_reaches_equilibrium() {
    let case = lab(1800.0);
    let pc = power_control(&case, LAB_FREQUENCY, TARGET, coarse(), &ControlOptions::default()).unwrap();
    assert!((pc.result.t_outlet_max - TARGET).abs() < 0.5);
    let x_eq = equilibrium_conversion(&case.feed, TARGET, &ThermoTable::builtin()).unwrap();
    assert!(x_eq - pc.result.x_co2_outlet < 0.03, "X {} vs eq {x_eq}", pc.result.x_co2_outlet);
    check_invariants(&pc.result, &case);
}

#[test]
fn axis_has_no_radial_gradient() {
    let case = lab(1200.0);
    let r = power_control(&case, LAB_FREQUENCY, TARGET, coarse(), &ControlOptions::default()).unwrap().result;
    // A smooth even profile T0 + b r^2 gives (T1 - T0)/(T2 - T0) = 1/3 on
    // cell centres; a kink at the axis would push it towards 1/2.
    for j in [r.grid.nz / 2, r.grid.nz - 1] {
        let d1 = r.t(1, j) - r.t(0, j);
        let d2 = r.t(2, j) - r.t(0, j);
        if d2.abs() > 1e-3 {
            assert!((d1 / d2) < 0.4, "ratio {} at j={j}", d1 / d2);
        }
    }
}

#[test]
fn lab_conversion_is_grid_converged() {
    let case = lab(1800.0);
    let opts = ControlOptions::default();
    let a = power_control(&case, LAB_FREQUENCY, TARGET, coarse(), &opts).unwrap().result;
    let b = power_control(&case, LAB_FREQUENCY, TARGET, GridSpec::new(64, 128).unwrap(), &opts).unwrap().result;
    assert!((a.x_co2_outlet - b.x_co2_outlet).abs() < 0.005);
}

#[test]
fn required_power_rises_with_target() {
    let case = lab(900.0);
    let opts = ControlOptions::default();
    let lo = power_control(&case, LAB_FREQUENCY, 700.0, coarse(), &opts).unwrap();
    let hi = power_control(&case, LAB_FREQUENCY, TARGET, coarse(), &opts).unwrap();
    assert!(hi.result.ledger.p_susceptor > lo.result.ledger.p_susceptor);
    assert!(hi.drive.current > lo.drive.current);
    check_invariants(&lo.result, &case);
}

#[test]
fn power_control_reports_unreachable_targets() {
    let case = lab(900.0);
    let capped = ControlOptions { max_current: 1.0, ..ControlOptions::default() };
    assert!(matches!(
        power_control(&case, LAB_FREQUENCY, TARGET, coarse(), &capped),
        Err(Error::UnreachableTarget(_))
    ));
    assert!(matches!(
        power_control(&case, 1e9, TARGET, coarse(), &ControlOptions::default()),
        Err(Error::UnreachableTarget(_))
    ));
}

#[test]
fn ghsv_search_rejects_targets_above_equilibrium() {
    let case = lab(900.0);
    let r = find_ghsv_for_conversion(&case, LAB_FREQUENCY, 0.6, TARGET, coarse(), &ControlOptions::default());
    assert!(matches!(r, Err(Error::Infeasible(_))));
}

#[test]
fn ghsv_search_hits_conversion_target() {
    let case = lab_case(3.7, 70.0, HeatingMode::Induction).unwrap();
    let s = find_ghsv_for_conversion(&case, LAB_FREQUENCY, 0.5, TARGET, coarse(), &ControlOptions::default()).unwrap();
    assert!((s.result.x_co2_outlet - 0.5).abs() <= 0.005);
    assert!((s.result.t_outlet_max - TARGET).abs() < 0.5);
    assert!(s.drive.is_some());
}

#[test]
fn wall_heated_lab_reactor_is_nearly_isothermal() {
    let case = lab_wall(1800.0);
    let r = wall_heated_solve(&case, TARGET, coarse()).unwrap();
    let out = r.outlet_radial_temperature();
    let spread = out.iter().cloned().fold(f64::MIN, f64::max) - out.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 5.0, "spread {spread}");
    let x_eq = equilibrium_conversion(&case.feed, TARGET, &ThermoTable::builtin()).unwrap();
    assert!(x_eq - r.x_co2_outlet < 0.03);
    check_invariants(&r, &case);
}

#[test]
fn wall_at_inlet_temperature_does_nothing() {
    let case = lab_wall(600.0);
    let r = wall_heated_solve(&case, 298.15, coarse()).unwrap();
    assert!(r.temperature.iter().all(|t| (t - 298.15).abs() < 1e-6));
    assert_eq!(r.x_co2_outlet, 0.0);
}

#[test]
fn mode_mismatch_is_rejected() {
    assert!(wall_heated_solve(&lab(600.0), TARGET, coarse()).is_err());
    let drive = DrivePoint::new(LAB_FREQUENCY, 5.0).unwrap();
    assert!(solve_steady(&lab_wall(600.0), &drive, coarse()).is_err());
    assert!(solve_steady(&lab(600.0), &drive, GridSpec { nr: 8, nz: 8 }).is_err());
}

#[test]
fn exports_have_expected_headers() {
    let r = solve_steady(&lab(600.0), &DrivePoint::new(LAB_FREQUENCY, 6.0).unwrap(), coarse()).unwrap();
    let mut buf = Vec::new();
    r.write_field_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("r_m,z_m,T_K,X_local\n"));
    assert_eq!(text.lines().count(), 1 + 32 * 64);
    let mut buf = Vec::new();
    r.write_profile_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 32 + 64);
    let mut buf = Vec::new();
    r.write_ledger_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("P_susceptor_W,"));
}
