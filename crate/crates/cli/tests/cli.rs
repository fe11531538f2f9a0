use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const LAB: &str = include_str!("../configs/lab_beta1.toml");
const BETA32: &str = include_str!("../configs/beta32_uniform.toml");
const COARSE: &str = "\n[numerics]\ngrid_nr = 32\ngrid_nz = 64\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_metareactor"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(config: Option<&Path>, out: &Path, args: &[&str]) -> Output {
    let mut cmd = bin();
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.arg("--out").arg(out).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows of a CSV written by the tool (after the hash comment).
fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# config_hash="), "{} lacks the hash comment", path.display());
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn impedance_marks_f_ideal_near_lab_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "lab.toml", LAB);
    let o = run(Some(&cfg), &dir.path().join("out"), &["impedance", "--n-points", "21"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o).lines().find(|l| l.starts_with("f_ideal")).unwrap().to_string();
    let f: f64 = line.split(':').nth(1).unwrap().trim().trim_end_matches(" Hz").parse().unwrap();
    assert!((f / 6.78e6 - 1.0).abs() < 0.05, "f_ideal {f}");
    let (header, rows) = csv_rows(&dir.path().join("out/impedance.csv"));
    assert_eq!(header, ["f_Hz", "R_susc_ohm", "R_coil_ohm", "eta_coupling"]);
    assert_eq!(rows.len(), 21);
    let svg = fs::read_to_string(dir.path().join("out/impedance.svg")).unwrap();
    assert!(svg.contains("f_ideal"));
    let manifest: toml::Table = fs::read_to_string(dir.path().join("out/manifest.toml")).unwrap().parse().unwrap();
    assert_eq!(manifest["command"].as_str(), Some("impedance"));
}

#[test]
fn single_point_impedance_has_no_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "lab.toml", LAB);
    let o = run(Some(&cfg), &dir.path().join("out"), &["impedance", "--n-points", "1", "--f-min-hz", "6.78e6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_rows(&dir.path().join("out/impedance.csv")).1.len(), 1);
    assert!(!dir.path().join("out/impedance.svg").exists());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "lab.toml", LAB);
    for out in ["a", "b"] {
        let o = run(Some(&cfg), &dir.path().join(out), &["impedance", "--n-points", "15"]);
        assert!(o.status.success());
    }
    for f in ["impedance.csv", "impedance.svg", "manifest.toml"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn key_without_unit_suffix_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &LAB.replace("radius_m = 0.019", "radius = 0.019"));
    let o = run(Some(&cfg), &dir.path().join("out"), &["impedance"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("radius") && err.contains("radius_m"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn missing_section_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(None, &dir.path().join("out"), &["srf"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[coil]"));
}

#[test]
fn contour_cells() {
    let dir = tempfile::tempdir().unwrap();
    let one = |beta: &str, f: &str, out: &str| -> Vec<String> {
        let o = run(
            None,
            &dir.path().join(out),
            &["contour", "--beta-min", beta, "--beta-max", beta, "--n-beta", "1", "--f-min-hz", f, "--f-max-hz", f, "--n-f", "1"],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        csv_rows(&dir.path().join(out).join("contour.csv")).1.remove(0)
    };
    let design = one("32", "1e5", "design");
    let eta: f64 = design[3].parse().unwrap();
    assert!((eta - 0.95).abs() < 0.02, "eta {eta}");
    assert_eq!(design[4], "0");
    assert_eq!(one("32", "1e8", "high")[4], "1");

    let o = run(None, &dir.path().join("grid"), &["contour", "--n-beta", "4", "--n-f", "6", "--f-max-hz", "1e6"]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&dir.path().join("grid/contour.csv"));
    assert_eq!(rows.len(), 24);
    // Along each beta column below f_ideal, coupling rises with frequency.
    let (bi, ei) = (col(&header, "beta"), col(&header, "eta_coupling"));
    for chunk in rows.chunks(6) {
        assert!(chunk.iter().all(|r| r[bi] == chunk[0][bi]));
        let etas: Vec<f64> = chunk.iter().map(|r| r[ei].parse().unwrap()).collect();
        assert!(etas.windows(2).all(|w| w[1] > w[0]), "{etas:?}");
    }
    assert!(fs::read_to_string(dir.path().join("grid/contour.svg")).unwrap().contains("url(#hatch)"));
}

#[test]
fn contour_rejects_descending_range() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(None, &dir.path().join("out"), &["contour", "--beta-min", "10", "--beta-max", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn srf_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let lab = write_config(dir.path(), "lab.toml", LAB);
    let o = run(Some(&lab), &dir.path().join("lab"), &["srf"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("uH") && text.contains("pF"));
    assert!(text.contains("6.7800e6 Hz: operable"), "{text}");

    let big = write_config(dir.path(), "b32.toml", BETA32);
    let o = run(Some(&big), &dir.path().join("b32"), &["srf", "--frequency-hz", "6.78e6"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("non-operable"));

    let tight = write_config(dir.path(), "tight.toml", &LAB.replace("pitch_m = 0.0375", "pitch_m = 0.006"));
    let o = run(Some(&tight), &dir.path().join("tight"), &["srf"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("pitch"), "{}", stderr(&o));
}

#[test]
fn dry_run_reports_without_solving() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "lab.toml", LAB);
    let o = run(Some(&cfg), &dir.path().join("out"), &["--dry-run", "simulate"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("radius_m = 0.019"));
    assert!(text.contains("grid: 64 radial x 128 axial"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn lab_simulation_rises_to_the_setpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "lab.toml", &format!("{LAB}{COARSE}"));
    let o = run(Some(&cfg), &dir.path().join("out"), &["simulate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["field.csv", "profile.csv", "ledger.csv", "radial_temperature.svg", "axial_temperature.svg", "radial_power.svg"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    let (header, rows) = csv_rows(&dir.path().join("out/profile.csv"));
    assert_eq!(header, ["profile", "coordinate_m", "T_K"]);
    let axial: Vec<f64> = rows.iter().filter(|r| r[0] == "axis_axial").map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(axial.len(), 64);
    assert!(axial.windows(2).all(|w| w[1] >= w[0] - 1e-9), "axis temperature not monotone");
    assert!((axial[63] - 823.15).abs() < 2.0);
}

#[test]
fn large_uniform_reactor_has_a_cold_centre() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "b32.toml", &format!("{BETA32}{COARSE}"));
    let o = run(Some(&cfg), &dir.path().join("out"), &["simulate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = csv_rows(&dir.path().join("out/profile.csv"));
    let radial: Vec<f64> = rows.iter().filter(|r| r[0] == "outlet_radial").map(|r| r[2].parse().unwrap()).collect();
    assert!(radial[0] < radial[radial.len() - 1] - 1.0, "{:?}", (radial[0], radial[radial.len() - 1]));
}

#[test]
fn solver_failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let capped = write_config(dir.path(), "capped.toml", &format!("{LAB}{COARSE}max_current_a = 0.5\n"));
    let o = run(Some(&capped), &dir.path().join("a"), &["simulate"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));

    let starved = write_config(dir.path(), "starved.toml", &format!("{LAB}{COARSE}max_iterations = 2\n"));
    let o = run(Some(&starved), &dir.path().join("b"), &["simulate", "--current-a", "8.0"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("residual history"), "{}", stderr(&o));
}

#[test]
fn fit_recovers_conductivity_from_impedance_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "lab.toml", LAB);
    let o = run(Some(&cfg), &dir.path().join("imp"), &["impedance", "--f-min-hz", "1e5", "--f-max-hz", "5e7", "--n-points", "25"]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&dir.path().join("imp/impedance.csv"));
    let (fi, ri) = (col(&header, "f_Hz"), col(&header, "R_susc_ohm"));
    let mut data = String::from("f_Hz,R_ohm\n");
    for r in &rows {
        data.push_str(&format!("{},{}\n", r[fi], r[ri]));
    }
    let data_path = write_config(dir.path(), "data.csv", &data);
    let guess = write_config(dir.path(), "guess.toml", &LAB.replace("400.0", "50.0"));
    let o = run(Some(&guess), &dir.path().join("fit"), &["fit", "--data", data_path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv_rows(&dir.path().join("fit/fit_summary.csv"));
    let sigma: f64 = rows[0][col(&header, "sigma_eff")].parse().unwrap();
    assert!((sigma / 400.0 - 1.0).abs() < 1e-3, "sigma {sigma}");
}

#[test]
fn fit_rejects_bad_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "lab.toml", LAB);
    let data = write_config(dir.path(), "data.csv", "frequency,R\n1,2\n");
    let o = run(Some(&cfg), &dir.path().join("out"), &["fit", "--data", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("f_Hz"));
}

#[test]
fn sweep_writes_rows_plots_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("[sweep]\nbetas = [4.0]\nreactor_types = [\"uniform\", \"wall\"]\n{COARSE}");
    let cfg = write_config(dir.path(), "sweep.toml", &text);
    let out = dir.path().join("out");
    let o = run(Some(&cfg), &out, &["--workers", "2", "sweep"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let (header, rows) = csv_rows(&out.join("sweep.csv"));
    assert_eq!(header.len(), 11);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[col(&header, "error")].is_empty()));

    // The plug-flow bound sits above every simulated efficiency.
    let (ph, prow) = csv_rows(&out.join("plugflow.csv"));
    let bound: f64 = prow[0][col(&ph, "eta_plugflow")].parse().unwrap();
    for r in &rows {
        assert!(r[col(&header, "eta_total")].parse::<f64>().unwrap() <= bound + 1e-12);
    }
    let eff = fs::read_to_string(out.join("efficiency_vs_beta.svg"));
    assert!(eff.is_err() || eff.unwrap().contains("plug flow"));

    // Drop one row; the rerun restores it and leaves the other untouched.
    let kept: Vec<&str> = first.lines().filter(|l| !l.starts_with("4,wall")).collect();
    fs::write(out.join("sweep.csv"), kept.join("\n") + "\n").unwrap();
    let o = run(Some(&cfg), &out, &["sweep"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("sweep.csv")).unwrap(), first);

    // A different configuration refuses to reuse the file.
    let other = write_config(dir.path(), "other.toml", &text.replace("[4.0]", "[8.0]"));
    let o = run(Some(&other), &out, &["sweep"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("different configuration"));
}
