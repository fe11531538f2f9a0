//! Eddy-current fields inside a cylindrical susceptor.
//!
//! The axial flux density `B_z(r)` obeys a radial Helmholtz problem with
//! `B_z(R) = B0` and a regular axis. Fields are peak phasors, so the
//! volumetric dissipation is `|J|^2 / (2 sigma)`.

pub mod bessel;
mod bvp;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::constants::MU0;
use crate::effmed::ConductivityProfile;
use crate::error::{ensure_positive, Error, Result};

pub use bessel::{bessel_j, bessel_j012, bessel_j012_scaled};
pub use bvp::{solve_radial_helmholtz, DEFAULT_NODES, REFINEMENT_LIMIT};

/// Cylinder geometry and conductivity profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SusceptorSpec {
    pub radius: f64,
    pub length: f64,
    pub profile: ConductivityProfile,
}

impl SusceptorSpec {
    pub fn new(radius: f64, length: f64, profile: ConductivityProfile) -> Result<Self> {
        let spec = Self { radius, length, profile };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("radius", self.radius)?;
        ensure_positive("length", self.length)?;
        self.profile.validate()
    }

    pub fn volume(&self) -> f64 {
        PI * self.radius * self.radius * self.length
    }

    /// Same geometry, different profile.
    pub fn with_profile(&self, profile: ConductivityProfile) -> Self {
        Self { profile, ..*self }
    }
}

/// `k = sqrt(-i omega mu0 sigma)`, principal branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexWavenumber {
    pub k: Complex64,
}

impl ComplexWavenumber {
    pub fn new(sigma: f64, frequency: f64) -> Result<Self> {
        ensure_positive("sigma", sigma)?;
        ensure_positive("frequency", frequency)?;
        let omega = 2.0 * PI * frequency;
        let k2 = Complex64::new(0.0, -omega * MU0 * sigma);
        Ok(Self { k: k2.sqrt() })
    }
}

/// Field solution sampled on a radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub r: Vec<f64>,
    pub b_z: Vec<Complex64>,
    pub j_phi: Vec<Complex64>,
    pub p_density: Vec<f64>,
    pub applied_b0: f64,
    pub frequency: f64,
}

impl RadialField {
    pub fn radius(&self) -> f64 {
        *self.r.last().unwrap_or(&0.0)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Data(e.to_string());
        w.write_record(["r_m", "Re_Bz_T", "Im_Bz_T", "Re_Jphi", "Im_Jphi", "p_W_per_m3"]).map_err(io)?;
        for i in 0..self.r.len() {
            w.write_record(&[
                fmt(self.r[i]),
                fmt(self.b_z[i].re),
                fmt(self.b_z[i].im),
                fmt(self.j_phi[i].re),
                fmt(self.j_phi[i].im),
                fmt(self.p_density[i]),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Data(e.to_string()))
    }
}

pub(crate) fn fmt(x: f64) -> String {
    format!("{x:.10e}")
}

fn uniform_sigma(spec: &SusceptorSpec) -> Result<f64> {
    match spec.profile {
        ConductivityProfile::Uniform { sigma_eff } => Ok(sigma_eff),
        _ => Err(Error::Domain("analytic field requires a uniform profile".into())),
    }
}

/// Closed-form Bessel solution for a uniform susceptor on `n_nodes` points.
pub fn analytic_field_uniform(spec: &SusceptorSpec, frequency: f64, b0: f64, n_nodes: usize) -> Result<RadialField> {
    spec.validate()?;
    let sigma = uniform_sigma(spec)?;
    if n_nodes < 2 {
        return Err(Error::Domain("need at least 2 nodes".into()));
    }
    if !b0.is_finite() {
        return Err(Error::Domain("B0 must be finite".into()));
    }
    let k = ComplexWavenumber::new(sigma, frequency)?.k;
    let radius = spec.radius;
    let kr_max = k * radius;
    let j0_r = bessel_j012_scaled(kr_max)?[0];
    if j0_r.norm() < 1e-14 * bessel::envelope(kr_max) * (-kr_max.im.abs()).exp() {
        return Err(Error::Singularity(format!("J0(kR) vanishes for kR = {}", k * radius)));
    }
    let mut field = RadialField {
        r: Vec::with_capacity(n_nodes),
        b_z: Vec::with_capacity(n_nodes),
        j_phi: Vec::with_capacity(n_nodes),
        p_density: Vec::with_capacity(n_nodes),
        applied_b0: b0,
        frequency,
    };
    for i in 0..n_nodes {
        let r = if i + 1 == n_nodes { radius } else { radius * i as f64 / (n_nodes - 1) as f64 };
        let kr = k * r;
        let rel = (kr.im.abs() - kr_max.im.abs()).exp();
        let j = bessel_j012_scaled(kr)?;
        let b = j[0] / j0_r * rel * b0;
        let jp = k * b0 / MU0 * j[1] / j0_r * rel;
        field.r.push(r);
        field.b_z.push(b);
        field.j_phi.push(jp);
        field.p_density.push(jp.norm_sqr() / (2.0 * sigma));
    }
    Ok(field)
}

/// Dissipated power per unit length of a uniform cylinder in a uniform
/// applied peak field `b0`:
/// `-(pi omega R^2 B0^2 / (2 mu0)) Im[J2(kR) / J0(kR)]`.
pub fn uniform_power_per_length(sigma: f64, frequency: f64, radius: f64, b0: f64) -> Result<f64> {
    ensure_positive("radius", radius)?;
    let k = ComplexWavenumber::new(sigma, frequency)?.k;
    let j = bessel_j012_scaled(k * radius)?;
    let omega = 2.0 * PI * frequency;
    Ok(-(PI * omega * radius * radius * b0 * b0 / (2.0 * MU0)) * (j[2] / j[0]).im)
}

/// Power density of the unclamped profile `sigma = C / r^2`:
/// `omega B0^2 / (2 mu0) |J1(a)|^2 / |J0(a R / r)|^2` with `a = sqrt(-i omega mu0 C)`.
pub fn analytic_power_density_invr2(coefficient: f64, radius: f64, frequency: f64, b0: f64, r: f64) -> Result<f64> {
    ensure_positive("C", coefficient)?;
    ensure_positive("radius", radius)?;
    ensure_positive("frequency", frequency)?;
    if !(r > 0.0) || r > radius * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("r = {r} outside (0, {radius}]")));
    }
    let omega = 2.0 * PI * frequency;
    let a = Complex64::new(0.0, -omega * MU0 * coefficient).sqrt();
    let inner = a * (radius / r);
    let j1 = bessel_j012_scaled(a)?[1];
    let j0 = bessel_j012_scaled(inner)?[0];
    let rel = (a.im.abs() - inner.im.abs()).exp();
    Ok(omega * b0 * b0 / (2.0 * MU0) * (j1.norm() / j0.norm() * rel).powi(2))
}

/// `2 pi L int p r dr` by the trapezoidal rule.
pub fn total_power_from_field(field: &RadialField, length: f64) -> Result<f64> {
    ensure_positive("length", length)?;
    if field.r.len() != field.p_density.len() || field.r.len() < 2 {
        return Err(Error::Domain("malformed radial field".into()));
    }
    let mut acc = 0.0;
    for i in 1..field.r.len() {
        let (r0, r1) = (field.r[i - 1], field.r[i]);
        acc += 0.5 * (field.p_density[i - 1] * r0 + field.p_density[i] * r1) * (r1 - r0);
    }
    Ok(2.0 * PI * length * acc)
}

/// Volume-weighted coefficient of variation of `p` over `(cutoff R, R]`.
pub fn uniformity_metric(field: &RadialField, inner_cutoff_fraction: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&inner_cutoff_fraction) {
        return Err(Error::Domain(format!("cutoff fraction {inner_cutoff_fraction} outside [0, 1)")));
    }
    let r_cut = inner_cutoff_fraction * field.radius();
    let idx: Vec<usize> = (0..field.r.len()).filter(|&i| field.r[i] >= r_cut).collect();
    if idx.len() < 2 {
        return Err(Error::Degenerate("fewer than two nodes beyond the cutoff".into()));
    }
    let (mut w_sum, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for pair in idx.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let dr = field.r[b] - field.r[a];
        for &i in &[a, b] {
            let w = 0.5 * dr * field.r[i];
            let p = field.p_density[i];
            w_sum += w;
            m1 += w * p;
            m2 += w * p * p;
        }
    }
    let mean = m1 / w_sum;
    if mean.abs() <= f64::MIN_POSITIVE {
        return Err(Error::Degenerate("mean power density is zero".into()));
    }
    let var = (m2 / w_sum - mean * mean).max(0.0);
    Ok(var.sqrt() / mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effmed::skin_depth;

    fn uniform(sigma: f64, radius: f64) -> SusceptorSpec {
        SusceptorSpec::new(radius, 1.0, ConductivityProfile::uniform(sigma)).unwrap()
    }

    #[test]
    fn thin_skin_power_approaches_surface_resistance() {
        let (sigma, radius, b0) = (1e4, 0.05_f64, 1e-3);
        let f = 1.0 / (PI * MU0 * sigma * (radius / 1000.0).powi(2));
        let delta = skin_depth(sigma, f).unwrap();
        let p = uniform_power_per_length(sigma, f, radius, b0).unwrap();
        let surface = 2.0 * PI * radius * b0 * b0 / (2.0 * MU0 * MU0 * sigma * delta);
        assert!((p / surface - 1.0).abs() < 2e-3, "{}", p / surface);
    }

    #[test]
    fn wavenumber_branch() {
        let k = ComplexWavenumber::new(113.4, 1e5).unwrap().k;
        assert!(k.re > 0.0);
        let d = skin_depth(113.4, 1e5).unwrap();
        assert!((k - Complex64::new(1.0, -1.0) / d).norm() < 1e-12 * k.norm());
    }

    #[test]
    fn boundary_and_axis() {
        let f = analytic_field_uniform(&uniform(400.0, 0.019), 6.78e6, 0.01, 101).unwrap();
        assert!((f.b_z[100] - Complex64::new(0.01, 0.0)).norm() < 1e-15);
        assert_eq!(f.p_density[0], 0.0);
        assert!(f.p_density.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn zero_field_is_zero() {
        let f = analytic_field_uniform(&uniform(100.0, 0.1), 1e5, 0.0, 33).unwrap();
        assert!(f.p_density.iter().all(|&p| p == 0.0));
        assert_eq!(total_power_from_field(&f, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn low_frequency_parabolic() {
        let spec = uniform(100.0, 0.05);
        let f = analytic_field_uniform(&spec, 50.0, 1e-3, 65).unwrap();
        let pr = f.p_density[64];
        for i in 1..65 {
            let ratio = f.p_density[i] / (pr * (f.r[i] / 0.05).powi(2));
            assert!((ratio - 1.0).abs() < 0.01, "{i} {ratio}");
        }
    }

    #[test]
    fn high_frequency_skin_layer() {
        let (sigma, radius, freq) = (400.0, 0.05, 5e8);
        let spec = uniform(sigma, radius);
        let f = analytic_field_uniform(&spec, freq, 1e-3, 4001).unwrap();
        let d = skin_depth(sigma, freq).unwrap();
        let total = total_power_from_field(&f, 1.0).unwrap();
        let mut shell = f.clone();
        for i in 0..shell.r.len() {
            if shell.r[i] < radius - 3.0 * d {
                shell.p_density[i] = 0.0;
            }
        }
        let outer = total_power_from_field(&shell, 1.0).unwrap();
        assert!(outer / total >= 0.9, "{}", outer / total);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let spec = uniform(113.4, 0.3);
        let f = analytic_field_uniform(&spec, 1e5, 0.02, 512).unwrap();
        let p = total_power_from_field(&f, 2.0).unwrap();
        let exact = 2.0 * uniform_power_per_length(113.4, 1e5, 0.3, 0.02).unwrap();
        assert!((p / exact - 1.0).abs() < 1e-5, "{}", p / exact - 1.0);
    }

    #[test]
    fn invr2_scaling_and_domain() {
        let p1 = analytic_power_density_invr2(1e-3, 0.3, 1e5, 0.01, 0.2).unwrap();
        let p2 = analytic_power_density_invr2(1e-3, 0.3, 1e5, 0.02, 0.2).unwrap();
        assert!((p2 / p1 - 4.0).abs() < 1e-12);
        assert!(analytic_power_density_invr2(1e-3, 0.3, 1e5, 0.01, 0.0).is_err());
        let ph = analytic_power_density_invr2(1e-3, 0.3, 1e5, 0.01, 0.15).unwrap();
        let pr = analytic_power_density_invr2(1e-3, 0.3, 1e5, 0.01, 0.3).unwrap();
        assert!((ph / pr - 1.0).abs() < 0.02);
    }

    #[test]
    fn uniformity_reference_values() {
        let n = 2001;
        let r: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let flat = RadialField {
            p_density: vec![3.0; n],
            b_z: vec![Complex64::new(0.0, 0.0); n],
            j_phi: vec![Complex64::new(0.0, 0.0); n],
            r: r.clone(),
            applied_b0: 1.0,
            frequency: 1.0,
        };
        assert!(uniformity_metric(&flat, 0.0).unwrap() < 1e-12);
        let para = RadialField { p_density: r.iter().map(|x| x * x).collect(), ..flat.clone() };
        let cv = uniformity_metric(&para, 0.0).unwrap();
        assert!((cv - 1.0 / 3f64.sqrt()).abs() < 1e-5, "{cv}");
        let zero = RadialField { p_density: vec![0.0; n], ..flat };
        assert!(matches!(uniformity_metric(&zero, 0.2), Err(Error::Degenerate(_))));
    }

    #[test]
    fn csv_header() {
        let f = analytic_field_uniform(&uniform(100.0, 0.1), 1e5, 0.01, 4).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("r_m,Re_Bz_T,Im_Bz_T,Re_Jphi,Im_Jphi,p_W_per_m3\n"));
        assert_eq!(s.lines().count(), 5);
    }
}
