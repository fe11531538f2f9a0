//! Radial boundary-value solver for arbitrary `sigma(r)`.
//!
//! With `E_phi = -(1 / (mu0 sigma)) dB/dr` Faraday's law gives the
//! conservative form `d/dr[(r / sigma) dB/dr] = i omega mu0 r B`, discretised
//! by finite volumes on a uniform grid (sigma sampled at the cell faces, so
//! the clamp kink and `1/r^2` profiles are handled without special cases).
//! Two grids `h` and `h/2` are solved and combined by Richardson
//! extrapolation; their difference is the refinement error estimate.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{RadialField, SusceptorSpec};
use crate::constants::MU0;
use crate::error::{ensure_positive, Error, Result};

pub const DEFAULT_NODES: usize = 257;
pub const MIN_NODES: usize = 64;
/// Largest accepted relative difference between the two refinement levels.
pub const REFINEMENT_LIMIT: f64 = 1e-4;

struct Grid {
    b: Vec<Complex64>,
    e: Vec<Complex64>,
}

/// Solve for `B_z`, `J_phi` and `p` on `n_nodes` equally spaced radii.
pub fn solve_radial_helmholtz(spec: &SusceptorSpec, frequency: f64, b0: f64, n_nodes: usize) -> Result<RadialField> {
    spec.validate()?;
    ensure_positive("frequency", frequency)?;
    if n_nodes < MIN_NODES {
        return Err(Error::Domain(format!("n_nodes = {n_nodes} below the minimum {MIN_NODES}")));
    }
    if !b0.is_finite() {
        return Err(Error::Domain("B0 must be finite".into()));
    }
    let coarse = solve_grid(spec, frequency, b0, n_nodes);
    let fine = solve_grid(spec, frequency, b0, 2 * n_nodes - 1);

    let b_scale = coarse.b.iter().map(|v| v.norm()).fold(b0.abs(), f64::max);
    let e_scale = fine.e.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut estimate = 0.0_f64;
    let mut b = Vec::with_capacity(n_nodes);
    let mut e = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let (bc, bf) = (coarse.b[i], fine.b[2 * i]);
        let (ec, ef) = (coarse.e[i], fine.e[2 * i]);
        if b_scale > 0.0 {
            estimate = estimate.max((bf - bc).norm() / (3.0 * b_scale));
        }
        if e_scale > 0.0 {
            estimate = estimate.max((ef - ec).norm() / (3.0 * e_scale));
        }
        b.push((bf * 4.0 - bc) / 3.0);
        e.push((ef * 4.0 - ec) / 3.0);
    }
    if estimate > REFINEMENT_LIMIT {
        return Err(Error::Convergence { estimate, limit: REFINEMENT_LIMIT });
    }
    log::trace!("radial solve n={n_nodes} f={frequency:.4e} refinement estimate {estimate:.2e}");

    let radius = spec.radius;
    let h = radius / (n_nodes - 1) as f64;
    let mut field = RadialField {
        r: Vec::with_capacity(n_nodes),
        b_z: b,
        j_phi: Vec::with_capacity(n_nodes),
        p_density: Vec::with_capacity(n_nodes),
        applied_b0: b0,
        frequency,
    };
    for (i, ei) in e.iter().enumerate() {
        let r = if i + 1 == n_nodes { radius } else { i as f64 * h };
        field.r.push(r);
        let sigma = spec.profile.sigma_unchecked(r, radius);
        if i == 0 || !sigma.is_finite() {
            field.j_phi.push(Complex64::new(0.0, 0.0));
            field.p_density.push(0.0);
        } else {
            field.j_phi.push(ei * sigma);
            field.p_density.push(0.5 * sigma * ei.norm_sqr());
        }
    }
    field.b_z[n_nodes - 1] = Complex64::new(b0, 0.0);
    Ok(field)
}

fn solve_grid(spec: &SusceptorSpec, frequency: f64, b0: f64, n: usize) -> Grid {
    let radius = spec.radius;
    let h = radius / (n - 1) as f64;
    let iwm = Complex64::new(0.0, 2.0 * PI * frequency * MU0);
    // Face coefficients a_{i+1/2} = r / sigma.
    let a: Vec<f64> = (0..n - 1)
        .map(|i| {
            let rf = (i as f64 + 0.5) * h;
            rf / spec.profile.sigma_unchecked(rf, radius)
        })
        .collect();

    let zero = Complex64::new(0.0, 0.0);
    let mut lower = vec![zero; n];
    let mut diag = vec![zero; n];
    let mut upper = vec![zero; n];
    let mut rhs = vec![zero; n];
    // Axis control volume [0, h/2].
    diag[0] = Complex64::new(-a[0] / h, 0.0) - iwm * (h * h / 8.0);
    upper[0] = Complex64::new(a[0] / h, 0.0);
    for i in 1..n - 1 {
        let ri = i as f64 * h;
        lower[i] = Complex64::new(a[i - 1] / h, 0.0);
        upper[i] = Complex64::new(a[i] / h, 0.0);
        diag[i] = Complex64::new(-(a[i - 1] + a[i]) / h, 0.0) - iwm * (ri * h);
    }
    diag[n - 1] = Complex64::new(1.0, 0.0);
    rhs[n - 1] = Complex64::new(b0, 0.0);
    let b = thomas(&lower, &diag, &upper, &rhs);

    // Face values of -mu0 E = (a / r) dB/dr, averaged onto the nodes.
    let g: Vec<Complex64> = (0..n - 1).map(|i| (b[i + 1] - b[i]) * (a[i] / (h * h * (i as f64 + 0.5)))).collect();
    let mut e = vec![zero; n];
    for i in 1..n - 1 {
        e[i] = -(g[i - 1] + g[i]) / (2.0 * MU0);
    }
    e[n - 1] = -(g[n - 2] * 1.5 - g[n - 3] * 0.5) / MU0;
    Grid { b, e }
}

/// Tridiagonal solve without pivoting (the system is diagonally dominant).
pub(crate) fn thomas(lower: &[Complex64], diag: &[Complex64], upper: &[Complex64], rhs: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { Complex64::new(0.0, 0.0) };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    x
}
