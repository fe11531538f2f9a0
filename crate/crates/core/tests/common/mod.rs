//! Independent thermochemistry oracle built from NIST Shomate fits.
#![allow(dead_code)]

/// `[A, B, C, D, E, F, G, H]`, enthalpies in kJ/mol.
const CO2: [f64; 8] = [24.99735, 55.18696, -33.69137, 7.948387, -0.136638, -403.6075, 228.2431, -393.5224];
const H2: [f64; 8] = [33.066178, -11.363417, 11.432816, -2.772874, -0.158558, -9.980797, 172.707974, 0.0];
const CO: [f64; 8] = [25.56759, 6.096130, 4.054656, -2.671301, 0.131021, -118.0089, 227.3665, -110.5271];
const H2O: [f64; 8] = [30.09200, 6.832514, 6.793435, -2.534480, 0.082139, -250.8810, 223.3967, -241.8264];

/// Absolute enthalpy `H_f(298) + H(T) - H(298)` [J/mol].
fn enthalpy(c: &[f64; 8], t_kelvin: f64) -> f64 {
    let t = t_kelvin / 1000.0;
    let rel = c[0] * t + c[1] * t * t / 2.0 + c[2] * t.powi(3) / 3.0 + c[3] * t.powi(4) / 4.0 - c[4] / t + c[5] - c[7];
    (c[7] + rel) * 1000.0
}

/// [J/(mol K)]
fn entropy(c: &[f64; 8], t_kelvin: f64) -> f64 {
    let t = t_kelvin / 1000.0;
    c[0] * t.ln() + c[1] * t + c[2] * t * t / 2.0 + c[3] * t.powi(3) / 3.0 - c[4] / (2.0 * t * t) + c[6]
}

fn gibbs(c: &[f64; 8], t: f64) -> f64 {
    enthalpy(c, t) - t * entropy(c, t)
}

/// Reaction enthalpy of CO2 + H2 -> CO + H2O [J/mol].
pub fn delta_h(t: f64) -> f64 {
    enthalpy(&CO, t) + enthalpy(&H2O, t) - enthalpy(&CO2, t) - enthalpy(&H2, t)
}

pub fn keq(t: f64) -> f64 {
    let dg = gibbs(&CO, t) + gibbs(&H2O, t) - gibbs(&CO2, t) - gibbs(&H2, t);
    (-dg / (8.314_462_618 * t)).exp()
}
