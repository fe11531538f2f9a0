//! Physical constants in SI units.

use std::f64::consts::PI;

/// Vacuum permeability [H/m].
pub const MU0: f64 = 4.0e-7 * PI;

/// Molar gas constant [J/(mol K)].
pub const R_GAS: f64 = 8.314_462_618;

/// Electrical conductivity of annealed copper [S/m].
pub const COPPER_CONDUCTIVITY: f64 = 5.8e7;

/// 0 degC in kelvin.
pub const ZERO_CELSIUS: f64 = 273.15;

/// Standard atmosphere [Pa].
pub const ATM: f64 = 101_325.0;

pub const INCH: f64 = 0.0254;

pub fn celsius(t_c: f64) -> f64 {
    t_c + ZERO_CELSIUS
}
