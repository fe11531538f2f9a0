//! Bessel functions of the first kind, orders 0 to 2, for complex argument.
//!
//! Three evaluators are combined:
//!
//! * ascending power series, used for `|z| <= 20` whenever the terms do not
//!   cancel badly (the eddy-current arguments `(1 - i) r / delta` sit on the
//!   diagonal where the series is well conditioned);
//! * Miller backward recurrence normalised with the generating function
//!   `exp(-iz) = J0 + 2 sum (-i)^n Jn`, used for near-real arguments where the
//!   series loses digits to cancellation;
//! * the Hankel asymptotic expansion for `|z| > 20`.
//!
//! In the overlap band `15 <= |z| <= 25` both the small-argument value and the
//! asymptotic value are computed and must agree to [`CROSS_CHECK_TOL`]
//! relative to the envelope `exp(|Im z|) sqrt(2 / (pi |z|))`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const SERIES_RADIUS: f64 = 20.0;
pub const CROSS_CHECK_BAND: (f64, f64) = (15.0, 25.0);
pub const CROSS_CHECK_TOL: f64 = 1e-10;
pub const MAX_ABS_ARG: f64 = 1e4;

/// Largest tolerated ratio of summed term magnitudes to the series value.
const SERIES_CANCELLATION_LIMIT: f64 = 1e4;

/// `J_order(z)` for `order` in `0..=2`.
pub fn bessel_j(order: u32, z: Complex64) -> Result<Complex64> {
    if order > 2 {
        return Err(Error::Domain(format!("bessel order {order} not supported (0..=2)")));
    }
    Ok(bessel_j012(z)?[order as usize])
}

/// `[J0(z), J1(z), J2(z)]` in one evaluation.
pub fn bessel_j012(z: Complex64) -> Result<[Complex64; 3]> {
    let grow = z.im.abs().exp();
    let value = bessel_j012_scaled(z)?.map(|v| v * grow);
    if value.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Domain(format!("J_n overflows at z = {z}; use the scaled form")));
    }
    Ok(value)
}

/// `[J0(z), J1(z), J2(z)] * exp(-|Im z|)`, finite over the whole supported range.
pub fn bessel_j012_scaled(z: Complex64) -> Result<[Complex64; 3]> {
    let r = z.norm();
    if !r.is_finite() || r >= MAX_ABS_ARG {
        return Err(Error::Domain(format!("|z| = {r} outside the supported range |z| < {MAX_ABS_ARG}")));
    }
    let shrink = (-z.im.abs()).exp();
    let small = || small_argument(z).map(|v| v * shrink);
    let in_band = r >= CROSS_CHECK_BAND.0 && r <= CROSS_CHECK_BAND.1;
    let value = if r <= SERIES_RADIUS { small() } else { hankel_scaled(z) };
    if in_band {
        let other = if r <= SERIES_RADIUS { hankel_scaled(z) } else { small() };
        let env = envelope(z) * shrink;
        let gap = (0..3)
            .map(|n| (value[n] - other[n]).norm() / env.max(value[n].norm()))
            .fold(0.0, f64::max);
        if gap > CROSS_CHECK_TOL {
            return Err(Error::Accuracy { abs_z: r, gap });
        }
    }
    if value.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Domain(format!("J_n not finite at z = {z}")));
    }
    Ok(value)
}

/// Magnitude scale `exp(|Im z|) sqrt(2 / (pi |z|))` of `J_n` for large `|z|`;
/// used as the reference for relative comparisons near zeros.
pub fn envelope(z: Complex64) -> f64 {
    let r = z.norm().max(1.0);
    z.im.abs().exp() * (2.0 / (PI * r)).sqrt()
}

fn small_argument(z: Complex64) -> [Complex64; 3] {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    let mut worst = 0.0_f64;
    for (n, slot) in out.iter_mut().enumerate() {
        let (v, abs_sum) = power_series(n as u32, z);
        *slot = v;
        let ratio = if v.norm() > 0.0 { abs_sum / v.norm() } else { f64::INFINITY };
        worst = worst.max(ratio);
    }
    if worst > SERIES_CANCELLATION_LIMIT {
        miller(z)
    } else {
        out
    }
}

/// Ascending series `(z/2)^n sum_k (-z^2/4)^k / (k! (n+k)!)`.
///
/// Returns the value and the sum of term magnitudes (a cancellation gauge).
pub fn power_series(order: u32, z: Complex64) -> (Complex64, f64) {
    let half = z * 0.5;
    let q = -(half * half);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..=order {
        term = term * half / k as f64;
    }
    let mut sum = term;
    let mut abs_sum = term.norm();
    let n = order as f64;
    for k in 1..400 {
        let kf = k as f64;
        term = term * q / (kf * (n + kf));
        sum += term;
        let t = term.norm();
        abs_sum += t;
        if kf > z.norm() && t <= 1e-17 * sum.norm().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    (sum, abs_sum)
}

/// Hankel asymptotic expansion, `|z|` large.
pub fn hankel_asymptotic(z: Complex64) -> [Complex64; 3] {
    let grow = z.im.abs().exp();
    hankel_scaled(z).map(|v| v * grow)
}

fn hankel_scaled(z: Complex64) -> [Complex64; 3] {
    // J_n(-z) = (-1)^n J_n(z) keeps us in the right half plane.
    let (w, flip) = if z.re < 0.0 { (-z, true) } else { (z, false) };
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (n, slot) in out.iter_mut().enumerate() {
        let nu = n as f64;
        let mu = 4.0 * nu * nu;
        let mut p = Complex64::new(1.0, 0.0);
        let mut q = Complex64::new(0.0, 0.0);
        let mut coef = 1.0_f64;
        let mut inv_pow = Complex64::new(1.0, 0.0);
        let inv_8z = (w * 8.0).inv();
        let mut last = f64::INFINITY;
        for k in 1..200 {
            let kf = k as f64;
            let odd = 2.0 * kf - 1.0;
            coef *= (mu - odd * odd) / kf;
            inv_pow *= inv_8z;
            let term = inv_pow * coef;
            let mag = term.norm();
            if mag > last || mag == 0.0 {
                break;
            }
            last = mag;
            // a_k / z^k: even k feed P with sign (-1)^(k/2), odd k feed Q.
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                p += term * sign;
            } else {
                q += term * sign;
            }
            if mag < 1e-17 {
                break;
            }
        }
        let omega = w - nu * PI / 2.0 - PI / 4.0;
        let pref = (Complex64::new(2.0 / PI, 0.0) / w).sqrt();
        // cos and sin of omega with exp(-|Im omega|) folded in.
        let damp = omega.im.abs();
        let iw = Complex64::i() * omega;
        let (up, down) = ((iw - damp).exp(), (-iw - damp).exp());
        let (cos_s, sin_s) = ((up + down) * 0.5, (up - down) / Complex64::new(0.0, 2.0));
        let mut v = pref * (p * cos_s - q * sin_s);
        if flip && n % 2 == 1 {
            v = -v;
        }
        *slot = v;
    }
    out
}

/// Miller backward recurrence for `J0..J2`.
pub fn miller(z: Complex64) -> [Complex64; 3] {
    if z.norm() == 0.0 {
        return [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    }
    let r = z.norm();
    let mut start = (2.0 * r + 40.0).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    // Pick the normalisation whose magnitude matches the terms.
    let (unit, norm_target) = if z.im >= 0.0 {
        (Complex64::new(0.0, -1.0), (Complex64::new(0.0, -1.0) * z).exp())
    } else {
        (Complex64::new(0.0, 1.0), (Complex64::new(0.0, 1.0) * z).exp())
    };
    let two_over_z = Complex64::new(2.0, 0.0) / z;
    let mut next = Complex64::new(0.0, 0.0); // J_{n+1}
    let mut cur = Complex64::new(1e-30, 0.0); // J_n
    let mut low = [Complex64::new(0.0, 0.0); 3];
    let mut norm_sum = Complex64::new(0.0, 0.0);
    // unit^n for n = start
    let mut unit_pow = unit.powu(start as u32);
    let unit_inv = unit.inv();
    let mut n = start;
    loop {
        if n <= 2 {
            low[n] = cur;
        }
        if n == 0 {
            norm_sum += cur;
        } else {
            norm_sum += cur * unit_pow * 2.0;
        }
        if n == 0 {
            break;
        }
        let prev = two_over_z * (n as f64) * cur - next;
        next = cur;
        cur = prev;
        unit_pow *= unit_inv;
        n -= 1;
        let mag = cur.norm();
        if mag > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            norm_sum *= s;
            for v in low.iter_mut() {
                *v *= s;
            }
        }
    }
    let scale = norm_target / norm_sum;
    [low[0] * scale, low[1] * scale, low[2] * scale]
}
