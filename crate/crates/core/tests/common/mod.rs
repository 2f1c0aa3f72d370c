//! Checks of the centered modulo reduction shared by the property tests
//! and the acceptance runner.

#![allow(dead_code)]

use rand::Rng;
use skmod::numerics::mod_reduce;

fn tol(scale: f64) -> f64 {
    64.0 * f64::EPSILON * scale
}

/// Result lies in `[-d/2, d/2)`.
pub fn check_range(x: f64, d: f64) -> Result<(), String> {
    let y = mod_reduce(x, d).map_err(|e| e.to_string())?;
    if (-d / 2.0..d / 2.0).contains(&y) {
        Ok(())
    } else {
        Err(format!("mod({x}, {d}) = {y} outside range"))
    }
}

/// Values already inside the interval come back unchanged.
pub fn check_identity(x: f64, d: f64) -> Result<(), String> {
    let y = mod_reduce(x, d).map_err(|e| e.to_string())?;
    if (-d / 2.0..d / 2.0).contains(&x) && y != x {
        return Err(format!("mod({x}, {d}) = {y}, expected identity"));
    }
    Ok(())
}

/// Which branch of the relation a case exercised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Inside,
    Aliased,
}

/// `mod(mod(x + d1) + d2 - x) = d1 + d2` when `d1 + d2` is inside the
/// interval, and differs from it by a nonzero integer multiple of `d`
/// otherwise.
pub fn check_modrel(x: f64, d1: f64, d2: f64, d: f64) -> Result<Branch, String> {
    let inner = mod_reduce(x + d1, d).map_err(|e| e.to_string())?;
    let y = mod_reduce(inner + d2 - x, d).map_err(|e| e.to_string())?;
    let s = d1 + d2;
    let t = tol(x.abs() + d1.abs() + d2.abs() + d);
    let m = ((s - y) / d).round();
    let residual = s - y - m * d;
    if residual.abs() > t {
        return Err(format!("x={x} d1={d1} d2={d2} d={d}: residual {residual} is not a multiple of d"));
    }
    let inside = (-d / 2.0..d / 2.0).contains(&s);
    let near_edge = (s.abs() - d / 2.0).abs() <= t;
    match (inside, m == 0.0) {
        (true, true) => Ok(Branch::Inside),
        (false, false) => Ok(Branch::Aliased),
        _ if near_edge => Ok(if inside { Branch::Inside } else { Branch::Aliased }),
        _ => Err(format!("x={x} d1={d1} d2={d2} d={d}: wrong branch, m = {m}")),
    }
}

/// Kolmogorov–Smirnov statistic of `mod(x + V)` against the uniform law
/// on `[-d/2, d/2)`, together with the 1% critical value.
pub fn dither_ks(x: f64, d: f64, n: usize, rng: &mut impl Rng) -> (f64, f64) {
    let mut ys: Vec<f64> = (0..n)
        .map(|_| mod_reduce(x + rng.random_range(-d / 2.0..d / 2.0), d).unwrap())
        .collect();
    ys.sort_by(f64::total_cmp);
    let nf = n as f64;
    let stat = ys
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let f = (y / d + 0.5).clamp(0.0, 1.0);
            (f - i as f64 / nf).abs().max(((i + 1) as f64 / nf - f).abs())
        })
        .fold(0.0, f64::max);
    (stat, 1.628 / nf.sqrt())
}

/// Mean square of `mod(x + V)` and its standard error.
pub fn dither_power(x: f64, d: f64, n: usize, rng: &mut impl Rng) -> (f64, f64) {
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let y = mod_reduce(x + rng.random_range(-d / 2.0..d / 2.0), d).unwrap();
        let y2 = y * y;
        s1 += y2;
        s2 += y2 * y2;
    }
    let nf = n as f64;
    let mean = s1 / nf;
    (mean, ((s2 / nf - mean * mean) / nf).sqrt())
}

/// Draws an offset spread over many orders of magnitude.
pub fn wide_value(rng: &mut impl Rng) -> f64 {
    let exp = rng.random_range(-6.0..6.0);
    let sign = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
    sign * 10f64.powf(exp)
}
