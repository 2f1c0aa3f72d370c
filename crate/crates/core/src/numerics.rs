//! Scalar primitives shared by every other module: the Gaussian tail
//! function and its inverse, decibel conversion, and the centered modulo
//! reduction used by the feedback link.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
///
/// Evaluated through `erfc`, so the relative error stays near machine
/// precision deep into the tail. Saturates to `0.0` once the result drops
/// below the subnormal range.
pub fn qfunc(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("qfunc argument must be finite, got {x}")));
    }
    Ok(q(x))
}

/// Unchecked `Q(x)` for internal hot paths.
#[inline]
pub(crate) fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

#[inline]
fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Inverse of [`qfunc`]: returns `x` with `Q(x) = p`, for `0 < p < 1`.
///
/// A rational approximation seeds two Newton steps on `Q`. Arguments above
/// one half are reflected (`1 - p` is exact there), so both tails keep full
/// relative accuracy.
pub fn qfunc_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("qfunc_inv requires 0 < p < 1, got {p}")));
    }
    if p > 0.5 {
        return Ok(-upper_tail_inv(1.0 - p));
    }
    Ok(upper_tail_inv(p))
}

/// `Q^{-1}(p)` for `0 < p <= 1/2`.
fn upper_tail_inv(p: f64) -> f64 {
    let mut x = -normal_quantile_seed(p);
    for _ in 0..2 {
        let pdf = normal_pdf(x);
        if pdf == 0.0 {
            break;
        }
        x += (q(x) - p) / pdf;
    }
    x
}

/// Acklam's rational approximation of the standard normal quantile for
/// `0 < p <= 1/2` (relative error about 1e-9).
fn normal_quantile_seed(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let t = (-2.0 * p.ln()).sqrt();
        (((((C[0] * t + C[1]) * t + C[2]) * t + C[3]) * t + C[4]) * t + C[5])
            / ((((D[0] * t + D[1]) * t + D[2]) * t + D[3]) * t + 1.0)
    } else {
        let t = p - 0.5;
        let r = t * t;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * t
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// `10 log10(x)`.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Inverse of [`to_db`].
pub fn from_db(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

/// Centered modulo reduction `x - d * round(x / d)` with ties rounded up,
/// so the result always lies in `[-d/2, d/2)`.
pub fn mod_reduce(x: f64, d: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::domain(format!("modulo interval must be positive, got {d}")));
    }
    if !x.is_finite() {
        return Err(Error::domain(format!("modulo argument must be finite, got {x}")));
    }
    Ok(wrap(x, d).0)
}

/// Reduces `x` into `[-d/2, d/2)` and returns the wrapped value together
/// with the integer `k` such that `value = x - k d` (up to rounding).
///
/// When `k == 0` the value is `x` itself, bit for bit.
#[inline]
pub(crate) fn wrap(x: f64, d: f64) -> (f64, i64) {
    let half = 0.5 * d;
    let k = (x / d + 0.5).floor();
    if k == 0.0 {
        // floor() may disagree with the interval test by one ulp at the edges.
        if x >= half {
            return wrap_shifted(x, d, 1.0);
        }
        if x < -half {
            return wrap_shifted(x, d, -1.0);
        }
        return (x, 0);
    }
    wrap_shifted(x, d, k)
}

fn wrap_shifted(x: f64, d: f64, k: f64) -> (f64, i64) {
    let half = 0.5 * d;
    let mut k = k;
    let mut r = x - k * d;
    if r >= half {
        r -= d;
        k += 1.0;
    } else if r < -half {
        let up = r + d;
        if up < half {
            r = up;
            k -= 1.0;
        } else {
            r = -half;
        }
    }
    if k == 0.0 {
        return (x, 0);
    }
    (r.max(-half), k as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 60-digit arithmetic (mpmath erfc,
    // inverse by bisection).
    const Q_TABLE: [(f64, f64); 9] = [
        (0.5, 0.308_537_538_725_986_9),
        (1.0, 0.158_655_253_931_457_05),
        (2.0, 0.022_750_131_948_179_21),
        (3.7, 1.077_997_334_773_883_4e-4),
        (5.0, 2.866_515_718_791_939e-7),
        (10.0, 7.619_853_024_160_526e-24),
        (20.0, 2.753_624_118_606_233_7e-89),
        (30.0, 4.906_713_927_148_187e-198),
        (37.5, 4.605_353_009_581_955e-308),
    ];

    const QINV_TABLE: [(f64, f64); 7] = [
        (1e-12, 7.034_483_825_301_132),
        (1.315_789_473_684_210_5e-8, 5.564_332_409_647_604),
        (5e-7, 4.891_638_475_698_59),
        (0.1, 1.281_551_565_544_600_5),
        (0.3, 0.524_400_512_708_040_8),
        (0.9, -1.281_551_565_544_600_5),
        // The reference is for the nearest double to 0.999999, not the decimal.
        (0.999_999, -4.753_424_308_817_087),
    ];

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn qfunc_matches_high_precision_table() {
        for (x, want) in Q_TABLE {
            let got = qfunc(x).unwrap();
            assert!(rel(got, want) <= 1e-12, "Q({x}) = {got:e}, want {want:e}");
        }
    }

    #[test]
    fn qfunc_examples() {
        assert_eq!(qfunc(0.0).unwrap(), 0.5);
        let deep = qfunc(40.0).unwrap();
        assert!((0.0..1e-300).contains(&deep));
        let tenth = qfunc(1.2815515655446004).unwrap();
        assert!(rel(tenth, 0.1) <= 1e-12);
        assert!(matches!(qfunc(f64::NAN), Err(Error::Domain(_))));
        assert!(qfunc(f64::INFINITY).is_err());
    }

    #[test]
    fn qfunc_inv_matches_high_precision_table() {
        for (p, want) in QINV_TABLE {
            let got = qfunc_inv(p).unwrap();
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "Qinv({p}) = {got}");
        }
        assert_eq!(qfunc_inv(0.5).unwrap(), 0.0);
    }

    #[test]
    fn qfunc_inv_rejects_boundaries() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(qfunc_inv(p), Err(Error::Domain(_))), "p = {p}");
        }
    }

    #[test]
    fn round_trip_over_log_grid() {
        let mut worst: f64 = 0.0;
        for i in 0..=2400 {
            let lp = -12.0 + 12.0 * i as f64 / 2400.0;
            for p in [10f64.powf(lp), 1.0 - 10f64.powf(lp)] {
                if !(1e-12..=1.0 - 1e-12).contains(&p) {
                    continue;
                }
                let back = q(qfunc_inv(p).unwrap());
                worst = worst.max((back - p).abs() / p);
            }
        }
        assert!(worst < 1e-12, "worst relative round-trip error {worst:e}");
        assert!((qfunc_inv(qfunc(3.7).unwrap()).unwrap() - 3.7).abs() < 1e-10);
    }

    #[test]
    fn db_round_trip() {
        for x in [1e-9, 0.3, 1.0, 7.5, 1e12] {
            assert!(rel(from_db(to_db(x)), x) < 1e-12);
        }
        assert_eq!(to_db(100.0), 20.0);
    }

    #[test]
    fn mod_reduce_examples() {
        assert_eq!(mod_reduce(5.0, 4.0).unwrap(), 1.0);
        assert_eq!(mod_reduce(1.0, 2.0).unwrap(), -1.0);
        assert_eq!(mod_reduce(-1.0, 2.0).unwrap(), -1.0);
        assert_eq!(mod_reduce(0.7, 2.0).unwrap(), 0.7);
        assert_eq!(mod_reduce(-3.0, 2.0).unwrap(), -1.0);
        assert!(mod_reduce(1.0, 0.0).is_err());
        assert!(mod_reduce(1.0, -2.0).is_err());
    }

    #[test]
    fn wrap_reports_integer_shift() {
        let (v, k) = wrap(9.5, 2.0);
        assert_eq!((v, k), (-0.5, 5));
        let (v, k) = wrap(-0.25, 2.0);
        assert_eq!((v, k), (-0.25, 0));
    }
}
