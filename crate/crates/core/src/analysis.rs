//! Closed-form analytics: the SNR recursion, the error budget, the
//! required-SNR search behind the capacity-gap curves, the theorem bound
//! and its high-SNR form, and the bandwidth trade-off.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{from_db, q, to_db};
use crate::pam::{gamma0, gamma0_linear, pam_symbol_error_bound};
use crate::schemes::{lambda_for, snr_growth, Feedback};

/// How `required_snr` decides that an SNR is sufficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// `(N−1) p_m + 2Q(·) = pe`: aliasing and decoding share the budget.
    ErrorBudget,
    /// `SNR_N = Γ₀(pe) (2^{2NR} − 1)`: the decoding term alone meets `pe`,
    /// aliasing enters only through λ.
    RateEquation,
}

/// Per-round aliasing probability as a function of `pe` and `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AliasingSplit {
    /// `pe / (2N)`, the split behind the theorem's λ.
    Theorem,
    /// `pe / (2(N−1))`: half the budget spread over the feedback rounds.
    AcrossFeedbackRounds,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchPolicy {
    pub criterion: Criterion,
    pub split: AliasingSplit,
}

impl SearchPolicy {
    /// Exact error-budget inversion with the theorem's split.
    pub const THEOREM: SearchPolicy = SearchPolicy {
        criterion: Criterion::ErrorBudget,
        split: AliasingSplit::Theorem,
    };

    /// Rate-equation search, the semantics that reproduces the published
    /// capacity-gap curves most closely.
    pub const FIGURE: SearchPolicy = SearchPolicy {
        criterion: Criterion::RateEquation,
        split: AliasingSplit::AcrossFeedbackRounds,
    };

    /// Aliasing budget per feedback round; `None` when `n = 1` and the
    /// split is relative to the feedback round count.
    pub fn p_m(&self, pe: f64, n: u32) -> Option<f64> {
        match self.split {
            AliasingSplit::Theorem => Some(pe / (2.0 * f64::from(n))),
            AliasingSplit::AcrossFeedbackRounds if n > 1 => Some(pe / (2.0 * f64::from(n - 1))),
            AliasingSplit::AcrossFeedbackRounds => None,
            AliasingSplit::Fixed(p) => Some(p),
        }
    }
}

impl Default for SearchPolicy {
    fn default() -> Self {
        SearchPolicy::FIGURE
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::domain(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("{name} must lie in (0,1), got {p}")));
    }
    Ok(())
}

/// `ln(2^{2nR} − 1)` without overflow for large `nR`.
fn ln_levels_sq_minus_one(total_bits: f64) -> f64 {
    let e = 2.0 * total_bits * LN_2;
    if e > 40.0 {
        e
    } else {
        e.exp_m1().ln()
    }
}

/// `ln SNR_N`. Kept in the log domain because `SNR_N` overflows quickly.
fn ln_snr_after_n(snr: f64, feedback: Feedback, lambda: f64, n: u32) -> Result<f64> {
    if n == 1 {
        return Ok(snr.ln());
    }
    let growth = match feedback {
        Feedback::Noiseless => 1.0 + snr,
        Feedback::Noisy { dsnr } => {
            let product = lambda * snr * dsnr;
            if product <= 1.0 {
                return Err(Error::ErrorFloor { lambda, product });
            }
            snr_growth(snr, snr * dsnr, dsnr, lambda)
        }
    };
    Ok(snr.ln() + f64::from(n - 1) * growth.ln())
}

/// Effective SNR after `n` rounds:
/// `snr (1 + snr (1 − 1/(λ snr_fb)) / (1 + 1/(λ dsnr)))^{n−1}` with
/// `snr_fb = snr · dsnr`. Noiseless feedback drops both λ terms.
pub fn snr_after_n(snr: f64, feedback: Feedback, lambda: f64, n: u32) -> Result<f64> {
    check_positive("snr", snr)?;
    if n == 0 {
        return Err(Error::domain("round count must be at least one"));
    }
    if n == 1 {
        return Ok(snr);
    }
    ln_snr_after_n(snr, feedback, lambda, n).map(f64::exp)
}

/// `2 Q(sqrt(3 SNR_N / (2^{2nR} − 1)))` evaluated from `ln SNR_N`.
fn decoding_term(ln_snr_n: f64, n: u32, rate_bits: f64) -> f64 {
    let ln_arg = 3f64.ln() + ln_snr_n - ln_levels_sq_minus_one(f64::from(n) * rate_bits);
    2.0 * q((0.5 * ln_arg).exp())
}

/// Error probability bound `(n−1) p_m + 2 Q(sqrt(3 SNR_N / (2^{2nR} − 1)))`
/// with λ derived from `p_m`. There is no aliasing term over a noiseless
/// feedback link.
pub fn pe_budget(snr: f64, feedback: Feedback, n: u32, rate_bits: f64, p_m: f64) -> Result<f64> {
    check_positive("snr", snr)?;
    check_positive("rate", rate_bits)?;
    if n == 0 {
        return Err(Error::domain("round count must be at least one"));
    }
    if n == 1 {
        return pam_symbol_error_bound(snr, rate_bits);
    }
    if feedback == Feedback::Noiseless {
        return Ok(decoding_term(ln_snr_after_n(snr, feedback, f64::NAN, n)?, n, rate_bits));
    }
    let lambda = lambda_for(p_m)?;
    let ln_snr_n = ln_snr_after_n(snr, feedback, lambda, n)?;
    Ok(f64::from(n - 1) * p_m + decoding_term(ln_snr_n, n, rate_bits))
}

const BISECTION_TOL_DB: f64 = 1e-4;
const BISECTION_MAX_ITER: usize = 200;

/// Smallest SNR (dB) meeting `pe` in `n` rounds at `rate_bits` per channel
/// use, found by bisection on the SNR in dB with the feedback excess held
/// fixed. The returned point is on the sufficient side of the boundary.
pub fn required_snr(rate_bits: f64, pe: f64, n: u32, feedback: Feedback, policy: SearchPolicy) -> Result<f64> {
    check_positive("rate", rate_bits)?;
    check_probability("target error probability", pe)?;
    if n == 0 {
        return Err(Error::domain("round count must be at least one"));
    }
    if let Feedback::Noisy { dsnr } = feedback {
        if dsnr.is_nan() || dsnr <= 1.0 {
            return Err(Error::config(format!("feedback SNR excess must exceed one, got {dsnr}")));
        }
    }
    let noisy = n > 1 && feedback != Feedback::Noiseless;
    let p_m = if noisy {
        let p = policy.p_m(pe, n).expect("split defined for n > 1");
        check_probability("aliasing budget", p)?;
        Some(p)
    } else {
        None
    };

    // margin(snr_db) > 0 means the SNR is sufficient.
    let margin: Box<dyn Fn(f64) -> f64> = match (policy.criterion, p_m) {
        (Criterion::ErrorBudget, Some(p_m)) => {
            let aliasing = f64::from(n - 1) * p_m;
            if aliasing >= pe {
                return Err(Error::Infeasible { aliasing, target: pe });
            }
            Box::new(move |s| match pe_budget(from_db(s), feedback, n, rate_bits, p_m) {
                Ok(b) => pe - b,
                Err(_) => f64::NEG_INFINITY,
            })
        }
        (_, p_m) => {
            let lambda = p_m.map(lambda_for).transpose()?.unwrap_or(f64::NAN);
            let ln_target = gamma0_linear(pe)?.ln() + ln_levels_sq_minus_one(f64::from(n) * rate_bits);
            Box::new(move |s| match ln_snr_after_n(from_db(s), feedback, lambda, n) {
                Ok(l) => l - ln_target,
                Err(_) => f64::NEG_INFINITY,
            })
        }
    };

    let (mut lo, mut hi) = (-10.0, 60.0);
    while margin(hi) <= 0.0 {
        lo = hi;
        hi += 50.0;
        if hi > 3000.0 {
            return Err(Error::domain("no sufficient SNR below 3000 dB"));
        }
    }
    while margin(lo) > 0.0 {
        hi = lo;
        lo -= 50.0;
        if lo < -300.0 {
            return Err(Error::domain("target met at every SNR above -300 dB"));
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_TOL_DB {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if margin(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `10 log10(2^{2R} − 1)`: the Shannon-minimal SNR for `R` bits per use.
pub fn shannon_snr_db(rate_bits: f64) -> f64 {
    10.0 * ln_levels_sq_minus_one(rate_bits) / std::f64::consts::LN_10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub n_rounds: u32,
    pub snr_db: f64,
    pub gap_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCurve {
    pub rate_bits: f64,
    pub pe: f64,
    pub feedback: Feedback,
    pub policy: SearchPolicy,
    /// Feasible points in increasing `n_rounds` order.
    pub points: Vec<GapPoint>,
    /// Round counts for which no SNR meets the target.
    pub infeasible: Vec<u32>,
    /// Smallest `N` whose gap is less than 0.2 dB above the curve minimum.
    pub n_opt: Option<u32>,
}

impl GapCurve {
    pub fn point(&self, n: u32) -> Option<&GapPoint> {
        self.points.iter().find(|p| p.n_rounds == n)
    }

    pub fn min_gap_db(&self) -> Option<f64> {
        self.points.iter().map(|p| p.gap_db).min_by(f64::total_cmp)
    }
}

pub const N_OPT_MARGIN_DB: f64 = 0.2;

fn locate_n_opt(points: &[GapPoint]) -> Option<u32> {
    let min = points.iter().map(|p| p.gap_db).min_by(f64::total_cmp)?;
    points
        .iter()
        .find(|p| p.gap_db < min + N_OPT_MARGIN_DB)
        .map(|p| p.n_rounds)
}

/// Capacity gap for `N = 1..=n_max` under [`SearchPolicy::FIGURE`].
pub fn gap_curve(rate_bits: f64, pe: f64, feedback: Feedback, n_max: u32) -> Result<GapCurve> {
    gap_curve_with(rate_bits, pe, feedback, n_max, SearchPolicy::default())
}

pub fn gap_curve_with(
    rate_bits: f64,
    pe: f64,
    feedback: Feedback,
    n_max: u32,
    policy: SearchPolicy,
) -> Result<GapCurve> {
    if n_max == 0 {
        return Err(Error::domain("n_max must be at least one"));
    }
    let shannon = shannon_snr_db(rate_bits);
    let mut points = Vec::new();
    let mut infeasible = Vec::new();
    for n in 1..=n_max {
        match required_snr(rate_bits, pe, n, feedback, policy) {
            Ok(snr_db) => points.push(GapPoint { n_rounds: n, snr_db, gap_db: snr_db - shannon }),
            Err(e) if e.is_infeasible() => infeasible.push(n),
            Err(e) => return Err(e),
        }
    }
    let n_opt = locate_n_opt(&points);
    Ok(GapCurve { rate_bits, pe, feedback, policy, points, infeasible, n_opt })
}

/// The parts of the theorem's capacity-gap bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremTerms {
    pub lambda: f64,
    pub psi1_db: f64,
    pub psi2_db: f64,
    /// Already logarithmic.
    pub psi3_db: f64,
    pub gap_db: f64,
    /// High-SNR form of the same bound.
    pub approx_db: f64,
}

/// Theorem bound on the capacity gap for `n` rounds at forward SNR `snr`
/// (linear), with `λ = 3 [Q^{-1}(pe / 4N)]^{-2}`.
pub fn theorem1_gap(pe: f64, n: u32, snr: f64, feedback: Feedback) -> Result<TheoremTerms> {
    check_probability("target error probability", pe)?;
    check_positive("snr", snr)?;
    if n == 0 {
        return Err(Error::domain("round count must be at least one"));
    }
    let nf = f64::from(n);
    let lambda = lambda_for(pe / (2.0 * nf))?;
    let dsnr = feedback.dsnr();
    let snr_fb = snr * dsnr;
    if lambda * snr_fb <= 1.0 {
        return Err(Error::ErrorFloor { lambda, product: lambda * snr_fb });
    }
    let psi1 = 1.0 + 1.0 / (lambda * dsnr);
    let psi2 = 1.0 / (1.0 - 1.0 / (lambda * snr_fb));
    let g0 = gamma0_linear(pe / 2.0)?;
    let w = (nf - 1.0) / nf;
    let denom = snr * psi1.powf(-w) * psi2.powf(-w) * g0.powf(-1.0 / nf) - 1.0;
    if denom <= 0.0 {
        return Err(Error::domain(format!(
            "SNR {:.3} dB is below the range where the bound applies",
            to_db(snr)
        )));
    }
    let psi3_db = (10.0 / std::f64::consts::LN_10) / denom;
    let (psi1_db, psi2_db) = (to_db(psi1), to_db(psi2));
    let g0_db = to_db(g0);
    Ok(TheoremTerms {
        lambda,
        psi1_db,
        psi2_db,
        psi3_db,
        gap_db: g0_db / nf + w * (psi1_db + psi2_db) + psi3_db,
        approx_db: g0_db / nf + w * psi1_db,
    })
}

/// High-SNR capacity gap `(1/N) Γ₀(pe/2) + ((N−1)/N) [1 + 1/(λ dsnr)]`, in dB.
pub fn high_snr_gap(pe: f64, n: u32, feedback: Feedback) -> Result<f64> {
    check_probability("target error probability", pe)?;
    if n == 0 {
        return Err(Error::domain("round count must be at least one"));
    }
    let nf = f64::from(n);
    let lambda = lambda_for(pe / (2.0 * nf))?;
    let psi1 = 1.0 + 1.0 / (lambda * feedback.dsnr());
    Ok(gamma0(pe / 2.0)? / nf + (nf - 1.0) / nf * to_db(psi1))
}

/// High-SNR capacity gap of the classical scheme, `Γ₀(pe) / N` in dB.
pub fn sk_gap_approx(pe: f64, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("round count must be at least one"));
    }
    Ok(gamma0(pe)? / f64::from(n))
}

/// SNR of the forward and feedback links used back to back with linear
/// relaying: `snr · snr_fb / (snr + snr_fb + 1)`.
pub fn concatenated_snr(snr: f64, snr_fb: f64) -> Result<f64> {
    check_positive("snr", snr)?;
    if snr_fb.is_nan() || snr_fb <= 0.0 {
        return Err(Error::domain(format!("feedback SNR must be positive, got {snr_fb}")));
    }
    if snr_fb.is_infinite() {
        return Ok(snr);
    }
    Ok(snr * snr_fb / (snr + snr_fb + 1.0))
}

/// `½ log2(1 + 10^{x/10})`.
pub fn awgn_capacity_db(snr_db: f64) -> f64 {
    0.5 * from_db(snr_db).ln_1p() / LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthTradeoff {
    /// Rate of the interactive scheme on half the bandwidth.
    pub interactive_rate: f64,
    /// Rate of one-way signaling over the full bandwidth, 3 dB down.
    pub full_band_rate: f64,
    pub interactive_wins: bool,
}

/// Interactive scheme at `C(snr − Γ*)` against one-way signaling at
/// `2 C(snr − 3 − Γ_fec)`.
pub fn bandwidth_tradeoff(snr_db: f64, gap_star_db: f64, gap_fec_db: f64) -> BandwidthTradeoff {
    let interactive_rate = awgn_capacity_db(snr_db - gap_star_db);
    let full_band_rate = 2.0 * awgn_capacity_db(snr_db - 3.0 - gap_fec_db);
    BandwidthTradeoff {
        interactive_rate,
        full_band_rate,
        interactive_wins: interactive_rate > full_band_rate,
    }
}

/// SNR (dB) below which the interactive scheme wins the bandwidth
/// trade-off. `None` when either side wins everywhere in [−30, 80] dB.
pub fn tradeoff_crossover_db(gap_star_db: f64, gap_fec_db: f64) -> Option<f64> {
    let wins = |s: f64| bandwidth_tradeoff(s, gap_star_db, gap_fec_db).interactive_wins;
    let (mut lo, mut hi) = (-30.0, 80.0);
    if !wins(lo) || wins(hi) {
        return None;
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if wins(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}
