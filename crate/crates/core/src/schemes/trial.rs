use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::wrap;
use crate::pam::{Message, PamConstellation};

use super::{DerivedParams, SystemConfig};

/// Everything observed during one protocol execution.
///
/// `eps[n]` is Terminal B's estimation error after forward round `n + 1`.
/// `aliasing`, `eps_tilde` and `tx_power_fb` cover the `N − 1` feedback
/// rounds; `tx_power_fwd` covers all `N` forward rounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub w_true: Message,
    pub w_decoded: Message,
    pub eps: Vec<f64>,
    pub eps_tilde: Vec<f64>,
    pub aliasing: Vec<bool>,
    pub decode_error: bool,
    pub tx_power_fwd: Vec<f64>,
    pub tx_power_fb: Vec<f64>,
    pub bit_errors: u32,
}

impl TrialRecord {
    /// Index of the first feedback round that aliased, if any.
    pub fn first_aliasing(&self) -> Option<usize> {
        self.aliasing.iter().position(|&a| a)
    }

    fn finish(constellation: &PamConstellation, w: Message, theta_hat: f64, rec: Partial) -> Self {
        let w_decoded = constellation.decode_min_distance(theta_hat);
        TrialRecord {
            w_true: w,
            w_decoded,
            decode_error: w_decoded != w,
            bit_errors: w.bit_distance(w_decoded),
            eps: rec.eps,
            eps_tilde: rec.eps_tilde,
            aliasing: rec.aliasing,
            tx_power_fwd: rec.tx_power_fwd,
            tx_power_fb: rec.tx_power_fb,
        }
    }
}

#[derive(Default)]
struct Partial {
    eps: Vec<f64>,
    eps_tilde: Vec<f64>,
    aliasing: Vec<bool>,
    tx_power_fwd: Vec<f64>,
    tx_power_fb: Vec<f64>,
}

impl Partial {
    fn with_rounds(n: usize) -> Self {
        let fb = n.saturating_sub(1);
        Partial {
            eps: Vec::with_capacity(n),
            eps_tilde: Vec::with_capacity(fb),
            aliasing: Vec::with_capacity(fb),
            tx_power_fwd: Vec::with_capacity(n),
            tx_power_fb: Vec::with_capacity(fb),
        }
    }
}

fn check_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::usage(format!("{name} has {got} samples, expected {want}")));
    }
    Ok(())
}

fn check_rounds(cfg: &SystemConfig, params: &DerivedParams, noise_fwd: &[f64]) -> Result<usize> {
    let n = cfg.rounds as usize;
    if params.sigma_n2.len() != n {
        return Err(Error::usage(format!(
            "parameters were derived for {} rounds, config has {n}",
            params.sigma_n2.len()
        )));
    }
    check_len("forward noise", noise_fwd.len(), n)?;
    Ok(n)
}

/// Which feedback path the shared recursion takes.
#[derive(Clone, Copy)]
enum Variant<'a> {
    Modulo { dither: &'a [f64] },
    Coupled,
}

fn run_feedback_loop(
    cfg: &SystemConfig,
    params: &DerivedParams,
    w: Message,
    noise_fwd: &[f64],
    noise_fb: &[f64],
    variant: Variant<'_>,
) -> Result<TrialRecord> {
    let n = check_rounds(cfg, params, noise_fwd)?;
    check_len("feedback noise", noise_fb.len(), n - 1)?;
    let c = &params.constellation;
    let theta = c.gray_encode(w)?;
    let sqrt_p = cfg.power_fwd.sqrt();
    let d = params.d;
    let mut rec = Partial::with_rounds(n);

    let x1 = sqrt_p * theta;
    rec.tx_power_fwd.push(x1 * x1);
    let mut theta_hat = (x1 + noise_fwd[0]) / sqrt_p;
    rec.eps.push(theta_hat - theta);

    for i in 0..n - 1 {
        let gamma = params.gamma[i];
        let z_fb = noise_fb[i];
        let eps = rec.eps[i];
        // Both variants form the unwrapped error description the same way,
        // so their arithmetic agrees bit for bit until the first wraparound.
        let t = gamma * eps + z_fb;
        let (wrapped, k) = wrap(t, d);
        rec.aliasing.push(k != 0);

        let eps_tilde = match variant {
            Variant::Modulo { dither } => {
                let v = dither[i];
                let x_fb = wrap(gamma * theta_hat + v, d).0;
                rec.tx_power_fb.push(x_fb * x_fb);
                let y_fb = x_fb + z_fb;
                debug_assert!({
                    let on_wire = wrap(y_fb - gamma * theta - v, d).0;
                    let diff = wrap(on_wire - wrapped, d).0.abs();
                    diff <= 1e-9 * (1.0 + t.abs() + gamma * theta.abs())
                });
                wrapped
            }
            Variant::Coupled => {
                let x_fb = gamma * theta_hat;
                rec.tx_power_fb.push(x_fb * x_fb);
                t
            }
        };
        rec.eps_tilde.push(eps_tilde);

        let x = params.alpha * eps_tilde;
        rec.tx_power_fwd.push(x * x);
        let y = x + noise_fwd[i + 1];
        theta_hat -= params.beta[i] * y;
        rec.eps.push(theta_hat - theta);
    }

    Ok(TrialRecord::finish(c, w, theta_hat, rec))
}

/// One execution of the modulo-feedback protocol.
///
/// Terminal B sends `mod(γ_n Θ̂_n + V_n)`; Terminal A strips its own
/// contribution and the dither, leaving `mod(γ_n ε_n + Z̃_n)`, which it
/// scales by α and sends forward. The extracted value is computed from
/// `γ_n ε_n + Z̃_n` directly (equal to the wire arithmetic modulo `d`), so
/// that rounds without aliasing reproduce [`run_trial_coupled`] exactly.
pub fn run_trial_proposed(
    cfg: &SystemConfig,
    params: &DerivedParams,
    w: Message,
    noise_fwd: &[f64],
    noise_fb: &[f64],
    dither: &[f64],
) -> Result<TrialRecord> {
    check_len("dither", dither.len(), (cfg.rounds as usize).saturating_sub(1))?;
    let half = 0.5 * params.d;
    if let Some(v) = dither.iter().find(|v| !(-half..half).contains(*v)) {
        return Err(Error::usage(format!("dither value {v} outside [-d/2, d/2)")));
    }
    run_feedback_loop(cfg, params, w, noise_fwd, noise_fb, Variant::Modulo { dither })
}

/// The analysis twin of [`run_trial_proposed`] with both modulo operations
/// removed. Feedback power is unbounded here; aliasing flags still record
/// whether `γ_n ε_n + Z̃_n` left `[−d/2, d/2)`.
pub fn run_trial_coupled(
    cfg: &SystemConfig,
    params: &DerivedParams,
    w: Message,
    noise_fwd: &[f64],
    noise_fb: &[f64],
) -> Result<TrialRecord> {
    run_feedback_loop(cfg, params, w, noise_fwd, noise_fb, Variant::Coupled)
}

/// Classical scheme over a noiseless feedback link: B returns `Θ̂_n`
/// unscaled and A sends `α_n ε_n` with `α_n = sqrt(P) / σ_n`.
///
/// `params` must come from a configuration with zero feedback noise, so
/// that `β` and `σ_n²` follow the `1 / (1 + snr)` recursion.
pub fn run_trial_sk(
    cfg: &SystemConfig,
    params: &DerivedParams,
    w: Message,
    noise_fwd: &[f64],
) -> Result<TrialRecord> {
    if cfg.noise_var_fb != 0.0 {
        return Err(Error::usage("the classical scheme needs a noiseless feedback link"));
    }
    let n = check_rounds(cfg, params, noise_fwd)?;
    let c = &params.constellation;
    let theta = c.gray_encode(w)?;
    let sqrt_p = cfg.power_fwd.sqrt();
    let mut rec = Partial::with_rounds(n);

    let x1 = sqrt_p * theta;
    rec.tx_power_fwd.push(x1 * x1);
    let mut theta_hat = (x1 + noise_fwd[0]) / sqrt_p;
    rec.eps.push(theta_hat - theta);

    for i in 0..n - 1 {
        rec.tx_power_fb.push(theta_hat * theta_hat);
        rec.aliasing.push(false);
        let eps = theta_hat - theta;
        rec.eps_tilde.push(eps);
        let x = sqrt_p / params.sigma_n2[i].sqrt() * eps;
        rec.tx_power_fwd.push(x * x);
        let y = x + noise_fwd[i + 1];
        theta_hat -= params.beta[i] * y;
        rec.eps.push(theta_hat - theta);
    }

    Ok(TrialRecord::finish(c, w, theta_hat, rec))
}

/// Single-shot PAM carrying `R` bits (the configured round count is
/// ignored).
pub fn run_trial_uncoded(cfg: &SystemConfig, w: Message, z1: f64) -> Result<TrialRecord> {
    let c = PamConstellation::new(cfg.rate_bits)?;
    let theta = c.gray_encode(w)?;
    let sqrt_p = cfg.power_fwd.sqrt();
    let x1 = sqrt_p * theta;
    let theta_hat = (x1 + z1) / sqrt_p;
    let rec = Partial {
        eps: vec![theta_hat - theta],
        tx_power_fwd: vec![x1 * x1],
        ..Partial::default()
    };
    Ok(TrialRecord::finish(&c, w, theta_hat, rec))
}
