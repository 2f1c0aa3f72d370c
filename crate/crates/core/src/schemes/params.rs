use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::qfunc_inv;
use crate::pam::PamConstellation;

use super::SystemConfig;

/// Scheme constants fixed before any transmission.
///
/// Round-indexed vectors are zero-based: `gamma[i]` and `beta[i]` belong to
/// the feedback exchange after forward round `i + 1`, and `sigma_n2[i]` is
/// the coupled-system error variance after round `i + 1`.
#[derive(Debug, Clone, Serialize)]
pub struct DerivedParams {
    /// Feedback power back-off `3 / [Q^{-1}(p_m / 2)]²`.
    pub lambda: f64,
    pub p_m: f64,
    /// Modulo interval `sqrt(12 P̃)`.
    pub d: f64,
    /// Forward scaling of the extracted error, `sqrt(P / (λ P̃))`.
    pub alpha: f64,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub sigma_n2: Vec<f64>,
    #[serde(skip)]
    pub constellation: PamConstellation,
}

impl DerivedParams {
    /// Effective SNR after the last round, `1 / σ_N²`.
    pub fn final_snr(&self) -> f64 {
        1.0 / self.sigma_n2.last().copied().unwrap_or(f64::NAN)
    }
}

/// `λ = 3 [Q^{-1}(p_m / 2)]^{-2}`.
pub fn lambda_for(p_m: f64) -> Result<f64> {
    if !(p_m > 0.0 && p_m < 1.0) {
        return Err(Error::domain(format!("aliasing probability must lie in (0,1), got {p_m}")));
    }
    let x = qfunc_inv(p_m / 2.0)?;
    Ok(3.0 / (x * x))
}

/// Per-round growth of the coupled-system SNR:
/// `1 + snr (1 − 1/(λ snr_fb)) / (1 + 1/(λ dsnr))`.
pub(crate) fn snr_growth(snr: f64, snr_fb: f64, dsnr: f64, lambda: f64) -> f64 {
    let floor = 1.0 / (lambda * snr_fb);
    let concat = 1.0 / (lambda * dsnr);
    1.0 + snr * (1.0 - floor) / (1.0 + concat)
}

/// Computes λ, d, α and the per-round γ, β, σ² sequences.
///
/// With noiseless feedback the `1/(λ snr_fb)` and `1/(λ dsnr)` terms vanish
/// and the recursion is the classical `σ²_{n+1} = σ²_n / (1 + snr)`.
pub fn derive_params(cfg: &SystemConfig) -> Result<DerivedParams> {
    cfg.validate()?;
    let snr = cfg.snr();
    let snr_fb = cfg.snr_fb();
    let dsnr = cfg.dsnr();
    if cfg.noise_var_fb > 0.0 && dsnr <= 1.0 {
        return Err(Error::config(format!(
            "feedback SNR must exceed forward SNR (dsnr = {dsnr:.4})"
        )));
    }
    let p_m = cfg.p_m();
    let lambda = lambda_for(p_m)?;
    if lambda * snr_fb <= 1.0 {
        return Err(Error::ErrorFloor { lambda, product: lambda * snr_fb });
    }

    let rounds = cfg.rounds as usize;
    let d = (12.0 * cfg.power_fb).sqrt();
    let alpha = (cfg.power_fwd / (lambda * cfg.power_fb)).sqrt();
    let growth = snr_growth(snr, snr_fb, dsnr, lambda);
    let floor = 1.0 / (lambda * snr_fb);
    let sigma = cfg.noise_var_fwd.sqrt();
    let beta_gain = (snr * (1.0 - floor)).sqrt() / (1.0 + snr);

    let mut sigma_n2 = Vec::with_capacity(rounds);
    let mut gamma = Vec::with_capacity(rounds.saturating_sub(1));
    let mut beta = Vec::with_capacity(rounds.saturating_sub(1));
    sigma_n2.push(1.0 / snr);
    for i in 0..rounds - 1 {
        let s2 = sigma_n2[i];
        gamma.push(((lambda * cfg.power_fb - cfg.noise_var_fb) / s2).sqrt());
        beta.push(s2.sqrt() / sigma * beta_gain);
        sigma_n2.push(s2 / growth);
    }

    Ok(DerivedParams {
        lambda,
        p_m,
        d,
        alpha,
        gamma,
        beta,
        sigma_n2,
        constellation: PamConstellation::new(cfg.total_bits() as u32)?,
    })
}
