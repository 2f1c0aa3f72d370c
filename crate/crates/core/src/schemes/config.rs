use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::from_db;
use crate::pam::MAX_RATE_BITS;

/// Quality of the feedback link, as seen by the analytic formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Feedback {
    Noiseless,
    /// Feedback SNR exceeds the forward SNR by this linear factor.
    Noisy { dsnr: f64 },
}

impl Feedback {
    pub fn from_dsnr_db(dsnr_db: f64) -> Self {
        if dsnr_db.is_infinite() && dsnr_db > 0.0 {
            Feedback::Noiseless
        } else {
            Feedback::Noisy { dsnr: from_db(dsnr_db) }
        }
    }

    /// Linear SNR excess, infinite for a noiseless link.
    pub fn dsnr(&self) -> f64 {
        match *self {
            Feedback::Noiseless => f64::INFINITY,
            Feedback::Noisy { dsnr } => dsnr,
        }
    }
}

/// Physical setup of one link: powers, noise variances, number of rounds
/// and the message size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Forward (A to B) power constraint `P`.
    pub power_fwd: f64,
    /// Feedback (B to A) power constraint `P̃`.
    pub power_fb: f64,
    /// Forward noise variance `σ²`.
    pub noise_var_fwd: f64,
    /// Feedback noise variance `σ̃²`; zero means noiseless feedback.
    pub noise_var_fb: f64,
    /// Number of forward channel uses `N`.
    pub rounds: u32,
    /// Bits per forward channel use `R`; the message carries `N R` bits.
    pub rate_bits: u32,
    pub pe_target: f64,
    /// Per-round aliasing probability `p_m`. Defaults to `pe_target / (2N)`.
    pub aliasing_budget: Option<f64>,
}

impl SystemConfig {
    /// Unit powers, noise variances set from the forward SNR and the
    /// feedback SNR excess (both in dB). `dsnr_db = +inf` gives noiseless
    /// feedback.
    pub fn from_snr_db(snr_db: f64, dsnr_db: f64, rounds: u32, rate_bits: u32, pe_target: f64) -> Self {
        let snr = from_db(snr_db);
        let noise_var_fb = match Feedback::from_dsnr_db(dsnr_db) {
            Feedback::Noiseless => 0.0,
            Feedback::Noisy { dsnr } => 1.0 / (snr * dsnr),
        };
        Self {
            power_fwd: 1.0,
            power_fb: 1.0,
            noise_var_fwd: 1.0 / snr,
            noise_var_fb,
            rounds,
            rate_bits,
            pe_target,
            aliasing_budget: None,
        }
    }

    pub fn with_aliasing_budget(mut self, p_m: f64) -> Self {
        self.aliasing_budget = Some(p_m);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.power_fwd) || !positive(self.power_fb) {
            return Err(Error::config("powers must be positive and finite"));
        }
        if !positive(self.noise_var_fwd) {
            return Err(Error::config("forward noise variance must be positive"));
        }
        if !(self.noise_var_fb >= 0.0 && self.noise_var_fb.is_finite()) {
            return Err(Error::config("feedback noise variance must be non-negative"));
        }
        if self.rounds == 0 {
            return Err(Error::config("at least one round is required"));
        }
        if self.rate_bits == 0 {
            return Err(Error::config("rate must be at least one bit per channel use"));
        }
        if self.total_bits() > u64::from(MAX_RATE_BITS) {
            return Err(Error::config(format!(
                "message size N*R = {} exceeds {MAX_RATE_BITS} bits",
                self.total_bits()
            )));
        }
        if !(self.pe_target > 0.0 && self.pe_target < 1.0) {
            return Err(Error::config("target error probability must lie in (0,1)"));
        }
        if let Some(p_m) = self.aliasing_budget {
            if !(p_m > 0.0 && p_m < 1.0) {
                return Err(Error::config("aliasing budget must lie in (0,1)"));
            }
        }
        Ok(())
    }

    pub fn snr(&self) -> f64 {
        self.power_fwd / self.noise_var_fwd
    }

    /// Feedback SNR; infinite for a noiseless link.
    pub fn snr_fb(&self) -> f64 {
        if self.noise_var_fb == 0.0 {
            f64::INFINITY
        } else {
            self.power_fb / self.noise_var_fb
        }
    }

    pub fn dsnr(&self) -> f64 {
        self.snr_fb() / self.snr()
    }

    pub fn feedback(&self) -> Feedback {
        if self.noise_var_fb == 0.0 {
            Feedback::Noiseless
        } else {
            Feedback::Noisy { dsnr: self.dsnr() }
        }
    }

    pub fn total_bits(&self) -> u64 {
        u64::from(self.rounds) * u64::from(self.rate_bits)
    }

    pub fn p_m(&self) -> f64 {
        self.aliasing_budget
            .unwrap_or(self.pe_target / (2.0 * f64::from(self.rounds)))
    }
}
