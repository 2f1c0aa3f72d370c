//! Unit-power PAM constellations with Gray labeling, minimum-distance
//! decoding and the uncoded-PAM error and capacity-gap formulas.
//!
//! Constellations may carry up to [`MAX_RATE_BITS`] bits, so points are
//! computed from their position index on demand rather than stored.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{q, qfunc_inv, to_db};

pub const MAX_RATE_BITS: u32 = 40;

/// Index of a message in `[0, M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Message(pub u64);

impl Message {
    pub fn index(self) -> u64 {
        self.0
    }

    /// Number of label bits in which two messages differ.
    pub fn bit_distance(self, other: Message) -> u32 {
        (self.0 ^ other.0).count_ones()
    }
}

/// `{±η, ±3η, …, ±(M−1)η}` with `η = sqrt(3 / (M² − 1))`, so the mean
/// square over equiprobable points is one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PamConstellation {
    rate_bits: u32,
    eta: f64,
}

impl PamConstellation {
    pub fn new(rate_bits: u32) -> Result<Self> {
        if !(1..=MAX_RATE_BITS).contains(&rate_bits) {
            return Err(Error::config(format!(
                "PAM constellation needs 1..={MAX_RATE_BITS} bits, got {rate_bits}"
            )));
        }
        let eta = (3.0 / (4f64.powi(rate_bits as i32) - 1.0)).sqrt();
        Ok(Self { rate_bits, eta })
    }

    pub fn rate_bits(&self) -> u32 {
        self.rate_bits
    }

    pub fn levels(&self) -> u64 {
        1u64 << self.rate_bits
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn min_distance(&self) -> f64 {
        2.0 * self.eta
    }

    /// Amplitude of the point at `position` (0 is the most negative).
    pub fn point(&self, position: u64) -> f64 {
        let m = self.levels();
        (2.0 * position as f64 - (m - 1) as f64) * self.eta
    }

    /// All points in increasing amplitude order.
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.levels()).map(move |i| self.point(i))
    }

    /// Maps a message to its constellation point. The label of the point
    /// at position `i` is the reflected Gray code of `i`, so adjacent
    /// points differ in exactly one label bit.
    pub fn gray_encode(&self, w: Message) -> Result<f64> {
        if w.0 >= self.levels() {
            return Err(Error::domain(format!(
                "message {} out of range for {} levels",
                w.0,
                self.levels()
            )));
        }
        Ok(self.point(gray_to_binary(w.0)))
    }

    /// Nearest-point decoder. Ties go to the lower-amplitude point and
    /// inputs beyond the outer points clamp to them.
    pub fn decode_min_distance(&self, theta_hat: f64) -> Message {
        let m = self.levels();
        // Continuous position of theta_hat on the index axis.
        let u = 0.5 * (theta_hat / self.eta + (m - 1) as f64);
        let pos = (u - 0.5).ceil();
        let pos = if pos.is_nan() || pos <= 0.0 {
            0
        } else if pos >= (m - 1) as f64 {
            m - 1
        } else {
            pos as u64
        };
        Message(binary_to_gray(pos))
    }
}

#[inline]
pub fn binary_to_gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

#[inline]
pub fn gray_to_binary(g: u64) -> u64 {
    let mut b = g;
    let mut shift = 1;
    while shift < 64 {
        b ^= b >> shift;
        shift <<= 1;
    }
    b
}

fn check_snr(snr: f64) -> Result<()> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::domain(format!("SNR must be positive and finite, got {snr}")));
    }
    Ok(())
}

/// `sqrt(3 snr / (2^{2R} − 1))`: half the minimum distance over the noise
/// standard deviation for a unit-power constellation carrying `R` bits.
pub(crate) fn half_distance_ratio(snr: f64, rate_bits_total: f64) -> f64 {
    (3.0 * snr / (2f64.powf(2.0 * rate_bits_total) - 1.0)).sqrt()
}

/// Symbol error bound `2 Q(sqrt(3 snr / (2^{2R} − 1)))`.
pub fn pam_symbol_error_bound(snr: f64, rate_bits_total: f64) -> Result<f64> {
    check_snr(snr)?;
    Ok(2.0 * q(half_distance_ratio(snr, rate_bits_total)))
}

/// Bit error bound under Gray labeling:
/// `(2/R) Q(x) + 2 Q(3x)` with `x = sqrt(3 snr / (2^{2R} − 1))`.
pub fn bit_error_bound(snr: f64, rate_bits_total: f64) -> Result<f64> {
    check_snr(snr)?;
    let x = half_distance_ratio(snr, rate_bits_total);
    Ok(2.0 / rate_bits_total * q(x) + 2.0 * q(3.0 * x))
}

/// Linear capacity gap of uncoded PAM, `(1/3) [Q^{-1}(pe/2)]²`.
pub fn gamma0_linear(pe: f64) -> Result<f64> {
    if !(pe > 0.0 && pe < 1.0) {
        return Err(Error::domain(format!("error probability must lie in (0,1), got {pe}")));
    }
    let x = qfunc_inv(pe / 2.0)?;
    Ok(x * x / 3.0)
}

/// Capacity gap of uncoded PAM at symbol error probability `pe`, in dB.
pub fn gamma0(pe: f64) -> Result<f64> {
    gamma0_linear(pe).map(to_db)
}
