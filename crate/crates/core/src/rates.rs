//! Achievable rates of the primary (active) and secondary (backscatter) links.
//!
//! The primary receiver decodes `s(n)` first, treating the backscattered
//! copy as noise. After cancelling the primary signal the secondary link is a
//! fast-fading channel whose gain is `|s(n)|² ~ Exp(1)`, so its ergodic rate is
//! `∫₀^∞ log₂(1 + β x) e^{-x} dx = e^{1/β} E₁(1/β) log₂ e`.

use core::f64::consts::LOG2_E;

use crate::error::check_len;
use crate::linalg::{cdot, cnorm_sqr};
use crate::prelude::*;
use crate::special::scaled_e1;
use crate::{Error, Result};

/// Concatenated per-AP transmit beamformer `w = [w₁; …; w_M]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer(pub Vec<C64>);

impl Beamformer {
    pub fn zeros(len: usize) -> Self {
        Self(vec![C64::new(0.0, 0.0); len])
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `‖w_m‖²` for every AP.
    pub fn per_ap_power(&self, antennas: usize) -> Vec<f64> {
        self.0.chunks(antennas).map(cnorm_sqr).collect()
    }

    /// Whether every AP respects its budget up to `rel_tol · P_m`.
    pub fn respects_power(&self, antennas: usize, powers: &[f64], rel_tol: f64) -> bool {
        self.per_ap_power(antennas).iter().zip(powers).all(|(&used, &p)| used <= p * (1.0 + rel_tol))
    }

    /// Multiplies every entry by `e^{jφ}`.
    pub fn rotated(&self, phase: f64) -> Self {
        let r = C64::from_polar(1.0, phase);
        Self(self.0.iter().map(|w| w * r).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    /// Primary rate, bps/Hz.
    pub r_s: f64,
    /// Secondary ergodic rate, bps/Hz.
    pub r_c: f64,
    /// Average SNR of the backscatter link.
    pub beta_c: f64,
}

/// `γ_s = |gᴴw|² / (α|q|²|fᴴw|² + σ²)`.
pub fn primary_sinr(w: &[C64], g: &[C64], f: &[C64], q: C64, alpha: f64, noise: f64) -> Result<f64> {
    check_len(g.len(), w.len())?;
    check_len(f.len(), w.len())?;
    if !(noise > 0.0) {
        return Err(Error::domain("noise power must be positive"));
    }
    let signal = cdot(g, w).norm_sqr();
    let interference = alpha * q.norm_sqr() * cdot(f, w).norm_sqr();
    Ok(signal / (interference + noise))
}

pub fn primary_rate(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

/// `β_c = α|q|²|fᴴw|² / σ²`.
pub fn backscatter_snr(w: &[C64], f: &[C64], q: C64, alpha: f64, noise: f64) -> Result<f64> {
    check_len(f.len(), w.len())?;
    if !(noise > 0.0) {
        return Err(Error::domain("noise power must be positive"));
    }
    Ok(alpha * q.norm_sqr() * cdot(f, w).norm_sqr() / noise)
}

pub use crate::special::exp_integral_ei as exp_integral;

/// `R_c(β) = −e^{1/β} Ei(−1/β) log₂ e`, with `R_c(0) = 0`.
pub fn secondary_ergodic_rate(beta_c: f64) -> Result<f64> {
    if beta_c.is_nan() || beta_c < 0.0 {
        return Err(Error::domain("backscatter SNR must be non-negative"));
    }
    if beta_c == 0.0 {
        return Ok(0.0);
    }
    if beta_c.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(scaled_e1(1.0 / beta_c)? * LOG2_E)
}

/// Perfect-CSI rate pair for a beamformer.
pub fn rate_pair(w: &[C64], g: &[C64], f: &[C64], q: C64, alpha: f64, noise: f64) -> Result<RatePair> {
    let sinr = primary_sinr(w, g, f, q, alpha, noise)?;
    let beta_c = backscatter_snr(w, f, q, alpha, noise)?;
    Ok(RatePair { r_s: primary_rate(sinr), r_c: secondary_ergodic_rate(beta_c)?, beta_c })
}

/// Lower bound on the expected primary rate with estimated channels:
/// `log₂(1 + |ĝᴴw|² / (E + α|ĥᴴw|²))`.
pub fn lb_primary_rate_imperfect(
    w: &[C64],
    g_hat: &[C64],
    h_hat: &[C64],
    effective_noise: f64,
    alpha: f64,
) -> Result<f64> {
    check_len(g_hat.len(), w.len())?;
    check_len(h_hat.len(), w.len())?;
    if !(effective_noise > 0.0) {
        return Err(Error::domain("effective noise must be positive"));
    }
    let signal = cdot(g_hat, w).norm_sqr();
    let interference = alpha * cdot(h_hat, w).norm_sqr();
    Ok(primary_rate(signal / (effective_noise + interference)))
}

/// Lower bound on the expected secondary rate with estimated channels:
/// the ergodic rate at `β'_c = α|ĥᴴw|² / E`.
pub fn lb_secondary_rate_imperfect(w: &[C64], h_hat: &[C64], effective_noise: f64, alpha: f64) -> Result<f64> {
    check_len(h_hat.len(), w.len())?;
    if !(effective_noise > 0.0) {
        return Err(Error::domain("effective noise must be positive"));
    }
    secondary_ergodic_rate(alpha * cdot(h_hat, w).norm_sqr() / effective_noise)
}
