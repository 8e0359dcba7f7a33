//! Two-phase uplink training.
//!
//! Phase 1: the receiver sends `τ₁` pilots with the BD muted and every AP
//! estimates its direct channel `g_m`. Phase 2: the receiver sends `τ₂` pilots
//! that the BD reflects; each AP removes the part predicted by `ĝ_m` and
//! estimates the cascaded channel `h_m = q f_m`.
//!
//! All channels are i.i.d. per antenna, so every covariance is a scalar times
//! the identity and the LMMSE filters reduce to scalar gains.

use rand::Rng;

use crate::channel::{complex_normal, ChannelRealization, SystemConfig};
use crate::prelude::*;
use crate::{Error, Result};

/// Pilot lengths and the powers that set the training energy-to-noise ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingConfig {
    pub tau1: usize,
    pub tau2: usize,
    pub pilot_power: f64,
    pub noise_power: f64,
}

impl TrainingConfig {
    pub fn new(tau1: usize, tau2: usize, pilot_power: f64, noise_power: f64) -> Result<Self> {
        if tau1 == 0 || tau2 == 0 {
            return Err(Error::config("both training phases need at least one pilot"));
        }
        if !(pilot_power > 0.0) || !(noise_power > 0.0) {
            return Err(Error::config("pilot and noise power must be positive"));
        }
        Ok(Self { tau1, tau2, pilot_power, noise_power })
    }

    pub fn from_config(config: &SystemConfig) -> Result<Self> {
        let (tau1, tau2) = config.pilot_lengths();
        Self::new(tau1, tau2, config.pilot_power, config.noise_power)
    }

    /// Phase-1 ENR `e₁ = P_t τ₁ / σ²`.
    pub fn e1(&self) -> f64 {
        self.pilot_power * self.tau1 as f64 / self.noise_power
    }

    /// Phase-2 ENR `e₂ = P_t τ₂ / σ²`.
    pub fn e2(&self) -> f64 {
        self.pilot_power * self.tau2 as f64 / self.noise_power
    }
}

/// Receiver pilot of length `tau`: all ones, so `‖φ‖² = τ`.
pub fn pilot_sequence(tau: usize) -> Vec<C64> {
    vec![C64::new(1.0, 0.0); tau]
}

/// Per-entry variance of `g̃_m = g_m − ĝ_m`: `b / (1 + e₁ b)`.
pub fn direct_error_variance(b: f64, e1: f64) -> f64 {
    b / (1.0 + e1 * b)
}

/// Per-entry variance of `h̃_m = h_m − ĥ_m`.
pub fn cascaded_error_variance(b: f64, eps: f64, alpha: f64, e1: f64, e2: f64) -> f64 {
    let k = e2 * direct_error_variance(b, e1);
    eps * (k + 1.0) / (alpha * e2 * eps + k + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectEstimate {
    pub g_hat: Vec<C64>,
    /// Length `M`.
    pub var_g_err: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackscatterEstimate {
    pub h_hat: Vec<C64>,
    /// Length `M`.
    pub var_h_err: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub g_hat: Vec<C64>,
    pub h_hat: Vec<C64>,
    pub var_g_err: Vec<f64>,
    pub var_h_err: Vec<f64>,
    /// Estimation-error-plus-noise power `E` in watts.
    pub effective_noise: f64,
}

/// Received pilot block for one AP, projected onto the pilot:
/// `Y φ = Σ_t (signal·conj(φ_t) + noise_t) φ_t`, with noise `CN(0, σ²)`.
fn project_received<R: Rng + ?Sized>(signal: C64, pilot: &[C64], noise_std: f64, rng: &mut R) -> C64 {
    pilot.iter().map(|p| (signal * p.conj() + complex_normal(rng) * noise_std) * p).sum()
}

/// Phase 1: MMSE estimate of every direct channel from simulated pilots.
pub fn estimate_direct<R: Rng + ?Sized>(chan: &ChannelRealization, tc: &TrainingConfig, rng: &mut R) -> DirectEstimate {
    let n = chan.antennas_per_ap;
    let pilot = pilot_sequence(tc.tau1);
    let sqrt_pt = tc.pilot_power.sqrt();
    let noise_std = tc.noise_power.sqrt();
    let e1 = tc.e1();
    let mut g_hat = Vec::with_capacity(chan.g.len());
    let mut var_g_err = Vec::with_capacity(chan.num_aps());
    for (m, &b) in chan.large_scale.b.iter().enumerate() {
        let gain = tc.pilot_power * b / (tc.pilot_power * tc.tau1 as f64 * b + tc.noise_power);
        for &g in &chan.g[m * n..(m + 1) * n] {
            // y' = Y'φ / √P_t = τ₁ g + ẑ / √P_t
            let y = project_received(g * sqrt_pt, &pilot, noise_std, rng) / sqrt_pt;
            g_hat.push(y * gain);
        }
        var_g_err.push(direct_error_variance(b, e1));
    }
    DirectEstimate { g_hat, var_g_err }
}

/// Phase 2: LMMSE estimate of every cascaded channel given phase-1 output.
/// The BD reflects the receiver pilot with a constant symbol 1.
pub fn estimate_backscatter<R: Rng + ?Sized>(
    chan: &ChannelRealization,
    direct: &DirectEstimate,
    tc: &TrainingConfig,
    alpha: f64,
    rng: &mut R,
) -> Result<BackscatterEstimate> {
    if !(alpha > 0.0) {
        return Err(Error::domain("cascaded channel is unobservable with zero reflection"));
    }
    let n = chan.antennas_per_ap;
    let pilot = pilot_sequence(tc.tau2);
    let pt = tc.pilot_power;
    let sqrt_pt = pt.sqrt();
    let sqrt_pt_alpha = (pt * alpha).sqrt();
    let noise_std = tc.noise_power.sqrt();
    let (e1, e2) = (tc.e1(), tc.e2());
    let tau2 = tc.tau2 as f64;
    let mut h_hat = Vec::with_capacity(chan.h.len());
    let mut var_h_err = Vec::with_capacity(chan.num_aps());
    for (m, (&b, &eps)) in chan.large_scale.b.iter().zip(&chan.large_scale.eps).enumerate() {
        let vg = direct_error_variance(b, e1);
        let gain = alpha * pt * eps / (alpha * pt * tau2 * eps + pt * tau2 * vg + tc.noise_power);
        for k in m * n..(m + 1) * n {
            let signal = chan.h[k] * sqrt_pt_alpha + chan.g[k] * sqrt_pt;
            let projected = project_received(signal, &pilot, noise_std, rng);
            // remove √P_t ĝ φᴴ, projected onto φ (‖φ‖² = τ₂)
            let cleaned = projected - direct.g_hat[k] * sqrt_pt * tau2;
            h_hat.push(cleaned / sqrt_pt_alpha * gain);
        }
        var_h_err.push(cascaded_error_variance(b, eps, alpha, e1, e2));
    }
    Ok(BackscatterEstimate { h_hat, var_h_err })
}

/// `E = Σ_m P_m [var_g_m + α var_h_m] + σ²`.
pub fn effective_noise(config: &SystemConfig, b: &[f64], eps: &[f64], tc: &TrainingConfig) -> Result<f64> {
    crate::error::check_len(config.num_aps, b.len())?;
    crate::error::check_len(config.num_aps, eps.len())?;
    let alpha = config.reflection_coeff;
    let (e1, e2) = (tc.e1(), tc.e2());
    let err: f64 = config
        .tx_power
        .iter()
        .zip(b.iter().zip(eps))
        .map(|(&p, (&bm, &em))| {
            p * (direct_error_variance(bm, e1) + alpha * cascaded_error_variance(bm, em, alpha, e1, e2))
        })
        .sum();
    Ok(err + config.noise_power)
}

/// Runs both phases and computes `E`.
pub fn estimate<R: Rng + ?Sized>(
    config: &SystemConfig,
    chan: &ChannelRealization,
    tc: &TrainingConfig,
    rng: &mut R,
) -> Result<ChannelEstimate> {
    let direct = estimate_direct(chan, tc, rng);
    let back = estimate_backscatter(chan, &direct, tc, config.reflection_coeff, rng)?;
    let effective_noise = effective_noise(config, &chan.large_scale.b, &chan.large_scale.eps, tc)?;
    Ok(ChannelEstimate {
        g_hat: direct.g_hat,
        h_hat: back.h_hat,
        var_g_err: direct.var_g_err,
        var_h_err: back.var_h_err,
        effective_noise,
    })
}
