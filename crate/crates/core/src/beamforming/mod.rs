//! Beamforming for the primary/secondary rate trade-off.
//!
//! Every problem here has the same shape whether the channels are exact or
//! estimated:
//!
//! ```text
//! maximize    |hᴴw|²
//! subject to  log₂(1 + |gᴴw|² / (α|hᴴw|² + N₀)) ≥ R_th
//!             ‖w_m‖² ≤ P_m                         for every AP m
//! ```
//!
//! With perfect CSI `g`, `h = q f` and `N₀ = σ²`; with estimated channels
//! `ĝ`, `ĥ` and `N₀ = E`. [`EffectiveProblem`] captures both.
//!
//! Because a common phase rotation of `w` changes nothing, `gᴴw` may be taken
//! real and non-negative. The rate constraint then becomes the cone
//! `√(2^R_th − 1) ‖(1, √α hᴴw/√N₀)‖ ≤ Re(gᴴw)/√N₀`, and the power limits are
//! cones as well, so fixing `R_th` leaves a convex feasibility problem.
//!
//! - [`max_primary_rate`]: bisection on `R_th` for the largest feasible
//!   primary rate `R̄_s`;
//! - [`closed_form_mrt`]: per-AP maximum ratio transmission towards `h`,
//!   optimal whenever it meets the rate constraint;
//! - [`sca_maximize_secondary`]: successive convex approximation of the
//!   objective by its tangent plane;
//! - [`rate_region`]: the sweep of `R_th` tracing the achievable region.

mod bisection;
mod region;
mod sca;

use crate::channel::{ChannelRealization, SystemConfig};
use crate::error::check_len;
use crate::estimation::ChannelEstimate;
use crate::linalg::{cdot, cnorm_sqr, dot};
use crate::prelude::*;
use crate::rates::{primary_rate, secondary_ergodic_rate, Beamformer};
use crate::socp::{ComplexEmbedding, ConeProgram, SocConstraint};
use crate::{Error, Result};

pub use bisection::{max_primary_rate, BisectionOutcome, BisectionStep};
pub use region::{rate_region, rate_region_on_grid, Branch, RateRegion, RateRegionPoint, RegionOptions};
pub use sca::{sca_from, sca_initialize, sca_maximize_secondary, InitStrategy, ScaOptions, ScaOutcome};

/// Channels, interference weight, noise and budgets seen by the optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveProblem {
    pub antennas: usize,
    /// Direct link `g` or its estimate.
    pub g: Vec<C64>,
    /// Cascaded link `q f` or its estimate, without the `√α` factor.
    pub h: Vec<C64>,
    pub alpha: f64,
    /// `σ²` with perfect CSI, the effective noise `E` otherwise.
    pub noise: f64,
    /// Per-AP power budgets `P_m`.
    pub powers: Vec<f64>,
}

impl EffectiveProblem {
    pub fn new(antennas: usize, g: Vec<C64>, h: Vec<C64>, alpha: f64, noise: f64, powers: Vec<f64>) -> Result<Self> {
        let p = Self { antennas, g, h, alpha, noise, powers };
        p.validate()?;
        Ok(p)
    }

    pub fn perfect(chan: &ChannelRealization, config: &SystemConfig) -> Result<Self> {
        Self::new(
            chan.antennas_per_ap,
            chan.g.clone(),
            chan.h.clone(),
            config.reflection_coeff,
            config.noise_power,
            config.tx_power.clone(),
        )
    }

    pub fn imperfect(est: &ChannelEstimate, config: &SystemConfig) -> Result<Self> {
        Self::new(
            config.antennas_per_ap,
            est.g_hat.clone(),
            est.h_hat.clone(),
            config.reflection_coeff,
            est.effective_noise,
            config.tx_power.clone(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 || self.powers.is_empty() {
            return Err(Error::config("need at least one AP and one antenna"));
        }
        let len = self.antennas * self.powers.len();
        check_len(len, self.g.len())?;
        check_len(len, self.h.len())?;
        if !(self.noise > 0.0) || !self.noise.is_finite() {
            return Err(Error::domain("noise power must be positive"));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::domain("reflection coefficient must be non-negative"));
        }
        if self.powers.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::domain("power budgets must be positive"));
        }
        let finite = |v: &[C64]| v.iter().all(|c| c.re.is_finite() && c.im.is_finite());
        if !finite(&self.g) || !finite(&self.h) {
            return Err(Error::domain("channels must be finite"));
        }
        Ok(())
    }

    pub fn num_aps(&self) -> usize {
        self.powers.len()
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    /// `|hᴴw|²`, the quantity the secondary rate increases with.
    pub fn objective(&self, w: &[C64]) -> f64 {
        cdot(&self.h, w).norm_sqr()
    }

    pub fn sinr(&self, w: &[C64]) -> f64 {
        cdot(&self.g, w).norm_sqr() / (self.alpha * self.objective(w) + self.noise)
    }

    /// Primary rate, exact with perfect CSI and the lower bound otherwise.
    pub fn primary_rate(&self, w: &[C64]) -> f64 {
        primary_rate(self.sinr(w))
    }

    pub fn backscatter_snr(&self, w: &[C64]) -> f64 {
        self.alpha * self.objective(w) / self.noise
    }

    pub fn secondary_rate(&self, w: &[C64]) -> Result<f64> {
        secondary_ergodic_rate(self.backscatter_snr(w))
    }

    /// `Σ_m √P_m ‖g_m‖`, the largest `|gᴴw|` any feasible `w` reaches.
    pub fn direct_gain_bound(&self) -> f64 {
        self.g.chunks(self.antennas).zip(&self.powers).map(|(g, p)| p.sqrt() * cnorm_sqr(g).sqrt()).sum()
    }

    /// `Σ_m √P_m ‖h_m‖`.
    pub fn cascaded_gain_bound(&self) -> f64 {
        self.h.chunks(self.antennas).zip(&self.powers).map(|(h, p)| p.sqrt() * cnorm_sqr(h).sqrt()).sum()
    }

    /// Whether `w` meets every power budget within `rel_tol` and reaches
    /// primary rate `r_th` within `rate_tol`.
    pub fn is_feasible(&self, w: &[C64], r_th: f64, rel_tol: f64, rate_tol: f64) -> bool {
        Beamformer(w.to_vec()).respects_power(self.antennas, &self.powers, rel_tol)
            && (r_th <= 0.0 || self.primary_rate(w) >= r_th - rate_tol)
    }

    /// Rotates `w` so that `gᴴw` is real and non-negative.
    pub fn normalize_phase(&self, w: &mut [C64]) {
        let v = cdot(&self.g, w);
        if v.norm() > 0.0 {
            let r = C64::from_polar(1.0, -v.arg());
            w.iter_mut().for_each(|x| *x *= r);
        }
    }

    /// Scales down any AP block exceeding its budget.
    pub fn clip_power(&self, w: &mut [C64]) {
        for (blk, &p) in w.chunks_mut(self.antennas).zip(&self.powers) {
            let n2 = cnorm_sqr(blk);
            if n2 > p {
                let s = (p / n2).sqrt();
                blk.iter_mut().for_each(|x| *x *= s);
            }
        }
    }
}

/// Closed-form result of per-AP maximum ratio transmission towards `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct MrtSolution {
    pub w: Beamformer,
    /// Primary rate reached by the MRT beamformer, `R̂_s`.
    pub r_s: f64,
    /// Backscatter SNR `β̂_c = α(Σ√P_m‖h_m‖)²/N₀`.
    pub beta_c: f64,
    /// Secondary rate `R̂_c`.
    pub r_c: f64,
    /// `|hᴴw|² = (Σ√P_m‖h_m‖)²`.
    pub objective: f64,
}

/// `w_m = √P_m h_m/‖h_m‖`, with APs whose `h_m` vanishes left silent, then
/// rotated so that `gᴴw ≥ 0`.
pub fn closed_form_mrt(p: &EffectiveProblem) -> Result<MrtSolution> {
    p.validate()?;
    let mut w = vec![C64::new(0.0, 0.0); p.len()];
    for ((wm, hm), &pm) in w.chunks_mut(p.antennas).zip(p.h.chunks(p.antennas)).zip(&p.powers) {
        let nh = cnorm_sqr(hm).sqrt();
        if nh > 0.0 {
            let s = pm.sqrt() / nh;
            for (x, h) in wm.iter_mut().zip(hm) {
                *x = h * s;
            }
        }
    }
    p.normalize_phase(&mut w);
    let bound = p.cascaded_gain_bound();
    let objective = bound * bound;
    let beta_c = p.alpha * objective / p.noise;
    Ok(MrtSolution {
        r_s: p.primary_rate(&w),
        beta_c,
        r_c: secondary_ergodic_rate(beta_c)?,
        objective,
        w: Beamformer(w),
    })
}

/// The problem rewritten in `u = w/√P_ref` with channels scaled by
/// `√(P_ref/N₀)`, so that the noise is one and the largest budget is one.
pub(crate) struct Scaled {
    emb: ComplexEmbedding,
    p_ref: f64,
    alpha: f64,
    g_re: Vec<f64>,
    g_im: Vec<f64>,
    h_re: Vec<f64>,
    h_im: Vec<f64>,
    rel_power: Vec<f64>,
    /// Upper bound of `Re(ḡᴴu)`; divides the rate cone to keep it `O(1)`.
    g_bound: f64,
}

impl Scaled {
    pub fn new(p: &EffectiveProblem) -> Result<Self> {
        p.validate()?;
        let emb = ComplexEmbedding::new(p.num_aps(), p.antennas)?;
        let p_ref = p.powers.iter().copied().fold(0.0, f64::max);
        let k = (p_ref / p.noise).sqrt();
        let gs: Vec<C64> = p.g.iter().map(|v| v * k).collect();
        let hs: Vec<C64> = p.h.iter().map(|v| v * k).collect();
        let (g_re, g_im) = emb.functional_rows(&gs)?;
        let (h_re, h_im) = emb.functional_rows(&hs)?;
        let rel_power: Vec<f64> = p.powers.iter().map(|q| q / p_ref).collect();
        let g_bound = p.direct_gain_bound() / p.noise.sqrt() / p_ref.sqrt();
        Ok(Self { emb, p_ref, alpha: p.alpha, g_re, g_im, h_re, h_im, rel_power, g_bound })
    }

    pub fn dim(&self) -> usize {
        self.emb.dim()
    }

    /// Power cones, the phase equality and, for `mu > 0`, the rate cone.
    pub fn program(&self, mu: f64) -> Result<ConeProgram> {
        let n = self.dim();
        let mut prog = ConeProgram::new(n);
        if mu > 0.0 && self.g_bound > 0.0 {
            let a = (mu.exp2() - 1.0).sqrt() / self.g_bound;
            let rows = if self.alpha > 0.0 { 3 } else { 1 };
            let mut am = vec![0.0; rows * n];
            let mut b = vec![0.0; rows];
            b[0] = a;
            if rows == 3 {
                let s = a * self.alpha.sqrt();
                for j in 0..n {
                    am[n + j] = s * self.h_re[j];
                    am[2 * n + j] = s * self.h_im[j];
                }
            }
            let d: Vec<f64> = self.g_re.iter().map(|v| v / self.g_bound).collect();
            prog.push_soc(SocConstraint::new(am, b, d, 0.0));
        }
        for (m, &rp) in self.rel_power.iter().enumerate() {
            prog.push_soc(self.emb.power_cone(m, rp)?);
        }
        prog.push_eq(crate::socp::EqConstraint { a: self.g_im.clone(), r: 0.0 });
        Ok(prog)
    }

    /// Linear objective `2 Re{(h̄ᴴu₀)* h̄ᴴu}` of the tangent plane at `u₀`.
    pub fn tangent_objective(&self, u0: &[f64]) -> Vec<f64> {
        let (tr, ti) = (dot(&self.h_re, u0), dot(&self.h_im, u0));
        self.h_re.iter().zip(&self.h_im).map(|(r, i)| 2.0 * (tr * r + ti * i)).collect()
    }

    pub fn to_w(&self, x: &[f64]) -> Result<Vec<C64>> {
        let s = self.p_ref.sqrt();
        Ok(self.emb.unembed(x)?.into_iter().map(|v| v * s).collect())
    }

    pub fn to_x(&self, w: &[C64]) -> Result<Vec<f64>> {
        let s = 1.0 / self.p_ref.sqrt();
        let mut x = self.emb.embed(w)?;
        x.iter_mut().for_each(|v| *v *= s);
        Ok(x)
    }
}
