//! Exponential integral on the negative real axis.
//!
//! Only `Ei(x)` for `x < 0` is needed, which equals `-E₁(-x)`. `E₁` is
//! evaluated by its power series up to [`SERIES_LIMIT`] and by the Lentz
//! continued fraction beyond it. The continued fraction returns `eˣ E₁(x)`
//! directly, which is what the ergodic rate needs for large arguments where
//! `eˣ` alone overflows.

// Float methods only; std's inherent ones shadow them in test builds.
#[allow(unused_imports)]
use crate::prelude::*;
use crate::{Error, Result};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments of `E₁` at or below this use the series.
pub const SERIES_LIMIT: f64 = 1.0;

const MAX_TERMS: usize = 500;

/// `E₁(x) = ∫ₓ^∞ e^{-t}/t dt` for `x > 0`.
pub fn e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("E1 requires a finite positive argument"));
    }
    Ok(if x <= SERIES_LIMIT { e1_series(x) } else { e1_scaled_fraction(x) * (-x).exp() })
}

/// `eˣ E₁(x)` for `x > 0`, finite for every finite `x`.
pub fn scaled_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("scaled E1 requires a finite positive argument"));
    }
    Ok(if x <= SERIES_LIMIT { e1_series(x) * x.exp() } else { e1_scaled_fraction(x) })
}

/// `Ei(x) = ∫_{-∞}^{x} eᵘ/u du` for `x < 0`.
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::domain("Ei is only provided on the negative axis"));
    }
    e1(-x).map(|v| -v)
}

fn e1_series(x: f64) -> f64 {
    // -γ - ln x - Σ_{k≥1} (-x)^k / (k k!)
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= -x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

fn e1_scaled_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() <= 1e-16 {
            break;
        }
    }
    h
}
