use super::{EffectiveProblem, Scaled};
use crate::prelude::*;
use crate::rates::Beamformer;
use crate::socp::{solve_feasibility_with, Feasibility, SolverSettings};
use crate::{Error, Result};

const MAX_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionStep {
    pub mu: f64,
    /// `None` when the solver gave up; counted as infeasible.
    pub verdict: Option<Feasibility>,
    pub slack: f64,
}

impl BisectionStep {
    pub fn is_feasible(&self) -> bool {
        self.verdict == Some(Feasibility::Feasible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionOutcome {
    /// Largest rate threshold found feasible, `R̄_s`.
    pub r_bar: f64,
    /// Strictly feasible beamformer at `r_bar`.
    pub w: Beamformer,
    /// Initial upper end `log₂(1 + (Σ√P_m‖g_m‖)²/N₀)`.
    pub mu_max0: f64,
    pub trace: Vec<BisectionStep>,
}

/// Bisection on the rate threshold `μ`, solving one cone feasibility problem
/// per step, until `μ_max − μ_min ≤ κ₁ μ_min`.
///
/// The upper end starts at the rate `w` would reach with no backscatter
/// interference at all. Steps that are only marginally feasible or where the
/// solver fails count as infeasible, so `R̄_s` errs low.
pub fn max_primary_rate(p: &EffectiveProblem, kappa1: f64, settings: &SolverSettings) -> Result<BisectionOutcome> {
    if !(kappa1 > 0.0) {
        return Err(Error::domain("bisection tolerance must be positive"));
    }
    p.validate()?;
    let bound = p.direct_gain_bound();
    let zero = BisectionOutcome { r_bar: 0.0, w: Beamformer::zeros(p.len()), mu_max0: 0.0, trace: Vec::new() };
    if !(bound > 0.0) {
        return Ok(zero);
    }
    let mu_max0 = (bound * bound / p.noise).ln_1p() / core::f64::consts::LN_2;
    let sc = Scaled::new(p)?;
    let (mut lo, mut hi) = (0.0f64, mu_max0);
    let mut best: Option<Vec<C64>> = None;
    let mut trace = Vec::new();
    for _ in 0..MAX_STEPS {
        if hi - lo <= kappa1 * lo || hi <= 1e-12 * mu_max0 {
            break;
        }
        let mu = 0.5 * (lo + hi);
        let step = match solve_feasibility_with(&sc.program(mu)?, settings) {
            Ok(f) => {
                if f.is_feasible() {
                    let mut w = sc.to_w(&f.x)?;
                    p.normalize_phase(&mut w);
                    best = Some(w);
                }
                BisectionStep { mu, verdict: Some(f.verdict), slack: f.slack }
            }
            Err(Error::Solver { .. }) => BisectionStep { mu, verdict: None, slack: f64::NAN },
            Err(e) => return Err(e),
        };
        if step.is_feasible() {
            lo = mu;
        } else {
            hi = mu;
        }
        trace.push(step);
    }
    match best {
        Some(w) => Ok(BisectionOutcome { r_bar: lo, w: Beamformer(w), mu_max0, trace }),
        None => Ok(BisectionOutcome { mu_max0, trace, ..zero }),
    }
}
