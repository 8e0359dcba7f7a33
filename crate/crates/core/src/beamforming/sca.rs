use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{closed_form_mrt, EffectiveProblem, Scaled};
use crate::channel::complex_normal;
use crate::linalg::cnorm_sqr;
use crate::prelude::*;
use crate::rates::Beamformer;
use crate::socp::{solve_feasibility_with, solve_with, SolverSettings};
use crate::{Error, Result};

/// How the first SCA iterate is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitStrategy {
    /// The max-slack point of the feasibility problem at `R_th`.
    Feasibility,
    /// The max-slack point pushed along a random direction, backtracking
    /// until the exact rate and power checks pass.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaOptions {
    /// Stop once `|hᴴw|²` grows by less than this fraction.
    pub kappa2: f64,
    pub max_iter: usize,
    pub init: InitStrategy,
    /// Return the MRT beamformer directly when it already meets `R_th`.
    pub closed_form_shortcut: bool,
    pub solver: SolverSettings,
}

impl Default for ScaOptions {
    fn default() -> Self {
        Self {
            kappa2: 0.005,
            max_iter: 100,
            init: InitStrategy::Feasibility,
            closed_form_shortcut: true,
            solver: SolverSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOutcome {
    pub w: Beamformer,
    /// Secondary (ergodic backscatter) rate of `w`.
    pub r_c: f64,
    /// Primary rate of `w`.
    pub r_s: f64,
    /// `|hᴴw|²/N₀` at the returned point.
    pub objective: f64,
    /// Convex subproblems solved.
    pub iterations: usize,
    /// `|hᴴw^(l)|²/N₀` for the starting point and every accepted iterate,
    /// then the rejected final step if there was one. Non-decreasing up to
    /// that step.
    pub trace: Vec<f64>,
    /// The fractional-increase test fired (as opposed to the iteration cap
    /// or a rejected step).
    pub converged: bool,
    /// The last subproblem returned a worse point, or a stalled solve an
    /// infeasible one, which was discarded.
    pub rejected_step: bool,
    /// Returned by the MRT shortcut without iterating.
    pub closed_form: bool,
}

fn random_direction(p: &EffectiveProblem, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d: Vec<C64> = (0..p.len()).map(|_| complex_normal(&mut rng)).collect();
    for (blk, &pm) in d.chunks_mut(p.antennas).zip(&p.powers) {
        let s = (pm / cnorm_sqr(blk)).sqrt();
        blk.iter_mut().for_each(|x| *x *= s);
    }
    d
}

/// A point satisfying the rate and power constraints at `r_th`.
///
/// For `r_th ≤ 0` the rate constraint is void and the MRT point is returned.
/// Otherwise the feasibility problem must report strict feasibility, else
/// [`Error::Infeasible`].
pub fn sca_initialize(
    p: &EffectiveProblem,
    r_th: f64,
    init: InitStrategy,
    settings: &SolverSettings,
) -> Result<Beamformer> {
    if r_th.is_nan() {
        return Err(Error::domain("rate threshold is NaN"));
    }
    if r_th <= 0.0 {
        return Ok(closed_form_mrt(p)?.w);
    }
    let sc = Scaled::new(p)?;
    let f = solve_feasibility_with(&sc.program(r_th)?, settings)?;
    if !f.is_feasible() {
        return Err(Error::Infeasible { r_th });
    }
    let mut w = sc.to_w(&f.x)?;
    p.clip_power(&mut w);
    p.normalize_phase(&mut w);
    if let InitStrategy::Random { seed } = init {
        let d = random_direction(p, seed);
        let mut t = 1.0;
        for _ in 0..40 {
            let mut cand: Vec<C64> = w.iter().zip(&d).map(|(a, b)| a + b * t).collect();
            p.normalize_phase(&mut cand);
            if p.is_feasible(&cand, r_th, 0.0, 0.0) {
                return Ok(Beamformer(cand));
            }
            t *= 0.5;
        }
    }
    Ok(Beamformer(w))
}

/// Maximizes `|hᴴw|²` subject to the primary rate threshold and the power
/// budgets by successive convex approximation.
///
/// Each step replaces the objective by its tangent plane at the current
/// point, `|hᴴw₀|² + 2 Re{w₀ᴴ h hᴴ (w − w₀)}`, a global under-estimator, so
/// the sequence of objective values cannot decrease.
pub fn sca_maximize_secondary(p: &EffectiveProblem, r_th: f64, opts: &ScaOptions) -> Result<ScaOutcome> {
    if r_th.is_nan() {
        return Err(Error::domain("rate threshold is NaN"));
    }
    if opts.closed_form_shortcut {
        let mrt = closed_form_mrt(p)?;
        if r_th <= mrt.r_s {
            let obj = mrt.objective / p.noise;
            return Ok(ScaOutcome {
                r_c: mrt.r_c,
                r_s: mrt.r_s,
                objective: obj,
                iterations: 0,
                trace: vec![obj],
                converged: true,
                rejected_step: false,
                closed_form: true,
                w: mrt.w,
            });
        }
    }
    let w0 = sca_initialize(p, r_th, opts.init, &opts.solver)?;
    sca_from(p, r_th, w0, opts)
}

/// SCA iterations from a caller-supplied point, which must satisfy the power
/// budgets and reach `r_th` (checked exactly, else [`Error::Infeasible`]).
pub fn sca_from(p: &EffectiveProblem, r_th: f64, w0: Beamformer, opts: &ScaOptions) -> Result<ScaOutcome> {
    if !(opts.kappa2 > 0.0) {
        return Err(Error::domain("SCA tolerance must be positive"));
    }
    crate::error::check_len(p.len(), w0.len())?;
    let mut w = w0.0;
    p.normalize_phase(&mut w);
    if !p.is_feasible(&w, r_th, 1e-9, 1e-9) {
        return Err(Error::Infeasible { r_th });
    }
    let sc = Scaled::new(p)?;
    let base = sc.program(r_th.max(0.0))?;
    let mut f = p.objective(&w) / p.noise;
    let mut trace = vec![f];
    let (mut iterations, mut converged, mut rejected) = (0, false, false);
    while iterations < opts.max_iter {
        let u = sc.to_x(&w)?;
        let c = sc.tangent_objective(&u);
        if c.iter().all(|&v| v == 0.0) {
            // hᴴw = 0: the tangent plane is flat, nothing to improve on.
            converged = true;
            break;
        }
        let prog = base.clone().with_objective(c);
        let sol = solve_with(&prog, &opts.solver)?.into_optimal()?;
        iterations += 1;
        let mut next = sc.to_w(&sol.x)?;
        p.clip_power(&mut next);
        p.normalize_phase(&mut next);
        if !sol.is_optimal() && !p.is_feasible(&next, r_th, 1e-9, 1e-6) {
            // a stalled solve whose point misses the rate threshold
            rejected = true;
            break;
        }
        let f_next = p.objective(&next) / p.noise;
        if f_next < f {
            // a step that does not improve is solver noise at the tangent
            // optimum, unless it loses more than the solver tolerance
            if f_next < f - 1e-9 * (1.0 + f) {
                trace.push(f_next);
                rejected = true;
            } else {
                converged = true;
            }
            break;
        }
        trace.push(f_next);
        let inc = if f > 0.0 { (f_next - f) / f } else { f64::INFINITY };
        w = next;
        f = f_next;
        if inc < opts.kappa2 {
            converged = true;
            break;
        }
    }
    Ok(ScaOutcome {
        r_c: p.secondary_rate(&w)?,
        r_s: p.primary_rate(&w),
        objective: f,
        iterations,
        trace,
        converged,
        rejected_step: rejected,
        closed_form: false,
        w: Beamformer(w),
    })
}
