//! SCA convergence traces at a fixed primary threshold.

use cfsr_core::beamforming::{sca_maximize_secondary, ScaOptions};
use cfsr_core::channel::{build_topology, realize, SystemConfig};
use cfsr_core::rates::secondary_ergodic_rate;
use cfsr_core::socp::SolverSettings;
use cfsr_core::Error;
use rayon::prelude::*;

use crate::{csi_modes, effective_problem, trial_rng, CsiMode, ExperimentParams, Purpose, Result};

/// Redraws allowed per trial before the trial is given up.
pub const MAX_REDRAWS: u32 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub trial: usize,
    pub mode: CsiMode,
    /// 0 is the starting point.
    pub iteration: usize,
    /// `|hᴴw|²` over the effective noise.
    pub objective: f64,
    /// Secondary rate at this iterate, bps/Hz.
    pub r_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub trial: usize,
    pub mode: CsiMode,
    pub iterations: usize,
    pub converged: bool,
    pub rejected_step: bool,
    pub closed_form: bool,
    pub final_r_c: f64,
    /// Every iterate at least the previous one, up to `1e-9·(1 + F)`.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceResult {
    pub r_th: f64,
    pub rows: Vec<TraceRow>,
    pub runs: Vec<RunSummary>,
    /// Channel draws discarded because some mode could not reach `r_th`.
    pub redraws: usize,
    /// Trials abandoned after [`MAX_REDRAWS`] redraws.
    pub abandoned_trials: usize,
    /// Runs that ended in a solver error.
    pub solver_failures: usize,
}

struct TrialOutcome {
    rows: Vec<TraceRow>,
    runs: Vec<RunSummary>,
    redraws: usize,
    abandoned: bool,
    failures: usize,
}

fn run_trial(
    system: &SystemConfig,
    topo: &cfsr_core::channel::Topology,
    params: &ExperimentParams,
    modes: &[CsiMode],
    seed: u64,
    trial: usize,
) -> Result<TrialOutcome> {
    let opts = ScaOptions {
        kappa2: system.sca_tol,
        init: params.init_strategy(seed ^ trial as u64),
        solver: SolverSettings { tol: params.solver_tol, max_iter: params.solver_max_iter },
        ..ScaOptions::default()
    };
    let t = trial as u64;
    'draw: for draw in 0..=MAX_REDRAWS {
        let purpose = if draw == 0 { Purpose::Channel } else { Purpose::Redraw(draw) };
        let chan = realize(system, topo, &mut trial_rng(seed, t, purpose))?;
        let mut out =
            TrialOutcome { rows: Vec::new(), runs: Vec::new(), redraws: draw as usize, abandoned: false, failures: 0 };
        for (i, &mode) in modes.iter().enumerate() {
            let mut rng = trial_rng(seed, t, Purpose::Training { config: i as u32, draw });
            let p = effective_problem(system, &chan, mode, &mut rng)?;
            let sca = match sca_maximize_secondary(&p, params.sca_r_th, &opts) {
                Ok(s) => s,
                Err(Error::Infeasible { .. }) => continue 'draw,
                Err(Error::Solver { .. }) => {
                    out.failures += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            for (iteration, &f) in sca.trace.iter().enumerate() {
                let r_c = secondary_ergodic_rate(p.alpha * f)?;
                out.rows.push(TraceRow { trial, mode, iteration, objective: f, r_c });
            }
            let monotone = sca.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9 * (1.0 + w[0]));
            out.runs.push(RunSummary {
                trial,
                mode,
                iterations: sca.iterations,
                converged: sca.converged,
                rejected_step: sca.rejected_step,
                closed_form: sca.closed_form,
                final_r_c: sca.r_c,
                monotone,
            });
        }
        return Ok(out);
    }
    Ok(TrialOutcome {
        rows: Vec::new(),
        runs: Vec::new(),
        redraws: MAX_REDRAWS as usize + 1,
        abandoned: true,
        failures: 0,
    })
}

/// Traces for perfect CSI and every `(tau_total, l1)` pair, all on the same
/// channel draw per trial. A draw on which any mode cannot reach the
/// threshold is replaced by a fresh one and counted.
pub fn run_sca_convergence(system: &SystemConfig, params: &ExperimentParams, seed: u64) -> Result<ConvergenceResult> {
    let topo = build_topology(system)?;
    let modes = csi_modes(&params.sca_tau_totals, &params.sca_l1);
    let outcomes: Vec<TrialOutcome> = (0..params.sca_trials)
        .into_par_iter()
        .map(|trial| run_trial(system, &topo, params, &modes, seed, trial))
        .collect::<Result<_>>()?;
    let mut res = ConvergenceResult {
        r_th: params.sca_r_th,
        rows: Vec::new(),
        runs: Vec::new(),
        redraws: 0,
        abandoned_trials: 0,
        solver_failures: 0,
    };
    for o in outcomes {
        res.rows.extend(o.rows);
        res.runs.extend(o.runs);
        res.redraws += o.redraws;
        res.abandoned_trials += o.abandoned as usize;
        res.solver_failures += o.failures;
    }
    Ok(res)
}
