//! Rate regions averaged over channel draws on a common `R_th` grid.

use cfsr_core::beamforming::{rate_region_on_grid, Branch, RegionOptions, ScaOptions};
use cfsr_core::channel::{build_topology, realize, SystemConfig, Topology};
use cfsr_core::socp::SolverSettings;
use cfsr_core::Error;
use rayon::prelude::*;

use crate::stats::MeanAcc;
use crate::{csi_modes, effective_problem, trial_rng, CsiMode, ExperimentParams, Purpose, Result};

/// One mode's region for one draw, reduced to what is averaged.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRegion {
    pub r_c: Vec<f64>,
    pub branch: Vec<Branch>,
    pub r_hat_s: f64,
    pub r_hat_c: f64,
    pub r_bar_s: f64,
    /// Secondary rate of the SCA point at `R_th = R̄_s`.
    pub boundary_r_c: f64,
    pub sca_iters: usize,
    pub sca_points: usize,
    pub bisection_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub r_th: f64,
    pub mean_r_c: f64,
    pub stderr_r_c: f64,
    /// Draws with `R_th ≤ R̄_s`.
    pub feasible: usize,
    /// Draws with `R_th > R̄_s`; they enter the mean with `r_c = 0`.
    pub infeasible: usize,
    /// Feasible draws served by the MRT closed form.
    pub closed_form: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionCurve {
    pub mode: CsiMode,
    pub points: Vec<CurvePoint>,
    /// Draws that completed; the means are over these.
    pub trials: usize,
    /// Draws dropped because the cone solver failed.
    pub solver_failures: usize,
    pub r_hat_s: MeanAcc,
    pub r_hat_c: MeanAcc,
    pub r_bar_s: MeanAcc,
    pub boundary_r_c: MeanAcc,
    /// SCA iterations per SCA point.
    pub sca_iters: MeanAcc,
    pub bisection_steps: MeanAcc,
}

impl RegionCurve {
    fn new(mode: CsiMode, grid: &[f64]) -> Self {
        Self {
            mode,
            points: grid
                .iter()
                .map(|&r_th| CurvePoint {
                    r_th,
                    mean_r_c: 0.0,
                    stderr_r_c: 0.0,
                    feasible: 0,
                    infeasible: 0,
                    closed_form: 0,
                })
                .collect(),
            trials: 0,
            solver_failures: 0,
            r_hat_s: MeanAcc::default(),
            r_hat_c: MeanAcc::default(),
            r_bar_s: MeanAcc::default(),
            boundary_r_c: MeanAcc::default(),
            sca_iters: MeanAcc::default(),
            bisection_steps: MeanAcc::default(),
        }
    }

    pub fn mean_r_c(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean_r_c).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionResult {
    pub grid: Vec<f64>,
    pub curves: Vec<RegionCurve>,
    /// `per_trial[t][k]`: draw `t` under `curves[k].mode`, `None` on solver
    /// failure.
    pub per_trial: Vec<Vec<Option<TrialRegion>>>,
}

impl RegionResult {
    pub fn curve(&self, mode: CsiMode) -> Option<&RegionCurve> {
        self.curves.iter().find(|c| c.mode == mode)
    }
}

/// `0, step, 2·step, …` up to `max` inclusive.
pub fn threshold_grid(max: f64, step: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}

fn region_options(system: &SystemConfig, params: &ExperimentParams, seed: u64) -> RegionOptions {
    RegionOptions {
        rate_step: system.rate_step,
        kappa1: system.bisect_tol,
        sca: ScaOptions {
            kappa2: system.sca_tol,
            init: params.init_strategy(seed),
            solver: SolverSettings { tol: params.solver_tol, max_iter: params.solver_max_iter },
            ..ScaOptions::default()
        },
    }
}

fn run_trial(
    system: &SystemConfig,
    topo: &Topology,
    params: &ExperimentParams,
    modes: &[CsiMode],
    grid: &[f64],
    seed: u64,
    trial: usize,
) -> Result<Vec<Option<TrialRegion>>> {
    let t = trial as u64;
    let chan = realize(system, topo, &mut trial_rng(seed, t, Purpose::Channel))?;
    let opts = region_options(system, params, seed ^ t);
    let mut out = Vec::with_capacity(modes.len());
    for (i, &mode) in modes.iter().enumerate() {
        let mut rng = trial_rng(seed, t, Purpose::Training { config: i as u32, draw: 0 });
        let p = effective_problem(system, &chan, mode, &mut rng)?;
        let reg = match rate_region_on_grid(&p, grid, &opts) {
            Ok(r) => r,
            Err(Error::Solver { .. }) => {
                out.push(None);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let sca: Vec<_> = reg.points.iter().filter(|p| p.branch == Branch::Sca).collect();
        out.push(Some(TrialRegion {
            r_c: reg.points.iter().map(|p| p.r_c).collect(),
            branch: reg.points.iter().map(|p| p.branch).collect(),
            r_hat_s: reg.r_hat_s,
            r_hat_c: reg.r_hat_c,
            r_bar_s: reg.r_bar_s,
            boundary_r_c: reg.boundary.r_c,
            sca_iters: sca.iter().map(|p| p.sca_iters).sum(),
            sca_points: sca.len(),
            bisection_steps: reg.bisection.trace.len(),
        }));
    }
    Ok(out)
}

/// Averages the region of every CSI mode over `trials` draws. Each draw is
/// shared by all modes; estimated modes add their own pilot noise.
pub fn run_rate_region(
    system: &SystemConfig,
    params: &ExperimentParams,
    seed: u64,
    trials: usize,
) -> Result<RegionResult> {
    let topo = build_topology(system)?;
    let modes = csi_modes(&params.region_tau_totals, &params.region_l1);
    let grid = threshold_grid(params.region_r_th_max, system.rate_step);
    let per_trial: Vec<Vec<Option<TrialRegion>>> = (0..trials)
        .into_par_iter()
        .map(|trial| run_trial(system, &topo, params, &modes, &grid, seed, trial))
        .collect::<Result<_>>()?;
    let mut curves: Vec<RegionCurve> = modes.iter().map(|&m| RegionCurve::new(m, &grid)).collect();
    let mut accs: Vec<Vec<MeanAcc>> = vec![vec![MeanAcc::default(); grid.len()]; modes.len()];
    for trial in &per_trial {
        for ((curve, acc), rec) in curves.iter_mut().zip(accs.iter_mut()).zip(trial) {
            let Some(rec) = rec else {
                curve.solver_failures += 1;
                continue;
            };
            curve.trials += 1;
            for ((pt, a), (&r_c, &branch)) in
                curve.points.iter_mut().zip(acc.iter_mut()).zip(rec.r_c.iter().zip(&rec.branch))
            {
                a.add(r_c);
                match branch {
                    Branch::Infeasible => pt.infeasible += 1,
                    Branch::ClosedForm => {
                        pt.feasible += 1;
                        pt.closed_form += 1;
                    }
                    Branch::Sca => pt.feasible += 1,
                }
            }
            curve.r_hat_s.add(rec.r_hat_s);
            curve.r_hat_c.add(rec.r_hat_c);
            curve.r_bar_s.add(rec.r_bar_s);
            curve.boundary_r_c.add(rec.boundary_r_c);
            if rec.sca_points > 0 {
                curve.sca_iters.add(rec.sca_iters as f64 / rec.sca_points as f64);
            }
            curve.bisection_steps.add(rec.bisection_steps as f64);
        }
    }
    for (curve, acc) in curves.iter_mut().zip(&accs) {
        for (pt, a) in curve.points.iter_mut().zip(acc) {
            pt.mean_r_c = a.mean();
            pt.stderr_r_c = a.stderr();
        }
    }
    Ok(RegionResult { grid, curves, per_trial })
}
