//! CSV files and the plain-text summary.
//!
//! | file | columns |
//! |---|---|
//! | `fig2.csv` | `tau_total,l1,tau1,tau2,e_over_noise` |
//! | `fig34.csv` | `trial,csi_mode,tau_total,l1,iteration,objective,r_c` |
//! | `fig56.csv` | `csi_mode,tau_total,l1,r_th,mean_r_c,stderr_r_c,feasible,infeasible,closed_form` |
//! | `topology.csv` | `ap,x,y,dist_bd,dist_rx,b,zeta,eps` |
//!
//! `tau_total = 0` with an empty `l1` marks perfect CSI. Floats are written
//! in shortest round-trip form, so equal runs give byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::convergence::ConvergenceResult;
use crate::error_power::ErrorPowerSweep;
use crate::region::RegionResult;
use crate::topology::ApRow;
use crate::{Result, SimConfig, SimError};

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_fig2(path: &Path, sweep: &ErrorPowerSweep) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["tau_total", "l1", "tau1", "tau2", "e_over_noise"])?;
    for r in &sweep.rows {
        w.write_record([
            r.tau_total.to_string(),
            num(r.l1),
            r.tau1.to_string(),
            r.tau2.to_string(),
            num(r.e_over_noise),
        ])?;
    }
    w.flush().map_err(|e| SimError::io(path, e))?;
    Ok(())
}

pub fn write_fig34(path: &Path, res: &ConvergenceResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["trial", "csi_mode", "tau_total", "l1", "iteration", "objective", "r_c"])?;
    for r in &res.rows {
        w.write_record([
            r.trial.to_string(),
            r.mode.label().to_string(),
            r.mode.tau_total().to_string(),
            num(r.mode.l1()),
            r.iteration.to_string(),
            num(r.objective),
            num(r.r_c),
        ])?;
    }
    w.flush().map_err(|e| SimError::io(path, e))?;
    Ok(())
}

pub fn write_fig56(path: &Path, res: &RegionResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "csi_mode",
        "tau_total",
        "l1",
        "r_th",
        "mean_r_c",
        "stderr_r_c",
        "feasible",
        "infeasible",
        "closed_form",
    ])?;
    for c in &res.curves {
        for p in &c.points {
            w.write_record([
                c.mode.label().to_string(),
                c.mode.tau_total().to_string(),
                num(c.mode.l1()),
                num(p.r_th),
                num(p.mean_r_c),
                num(p.stderr_r_c),
                p.feasible.to_string(),
                p.infeasible.to_string(),
                p.closed_form.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| SimError::io(path, e))?;
    Ok(())
}

pub fn write_topology(path: &Path, rows: &[ApRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["ap", "x", "y", "dist_bd", "dist_rx", "b", "zeta", "eps"])?;
    for r in rows {
        w.write_record([
            r.ap.to_string(),
            num(r.x),
            num(r.y),
            num(r.dist_bd),
            num(r.dist_rx),
            num(r.b),
            num(r.zeta),
            num(r.eps),
        ])?;
    }
    w.flush().map_err(|e| SimError::io(path, e))?;
    Ok(())
}

/// Everything a run produced, for the summary.
#[derive(Debug, Default)]
pub struct RunReport<'a> {
    pub error_power: Option<&'a ErrorPowerSweep>,
    pub convergence: Option<&'a ConvergenceResult>,
    pub region: Option<(&'a RegionResult, usize)>,
    pub threads: usize,
    /// Wall-clock seconds per experiment.
    pub timings: Vec<(&'static str, f64)>,
}

pub fn summary(cfg: &SimConfig, seed: u64, report: &RunReport<'_>) -> String {
    let s = &cfg.system;
    let p = &cfg.params;
    let mut out = String::new();
    let _ = writeln!(out, "seed = {seed}");
    let _ = writeln!(out, "threads = {}", report.threads);
    let _ = writeln!(out, "kappa1 (bisection) = {}", s.bisect_tol);
    let _ = writeln!(out, "kappa2 (sca) = {}", s.sca_tol);
    let _ = writeln!(out, "sca initializer = {:?}", p.sca_init);
    let _ = writeln!(out, "solver tol = {}, max iterations = {}", p.solver_tol, p.solver_max_iter);
    let _ = writeln!(
        out,
        "scenario: {} APs x {} antennas, area {} m, alpha = {}, P/noise = {:.1} dB",
        s.num_aps,
        s.antennas_per_ap,
        s.area_side,
        s.reflection_coeff,
        10.0 * (s.tx_power[0] / s.noise_power).log10()
    );
    if let Some(fig2) = report.error_power {
        let _ = writeln!(out, "\n[error power]");
        for m in &fig2.minima {
            let _ = writeln!(out, "tau_total = {}: min E/noise = {:.6} at l1 = {}", m.tau_total, m.e_over_noise, m.l1);
        }
    }
    if let Some(conv) = report.convergence {
        let _ = writeln!(out, "\n[sca convergence] R_th = {}", conv.r_th);
        let runs = conv.runs.len();
        let sca_runs: Vec<_> = conv.runs.iter().filter(|r| !r.closed_form).collect();
        let mean_it = sca_runs.iter().map(|r| r.iterations as f64).sum::<f64>() / sca_runs.len().max(1) as f64;
        let max_it = sca_runs.iter().map(|r| r.iterations).max().unwrap_or(0);
        let _ = writeln!(out, "runs = {runs} ({} closed form)", runs - sca_runs.len());
        let _ = writeln!(out, "mean iterations = {mean_it:.2}, max = {max_it}");
        let _ = writeln!(out, "converged = {}", sca_runs.iter().filter(|r| r.converged).count());
        let _ = writeln!(out, "non-monotone traces = {}", conv.runs.iter().filter(|r| !r.monotone).count());
        let _ = writeln!(out, "rejected steps = {}", conv.runs.iter().filter(|r| r.rejected_step).count());
        let _ = writeln!(out, "redraws = {}, abandoned trials = {}", conv.redraws, conv.abandoned_trials);
        let _ = writeln!(out, "solver failures = {}", conv.solver_failures);
    }
    if let Some((reg, trials)) = report.region {
        let _ = writeln!(
            out,
            "\n[rate region] trials = {trials}, R_th grid 0..={} step {}",
            p.region_r_th_max, s.rate_step
        );
        let _ = writeln!(
            out,
            "{:<24} {:>6} {:>5} {:>8} {:>8} {:>8} {:>10} {:>10} {:>9} {:>9}",
            "mode", "trials", "fail", "R^_s", "R^_c", "R-_s", "r_c(R-_s)", "max", "sca it", "bisect"
        );
        for c in &reg.curves {
            let _ = writeln!(
                out,
                "{:<24} {:>6} {:>5} {:>8.3} {:>8.3} {:>8.3} {:>10.4} {:>10.4} {:>9.2} {:>9.2}",
                c.mode.to_string(),
                c.trials,
                c.solver_failures,
                c.r_hat_s.mean(),
                c.r_hat_c.mean(),
                c.r_bar_s.mean(),
                c.boundary_r_c.mean(),
                c.boundary_r_c.max(),
                c.sca_iters.mean(),
                c.bisection_steps.mean()
            );
        }
        let _ =
            writeln!(out, "points with R_th above a draw's R-_s count as r_c = 0 (see fig56.csv infeasible column)");
    }
    if !report.timings.is_empty() {
        let _ = writeln!(out, "\n[timing]");
        for (name, secs) in &report.timings {
            let _ = writeln!(out, "{name}: {secs:.2} s");
        }
    }
    out
}
