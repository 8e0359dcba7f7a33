//! Estimation-error-plus-noise power `E/σ²` against the pilot split.

use cfsr_core::channel::{build_topology, large_scale, split_pilots, SystemConfig};
use cfsr_core::estimation::{effective_noise, TrainingConfig};

use crate::{ExperimentParams, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPowerRow {
    /// 0 for the perfect-CSI reference.
    pub tau_total: usize,
    pub l1: f64,
    pub tau1: usize,
    pub tau2: usize,
    pub e_over_noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPowerMinimum {
    pub tau_total: usize,
    pub l1: f64,
    pub e_over_noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPowerSweep {
    /// One curve per pilot total in sweep order, then the perfect-CSI line.
    pub rows: Vec<ErrorPowerRow>,
    pub minima: Vec<ErrorPowerMinimum>,
}

impl ErrorPowerSweep {
    /// `E/σ²` along `l1` for one pilot total.
    pub fn curve(&self, tau_total: usize) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.tau_total == tau_total).map(|r| (r.l1, r.e_over_noise)).collect()
    }
}

/// Deterministic: uses only the large-scale gains of the configured layout.
pub fn run_error_power_sweep(system: &SystemConfig, params: &ExperimentParams) -> Result<ErrorPowerSweep> {
    let topo = build_topology(system)?;
    let ls = large_scale(system, &topo)?;
    let mut rows = Vec::new();
    let mut minima = Vec::new();
    for &tau_total in &params.fig2_tau_totals {
        let mut best: Option<ErrorPowerMinimum> = None;
        for &l1 in &params.fig2_l1 {
            let (tau1, tau2) = split_pilots(tau_total, l1);
            let tc = TrainingConfig::new(tau1, tau2, system.pilot_power, system.noise_power)?;
            let e = effective_noise(system, &ls.b, &ls.eps, &tc)? / system.noise_power;
            rows.push(ErrorPowerRow { tau_total, l1, tau1, tau2, e_over_noise: e });
            if best.as_ref().is_none_or(|b| e < b.e_over_noise) {
                best = Some(ErrorPowerMinimum { tau_total, l1, e_over_noise: e });
            }
        }
        minima.extend(best);
    }
    for &l1 in &params.fig2_l1 {
        rows.push(ErrorPowerRow { tau_total: 0, l1, tau1: 0, tau2: 0, e_over_noise: 1.0 });
    }
    Ok(ErrorPowerSweep { rows, minima })
}
