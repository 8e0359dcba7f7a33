//! Flat TOML configuration.
//!
//! Every key is optional; missing keys take the default scenario (16 APs with
//! 4 antennas, 750 m square, 20 dBm over −110 dBm). Powers are in watts and
//! distances in meters. Scenario keys carry the names of the
//! [`SystemConfig`] fields; the remaining keys parametrize the experiments.
//!
//! ```toml
//! num_aps = 16
//! tx_power = 0.1            # or one entry per AP
//! pilot_total = 50
//! pilot_split = 0.5
//! mc_trials = 500
//! region_l1 = [0.1, 0.5, 0.9]
//! ```

use std::path::Path;

use cfsr_core::beamforming::InitStrategy;
use cfsr_core::channel::{ApLayout, Point2, SystemConfig};
use serde::Deserialize;

use crate::{Result, SimError};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PowerSpec {
    Uniform(f64),
    PerAp(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Feasibility,
    Random,
}

/// The file as written; `None` means "use the default".
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    num_aps: Option<usize>,
    antennas_per_ap: Option<usize>,
    tx_power: Option<PowerSpec>,
    pilot_power: Option<f64>,
    noise_power: Option<f64>,
    reflection_coeff: Option<f64>,
    pathloss_exponent: Option<f64>,
    wavelength: Option<f64>,
    cascade_scale: Option<f64>,
    area_side: Option<f64>,
    ap_positions: Option<Vec<[f64; 2]>>,
    bd_position: Option<[f64; 2]>,
    rx_position: Option<[f64; 2]>,
    pilot_total: Option<usize>,
    pilot_split: Option<f64>,
    bisect_tol: Option<f64>,
    sca_tol: Option<f64>,
    rate_step: Option<f64>,
    mc_trials: Option<usize>,
    rng_seed: Option<u64>,

    fig2_l1: Option<Vec<f64>>,
    fig2_tau_totals: Option<Vec<usize>>,
    sca_r_th: Option<f64>,
    sca_trials: Option<usize>,
    sca_tau_totals: Option<Vec<usize>>,
    sca_l1: Option<Vec<f64>>,
    sca_init: Option<InitKind>,
    region_tau_totals: Option<Vec<usize>>,
    region_l1: Option<Vec<f64>>,
    region_r_th_max: Option<f64>,
    solver_tol: Option<f64>,
    solver_max_iter: Option<usize>,
}

/// Sweep parameters of the experiments, on top of the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentParams {
    /// Direct-link pilot fractions for the error-power sweep.
    pub fig2_l1: Vec<f64>,
    pub fig2_tau_totals: Vec<usize>,
    /// Primary threshold of the convergence traces, bps/Hz.
    pub sca_r_th: f64,
    pub sca_trials: usize,
    pub sca_tau_totals: Vec<usize>,
    pub sca_l1: Vec<f64>,
    pub sca_init: InitKind,
    pub region_tau_totals: Vec<usize>,
    pub region_l1: Vec<f64>,
    /// Largest threshold of the common `R_th` grid `0, step, …`.
    pub region_r_th_max: f64,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            fig2_l1: (1..=20).map(|k| k as f64 / 20.0).collect(),
            fig2_tau_totals: vec![50, 100],
            sca_r_th: 12.0,
            sca_trials: 10,
            sca_tau_totals: vec![50, 100],
            sca_l1: vec![0.1, 0.5, 0.9],
            sca_init: InitKind::Feasibility,
            region_tau_totals: vec![50, 100],
            region_l1: vec![0.1, 0.5, 0.9],
            region_r_th_max: 20.0,
            solver_tol: 1e-8,
            solver_max_iter: 100,
        }
    }
}

impl ExperimentParams {
    pub fn init_strategy(&self, seed: u64) -> InitStrategy {
        match self.sca_init {
            InitKind::Feasibility => InitStrategy::Feasibility,
            InitKind::Random => InitStrategy::Random { seed },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(SimError::Config(m.to_string()));
        if self.fig2_l1.is_empty() || self.fig2_tau_totals.is_empty() {
            return fail("fig2 sweep grids must be non-empty");
        }
        if self.fig2_l1.iter().chain(&self.sca_l1).chain(&self.region_l1).any(|&l| !(l > 0.0 && l <= 1.0)) {
            return fail("pilot fractions must lie in (0, 1]");
        }
        let taus = self.fig2_tau_totals.iter().chain(&self.sca_tau_totals).chain(&self.region_tau_totals);
        if taus.clone().any(|&t| t < 2) {
            return fail("pilot totals must be at least 2");
        }
        if self.sca_trials == 0 {
            return fail("sca_trials must be at least 1");
        }
        if !(self.region_r_th_max >= 0.0) || !self.sca_r_th.is_finite() {
            return fail("rate thresholds must be finite and non-negative");
        }
        if !(self.solver_tol > 0.0) || self.solver_max_iter == 0 {
            return fail("solver_tol and solver_max_iter must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimConfig {
    pub system: SystemConfig,
    pub params: ExperimentParams,
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)?;
        raw.resolve()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.params.validate()
    }
}

impl RawConfig {
    fn resolve(self) -> Result<SimConfig> {
        let d = SystemConfig::default();
        let num_aps = self.num_aps.unwrap_or(d.num_aps);
        let tx_power = match self.tx_power {
            None => vec![d.tx_power[0]; num_aps],
            Some(PowerSpec::Uniform(p)) => vec![p; num_aps],
            Some(PowerSpec::PerAp(v)) => v,
        };
        let point = |p: Option<[f64; 2]>, fallback: Point2| p.map_or(fallback, |[x, y]| Point2::new(x, y));
        let system = SystemConfig {
            num_aps,
            antennas_per_ap: self.antennas_per_ap.unwrap_or(d.antennas_per_ap),
            tx_power,
            pilot_power: self.pilot_power.unwrap_or(d.pilot_power),
            noise_power: self.noise_power.unwrap_or(d.noise_power),
            reflection_coeff: self.reflection_coeff.unwrap_or(d.reflection_coeff),
            pathloss_exponent: self.pathloss_exponent.unwrap_or(d.pathloss_exponent),
            wavelength: self.wavelength.unwrap_or(d.wavelength),
            cascade_scale: self.cascade_scale.unwrap_or(d.cascade_scale),
            area_side: self.area_side.unwrap_or(d.area_side),
            ap_layout: match self.ap_positions {
                None => ApLayout::Grid,
                Some(v) => ApLayout::Explicit(v.into_iter().map(|[x, y]| Point2::new(x, y)).collect()),
            },
            bd_position: point(self.bd_position, d.bd_position),
            rx_position: point(self.rx_position, d.rx_position),
            pilot_total: self.pilot_total.unwrap_or(d.pilot_total),
            pilot_split: self.pilot_split.unwrap_or(d.pilot_split),
            bisect_tol: self.bisect_tol.unwrap_or(d.bisect_tol),
            sca_tol: self.sca_tol.unwrap_or(d.sca_tol),
            rate_step: self.rate_step.unwrap_or(d.rate_step),
            mc_trials: self.mc_trials.unwrap_or(d.mc_trials),
            rng_seed: self.rng_seed.unwrap_or(d.rng_seed),
        };
        let p = ExperimentParams::default();
        let params = ExperimentParams {
            fig2_l1: self.fig2_l1.unwrap_or(p.fig2_l1),
            fig2_tau_totals: self.fig2_tau_totals.unwrap_or(p.fig2_tau_totals),
            sca_r_th: self.sca_r_th.unwrap_or(p.sca_r_th),
            sca_trials: self.sca_trials.unwrap_or(p.sca_trials),
            sca_tau_totals: self.sca_tau_totals.unwrap_or(p.sca_tau_totals),
            sca_l1: self.sca_l1.unwrap_or(p.sca_l1),
            sca_init: self.sca_init.unwrap_or(p.sca_init),
            region_tau_totals: self.region_tau_totals.unwrap_or(p.region_tau_totals),
            region_l1: self.region_l1.unwrap_or(p.region_l1),
            region_r_th_max: self.region_r_th_max.unwrap_or(p.region_r_th_max),
            solver_tol: self.solver_tol.unwrap_or(p.solver_tol),
            solver_max_iter: self.solver_max_iter.unwrap_or(p.solver_max_iter),
        };
        let cfg = SimConfig { system, params };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(SimConfig::from_toml_str("").unwrap(), SimConfig::default());
    }

    #[test]
    fn scalar_power_is_broadcast() {
        let cfg = SimConfig::from_toml_str("num_aps = 4\ntx_power = 0.5\narea_side = 100.0").unwrap();
        assert_eq!(cfg.system.tx_power, vec![0.5; 4]);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(SimConfig::from_toml_str("num_apz = 4").is_err());
        assert!(SimConfig::from_toml_str("pilot_split = 1.5").is_err());
        assert!(SimConfig::from_toml_str("num_aps = 4\ntx_power = [1.0, 2.0]").is_err());
        assert!(SimConfig::from_toml_str("sca_init = \"sometimes\"").is_err());
    }
}
