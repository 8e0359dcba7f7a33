//! Monte-Carlo experiments on top of `cfsr-core`: the error-power sweep over
//! the pilot split, SCA convergence traces, averaged rate regions, and the
//! CSV and summary files the `simulate` binary writes.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

pub mod config;
pub mod convergence;
pub mod error_power;
pub mod output;
pub mod region;
pub mod stats;
pub mod topology;

pub use config::{ExperimentParams, InitKind, SimConfig};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] cfsr_core::Error),
}

impl SimError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;

/// What a random stream is used for; keeps the streams of one trial apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Channel,
    /// Pilot noise for CSI configuration `config` of channel draw `draw`.
    Training {
        config: u32,
        draw: u32,
    },
    /// Channel redraw number `k` (convergence traces).
    Redraw(u32),
}

/// Independent generator for `(seed, trial, purpose)`. The same triple gives
/// the same stream whatever the thread count or evaluation order.
pub fn trial_rng(seed: u64, trial: u64, purpose: Purpose) -> ChaCha8Rng {
    let sub = match purpose {
        Purpose::Channel => 0u64,
        Purpose::Training { config, draw } => 1 + ((draw as u64) << 16) + config as u64,
        Purpose::Redraw(k) => (1 << 31) + k as u64,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << 32) | sub);
    rng
}

/// Channel knowledge used for beamforming.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CsiMode {
    Perfect,
    /// Two-phase training with `tau_total` pilots, a fraction `l1` of them
    /// in the direct-link phase.
    Estimated {
        tau_total: usize,
        l1: f64,
    },
}

impl CsiMode {
    pub fn label(&self) -> &'static str {
        match self {
            CsiMode::Perfect => "perfect",
            CsiMode::Estimated { .. } => "estimated",
        }
    }

    /// `tau_total` column value, 0 for perfect CSI.
    pub fn tau_total(&self) -> usize {
        match self {
            CsiMode::Perfect => 0,
            CsiMode::Estimated { tau_total, .. } => *tau_total,
        }
    }

    /// `l1` column value, NaN (written empty) for perfect CSI.
    pub fn l1(&self) -> f64 {
        match self {
            CsiMode::Perfect => f64::NAN,
            CsiMode::Estimated { l1, .. } => *l1,
        }
    }
}

impl std::fmt::Display for CsiMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CsiMode::Perfect => write!(f, "perfect CSI"),
            CsiMode::Estimated { tau_total, l1 } => write!(f, "tau={tau_total} l1={l1}"),
        }
    }
}

/// Perfect CSI first, then every `(tau_total, l1)` pair in the given order.
pub fn csi_modes(tau_totals: &[usize], l1s: &[f64]) -> Vec<CsiMode> {
    let mut out = vec![CsiMode::Perfect];
    for &tau_total in tau_totals {
        out.extend(l1s.iter().map(|&l1| CsiMode::Estimated { tau_total, l1 }));
    }
    out
}

/// Beamforming problem for one draw under the given CSI mode; `rng` feeds
/// the pilot noise when channels are estimated.
pub fn effective_problem(
    system: &cfsr_core::channel::SystemConfig,
    chan: &cfsr_core::channel::ChannelRealization,
    mode: CsiMode,
    rng: &mut ChaCha8Rng,
) -> Result<cfsr_core::beamforming::EffectiveProblem> {
    use cfsr_core::beamforming::EffectiveProblem;
    use cfsr_core::estimation::{estimate, TrainingConfig};
    match mode {
        CsiMode::Perfect => Ok(EffectiveProblem::perfect(chan, system)?),
        CsiMode::Estimated { tau_total, l1 } => {
            let (tau1, tau2) = cfsr_core::channel::split_pilots(tau_total, l1);
            let tc = TrainingConfig::new(tau1, tau2, system.pilot_power, system.noise_power)?;
            let est = estimate(system, chan, &tc, rng)?;
            Ok(EffectiveProblem::imperfect(&est, system)?)
        }
    }
}
