//! Numerical core for cell-free symbiotic radio.
//!
//! A set of distributed multi-antenna access points (APs) jointly serves one
//! receiver while a passive backscatter device (BD) rides on the same signal.
//! This crate holds everything that is pure computation:
//!
//! - [`channel`]: grid topology, path loss and random channel draws;
//! - [`estimation`]: two-phase uplink training (direct link, then cascaded
//!   backscatter link) and the effective error-plus-noise power;
//! - [`rates`]: primary SINR/rate, ergodic backscatter rate through the
//!   exponential integral, and the imperfect-CSI lower bounds;
//! - [`socp`]: a dense primal-dual interior-point solver for second-order
//!   cone programs plus the complex-to-real embedding;
//! - [`beamforming`]: bisection for the maximum primary rate, the closed-form
//!   MRT optimum, successive convex approximation, and rate-region sweeps.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, Monte-Carlo
//! orchestration and the command line live in the `cfsr-sim` crate.
#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Dense linear algebra reads better with explicit indices.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod beamforming;
pub mod channel;
pub mod error;
pub mod estimation;
pub(crate) mod linalg;
pub mod rates;
pub mod socp;
pub mod special;

pub use error::{Error, Result};

/// Double precision complex number used for every channel and beamformer.
pub type C64 = num_complex::Complex64;

pub(crate) mod prelude {
    pub use crate::C64;
    pub use alloc::vec;
    pub use alloc::vec::Vec;
    pub use num_traits::Float;
}
