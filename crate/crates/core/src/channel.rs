//! Scenario parameters, AP grid geometry and random channel draws.
//!
//! Every link follows `gain = β₀ d^{-γ}` with `β₀ = (λ/4π)²`. Small-scale
//! fading is i.i.d. circularly-symmetric complex Gaussian. The BD→receiver
//! coefficient `q` is drawn with variance `cascade_scale`, so the cascaded
//! channel `h_m = q f_m` has large-scale gain `ε_m = cascade_scale · ζ_m`.

use core::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::prelude::*;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// How AP positions are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum ApLayout {
    /// `√M × √M` grid whose outermost rows and columns sit on the border of
    /// the square area. For 16 APs in 750 m the coordinates are
    /// `{-375, -125, 125, 375}`.
    Grid,
    /// Positions supplied by the caller, one per AP.
    Explicit(Vec<Point2>),
}

/// All scenario parameters. Powers are in watts, distances in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub num_aps: usize,
    pub antennas_per_ap: usize,
    /// Per-AP transmit power budget `P_m`, length `num_aps`.
    pub tx_power: Vec<f64>,
    pub pilot_power: f64,
    pub noise_power: f64,
    /// Power reflection coefficient `α` of the BD.
    pub reflection_coeff: f64,
    pub pathloss_exponent: f64,
    pub wavelength: f64,
    /// `ε_m / ζ_m`, i.e. the variance of the BD→receiver coefficient.
    pub cascade_scale: f64,
    pub area_side: f64,
    pub ap_layout: ApLayout,
    pub bd_position: Point2,
    pub rx_position: Point2,
    pub pilot_total: usize,
    /// Fraction `l₁` of the pilot budget given to the direct-link phase.
    pub pilot_split: f64,
    /// Bisection termination threshold `κ₁` (relative).
    pub bisect_tol: f64,
    /// SCA termination threshold `κ₂` (fractional increase).
    pub sca_tol: f64,
    pub rate_step: f64,
    pub mc_trials: usize,
    pub rng_seed: u64,
}

impl Default for SystemConfig {
    /// 16 APs with 4 antennas in a 750 m square, BD at the origin, receiver
    /// at (5, 0), 20 dBm transmit and pilot power over −110 dBm noise.
    fn default() -> Self {
        let num_aps = 16;
        Self {
            num_aps,
            antennas_per_ap: 4,
            tx_power: vec![0.1; num_aps],
            pilot_power: 0.1,
            noise_power: 1e-14,
            reflection_coeff: 1.0,
            pathloss_exponent: 2.7,
            wavelength: 0.0857,
            cascade_scale: 1e-3,
            area_side: 750.0,
            ap_layout: ApLayout::Grid,
            bd_position: Point2::new(0.0, 0.0),
            rx_position: Point2::new(5.0, 0.0),
            pilot_total: 50,
            pilot_split: 0.5,
            bisect_tol: 0.005,
            sca_tol: 0.005,
            rate_step: 1.0,
            mc_trials: 500,
            rng_seed: 1,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_aps == 0 || self.antennas_per_ap == 0 {
            return Err(Error::config("num_aps and antennas_per_ap must be at least 1"));
        }
        if self.tx_power.len() != self.num_aps {
            return Err(Error::config(alloc::format!(
                "tx_power has {} entries for {} APs",
                self.tx_power.len(),
                self.num_aps
            )));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !self.tx_power.iter().all(|&p| positive(p)) {
            return Err(Error::config("every tx_power entry must be positive"));
        }
        for (name, v) in [
            ("pilot_power", self.pilot_power),
            ("noise_power", self.noise_power),
            ("wavelength", self.wavelength),
            ("cascade_scale", self.cascade_scale),
            ("area_side", self.area_side),
            ("bisect_tol", self.bisect_tol),
            ("sca_tol", self.sca_tol),
            ("rate_step", self.rate_step),
        ] {
            if !positive(v) {
                return Err(Error::config(alloc::format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.reflection_coeff) {
            return Err(Error::config("reflection_coeff must lie in [0, 1]"));
        }
        if !self.pathloss_exponent.is_finite() {
            return Err(Error::config("pathloss_exponent must be finite"));
        }
        if !(self.pilot_split > 0.0 && self.pilot_split < 1.0) {
            return Err(Error::config("pilot_split must lie strictly between 0 and 1"));
        }
        if self.pilot_total < 2 {
            return Err(Error::config("pilot_total must be at least 2"));
        }
        if self.mc_trials == 0 {
            return Err(Error::config("mc_trials must be at least 1"));
        }
        if let ApLayout::Explicit(pos) = &self.ap_layout {
            if pos.len() != self.num_aps {
                return Err(Error::config("explicit AP layout must list one position per AP"));
            }
        }
        Ok(())
    }

    /// `(τ₁, τ₂)` for the configured split.
    pub fn pilot_lengths(&self) -> (usize, usize) {
        split_pilots(self.pilot_total, self.pilot_split)
    }

    /// Reference gain `β₀ = (λ / 4π)²`.
    pub fn reference_gain(&self) -> f64 {
        reference_gain(self.wavelength)
    }
}

/// `τ₁ = round(l₁ τ)` with ties rounding up, clamped so that both phases keep
/// at least one symbol.
pub fn split_pilots(total: usize, l1: f64) -> (usize, usize) {
    debug_assert!(total >= 2);
    let raw = (l1 * total as f64 + 0.5).floor();
    let tau1 = (raw.max(1.0) as usize).min(total - 1);
    (tau1, total - tau1)
}

pub fn reference_gain(wavelength: f64) -> f64 {
    let r = wavelength / (4.0 * PI);
    r * r
}

/// `β₀ d^{-γ}`.
pub fn path_loss(distance: f64, exponent: f64, reference_gain: f64) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::domain("path loss needs a positive distance"));
    }
    Ok(reference_gain * distance.powf(-exponent))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub ap_positions: Vec<Point2>,
    pub bd_position: Point2,
    pub rx_position: Point2,
    pub dist_ap_bd: Vec<f64>,
    pub dist_ap_rx: Vec<f64>,
}

pub fn build_topology(config: &SystemConfig) -> Result<Topology> {
    let ap_positions = match &config.ap_layout {
        ApLayout::Explicit(p) => {
            if p.len() != config.num_aps {
                return Err(Error::config("explicit AP layout must list one position per AP"));
            }
            p.clone()
        }
        ApLayout::Grid => grid_positions(config.num_aps, config.area_side)?,
    };
    let dist_ap_bd: Vec<f64> = ap_positions.iter().map(|p| p.distance(&config.bd_position)).collect();
    let dist_ap_rx: Vec<f64> = ap_positions.iter().map(|p| p.distance(&config.rx_position)).collect();
    if let Some(m) = dist_ap_bd.iter().chain(&dist_ap_rx).position(|&d| !(d > 0.0)) {
        return Err(Error::config(alloc::format!("AP {} coincides with the BD or the receiver", m % config.num_aps)));
    }
    Ok(Topology {
        ap_positions,
        bd_position: config.bd_position,
        rx_position: config.rx_position,
        dist_ap_bd,
        dist_ap_rx,
    })
}

fn grid_positions(num_aps: usize, side: f64) -> Result<Vec<Point2>> {
    let k = (num_aps as f64).sqrt().round() as usize;
    if k * k != num_aps {
        return Err(Error::config(alloc::format!("grid layout needs a perfect-square AP count, got {num_aps}")));
    }
    let coord = |i: usize| {
        if k == 1 {
            0.0
        } else {
            -side / 2.0 + side * i as f64 / (k - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(num_aps);
    for ix in 0..k {
        for iy in 0..k {
            out.push(Point2::new(coord(ix), coord(iy)));
        }
    }
    Ok(out)
}

/// Large-scale gains per AP.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScale {
    /// AP→receiver, `b_m`.
    pub b: Vec<f64>,
    /// AP→BD, `ζ_m`.
    pub zeta: Vec<f64>,
    /// Cascaded AP→BD→receiver, `ε_m`.
    pub eps: Vec<f64>,
}

pub fn large_scale(config: &SystemConfig, topo: &Topology) -> Result<LargeScale> {
    let beta0 = config.reference_gain();
    let gamma = config.pathloss_exponent;
    let b = topo.dist_ap_rx.iter().map(|&d| path_loss(d, gamma, beta0)).collect::<Result<Vec<_>>>()?;
    let zeta = topo.dist_ap_bd.iter().map(|&d| path_loss(d, gamma, beta0)).collect::<Result<Vec<_>>>()?;
    let eps = zeta.iter().map(|z| config.cascade_scale * z).collect();
    Ok(LargeScale { b, zeta, eps })
}

/// One draw of every channel in the system. Vectors are the per-AP vectors
/// concatenated, AP-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub antennas_per_ap: usize,
    pub g: Vec<C64>,
    pub f: Vec<C64>,
    pub q: C64,
    /// `h = q f`.
    pub h: Vec<C64>,
    pub large_scale: LargeScale,
}

impl ChannelRealization {
    pub fn num_aps(&self) -> usize {
        self.large_scale.b.len()
    }
}

/// Zero-mean, unit-variance circularly-symmetric complex Gaussian sample.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

pub fn realize<R: Rng + ?Sized>(config: &SystemConfig, topo: &Topology, rng: &mut R) -> Result<ChannelRealization> {
    let ls = large_scale(config, topo)?;
    Ok(realize_with(&ls, config.antennas_per_ap, config.cascade_scale, rng))
}

/// Draws channels for given large-scale gains. `ls.eps` is not consulted;
/// the cascade follows from `cascade_scale`.
pub fn realize_with<R: Rng + ?Sized>(
    ls: &LargeScale,
    antennas: usize,
    cascade_scale: f64,
    rng: &mut R,
) -> ChannelRealization {
    let m = ls.b.len();
    let mut g = Vec::with_capacity(m * antennas);
    let mut f = Vec::with_capacity(m * antennas);
    for ap in 0..m {
        let sb = ls.b[ap].sqrt();
        for _ in 0..antennas {
            g.push(complex_normal(rng) * sb);
        }
    }
    for ap in 0..m {
        let sz = ls.zeta[ap].sqrt();
        for _ in 0..antennas {
            f.push(complex_normal(rng) * sz);
        }
    }
    let q = complex_normal(rng) * cascade_scale.sqrt();
    let h = f.iter().map(|fi| q * fi).collect();
    ChannelRealization {
        antennas_per_ap: antennas,
        g,
        f,
        q,
        h,
        large_scale: LargeScale {
            b: ls.b.clone(),
            zeta: ls.zeta.clone(),
            eps: ls.zeta.iter().map(|z| cascade_scale * z).collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn paper_grid_coordinates() {
        let topo = build_topology(&SystemConfig::default()).unwrap();
        let set = [-375.0, -125.0, 125.0, 375.0];
        assert_eq!(topo.ap_positions.len(), 16);
        for p in &topo.ap_positions {
            assert!(set.contains(&p.x) && set.contains(&p.y), "{p:?}");
        }
        for x in set {
            for y in set {
                assert!(topo.ap_positions.contains(&Point2::new(x, y)));
            }
        }
    }

    #[test]
    fn single_ap_on_top_of_bd_is_rejected() {
        let cfg = SystemConfig { num_aps: 1, tx_power: vec![0.1], ..SystemConfig::default() };
        assert!(matches!(build_topology(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn non_square_grid_is_rejected() {
        let cfg = SystemConfig { num_aps: 3, tx_power: vec![0.1; 3], ..SystemConfig::default() };
        assert!(matches!(build_topology(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn four_ap_grid_and_euclidean_distance() {
        let cfg = SystemConfig { num_aps: 4, tx_power: vec![0.1; 4], area_side: 100.0, ..SystemConfig::default() };
        let topo = build_topology(&cfg).unwrap();
        for p in &topo.ap_positions {
            assert_eq!(p.x.abs(), 50.0);
            assert_eq!(p.y.abs(), 50.0);
        }
        let explicit = SystemConfig { ap_layout: ApLayout::Explicit(vec![Point2::new(25.0, 25.0); 4]), ..cfg };
        let topo = build_topology(&explicit).unwrap();
        assert!((topo.dist_ap_bd[0] - 35.355_339_059_327_38).abs() < 1e-12);
    }

    #[test]
    fn path_loss_values() {
        let beta0 = reference_gain(0.0857);
        assert!((beta0 - 4.650_952_625e-5).abs() < 1e-13);
        assert_eq!(path_loss(1.0, 2.7, beta0).unwrap(), beta0);
        assert!((path_loss(10.0, 2.0, 1.0).unwrap() - 0.01).abs() < 1e-16);
        assert!(path_loss(0.0, 2.0, 1.0).is_err());
        assert!(path_loss(-1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn split_rounds_half_up_and_clamps() {
        assert_eq!(split_pilots(50, 0.5), (25, 25));
        assert_eq!(split_pilots(50, 0.05), (3, 47)); // 2.5 rounds up
        assert_eq!(split_pilots(50, 0.999), (49, 1));
        assert_eq!(split_pilots(50, 0.001), (1, 49));
        assert_eq!(split_pilots(2, 0.5), (1, 1));
    }

    #[test]
    fn cascade_gain_follows_scale() {
        let ls = LargeScale { b: vec![1e-9], zeta: vec![2e-9], eps: vec![0.0] };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let chan = realize_with(&ls, 2, 0.001, &mut rng);
        assert!((chan.large_scale.eps[0] - 2e-12).abs() < 1e-24);
    }

    #[test]
    fn realization_is_deterministic_and_cascade_exact() {
        let cfg = SystemConfig::default();
        let topo = build_topology(&cfg).unwrap();
        let a = realize(&cfg, &topo, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = realize(&cfg, &topo, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        for (h, f) in a.h.iter().zip(&a.f) {
            assert_eq!(*h, a.q * f);
        }
        assert!(a.large_scale.eps.iter().all(|&e| e > 0.0));
    }

    #[test]
    fn validation_catches_bad_fields() {
        let ok = SystemConfig::default();
        assert!(ok.validate().is_ok());
        let bad = [
            SystemConfig { reflection_coeff: 1.5, ..ok.clone() },
            SystemConfig { pilot_split: 1.0, ..ok.clone() },
            SystemConfig { pilot_total: 1, ..ok.clone() },
            SystemConfig { tx_power: vec![0.1; 3], ..ok.clone() },
            SystemConfig { noise_power: 0.0, ..ok.clone() },
            SystemConfig { sca_tol: -1.0, ..ok.clone() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
