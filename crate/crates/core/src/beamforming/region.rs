use super::{
    closed_form_mrt, max_primary_rate, sca_maximize_secondary, BisectionOutcome, EffectiveProblem, ScaOptions,
};
use crate::prelude::*;
use crate::rates::Beamformer;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `R_th ≤ R̂_s`: MRT towards the cascaded channel is optimal.
    ClosedForm,
    Sca,
    /// `R_th > R̄_s`: no beamformer reaches the threshold.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRegionPoint {
    pub r_th: f64,
    /// Secondary rate reached, zero when infeasible.
    pub r_c: f64,
    /// Primary rate reached by `w`.
    pub r_s: f64,
    pub w: Beamformer,
    pub branch: Branch,
    pub sca_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionOptions {
    pub rate_step: f64,
    /// Bisection tolerance for `R̄_s`.
    pub kappa1: f64,
    pub sca: ScaOptions,
}

impl Default for RegionOptions {
    fn default() -> Self {
        Self { rate_step: 1.0, kappa1: 0.005, sca: ScaOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRegion {
    /// Primary rate of the MRT beamformer.
    pub r_hat_s: f64,
    /// Secondary rate of the MRT beamformer, the largest achievable.
    pub r_hat_c: f64,
    /// Largest feasible primary threshold (never below `r_hat_s`).
    pub r_bar_s: f64,
    pub bisection: BisectionOutcome,
    pub points: Vec<RateRegionPoint>,
    /// The SCA point at `R_th = R̄_s`.
    pub boundary: RateRegionPoint,
}

struct Context<'a> {
    p: &'a EffectiveProblem,
    opts: RegionOptions,
    r_hat_s: f64,
    r_hat_c: f64,
    mrt_w: Beamformer,
    r_bar_s: f64,
    bisection: BisectionOutcome,
}

impl<'a> Context<'a> {
    fn new(p: &'a EffectiveProblem, opts: &RegionOptions) -> Result<Self> {
        let mrt = closed_form_mrt(p)?;
        let bisection = max_primary_rate(p, opts.kappa1, &opts.sca.solver)?;
        // MRT itself certifies R̂_s; bisection may land a hair below it.
        let r_bar_s = bisection.r_bar.max(mrt.r_s);
        Ok(Self { p, opts: *opts, r_hat_s: mrt.r_s, r_hat_c: mrt.r_c, mrt_w: mrt.w, r_bar_s, bisection })
    }

    fn point(&self, r_th: f64) -> Result<RateRegionPoint> {
        if r_th <= self.r_hat_s {
            return Ok(RateRegionPoint {
                r_th,
                r_c: self.r_hat_c,
                r_s: self.r_hat_s,
                w: self.mrt_w.clone(),
                branch: Branch::ClosedForm,
                sca_iters: 0,
            });
        }
        if r_th > self.r_bar_s {
            return Ok(RateRegionPoint {
                r_th,
                r_c: 0.0,
                r_s: 0.0,
                w: Beamformer::zeros(self.p.len()),
                branch: Branch::Infeasible,
                sca_iters: 0,
            });
        }
        let out = sca_maximize_secondary(self.p, r_th, &self.opts.sca)?;
        Ok(RateRegionPoint {
            r_th,
            r_c: out.r_c,
            r_s: out.r_s,
            w: out.w,
            branch: Branch::Sca,
            sca_iters: out.iterations,
        })
    }

    fn boundary(&self) -> Result<RateRegionPoint> {
        if self.r_bar_s <= self.r_hat_s {
            return self.point(self.r_hat_s);
        }
        let mut opts = self.opts.sca;
        opts.closed_form_shortcut = false;
        let out = sca_maximize_secondary(self.p, self.r_bar_s, &opts)?;
        Ok(RateRegionPoint {
            r_th: self.r_bar_s,
            r_c: out.r_c,
            r_s: out.r_s,
            w: out.w,
            branch: Branch::Sca,
            sca_iters: out.iterations,
        })
    }

    fn finish(self, points: Vec<RateRegionPoint>, boundary: RateRegionPoint) -> RateRegion {
        RateRegion {
            r_hat_s: self.r_hat_s,
            r_hat_c: self.r_hat_c,
            r_bar_s: self.r_bar_s,
            bisection: self.bisection,
            points,
            boundary,
        }
    }
}

/// Region traced from the MRT corner: points at `R_th = 0` and `R̂_s`
/// (closed form), then `R̂_s + k·step` below `R̄_s`, then `R̄_s` itself.
pub fn rate_region(p: &EffectiveProblem, opts: &RegionOptions) -> Result<RateRegion> {
    if !(opts.rate_step > 0.0) {
        return Err(Error::domain("rate step must be positive"));
    }
    let ctx = Context::new(p, opts)?;
    let mut points = vec![ctx.point(0.0)?, ctx.point(ctx.r_hat_s)?];
    let mut k = 1.0;
    loop {
        let r = ctx.r_hat_s + k * opts.rate_step;
        if r >= ctx.r_bar_s {
            break;
        }
        points.push(ctx.point(r)?);
        k += 1.0;
    }
    let boundary = ctx.boundary()?;
    if ctx.r_bar_s > ctx.r_hat_s {
        points.push(boundary.clone());
    }
    Ok(ctx.finish(points, boundary))
}

/// Region sampled at caller-chosen thresholds, so that regions of different
/// realizations can be averaged point by point. Thresholds above `R̄_s` give
/// [`Branch::Infeasible`] points with zero secondary rate.
pub fn rate_region_on_grid(p: &EffectiveProblem, grid: &[f64], opts: &RegionOptions) -> Result<RateRegion> {
    let ctx = Context::new(p, opts)?;
    let points = grid.iter().map(|&r| ctx.point(r)).collect::<Result<Vec<_>>>()?;
    let boundary = ctx.boundary()?;
    Ok(ctx.finish(points, boundary))
}
