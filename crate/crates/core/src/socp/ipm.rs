//! Homogeneous self-dual interior-point method for
//!
//! ```text
//! minimize cᵀx   subject to   G x + s = h,   s ∈ Q₁ × … × Q_p
//! ```
//!
//! The iterate `(x, s, z, τ, κ)` follows the central path of the embedding
//!
//! ```text
//! Gᵀz + cτ = 0,   s + Gx − hτ = 0,   κ + cᵀx + hᵀz = 0,   s∘z = 0,   τκ = 0.
//! ```
//!
//! Each Newton system is reduced with the Nesterov–Todd scaling `W` to
//! `(Ĝᵀ Ĝ) dx = r` with `Ĝ = W⁻¹ G`, factored by a dense Cholesky with a small
//! diagonal shift and polished by iterative refinement.

use super::cone::{self, NtScaling};
use crate::linalg::{axpy, dot, norm2, Cholesky};
use crate::prelude::*;

/// One cone's rows of `G`, restricted to the variables it touches and stored
/// column-major (`dim` entries per supported variable).
pub(crate) struct Block {
    pub offset: usize,
    pub dim: usize,
    pub support: Vec<usize>,
    pub g: Vec<f64>,
}

pub(crate) struct Problem {
    pub n: usize,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
    pub blocks: Vec<Block>,
}

impl Problem {
    fn m(&self) -> usize {
        self.h.len()
    }

    fn g_mul(&self, x: &[f64], out: &mut [f64]) {
        for b in &self.blocks {
            let o = &mut out[b.offset..b.offset + b.dim];
            o.fill(0.0);
            for (j, &col) in b.support.iter().enumerate() {
                if x[col] != 0.0 {
                    axpy(x[col], &b.g[j * b.dim..(j + 1) * b.dim], o);
                }
            }
        }
    }

    fn gt_mul(&self, z: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for b in &self.blocks {
            let zb = &z[b.offset..b.offset + b.dim];
            for (j, &col) in b.support.iter().enumerate() {
                out[col] += dot(&b.g[j * b.dim..(j + 1) * b.dim], zb);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Status {
    Optimal,
    /// Stalled with every residual within `√tol`.
    Inaccurate,
    PrimalInfeasible,
    DualInfeasible,
    MaxIter,
    NumericalFailure,
}

pub(crate) struct Outcome {
    pub status: Status,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub iterations: usize,
    pub pres: f64,
    pub dres: f64,
    pub gap: f64,
}

const STEP: f64 = 0.99;
const MIN_STEP: f64 = 1e-12;
const REFINE_STEPS: usize = 10;

/// Reduced Newton system for one scaling.
struct Kkt<'a> {
    p: &'a Problem,
    scal: Option<Vec<NtScaling>>,
    ghat: Vec<Vec<f64>>,
    chol: Cholesky,
}

impl<'a> Kkt<'a> {
    fn new(p: &'a Problem, scal: Option<Vec<NtScaling>>) -> Option<Self> {
        let n = p.n;
        let mut ghat = Vec::with_capacity(p.blocks.len());
        for (i, b) in p.blocks.iter().enumerate() {
            let mut gh = b.g.clone();
            if let Some(sc) = &scal {
                for (src, dst) in b.g.chunks_exact(b.dim).zip(gh.chunks_exact_mut(b.dim)) {
                    sc[i].apply_inv(src, dst);
                }
            }
            ghat.push(gh);
        }
        let mut h = vec![0.0; n * n];
        for (b, gh) in p.blocks.iter().zip(&ghat) {
            let cols: Vec<&[f64]> = gh.chunks_exact(b.dim).collect();
            for (a, ca) in cols.iter().enumerate() {
                let ra = b.support[a];
                for (bb, cb) in cols[..=a].iter().enumerate() {
                    let rb = b.support[bb];
                    let v = dot(ca, cb);
                    h[ra * n + rb] += v;
                    if ra != rb {
                        h[rb * n + ra] += v;
                    }
                }
            }
        }
        let max_diag = (0..n).map(|i| h[i * n + i]).fold(0.0, f64::max);
        let mut delta = 1e-13 * max_diag.max(1e-300) + 1e-300;
        let mut reg = h.clone();
        for _ in 0..10 {
            for i in 0..n {
                reg[i * n + i] = h[i * n + i] + delta;
            }
            if let Ok(chol) = Cholesky::factor(&reg, n) {
                return Some(Self { p, scal, ghat, chol });
            }
            delta = (delta * 100.0).max(1e-14 * max_diag.max(1.0));
        }
        None
    }

    fn apply_w(&self, v: &[f64], out: &mut [f64]) {
        match &self.scal {
            None => out.copy_from_slice(v),
            Some(sc) => {
                for (b, w) in self.p.blocks.iter().zip(sc) {
                    let r = b.offset..b.offset + b.dim;
                    w.apply(&v[r.clone()], &mut out[r]);
                }
            }
        }
    }

    fn apply_winv(&self, v: &[f64], out: &mut [f64]) {
        match &self.scal {
            None => out.copy_from_slice(v),
            Some(sc) => {
                for (b, w) in self.p.blocks.iter().zip(sc) {
                    let r = b.offset..b.offset + b.dim;
                    w.apply_inv(&v[r.clone()], &mut out[r]);
                }
            }
        }
    }

    fn ghat_mul(&self, x: &[f64], out: &mut [f64]) {
        for (b, gh) in self.p.blocks.iter().zip(&self.ghat) {
            let o = &mut out[b.offset..b.offset + b.dim];
            o.fill(0.0);
            for (j, &col) in b.support.iter().enumerate() {
                if x[col] != 0.0 {
                    axpy(x[col], &gh[j * b.dim..(j + 1) * b.dim], o);
                }
            }
        }
    }

    fn ghat_t_mul(&self, z: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (b, gh) in self.p.blocks.iter().zip(&self.ghat) {
            let zb = &z[b.offset..b.offset + b.dim];
            for (j, &col) in b.support.iter().enumerate() {
                out[col] += dot(&gh[j * b.dim..(j + 1) * b.dim], zb);
            }
        }
    }

    /// One pass through the factorization: `H dx = bx + Ĝᵀ W⁻¹ bz`,
    /// `dz̃ = Ĝ dx − W⁻¹ bz`.
    fn solve_once(&self, bx: &[f64], bz: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.p.m();
        let mut t = vec![0.0; m];
        self.apply_winv(bz, &mut t);
        let mut dx = vec![0.0; self.p.n];
        self.ghat_t_mul(&t, &mut dx);
        axpy(1.0, bx, &mut dx);
        self.chol.solve_in_place(&mut dx);
        let mut dz = vec![0.0; m];
        self.ghat_mul(&dx, &mut dz);
        axpy(-1.0, &t, &mut dz);
        (dx, dz)
    }

    /// Solves `Gᵀ W⁻¹ dz̃ = bx`, `G dx − W dz̃ = bz`; returns `(dx, dz̃)`.
    ///
    /// Refinement works on these unreduced equations: forming `ĜᵀĜ` squares
    /// the condition number, and what the iteration needs accurate is the
    /// dual equation itself.
    fn solve(&self, bx: &[f64], bz: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (n, m) = (self.p.n, self.p.m());
        let (mut dx, mut dz) = self.solve_once(bx, bz);
        let scale = norm2(bx) + norm2(bz);
        let (mut r1, mut r2) = (vec![0.0; n], vec![0.0; m]);
        let (mut u, mut v) = (vec![0.0; m], vec![0.0; m]);
        let mut prev = f64::INFINITY;
        for _ in 0..REFINE_STEPS {
            self.apply_winv(&dz, &mut u);
            self.p.gt_mul(&u, &mut r1);
            for i in 0..n {
                r1[i] = bx[i] - r1[i];
            }
            self.p.g_mul(&dx, &mut u);
            self.apply_w(&dz, &mut v);
            for i in 0..m {
                r2[i] = bz[i] - (u[i] - v[i]);
            }
            let res = norm2(&r1) + norm2(&r2);
            if res <= 1e-15 * scale || res >= 0.5 * prev {
                break;
            }
            prev = res;
            let (cx, cz) = self.solve_once(&r1, &r2);
            axpy(1.0, &cx, &mut dx);
            axpy(1.0, &cz, &mut dz);
        }
        (dx, dz)
    }
}

/// Adds a multiple of the cone identity so that every block is interior.
fn shift_into_cone(p: &Problem, v: &mut [f64]) {
    let worst =
        p.blocks.iter().map(|b| -cone::margin(&v[b.offset..b.offset + b.dim])).fold(f64::NEG_INFINITY, f64::max);
    if worst >= -1e-8 * norm2(v).max(1.0) {
        for b in &p.blocks {
            v[b.offset] += 1.0 + worst;
        }
    }
}

fn blockwise(p: &Problem, u: &[f64], v: &[f64], out: &mut [f64], f: fn(&[f64], &[f64], &mut [f64])) {
    for b in &p.blocks {
        let r = b.offset..b.offset + b.dim;
        f(&u[r.clone()], &v[r.clone()], &mut out[r]);
    }
}

fn max_step(p: &Problem, base: &[f64], dir: &[f64]) -> f64 {
    p.blocks
        .iter()
        .map(|b| {
            let r = b.offset..b.offset + b.dim;
            cone::max_step(&base[r.clone()], &dir[r])
        })
        .fold(f64::INFINITY, f64::min)
}

fn scale_back(mut x: Vec<f64>, mut z: Vec<f64>, tau: f64) -> (Vec<f64>, Vec<f64>) {
    x.iter_mut().for_each(|v| *v /= tau);
    z.iter_mut().for_each(|v| *v /= tau);
    (x, z)
}

pub(crate) fn solve(p: &Problem, tol: f64, max_iter: usize) -> Outcome {
    let n = p.n;
    let m = p.m();
    let degree = p.blocks.len() as f64 + 1.0;
    let resx0 = norm2(&p.c).max(1.0);
    let resz0 = norm2(&p.h).max(1.0);
    let neg_c: Vec<f64> = p.c.iter().map(|v| -v).collect();

    // a stall close to the optimum is reported as such rather than as a failure
    let stalled = |status, res: (f64, f64, f64)| {
        let loose = tol.sqrt();
        if res.0 <= loose && res.1 <= loose && res.2 <= loose {
            Status::Inaccurate
        } else {
            status
        }
    };
    let fail = |status, x: Vec<f64>, z: Vec<f64>, iterations, res: (f64, f64, f64)| Outcome {
        status,
        x,
        z,
        iterations,
        pres: res.0,
        dres: res.1,
        gap: res.2,
    };

    let Some(kkt0) = Kkt::new(p, None) else {
        return fail(Status::NumericalFailure, vec![0.0; n], vec![0.0; m], 0, (f64::NAN, f64::NAN, f64::NAN));
    };
    // Least-squares primal start and least-norm dual start.
    let (mut x, mut s) = kkt0.solve(&vec![0.0; n], &p.h);
    for v in s.iter_mut() {
        *v = -*v;
    }
    let (_, mut z) = kkt0.solve(&neg_c, &vec![0.0; m]);
    drop(kkt0);
    shift_into_cone(p, &mut s);
    shift_into_cone(p, &mut z);
    let (mut tau, mut kappa) = (1.0f64, 1.0f64);

    let mut gx = vec![0.0; m];
    let mut gtz = vec![0.0; n];
    let mut rx = vec![0.0; n];
    let mut rz = vec![0.0; m];
    let mut tmp = vec![0.0; m];

    for iter in 0..=max_iter {
        p.g_mul(&x, &mut gx);
        p.gt_mul(&z, &mut gtz);
        let cx = dot(&p.c, &x);
        let hz = dot(&p.h, &z);
        for i in 0..n {
            rx[i] = gtz[i] + p.c[i] * tau;
        }
        for i in 0..m {
            rz[i] = s[i] + gx[i] - p.h[i] * tau;
        }
        let rt = kappa + cx + hz;
        let sz = dot(&s, &z);
        let mu = (sz + tau * kappa) / degree;
        let pres = norm2(&rz) / tau / resz0;
        let dres = norm2(&rx) / tau / resx0;
        let (pcost, dcost) = (cx / tau, -hz / tau);
        let gap = sz / (tau * tau) / pcost.abs().min(dcost.abs()).max(1.0);
        let last = (pres, dres, gap);

        if pres <= tol && dres <= tol && gap <= tol {
            let (x, z) = scale_back(x, z, tau);
            return fail(Status::Optimal, x, z, iter, last);
        }
        if hz < 0.0 && norm2(&gtz) / resx0 / -hz <= tol {
            z.iter_mut().for_each(|v| *v /= -hz);
            return fail(Status::PrimalInfeasible, x, z, iter, last);
        }
        if cx < 0.0 {
            let mut r = 0.0;
            for i in 0..m {
                r += (gx[i] + s[i]).powi(2);
            }
            if r.sqrt() / resz0 / -cx <= tol {
                x.iter_mut().for_each(|v| *v /= -cx);
                return fail(Status::DualInfeasible, x, z, iter, last);
            }
        }
        if iter == max_iter {
            let (x, z) = scale_back(x, z, tau);
            return fail(stalled(Status::MaxIter, last), x, z, iter, last);
        }

        let scal: Option<Vec<NtScaling>> = p
            .blocks
            .iter()
            .map(|b| {
                let r = b.offset..b.offset + b.dim;
                NtScaling::new(&s[r.clone()], &z[r])
            })
            .collect();
        let Some(kkt) = scal.and_then(|sc| Kkt::new(p, Some(sc))) else {
            let (x, z) = scale_back(x, z, tau);
            return fail(stalled(Status::NumericalFailure, last), x, z, iter, last);
        };
        let mut lambda = vec![0.0; m];
        kkt.apply_w(&z, &mut lambda);
        let mut lam_sq = vec![0.0; m];
        blockwise(p, &lambda, &lambda, &mut lam_sq, cone::jordan_product);
        let mut hhat = vec![0.0; m];
        kkt.apply_winv(&p.h, &mut hhat);

        let (x2, z2) = kkt.solve(&neg_c, &p.h);
        let z2_sq = dot(&z2, &z2);

        let mut aff: Option<(Vec<f64>, Vec<f64>, f64, f64)> = None;
        let mut sigma = 0.0;
        let mut step_taken = 0.0;
        for pass in 0..2 {
            let eta = if pass == 0 { 0.0 } else { sigma };
            let mut d_s: Vec<f64> = lam_sq.iter().map(|v| -v).collect();
            let mut d_k = -tau * kappa;
            if let Some((ds_a, dz_a, dt_a, dk_a)) = &aff {
                blockwise(p, ds_a, dz_a, &mut tmp, cone::jordan_product);
                for b in &p.blocks {
                    d_s[b.offset] += sigma * mu;
                }
                axpy(-1.0, &tmp, &mut d_s);
                d_k += sigma * mu - dt_a * dk_a;
            }
            let mut lam_inv_ds = vec![0.0; m];
            blockwise(p, &lambda, &d_s, &mut lam_inv_ds, cone::jordan_solve);

            let bx: Vec<f64> = rx.iter().map(|v| -(1.0 - eta) * v).collect();
            kkt.apply_w(&lam_inv_ds, &mut tmp);
            let bz: Vec<f64> = rz.iter().zip(&tmp).map(|(r, w)| -(1.0 - eta) * r - w).collect();
            let bt = -(1.0 - eta) * rt;

            let (x1, z1) = kkt.solve(&bx, &bz);
            let dtau = (d_k - tau * bt + tau * (dot(&p.c, &x1) + dot(&hhat, &z1))) / (kappa + tau * z2_sq);
            let mut dx = x1;
            axpy(dtau, &x2, &mut dx);
            let mut dz = z1;
            axpy(dtau, &z2, &mut dz);
            let dkappa = (d_k - kappa * dtau) / tau;
            let ds: Vec<f64> = lam_inv_ds.iter().zip(&dz).map(|(a, b)| a - b).collect();

            let mut t = max_step(p, &lambda, &ds).min(max_step(p, &lambda, &dz));
            if dtau < 0.0 {
                t = t.min(-tau / dtau);
            }
            if dkappa < 0.0 {
                t = t.min(-kappa / dkappa);
            }
            if pass == 0 {
                let a = t.min(1.0);
                sigma = (1.0 - a).powi(3);
                aff = Some((ds, dz, dtau, dkappa));
                continue;
            }
            let alpha = (STEP * t).min(1.0);
            step_taken = alpha;
            axpy(alpha, &dx, &mut x);
            kkt.apply_w(&ds, &mut tmp);
            axpy(alpha, &tmp, &mut s);
            kkt.apply_winv(&dz, &mut tmp);
            axpy(alpha, &tmp, &mut z);
            tau += alpha * dtau;
            kappa += alpha * dkappa;
        }
        if !(step_taken > MIN_STEP) || !(tau > 0.0) || !(kappa > 0.0) {
            let (x, z) = scale_back(x, z, tau);
            return fail(stalled(Status::NumericalFailure, last), x, z, iter + 1, last);
        }
    }
    unreachable!("loop returns at max_iter")
}
