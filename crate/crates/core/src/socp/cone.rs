//! Jordan algebra of the second-order cone `Q = {(u₀, ū) : u₀ ≥ ‖ū‖}` and its
//! Nesterov–Todd scaling.
//!
//! With `J = diag(1, −1, …, −1)` the scaling is `W = β (2 v vᵀ − J)`, where
//! `vᵀ J v = 1`. It is symmetric, maps the cone onto itself and satisfies
//! `W z = W⁻¹ s = λ`.

use crate::linalg::{dot, norm2};
use crate::prelude::*;

/// `u ∘ v = (uᵀv, u₀ v̄ + v₀ ū)`.
pub(crate) fn jordan_product(u: &[f64], v: &[f64], out: &mut [f64]) {
    out[0] = dot(u, v);
    for i in 1..u.len() {
        out[i] = u[0] * v[i] + v[0] * u[i];
    }
}

/// Solves `u ∘ x = w` for `x`; `u` must be in the interior.
pub(crate) fn jordan_solve(u: &[f64], w: &[f64], out: &mut [f64]) {
    let ubar = &u[1..];
    let det = residual_det(u);
    let x0 = (u[0] * w[0] - dot(ubar, &w[1..])) / det;
    out[0] = x0;
    for i in 1..u.len() {
        out[i] = (w[i] - x0 * u[i]) / u[0];
    }
}

/// `u₀² − ‖ū‖²`, computed as a product of sums to limit cancellation.
pub(crate) fn residual_det(u: &[f64]) -> f64 {
    let nb = norm2(&u[1..]);
    (u[0] - nb) * (u[0] + nb)
}

/// Distance-like margin `u₀ − ‖ū‖`; positive iff `u` is interior.
pub(crate) fn margin(u: &[f64]) -> f64 {
    u[0] - norm2(&u[1..])
}

/// Largest `t ≥ 0` with `u + t d ∈ Q`, for interior `u`. Returns `f64::INFINITY`
/// when the ray never leaves the cone.
pub(crate) fn max_step(u: &[f64], d: &[f64]) -> f64 {
    let mut t = f64::INFINITY;
    if d[0] < 0.0 {
        t = -u[0] / d[0];
    }
    let a = d[0] * d[0] - dot(&d[1..], &d[1..]);
    let b = 2.0 * (u[0] * d[0] - dot(&u[1..], &d[1..]));
    let c = residual_det(u).max(0.0);
    let scale = dot(d, d);
    if a.abs() <= 1e-14 * scale {
        if b < 0.0 {
            t = t.min(-c / b);
        }
        return t;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return t;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    for root in [q / a, if q != 0.0 { c / q } else { f64::INFINITY }] {
        if root > 0.0 {
            t = t.min(root);
        }
    }
    t
}

#[derive(Debug, Clone)]
pub(crate) struct NtScaling {
    beta: f64,
    v: Vec<f64>,
}

impl NtScaling {
    /// Scaling for interior `s` and `z`; `None` if either has left the cone.
    pub fn new(s: &[f64], z: &[f64]) -> Option<Self> {
        let sd = residual_det(s);
        let zd = residual_det(z);
        if !(sd > 0.0 && zd > 0.0 && s[0] > 0.0 && z[0] > 0.0) {
            return None;
        }
        let (sn, zn) = (sd.sqrt(), zd.sqrt());
        let k = s.len();
        let mut sbar = vec![0.0; k];
        let mut zbar = vec![0.0; k];
        for i in 0..k {
            sbar[i] = s[i] / sn;
            zbar[i] = z[i] / zn;
        }
        let gamma = ((1.0 + dot(&sbar, &zbar)) / 2.0).sqrt();
        let mut wbar = vec![0.0; k];
        wbar[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
        for i in 1..k {
            wbar[i] = (sbar[i] - zbar[i]) / (2.0 * gamma);
        }
        let denom = (2.0 * (wbar[0] + 1.0)).sqrt();
        let mut v = wbar;
        v[0] += 1.0;
        for x in v.iter_mut() {
            *x /= denom;
        }
        Some(Self { beta: (sn / zn).sqrt(), v })
    }

    /// `out = W x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let vx = dot(&self.v, x);
        out[0] = self.beta * (2.0 * self.v[0] * vx - x[0]);
        for i in 1..x.len() {
            out[i] = self.beta * (2.0 * self.v[i] * vx + x[i]);
        }
    }

    /// `out = W⁻¹ x`.
    pub fn apply_inv(&self, x: &[f64], out: &mut [f64]) {
        // Jv = (v₀, −v̄)
        let jvx = self.v[0] * x[0] - dot(&self.v[1..], &x[1..]);
        let ib = 1.0 / self.beta;
        out[0] = ib * (2.0 * self.v[0] * jvx - x[0]);
        for i in 1..x.len() {
            out[i] = ib * (-2.0 * self.v[i] * jvx + x[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
    }

    #[test]
    fn nt_scaling_maps_z_and_s_to_same_point() {
        let s = [3.0, 1.0, -0.5, 2.0];
        let z = [1.5, 0.2, 0.9, -0.4];
        let w = NtScaling::new(&s, &z).unwrap();
        let mut wz = [0.0; 4];
        let mut winv_s = [0.0; 4];
        w.apply(&z, &mut wz);
        w.apply_inv(&s, &mut winv_s);
        assert!(close(&wz, &winv_s, 1e-13), "{wz:?} vs {winv_s:?}");
        let mut back = [0.0; 4];
        w.apply_inv(&wz, &mut back);
        assert!(close(&back, &z, 1e-13));
        assert!(margin(&wz) > 0.0);
    }

    #[test]
    fn jordan_solve_inverts_product() {
        let u = [2.0, 0.3, -1.1];
        let x = [0.7, -0.2, 0.5];
        let mut w = [0.0; 3];
        jordan_product(&u, &x, &mut w);
        let mut y = [0.0; 3];
        jordan_solve(&u, &w, &mut y);
        assert!(close(&y, &x, 1e-14));
    }

    #[test]
    fn max_step_hits_boundary() {
        let u = [1.0, 0.0];
        assert!((max_step(&u, &[0.0, 1.0]) - 1.0).abs() < 1e-15);
        assert_eq!(max_step(&u, &[1.0, 0.5]), f64::INFINITY);
        assert!((max_step(&u, &[-1.0, 0.0]) - 1.0).abs() < 1e-15);
        let u = [2.0, 1.0, 0.0];
        let d = [-1.0, 0.0, 1.0];
        let t = max_step(&u, &d);
        let p = [u[0] + t * d[0], u[1] + t * d[1], u[2] + t * d[2]];
        assert!(margin(&p).abs() < 1e-12);
    }
}
