//! Real coordinates for complex beamformers.
//!
//! `w ∈ ℂ^{MN}` maps to `x ∈ ℝ^{2MN}` AP by AP: the `2N` coordinates of AP `m`
//! are `[Re w_m; Im w_m]`. For `a = aᵣ + j aᵢ`,
//!
//! ```text
//! Re(aᴴw) = aᵣᵀ wᵣ + aᵢᵀ wᵢ,    Im(aᴴw) = aᵣᵀ wᵢ − aᵢᵀ wᵣ.
//! ```

use super::{EqConstraint, SocConstraint};
use crate::error::check_len;
use crate::prelude::*;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexEmbedding {
    aps: usize,
    antennas: usize,
}

impl ComplexEmbedding {
    pub fn new(aps: usize, antennas: usize) -> Result<Self> {
        if aps == 0 || antennas == 0 {
            return Err(Error::config("embedding needs at least one AP and one antenna"));
        }
        Ok(Self { aps, antennas })
    }

    pub fn aps(&self) -> usize {
        self.aps
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    /// Complex length `MN`.
    pub fn complex_len(&self) -> usize {
        self.aps * self.antennas
    }

    /// Real length `2MN`.
    pub fn dim(&self) -> usize {
        2 * self.complex_len()
    }

    /// Real coordinate of `Re w` at complex index `i`.
    pub fn re_index(&self, i: usize) -> usize {
        let (m, k) = (i / self.antennas, i % self.antennas);
        2 * m * self.antennas + k
    }

    pub fn im_index(&self, i: usize) -> usize {
        self.re_index(i) + self.antennas
    }

    pub fn embed(&self, w: &[C64]) -> Result<Vec<f64>> {
        check_len(self.complex_len(), w.len())?;
        let mut x = vec![0.0; self.dim()];
        for (i, v) in w.iter().enumerate() {
            x[self.re_index(i)] = v.re;
            x[self.im_index(i)] = v.im;
        }
        Ok(x)
    }

    pub fn unembed(&self, x: &[f64]) -> Result<Vec<C64>> {
        check_len(self.dim(), x.len())?;
        Ok((0..self.complex_len()).map(|i| C64::new(x[self.re_index(i)], x[self.im_index(i)])).collect())
    }

    /// Rows `(ρ_re, ρ_im)` with `ρ_reᵀx = Re(aᴴw)` and `ρ_imᵀx = Im(aᴴw)`.
    pub fn functional_rows(&self, a: &[C64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len(self.complex_len(), a.len())?;
        let mut re = vec![0.0; self.dim()];
        let mut im = vec![0.0; self.dim()];
        for (i, v) in a.iter().enumerate() {
            let (r, j) = (self.re_index(i), self.im_index(i));
            re[r] = v.re;
            re[j] = v.im;
            im[r] = -v.im;
            im[j] = v.re;
        }
        Ok((re, im))
    }

    /// `‖w_m‖ ≤ √P` as a cone over the `2N` coordinates of AP `m`.
    pub fn power_cone(&self, m: usize, power: f64) -> Result<SocConstraint> {
        if m >= self.aps {
            return Err(Error::Dimension { expected: self.aps, got: m });
        }
        if !(power >= 0.0) {
            return Err(Error::domain("power budget must be non-negative"));
        }
        let n = self.dim();
        let k = 2 * self.antennas;
        let mut a = vec![0.0; k * n];
        for r in 0..k {
            a[r * n + m * k + r] = 1.0;
        }
        Ok(SocConstraint::new(a, vec![0.0; k], vec![0.0; n], power.sqrt()))
    }

    /// `Im(gᴴw) = 0`.
    pub fn imag_equality(&self, g: &[C64]) -> Result<EqConstraint> {
        let (_, im) = self.functional_rows(g)?;
        Ok(EqConstraint { a: im, r: 0.0 })
    }
}
