//! Small dense kernels shared by the solver and the rate formulas.

use crate::prelude::*;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Hermitian inner product `aᴴ b`.
#[inline]
pub fn cdot(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

#[inline]
pub fn cnorm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Dense symmetric positive definite factorization `A = L Lᵀ`, row-major,
/// lower triangle only.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors the lower triangle of `a` (row-major, `n × n`). Returns the
    /// index of the first non-positive pivot on failure.
    pub fn factor(a: &[f64], n: usize) -> Result<Self, usize> {
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                let s = a[i * n + j] - dot(ri, rj);
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(i);
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        for i in 0..n {
            let s = b[i] - dot(&self.l[i * n..i * n + i], &b[..i]);
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `y = A x` for a full row-major `A`.
    fn symv(a: &[f64], n: usize, x: &[f64], y: &mut [f64]) {
        for i in 0..n {
            y[i] = dot(&a[i * n..(i + 1) * n], x);
        }
    }

    #[test]
    fn cholesky_solves_spd_system() {
        // A = Mᵀ M + I for a fixed M
        let m = [1.0, 2.0, 0.5, -1.0, 0.0, 3.0, 2.0, 1.0, 1.0];
        let n = 3;
        let mut a = vec![0.0; 9];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| m[k * n + i] * m[k * n + j]).sum::<f64>();
            }
            a[i * n + i] += 1.0;
        }
        let x_true = [0.3, -1.2, 2.5];
        let mut b = vec![0.0; 3];
        symv(&a, n, &x_true, &mut b);
        let chol = Cholesky::factor(&a, n).unwrap();
        chol.solve_in_place(&mut b);
        for (x, t) in b.iter().zip(x_true) {
            assert!((x - t).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0];
        assert_eq!(Cholesky::factor(&a, 2).unwrap_err(), 1);
    }

    #[test]
    fn hermitian_dot_conjugates_left() {
        let a = [C64::new(0.0, 1.0)];
        let b = [C64::new(0.0, 1.0)];
        assert_eq!(cdot(&a, &b), C64::new(1.0, 0.0));
    }
}
