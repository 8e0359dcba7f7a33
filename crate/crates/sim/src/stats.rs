//! Compensated running sums, so means do not drift with the trial count.

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Mean and standard error of a sample, from compensated sums of `x` and
/// `x²`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAcc {
    n: usize,
    sum: KahanSum,
    sum_sq: KahanSum,
    max: f64,
}

impl MeanAcc {
    pub fn add(&mut self, x: f64) {
        self.n += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
        self.max = if self.n == 1 { x } else { self.max.max(x) };
    }

    pub fn count(&self) -> usize {
        self.n
    }

    /// NaN when empty.
    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.sum.value() / self.n as f64
        }
    }

    /// Standard error of the mean; zero with fewer than two samples.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m = self.mean();
        let var = ((self.sum_sq.value() - n * m * m) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }

    pub fn max(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.max
        }
    }
}
