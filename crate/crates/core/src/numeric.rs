//! Small numerical helpers shared by the likelihood and enumeration code.

use num_rational::BigRational;
use num_traits::Signed;

/// `log(sum(exp(values)))` with the maximum shifted out.
///
/// Empty input and all-`-inf` input give `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Accumulates `log(sum(exp(x_i)))` one term at a time.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.scaled += (x - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// `x * ln(y)` with the convention `0 * ln(0) = 0`.
pub fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Table of `ln(i!)` for `i = 0..=n`, built by exact summation of logs.
#[derive(Clone, Debug)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn up_to(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        let mut acc = NeumaierSum::default();
        table.push(0.0);
        for i in 1..=n {
            acc.add((i as f64).ln());
            table.push(acc.value());
        }
        Self { table }
    }

    pub fn ln_factorial(&self, n: usize) -> f64 {
        self.table[n]
    }

    pub fn ln_choose(&self, n: usize, r: usize) -> f64 {
        debug_assert!(r <= n);
        self.table[n] - self.table[r] - self.table[n - r]
    }

    /// Log-mass of `Binomial(n, theta)` at `r`, with `0^0 = 1`.
    pub fn ln_binomial_pmf(&self, n: usize, r: usize, theta: f64) -> f64 {
        self.ln_choose(n, r) + xlny(r as f64, theta) + xlny((n - r) as f64, 1.0 - theta)
    }
}

/// Compensated (Kahan–Babuška–Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Exact rational value of a finite float.
pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// `|a - b| > c`, decided in exact arithmetic on the three floats.
pub fn abs_diff_exceeds(a: f64, b: f64, c: f64) -> bool {
    let approx = (a - b).abs() - c;
    if approx.abs() > 1e-9 * c.abs().max(1.0) {
        return approx > 0.0;
    }
    (exact(a) - exact(b)).abs() > exact(c)
}
