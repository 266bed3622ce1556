//! Summation helpers: alternating-series acceleration and compensated sums.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Cohen–Rodriguez Villegas–Zagier acceleration of `sum_{k>=0} (-1)^k a_k`
/// using the first `n` terms.
///
/// For `a_k` that are moments of a (possibly complex) weight on `[0, 1]` the
/// error decays like `(3 + sqrt 8)^-n`.
pub fn cvz_alternating<T>(terms: &[T]) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let n = terms.len();
    if n == 0 {
        return T::default();
    }
    let nf = n as f64;
    let d0 = (3.0 + 8f64.sqrt()).powf(nf);
    let d = 0.5 * (d0 + 1.0 / d0);
    let mut b = -1.0;
    let mut c = -d;
    let mut s = T::default();
    for (k, &a) in terms.iter().enumerate() {
        let kf = k as f64;
        c = b - c;
        s = s + a * c;
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    s * (1.0 / d)
}

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
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

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Magnitude of a summand, used for convergence tests on generic series.
pub trait Magnitude: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(&self) -> f64;
}

impl Magnitude for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Magnitude for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn alternating_harmonic() {
        let terms: Vec<f64> = (0..30).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        assert_relative_eq!(cvz_alternating(&terms), 2f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn leibniz_pi() {
        let terms: Vec<f64> = (0..30).map(|k| 1.0 / (2.0 * k as f64 + 1.0)).collect();
        assert_relative_eq!(
            cvz_alternating(&terms),
            std::f64::consts::FRAC_PI_4,
            max_relative = 1e-15
        );
    }

    #[test]
    fn complex_terms() {
        // sum (-1)^k w^k/(k+1) = ln(1+w)/w for |w| <= 1
        let w = Complex64::new(0.3, 0.6);
        let terms: Vec<Complex64> = (0..40).map(|k| w.powu(k) / (k as f64 + 1.0)).collect();
        let expected = (Complex64::new(1.0, 0.0) + w).ln() / w;
        assert!((cvz_alternating(&terms) - expected).norm() < 1e-14);
    }

    #[test]
    fn compensation_recovers_cancelled_digits() {
        let values = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(values), 2.0);
    }
}
