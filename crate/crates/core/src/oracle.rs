//! Test-only reference computations.
//!
//! Composite Gauss–Legendre quadrature built from scratch (nodes by Newton
//! iteration on the Legendre recurrence). It shares no code with [`crate::quad`]
//! so it can serve as an independent oracle.

use num_complex::Complex64;

pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Self { nodes, weights }
    }

    /// Composite rule on `panels` equal panels of `[a, b]`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let c = lo + 0.5 * h;
            let mut s = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                s += w * f(c + 0.5 * h * x);
            }
            total += 0.5 * h * s;
        }
        total
    }

    pub fn integrate_complex(
        &self,
        f: impl Fn(f64) -> Complex64,
        a: f64,
        b: f64,
        panels: usize,
    ) -> Complex64 {
        let re = self.integrate(|x| f(x).re, a, b, panels);
        let im = self.integrate(|x| f(x).im, a, b, panels);
        Complex64::new(re, im)
    }
}

/// Composite Gauss–Legendre over geometrically growing panels `[a, a + h r^k]`,
/// suitable for integrands concentrated near `a` with an exponential tail.
pub fn integrate_graded(f: impl Fn(f64) -> f64, a: f64, first: f64, ratio: f64, end: f64) -> f64 {
    let gl = GaussLegendre::new(30);
    let mut lo = a;
    let mut width = first;
    let mut total = 0.0;
    while lo < end {
        let hi = (lo + width).min(end);
        total += gl.integrate(&f, lo, hi, 4);
        lo = hi;
        width *= ratio;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        let gl = GaussLegendre::new(10);
        let v = gl.integrate(|x| x.powi(19), 0.0, 1.0, 1);
        assert!((v - 0.05).abs() < 1e-15);
    }
}
