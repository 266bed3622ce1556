//! The `g(y)` form of the free energy and its temperature expansions.
//!
//! With `y = z/theta` and `y* = z*/theta` the free energy is
//! `F = theta [g(y) + g(y*)]`, where (in units of `k_B T`)
//!
//! `g(y) = -(1/pi) int_0^inf arctan(x/y) / (e^x + 1) dx`.
//!
//! Expanding the arctangent for `|y| >> 1` gives the low-temperature zeta
//! series; expanding the Fermi factor instead gives an alternating series over
//! the auxiliary sine/cosine-integral function, convergent for every `Re y > 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::accel::{cvz_alternating, Magnitude};
use crate::error::{Error, Result};
use crate::quad::{breakpoints, integrate_semi_infinite, QuadOptions};
use crate::specfun::{aux_f, euler_gamma, fermi_integral, gamma_int, zeta_int};
use crate::susceptibility::{roots, OhmicBath};
use crate::thermo::ReducedTemperature;

/// Argument `y` of `g`, restricted to the right half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GArgument(Complex64);

impl GArgument {
    pub fn new(y: Complex64) -> Result<Self> {
        if y.re > 0.0 && y.im.is_finite() && y.re.is_finite() {
            Ok(Self(y))
        } else {
            Err(Error::domain("GArgument", format!("requires finite y with Re y > 0, got {y}")))
        }
    }

    pub fn real(y: f64) -> Result<Self> {
        Self::new(Complex64::new(y, 0.0))
    }

    /// `(y, y*) = (z/theta, z*/theta)` for the bath expressed with `omega0 = 1`.
    pub fn pair(bath: &OhmicBath, theta: ReducedTemperature) -> Result<(Self, Self)> {
        let r = roots(&bath.reduced());
        let t = theta.value();
        Ok((Self::new(r.z / t)?, Self::new(r.z_star / t)?))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }
}

/// A truncated series with its per-order contributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEval<T> {
    pub value: T,
    /// Highest order retained.
    pub order: usize,
    pub terms: Vec<T>,
    pub converged: bool,
    /// Size of the first omitted contribution (or the acceleration residual).
    pub tail_estimate: f64,
}

impl<T: Magnitude> SeriesEval<T> {
    fn from_terms(terms: Vec<T>, tail_estimate: f64, tol: f64) -> Self {
        let value = terms.iter().fold(T::default(), |acc, &t| acc + t);
        Self::with_value(value, terms, tail_estimate, tol)
    }

    fn with_value(value: T, terms: Vec<T>, tail_estimate: f64, tol: f64) -> Self {
        Self {
            value,
            order: terms.len().saturating_sub(1),
            converged: tail_estimate <= tol * value.magnitude(),
            terms,
            tail_estimate,
        }
    }
}

fn quad_options() -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-13,
        abs_tol: 0.0,
        max_intervals: 8000,
    }
}

/// `g(y)` by direct quadrature of the arctangent form.
///
/// `Re(x/y) > 0` along the whole path, so the principal arctangent never meets
/// its cuts on the imaginary axis.
pub fn g_arctan(y: GArgument) -> Result<Complex64> {
    let y = y.value();
    let m = y.norm();
    let pts = breakpoints(0.0, 40.0f64.max(10.0 * m), [0.1 * m, m, 10.0 * m, 1.0, 5.0, 40.0]);
    let res = integrate_semi_infinite(
        |x: f64| {
            let e = (-x).exp();
            (Complex64::new(x, 0.0) / y).atan() * (e / (1.0 + e))
        },
        &pts,
        &quad_options(),
    )?;
    Ok(-res.value / PI)
}

/// Low-temperature asymptotic series of `g(y)`:
/// `(1/pi) sum_n (-1)^(n+1) I(2n+1) / ((2n+1) y^(2n+1))`, `I(m) = int x^m/(e^x+1)`.
///
/// Terms are added while their magnitude decreases, up to `n_max`; the first
/// omitted term is the tail estimate.
pub fn g_low_t(y: GArgument, n_max: usize, tol: f64) -> Result<SeriesEval<Complex64>> {
    let yv = y.value();
    if yv.norm() <= 1.0 {
        return Err(Error::domain("g_low_t", format!("needs |y| > 1, got |y| = {}", yv.norm())));
    }
    let inv = yv.inv();
    let inv2 = inv * inv;
    let term = |n: usize, power: Complex64| -> Result<Complex64> {
        let m = 2 * n as u32 + 1;
        let sign = if n.is_multiple_of(2) { -1.0 } else { 1.0 };
        Ok(power * (sign * fermi_integral(m)? / (m as f64 * PI)))
    };

    let mut terms = Vec::new();
    let mut power = inv;
    let mut current = term(0, power)?;
    let mut tail = 0.0;
    for n in 0..=n_max {
        terms.push(current);
        power *= inv2;
        let next = match term(n + 1, power) {
            Ok(t) => t,
            // Beyond the factorial range the series has long since diverged.
            Err(_) => {
                tail = current.norm();
                break;
            }
        };
        tail = next.norm();
        if n == n_max || next.norm() >= current.norm() {
            break;
        }
        current = next;
    }
    Ok(SeriesEval::from_terms(terms, tail, tol))
}

/// `z^m + z*^m` for `m = 0, 1, ..., m_max` by the binomial reduction
/// `z^m + z*^m = (z + z*)^m - sum_k C(m,k) |z|^2k (z^(m-2k) + z*^(m-2k))`.
fn power_sums(sum: f64, product: f64, m_max: usize) -> Vec<f64> {
    let mut p = vec![0.0; m_max + 1];
    p[0] = 2.0;
    for m in 1..=m_max {
        let mut acc = sum.powi(m as i32);
        let mut binom = 1.0;
        for k in 1..=m / 2 {
            binom = binom * (m - k + 1) as f64 / k as f64;
            // The k-th and (m-k)-th binomial terms pair up; the middle one stands alone.
            let weight = if 2 * k == m { 0.5 } else { 1.0 };
            acc -= weight * binom * product.powi(k as i32) * p[m - 2 * k];
        }
        p[m] = acc;
    }
    p
}

/// Low-temperature specific heat from the zeta series, `order` terms:
/// `Cv = (1/pi) sum_n (-1)^n (2n+2) I(2n+1) theta^(2n+1) (z^(2n+1) + z*^(2n+1)) / |z|^(4n+2)`.
///
/// `tail_estimate` is the first omitted term; `converged` compares it with `tol * |Cv|`.
pub fn cv_low_t(bath: &OhmicBath, theta: ReducedTemperature, order: usize, tol: f64) -> Result<SeriesEval<f64>> {
    if order == 0 {
        return Err(Error::invalid("order", "need at least one term"));
    }
    let b = bath.reduced();
    let t = theta.value();
    let sums = power_sums(b.gamma0(), 1.0, 2 * order + 1);
    let term = |n: usize| -> Result<f64> {
        let m = 2 * n + 1;
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign * (m + 1) as f64 * fermi_integral(m as u32)? * t.powi(m as i32) * sums[m] / PI)
    };
    let terms = (0..order).map(term).collect::<Result<Vec<f64>>>()?;
    let tail = term(order).map(f64::abs).unwrap_or(f64::INFINITY);
    Ok(SeriesEval::from_terms(terms, tail, tol))
}

/// Closed three-term form of the low-temperature specific heat, `r = gamma0/omega0`:
/// `(pi/6) theta r + (7 pi^3/30) theta^3 (3r - r^3) + (31 pi^5/42) theta^5 (r^5 - 5r^3 + 5r)`.
pub fn cv_low_t_closed(bath: &OhmicBath, theta: ReducedTemperature) -> f64 {
    let r = bath.ratio();
    let t = theta.value();
    PI / 6.0 * t * r
        + 7.0 * PI.powi(3) / 30.0 * t.powi(3) * (3.0 * r - r.powi(3))
        + 31.0 * PI.powi(5) / 42.0 * t.powi(5) * (r.powi(5) - 5.0 * r.powi(3) + 5.0 * r)
}

/// `g(y) = -(1/pi) sum_{n>=1} (-1)^(n-1) f(n y) / n`, with `f` the auxiliary
/// sine/cosine-integral function, summed by Cohen–Villegas–Zagier acceleration.
///
/// The accelerated sum is re-evaluated with 10, 15, 20, ... terms; it has
/// converged once two successive estimates differ by at most `tol * |g|`.
pub fn g_high_t_cisi(y: GArgument, n_max: usize, tol: f64) -> Result<SeriesEval<Complex64>> {
    let yv = y.value();
    let mut moments: Vec<Complex64> = Vec::new();
    let mut previous: Option<Complex64> = None;
    let mut n = 10usize.min(n_max.max(1));
    loop {
        while moments.len() < n {
            let k = moments.len() as f64 + 1.0;
            moments.push(aux_f(yv * k)? / k);
        }
        let sum = cvz_alternating(&moments) * (-1.0 / PI);
        if let Some(prev) = previous {
            let residual = (sum - prev).norm();
            if residual <= tol * sum.norm() || n >= n_max {
                let terms = moments
                    .iter()
                    .enumerate()
                    .map(|(k, &a)| a * if k % 2 == 0 { -1.0 / PI } else { 1.0 / PI })
                    .collect();
                let eval = SeriesEval::with_value(sum, terms, residual, tol);
                if !eval.converged {
                    return Err(Error::SeriesNonConvergence {
                        terms: n,
                        partial: sum.norm(),
                        residual,
                    });
                }
                return Ok(eval);
            }
        }
        previous = Some(sum);
        n = (n + 5).min(n_max.max(n + 1));
    }
}

/// Which representation of `g` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GMethod {
    Arctan,
    CiSi,
}

/// Default tolerance and term budget for the accelerated sine/cosine-integral series.
pub const CISI_TOL: f64 = 1e-13;
pub const CISI_MAX_TERMS: usize = 120;

/// `theta [g(y) + g(y*)]`; the imaginary part is kept so callers can check it vanishes.
pub fn free_energy_via_g(bath: &OhmicBath, theta: ReducedTemperature, method: GMethod) -> Result<Complex64> {
    let (y, y_star) = GArgument::pair(bath, theta)?;
    let g = |a: GArgument| -> Result<Complex64> {
        match method {
            GMethod::Arctan => g_arctan(a),
            GMethod::CiSi => Ok(g_high_t_cisi(a, CISI_MAX_TERMS, CISI_TOL)?.value),
        }
    };
    Ok((g(y)? + g(y_star)?) * theta.value())
}

/// Leading high-temperature specific heat as the product of the isolated-spin
/// factor `1/(4 theta^2)` and the damping factor `((8 - 2 pi)/pi) (r^2 - 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighTLeading {
    pub equilibrium: f64,
    pub dynamical: f64,
    pub cv: f64,
}

pub fn cv_high_t_leading(bath: &OhmicBath, theta: ReducedTemperature) -> HighTLeading {
    let r = bath.ratio();
    let t = theta.value();
    let equilibrium = 0.25 / (t * t);
    let dynamical = (8.0 - 2.0 * PI) / PI * (r * r - 2.0);
    HighTLeading {
        equilibrium,
        dynamical,
        cv: equilibrium * dynamical,
    }
}

/// Dirichlet eta at `-k`: the Abel sum of `sum (-1)^(n-1) n^k`. Tabulated for `k <= 3`.
pub fn eta_regularized(k: u32) -> Option<f64> {
    [0.5, 0.25, 0.0, -0.125].get(k as usize).copied()
}

/// How the divergent sums over `n` are assigned values.
pub const HIGH_T_REGULARIZATION: &str = "Abel/Dirichlet-eta: sum (-1)^(n-1) n^k -> eta(-k); eta(-1)=1/4, eta(-2)=0, eta(-3)=-1/8";

/// Formal high-temperature free energy, `F = sum_j c_j theta^(p_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighTFreeEnergy {
    /// Terms ordered by power of `y` (0 through 4).
    pub eval: SeriesEval<f64>,
    pub coefficients: Vec<f64>,
    pub powers: Vec<i32>,
    pub regularization: String,
}

impl HighTFreeEnergy {
    /// `-theta d^2F/d theta^2` term by term.
    pub fn cv(&self, theta: ReducedTemperature) -> f64 {
        self.cv_terms(theta).iter().sum()
    }

    pub fn cv_terms(&self, theta: ReducedTemperature) -> Vec<f64> {
        let t = theta.value();
        self.coefficients
            .iter()
            .zip(&self.powers)
            .map(|(&c, &p)| -c * (p * (p - 1)) as f64 * t.powi(p - 1))
            .collect()
    }
}

/// Relative size below which the last retained high-temperature term counts as converged.
pub const HIGH_T_TOL: f64 = 1e-3;

/// Expansion of `g(y) + g(y*)` to fourth order in `y = z/theta` with the
/// divergent sums over `n` replaced by their eta-regularized values.
pub fn free_energy_high_t(bath: &OhmicBath, theta: ReducedTemperature) -> HighTFreeEnergy {
    let r = bath.ratio();
    let t = theta.value();
    let ge = euler_gamma();
    let eta = |k| eta_regularized(k).expect("tabulated");
    let coefficients = vec![
        0.5,
        (ge - 2.0) * r / PI,
        eta(1) * (4.0 - PI) / 4.0 * (r * r - 2.0) / PI,
        -eta(2) * (ge - 4.0 / 3.0) / 6.0 * (r.powi(3) - 3.0 * r) / PI,
        eta(3) * (8.0 + PI) / 48.0 * (r.powi(4) + 2.0 - 4.0 * r * r) / PI,
    ];
    let powers = vec![1, 0, -1, -2, -3];
    let terms: Vec<f64> = coefficients
        .iter()
        .zip(&powers)
        .map(|(&c, &p)| c * t.powi(p))
        .collect();
    let tail = terms.last().copied().unwrap_or(0.0).abs();
    HighTFreeEnergy {
        eval: SeriesEval::from_terms(terms, tail, HIGH_T_TOL),
        coefficients,
        powers,
        regularization: HIGH_T_REGULARIZATION.to_string(),
    }
}

/// `zeta(2n+2) Gamma(2n+2) (1 - 2^-(2n+1))` assembled from its factors, for audit.
pub fn low_t_coefficient(n: usize) -> Result<f64> {
    let m = 2 * n as u32 + 1;
    Ok(zeta_int(m + 1)? * gamma_int(m + 1)? * (1.0 - 2f64.powi(-(m as i32))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::integrate_graded;
    use crate::thermo::{free_energy, specific_heat};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn th(t: f64) -> ReducedTemperature {
        ReducedTemperature::new(t).unwrap()
    }

    fn bath(r: f64) -> OhmicBath {
        OhmicBath::from_ratio(r).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent oracle for `g`: graded Gauss–Legendre of the log form
    /// `-(1/pi) int ln(1 + e^-x) y/(y^2 + x^2) dx`.
    fn g_oracle(y: Complex64) -> Complex64 {
        let m = y.norm();
        let re = integrate_graded(
            |x| {
                let w = y / (y * y + x * x);
                (-x).exp().ln_1p() * w.re
            },
            0.0,
            0.02 * m.min(1.0),
            1.15,
            80.0,
        );
        let im = integrate_graded(
            |x| {
                let w = y / (y * y + x * x);
                (-x).exp().ln_1p() * w.im
            },
            0.0,
            0.02 * m.min(1.0),
            1.15,
            80.0,
        );
        -c(re, im) / PI
    }

    #[test]
    fn g_argument_rejects_left_half_plane() {
        assert!(GArgument::new(c(0.0, 1.0)).is_err());
        assert!(GArgument::new(c(-1.0, 0.0)).is_err());
        let (y, ys) = GArgument::pair(&bath(0.1), th(1.0)).unwrap();
        assert_relative_eq!((y.value() * ys.value()).re, 1.0, max_relative = 1e-14);
        assert_relative_eq!((y.value() + ys.value()).re, 0.1, max_relative = 1e-14);
    }

    #[test]
    fn g_arctan_matches_log_form_oracle() {
        for y in [c(0.3, 0.0), c(1.0, 0.0), c(0.05, 0.99), c(2.0, -1.5), c(7.0, 0.0)] {
            let g = g_arctan(GArgument::new(y).unwrap()).unwrap();
            let o = g_oracle(y);
            assert!((g - o).norm() <= 1e-10 * o.norm(), "y = {y}: {g} vs {o}");
        }
    }

    #[test]
    fn g_arctan_large_argument() {
        let y = 100.0;
        let g = g_arctan(GArgument::real(y).unwrap()).unwrap();
        let leading = -(1.0 / PI) * (PI * PI / 12.0) / y;
        assert!((g.re / leading - 1.0).abs() < 1e-3);
        assert_eq!(g.im, 0.0);
    }

    #[test]
    fn g_pair_reproduces_quadrature_free_energy() {
        for (r, t) in [(1.0, 1.0), (0.5, 0.7), (4.0, 0.1), (0.1, 10.0)] {
            let f = free_energy(&bath(r), th(t)).unwrap();
            let via_g = free_energy_via_g(&bath(r), th(t), GMethod::Arctan).unwrap();
            assert!((via_g.re - f).abs() <= 1e-8 * f.abs(), "r {r} t {t}: {via_g} vs {f}");
            assert!(via_g.im.abs() <= 1e-12 * via_g.re.abs());
        }
    }

    #[test]
    fn low_t_order_zero_is_leading_term() {
        let y = 50.0;
        let s = g_low_t(GArgument::real(y).unwrap(), 0, 1e-6).unwrap();
        assert_eq!(s.terms.len(), 1);
        assert_relative_eq!(s.value.re, -(PI / 12.0) / y, max_relative = 1e-14);
    }

    #[test]
    fn low_t_terms_decrease_at_fifty() {
        let s = g_low_t(GArgument::new(c(30.0, 40.0)).unwrap(), 3, 1e-6).unwrap();
        assert_eq!(s.terms.len(), 4);
        for w in s.terms.windows(2) {
            assert!(w[1].norm() < w[0].norm());
        }
    }

    #[test]
    fn low_t_pair_matches_arctan() {
        let (y, ys) = GArgument::pair(&bath(0.1), th(0.01)).unwrap();
        let low = g_low_t(y, 3, 1e-6).unwrap().value + g_low_t(ys, 3, 1e-6).unwrap().value;
        let exact = g_arctan(y).unwrap() + g_arctan(ys).unwrap();
        assert!((low - exact).norm() <= 1e-6 * exact.norm());
    }

    #[test]
    fn low_t_stops_at_smallest_term() {
        let s = g_low_t(GArgument::real(2.0).unwrap(), 50, 1e-12).unwrap();
        assert!(s.order < 50);
        assert!(s.tail_estimate >= s.terms.last().unwrap().norm());
        assert!(!s.converged);
    }

    #[test]
    fn low_t_rejects_small_argument() {
        assert!(matches!(
            g_low_t(GArgument::real(0.5).unwrap(), 3, 1e-6),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn power_sums_match_complex_powers() {
        for r in [0.1, 1.0, 1.9, 2.0, 3.5] {
            let roots = roots(&bath(r));
            let p = power_sums(r, 1.0, 11);
            for (m, &pm) in p.iter().enumerate() {
                let direct = (roots.z.powu(m as u32) + roots.z_star.powu(m as u32)).re;
                assert!((pm - direct).abs() <= 1e-11 * direct.abs().max(1.0), "r {r} m {m}");
            }
        }
    }

    #[test]
    fn cv_series_three_terms_equal_closed_form() {
        for r in [0.1, 0.5, 1.0, 3.0] {
            for t in [0.005, 0.02] {
                let s = cv_low_t(&bath(r), th(t), 3, 1e-2).unwrap();
                assert_relative_eq!(s.value, cv_low_t_closed(&bath(r), th(t)), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn cv_series_reference_value() {
        let v = cv_low_t_closed(&bath(0.1), th(0.01));
        // Term-by-term: 5.23599e-4 + 2.16256e-6 + 1.1e-8.
        assert!((v / 5.257_731_6e-4 - 1.0).abs() < 1e-7);
        assert!((v / 5.26e-4 - 1.0).abs() < 0.01);
        let q = specific_heat(&bath(0.1), th(0.01)).unwrap();
        assert!((q / v - 1.0).abs() < 0.01);
    }

    #[test]
    fn cv_series_vanishes_without_damping() {
        assert!(cv_low_t_closed(&bath(1e-12), th(0.01)) < 1e-12);
    }

    #[test]
    fn cv_series_linear_at_low_temperature() {
        let b = bath(0.1);
        let ratio = cv_low_t_closed(&b, th(2e-4)) / cv_low_t_closed(&b, th(1e-4));
        assert!((ratio - 2.0).abs() < 1e-5);
    }

    #[test]
    fn low_t_triple_agreement() {
        for r in [0.1, 0.5, 1.0] {
            for t in [0.005, 0.01, 0.02] {
                let b = bath(r);
                let quad = specific_heat(&b, th(t)).unwrap();
                let series = cv_low_t(&b, th(t), 3, 1e-2).unwrap().value;
                let h = 1e-2 * t;
                let f = |x: f64| free_energy_via_g(&b, th(x), GMethod::Arctan).unwrap().re;
                let fd = -t * (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
                assert!((series / quad - 1.0).abs() < 0.01, "series r {r} t {t}");
                assert!((fd / quad - 1.0).abs() < 0.01, "fd r {r} t {t}");
            }
        }
    }

    #[test]
    fn leading_coefficient_reduces_to_linear_term() {
        let mut runner = proptest::test_runner::TestRunner::default();
        runner
            .run(&(0.01f64..10.0, 1e-4f64..0.1), |(r, t)| {
                let s = cv_low_t(&bath(r), th(t), 1, 1.0).unwrap();
                let expected = PI / 6.0 * t * r;
                prop_assert!((s.value - expected).abs() <= 1e-13 * expected);
                Ok(())
            })
            .unwrap();
        assert_relative_eq!(low_t_coefficient(0).unwrap(), fermi_integral(1).unwrap(), max_relative = 1e-15);
    }

    #[test]
    fn cisi_series_matches_arctan_real() {
        for y in [0.1, 1.0, 10.0] {
            let a = GArgument::real(y).unwrap();
            let s = g_high_t_cisi(a, CISI_MAX_TERMS, CISI_TOL).unwrap();
            let q = g_arctan(a).unwrap();
            assert!((s.value - q).norm() <= 1e-8 * q.norm(), "y {y}");
            assert!(s.converged);
        }
    }

    #[test]
    fn cisi_pair_near_imaginary_axis() {
        let (y, ys) = GArgument::pair(&bath(0.1), th(1.0)).unwrap();
        assert_relative_eq!(y.value().re, 0.05, max_relative = 1e-14);
        let s = g_high_t_cisi(y, CISI_MAX_TERMS, CISI_TOL).unwrap().value
            + g_high_t_cisi(ys, CISI_MAX_TERMS, CISI_TOL).unwrap().value;
        let q = g_arctan(y).unwrap() + g_arctan(ys).unwrap();
        assert!(s.im.abs() <= 1e-12 * s.re.abs());
        assert!((s - q).norm() <= 1e-8 * q.norm());
    }

    #[test]
    fn cisi_terms_scale_like_inverse_square() {
        // f(n y)/n ~ 1/(n^2 y)
        let y = 2.0;
        let raw: Vec<f64> = (1..=60)
            .map(|n| aux_f(c(n as f64 * y, 0.0)).unwrap().re / n as f64)
            .collect();
        let n = 60.0;
        assert!((raw[59] * n * n * y - 1.0).abs() < 1e-3);
    }

    #[test]
    fn cisi_non_convergence_is_reported() {
        let err = g_high_t_cisi(GArgument::real(1.0).unwrap(), 12, 1e-15).unwrap_err();
        assert!(matches!(err, Error::SeriesNonConvergence { .. }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn cisi_and_arctan_agree(lm in (0.05f64).ln()..(50.0f64).ln(), arg in (-PI / 2.0 + 0.1)..(PI / 2.0 - 0.1)) {
            let y = GArgument::new(Complex64::from_polar(lm.exp(), arg)).unwrap();
            let s = g_high_t_cisi(y, CISI_MAX_TERMS, CISI_TOL).unwrap().value;
            let q = g_arctan(y).unwrap();
            prop_assert!((s - q).norm() <= 1e-8 * q.norm(), "y = {}: {} vs {}", y.value(), s, q);
        }
    }

    #[test]
    fn cv_high_t_leading_factors() {
        let l = cv_high_t_leading(&bath(0.5), th(10.0));
        assert_relative_eq!(l.equilibrium, 2.5e-3, max_relative = 1e-15);
        assert!(l.dynamical < 0.0);
        assert!(cv_high_t_leading(&bath(2.0), th(10.0)).dynamical > 0.0);
        assert!(cv_high_t_leading(&bath(2f64.sqrt()), th(10.0)).cv.abs() < 1e-15);
        let ratio = cv_high_t_leading(&bath(3.0), th(20.0)).cv / cv_high_t_leading(&bath(3.0), th(10.0)).cv;
        assert_relative_eq!(ratio, 0.25, max_relative = 1e-14);
    }

    #[test]
    fn high_t_free_energy_structure() {
        let b = bath(0.7);
        let t = th(20.0);
        let fe = free_energy_high_t(&b, t);
        assert_eq!(fe.eval.terms.len(), 5);
        let cv_terms = fe.cv_terms(t);
        // Constant and linear pieces carry no heat capacity.
        assert_eq!(cv_terms[0], 0.0);
        assert_eq!(cv_terms[1], 0.0);
        // Regularized leading term against the saturation-truncated form.
        let regularized = cv_terms[2];
        let quoted = cv_high_t_leading(&b, t).cv;
        assert_relative_eq!(regularized / quoted, -0.25, max_relative = 1e-12);
        assert!(fe.regularization.contains("eta"));
        // Leading term vanishes at r = sqrt 2.
        let fe = free_energy_high_t(&bath(2f64.sqrt()), t);
        assert!(fe.cv_terms(t)[2].abs() < 1e-15);
    }

    #[test]
    fn regularized_sums_are_abel_limits() {
        // sum (-1)^(n-1) n^k x^n as x -> 1-.
        let x: f64 = 1.0 - 1e-5;
        let s1 = x / (1.0 + x) / (1.0 + x);
        let s2 = x * (1.0 - x) / (1.0 + x).powi(3);
        let s3 = x * (1.0 - 4.0 * x + x * x) / (1.0 + x).powi(4);
        assert!((s1 - eta_regularized(1).unwrap()).abs() < 1e-4);
        assert!((s2 - eta_regularized(2).unwrap()).abs() < 1e-4);
        assert!((s3 - eta_regularized(3).unwrap()).abs() < 1e-4);
        assert!(eta_regularized(4).is_none());
    }
}
