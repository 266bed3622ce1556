//! Special functions used by the low- and high-temperature expansions.
//!
//! Integer-argument zeta and Gamma, Fermi–Dirac integrals, and the sine and
//! cosine integrals continued into the right half-plane. All functions are
//! pure.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::accel::cvz_alternating;
use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest `n` for which `Gamma(n) = (n-1)!` is finite in `f64`.
pub const GAMMA_INT_MAX: u32 = 171;

#[allow(clippy::excessive_precision)]
const ZETA_TABLE: [f64; 19] = [
    1.6449340668482264365, // zeta(2)
    1.2020569031595942854,
    1.0823232337111381915,
    1.0369277551433699263,
    1.0173430619844491397,
    1.0083492773819228268,
    1.0040773561979443394,
    1.0020083928260822144,
    1.0009945751278180853,
    1.0004941886041194646,
    1.0002460865533080483,
    1.0001227133475784891,
    1.0000612481350587048,
    1.0000305882363070205,
    1.0000152822594086519,
    1.0000076371976378998,
    1.0000038172932649998,
    1.0000019082127165539,
    1.0000009539620338728, // zeta(20)
];

pub fn euler_gamma() -> f64 {
    EULER_GAMMA
}

/// Riemann zeta at integer `s >= 2`.
pub fn zeta_int(s: u32) -> Result<f64> {
    if s < 2 {
        return Err(Error::domain("zeta_int", format!("s = {s} < 2")));
    }
    if let Some(&v) = ZETA_TABLE.get((s - 2) as usize) {
        return Ok(v);
    }
    // Beyond the table the Dirichlet eta series is accelerated and rescaled.
    let sf = s as f64;
    let terms: Vec<f64> = (1..=30).map(|k| (k as f64).powf(-sf)).collect();
    let eta = cvz_alternating(&terms);
    Ok(eta / (1.0 - 2f64.powf(1.0 - sf)))
}

/// `Gamma(n) = (n-1)!` for `1 <= n <= 171`.
pub fn gamma_int(n: u32) -> Result<f64> {
    if n == 0 || n > GAMMA_INT_MAX {
        return Err(Error::domain(
            "gamma_int",
            format!("n = {n} outside 1..={GAMMA_INT_MAX}"),
        ));
    }
    Ok((1..n).fold(1.0, |acc, k| acc * k as f64))
}

/// `int_0^inf x^m / (e^x + 1) dx = (1 - 2^-m) zeta(m+1) Gamma(m+1)`.
pub fn fermi_integral(m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("fermi_integral", "m must be at least 1"));
    }
    let eta_factor = 1.0 - 2f64.powi(-(m as i32));
    Ok(eta_factor * zeta_int(m + 1)? * gamma_int(m + 1)?)
}

/// Cosine integral, sine integral and the auxiliary function
/// `f(x) = Ci(x) sin x + cos x (pi/2 - Si(x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxCiSi {
    pub ci: Complex64,
    pub si: Complex64,
    pub aux_f: Complex64,
}

/// `Ci`, `Si` and the auxiliary `f` for `Re x > 0`.
///
/// Evaluated through the scaled exponential integral `e^z E1(z)` at `z = ±ix`.
/// `aux_f` is formed from the scaled values directly, so it stays accurate
/// where `Ci` and `Si` individually grow like `e^|Im x|`.
pub fn cisi(x: Complex64) -> Result<AuxCiSi> {
    check_half_plane("cisi", x)?;
    let (plus, minus) = scaled_e1_pair(x)?;
    let i = Complex64::i();
    let e1_plus = plus * (-i * x).exp();
    let e1_minus = minus * (i * x).exp();
    let mut ci = -(e1_plus + e1_minus) * 0.5;
    let mut si = (e1_plus - e1_minus) / (2.0 * i) + FRAC_PI_2;
    let mut aux_f = i * 0.5 * (plus - minus);
    if x.im == 0.0 {
        ci.im = 0.0;
        si.im = 0.0;
        aux_f.im = 0.0;
    }
    Ok(AuxCiSi { ci, si, aux_f })
}

/// The auxiliary function `f(x) = int_0^inf e^{-xt} / (1 + t^2) dt` alone.
///
/// For `|x| >= 40` the asymptotic series `(1/x) sum (-1)^k (2k)!/x^(2k)` is
/// summed to its smallest term; its error is of order `e^-|x|` throughout the
/// right half-plane, including near the imaginary axis where `E1(ix)` sits
/// close to its branch cut.
pub fn aux_f(x: Complex64) -> Result<Complex64> {
    check_half_plane("aux_f", x)?;
    if x.norm() >= AUX_ASYMPTOTIC_RADIUS {
        return Ok(aux_f_asymptotic(x));
    }
    let (plus, minus) = scaled_e1_pair(x)?;
    let mut f = Complex64::i() * 0.5 * (plus - minus);
    if x.im == 0.0 {
        f.im = 0.0;
    }
    Ok(f)
}

const AUX_ASYMPTOTIC_RADIUS: f64 = 40.0;

fn aux_f_asymptotic(x: Complex64) -> Complex64 {
    let inv2 = (x * x).inv();
    let mut term = x.inv();
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        let next = -term * inv2 * ((2.0 * kf) * (2.0 * kf - 1.0));
        if next.norm() >= term.norm() || next.norm() <= f64::EPSILON * 0.25 * sum.norm() {
            break;
        }
        sum += next;
        term = next;
    }
    if x.im == 0.0 {
        sum.im = 0.0;
    }
    sum
}

fn check_half_plane(function: &'static str, x: Complex64) -> Result<()> {
    if x == Complex64::new(0.0, 0.0) {
        return Err(Error::domain(function, "Ci is log-singular at x = 0"));
    }
    if !(x.re > 0.0) || !x.im.is_finite() {
        return Err(Error::domain(
            function,
            format!("requires Re x > 0, got {x}"),
        ));
    }
    Ok(())
}

/// `(e^{ix} E1(ix), e^{-ix} E1(-ix))`; the second is the conjugate of the first on the real axis.
fn scaled_e1_pair(x: Complex64) -> Result<(Complex64, Complex64)> {
    let i = Complex64::i();
    let plus = exp_e1(i * x)?;
    let minus = if x.im == 0.0 {
        plus.conj()
    } else {
        exp_e1(-i * x)?
    };
    Ok((plus, minus))
}

/// Scaled exponential integral `e^z E1(z)` for `z` off the negative real axis.
pub fn exp_e1(z: Complex64) -> Result<Complex64> {
    let r = z.norm();
    if r == 0.0 {
        return Err(Error::domain("exp_e1", "E1 is log-singular at z = 0"));
    }
    // The continued fraction stalls close to the negative real axis at moderate |z|;
    // the power series has no cancellation there because its terms share one sign.
    let near_cut = z.re < 0.0 && r + z.re <= 6.0 && r <= 60.0;
    if r <= 4.0 || near_cut {
        Ok(z.exp() * e1_series(z))
    } else {
        exp_e1_continued_fraction(z)
    }
}

fn e1_series(z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..2000 {
        let kf = k as f64;
        term = term * (-z) / kf;
        let contribution = term / kf;
        sum += contribution;
        if kf > z.norm() && contribution.norm() <= f64::EPSILON * 0.25 * sum.norm() {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

fn exp_e1_continued_fraction(z: Complex64) -> Result<Complex64> {
    const TINY: f64 = 1e-300;
    const MAX_ITER: usize = 20_000;
    let mut b = z + 1.0;
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -((i * i) as f64);
        b += 2.0;
        d = Complex64::new(1.0, 0.0) / (d * an + b);
        c = b + c.inv() * an;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::SeriesNonConvergence {
        terms: MAX_ITER,
        partial: h.norm(),
        residual: f64::NAN,
    })
}
