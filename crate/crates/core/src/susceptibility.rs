//! Linear response of the damped system.
//!
//! For Ohmic friction the susceptibility is `kappa(w) = 1/(w0^2 - w^2 - i w g0)`
//! and its density-of-states weight `W(w) = Im d/dw ln kappa(w)` splits into
//! two Lorentzian-like partial fractions over the complex roots `z`, `z*`.
//! The finite-bath response has poles at the system-plus-bath normal modes
//! and zeros at the bare bath frequencies.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ohmic dissipation model: system frequency and constant friction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OhmicBath {
    omega0: f64,
    gamma0: f64,
}

impl OhmicBath {
    pub fn new(omega0: f64, gamma0: f64) -> Result<Self> {
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::invalid("omega0", format!("must be finite and > 0, got {omega0}")));
        }
        if !(gamma0 > 0.0 && gamma0.is_finite()) {
            return Err(Error::invalid("gamma0", format!("must be finite and > 0, got {gamma0}")));
        }
        if !(gamma0 / omega0).is_finite() {
            return Err(Error::invalid("gamma0", "ratio gamma0/omega0 overflows"));
        }
        Ok(Self { omega0, gamma0 })
    }

    /// Bath in reduced units (`omega0 = 1`) with the given damping ratio.
    pub fn from_ratio(ratio: f64) -> Result<Self> {
        Self::new(1.0, ratio)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// `gamma0 / omega0`.
    pub fn ratio(&self) -> f64 {
        self.gamma0 / self.omega0
    }

    /// The same bath expressed with `omega0 = 1`.
    pub fn reduced(&self) -> Self {
        Self {
            omega0: 1.0,
            gamma0: self.ratio(),
        }
    }
}

/// Roots `z, z*` of `lambda^2 - gamma0 lambda + omega0^2 = 0` and `omega1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexRoots {
    pub z: Complex64,
    pub z_star: Complex64,
    pub omega1: Complex64,
}

impl ComplexRoots {
    pub fn is_real(&self) -> bool {
        self.z.im == 0.0 && self.z_star.im == 0.0
    }
}

/// `z = g0/2 + i w1`, `z* = g0/2 - i w1`, `w1 = sqrt(w0^2 - g0^2/4)`.
///
/// Overdamped baths take `w1 = -i sqrt(g0^2/4 - w0^2)`, which makes `z` the
/// larger and `z*` the smaller of two positive real roots.
pub fn roots(bath: &OhmicBath) -> ComplexRoots {
    let half = 0.5 * bath.gamma0;
    let disc = bath.omega0 * bath.omega0 - half * half;
    let omega1 = if disc >= 0.0 {
        Complex64::new(disc.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, -(-disc).sqrt())
    };
    let i = Complex64::i();
    let z = half + i * omega1;
    let z_star = half - i * omega1;
    // Keep exact realness in the overdamped branch.
    let (z, z_star) = if disc < 0.0 {
        (Complex64::new(z.re, 0.0), Complex64::new(z_star.re, 0.0))
    } else {
        (z, z_star)
    };
    ComplexRoots { z, z_star, omega1 }
}

/// `kappa(w) = [-w^2 + w0^2 - i w g0]^-1`.
pub fn kappa(omega: f64, bath: &OhmicBath) -> Complex64 {
    let d = Complex64::new(
        bath.omega0 * bath.omega0 - omega * omega,
        -omega * bath.gamma0,
    );
    d.inv()
}

/// `W(w) = g0 (w^2 + w0^2) / ((w^2 - w0^2)^2 + g0^2 w^2)`, the imaginary part of
/// the logarithmic derivative of `kappa`.
pub fn spectral_weight(omega: f64, bath: &OhmicBath) -> f64 {
    let w2 = omega * omega;
    let w02 = bath.omega0 * bath.omega0;
    let g = bath.gamma0;
    let detune = w2 - w02;
    g * (w2 + w02) / (detune * detune + g * g * w2)
}

/// `W(w)` through the partial fractions `z/(w^2+z^2) + z*/(w^2+z*^2)`.
pub fn spectral_weight_from_roots(omega: f64, roots: &ComplexRoots) -> f64 {
    let w2 = omega * omega;
    let term = |z: Complex64| z / (w2 + z * z);
    (term(roots.z) + term(roots.z_star)).re
}

/// `(1/pi) int_0^inf W(w) dw` from the partial fractions.
///
/// Each fraction contributes `(1/pi) * lim arctan(L/z) = sign(Re z)/2`.
pub fn weight_normalization(bath: &OhmicBath) -> f64 {
    let r = roots(bath);
    [r.z, r.z_star]
        .iter()
        .map(|z| (0.5 * PI * z.re.signum()) / PI)
        .sum()
}

/// Bath mode frequencies `omega_k` and couplings `c_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCoupling {
    omega_k: Vec<f64>,
    c_k: Vec<f64>,
}

impl DiscreteCoupling {
    pub fn new(omega_k: Vec<f64>, c_k: Vec<f64>) -> Result<Self> {
        if omega_k.len() != c_k.len() {
            return Err(Error::invalid(
                "c_k",
                format!("{} couplings for {} frequencies", c_k.len(), omega_k.len()),
            ));
        }
        if omega_k.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::invalid("omega_k", "frequencies must be finite and > 0"));
        }
        if omega_k.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("omega_k", "frequencies must be strictly increasing"));
        }
        if c_k.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
            return Err(Error::invalid("c_k", "couplings must be finite and >= 0"));
        }
        Ok(Self { omega_k, c_k })
    }

    pub fn empty() -> Self {
        Self {
            omega_k: Vec::new(),
            c_k: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.omega_k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_k.is_empty()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.omega_k
    }

    pub fn couplings(&self) -> &[f64] {
        &self.c_k
    }

    pub fn modes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.omega_k.iter().copied().zip(self.c_k.iter().copied())
    }

    /// `sum_k c_k^2 / omega_k^2`, the counterterm (and the kernel at `t = 0`).
    pub fn counterterm(&self) -> f64 {
        crate::accel::compensated_sum(self.modes().map(|(w, c)| c * c / (w * w)))
    }
}

/// `1/kappa(w) = -(w^2 - w0^2) + sum_k (c_k^2/w_k^2) w^2/(w^2 - w_k^2)` as a
/// function of `s = w^2`.
fn inverse_kappa_sq(s: f64, omega0: f64, coupling: &DiscreteCoupling) -> f64 {
    let mut acc = omega0 * omega0 - s;
    for (w, c) in coupling.modes() {
        if c > 0.0 {
            acc += (c * c / (w * w)) * s / (s - w * w);
        }
    }
    acc
}

/// Inverse finite-bath susceptibility; infinite at coupled bath frequencies.
pub fn inverse_kappa_discrete(omega: f64, omega0: f64, coupling: &DiscreteCoupling) -> f64 {
    inverse_kappa_sq(omega * omega, omega0, coupling)
}

/// Finite-bath susceptibility.
///
/// Errors with [`Error::Singular`] exactly at a coupled bath frequency (a zero
/// of `kappa`) or a normal-mode frequency (a pole).
pub fn kappa_discrete(omega: f64, omega0: f64, coupling: &DiscreteCoupling) -> Result<f64> {
    if coupling.modes().any(|(w, c)| c > 0.0 && w == omega) {
        return Err(Error::Singular { omega });
    }
    let inv = inverse_kappa_discrete(omega, omega0, coupling);
    if inv == 0.0 || !inv.is_finite() {
        return Err(Error::Singular { omega });
    }
    Ok(1.0 / inv)
}

/// Zeros of `1/kappa`: the system-plus-bath normal-mode frequencies, ascending.
///
/// `1/kappa` is strictly decreasing in `w^2` between consecutive poles, so each
/// interval holds exactly one root, located by bisection to full precision.
/// Uncoupled modes (`c_k = 0`) are their own normal modes.
pub fn response_zeros(omega0: f64, coupling: &DiscreteCoupling) -> Vec<f64> {
    let poles: Vec<f64> = coupling
        .modes()
        .filter(|&(_, c)| c > 0.0)
        .map(|(w, _)| w * w)
        .collect();
    let h = |s: f64| inverse_kappa_sq(s, omega0, coupling);

    let mut upper = poles.last().copied().unwrap_or(0.0).max(omega0 * omega0) * 2.0 + 1.0;
    upper += coupling.counterterm();
    while h(upper) >= 0.0 {
        upper *= 2.0;
    }

    let mut edges = Vec::with_capacity(poles.len() + 2);
    edges.push(0.0);
    edges.extend(poles.iter().copied());
    edges.push(upper);

    let mut out: Vec<f64> = edges
        .windows(2)
        .map(|e| bisect_decreasing(&h, e[0], e[1]).sqrt())
        .collect();
    out.extend(coupling.modes().filter(|&(_, c)| c == 0.0).map(|(w, _)| w));
    out.sort_by(f64::total_cmp);
    out
}

fn bisect_decreasing(h: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}
