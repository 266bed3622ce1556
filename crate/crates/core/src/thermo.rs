//! Free energy, entropy and specific heat of the damped spin.
//!
//! `F(theta) = (1/pi) int_0^inf f(w, theta) W(w) dw` with the two-level free
//! energy `f = -theta ln(1 + exp(-w/theta))`. Entropy and specific heat come
//! from the analytic temperature derivatives of `f` taken under the integral.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{breakpoints, integrate_semi_infinite, QuadOptions};
use crate::susceptibility::{roots, spectral_weight, OhmicBath};

/// `theta = k_B T / (hbar omega0)`, strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ReducedTemperature(f64);

impl ReducedTemperature {
    pub fn new(theta: f64) -> Result<Self> {
        if theta > 0.0 && theta.is_finite() {
            Ok(Self(theta))
        } else {
            Err(Error::invalid("theta", format!("must be finite and > 0, got {theta}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ReducedTemperature {
    type Error = Error;
    fn try_from(theta: f64) -> Result<Self> {
        Self::new(theta)
    }
}

impl From<ReducedTemperature> for f64 {
    fn from(t: ReducedTemperature) -> f64 {
        t.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub theta: ReducedTemperature,
    pub free_energy: f64,
    pub entropy: f64,
    pub cv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    theta_min: ReducedTemperature,
    theta_max: ReducedTemperature,
    points: usize,
    spacing: Spacing,
}

impl ScanGrid {
    pub fn new(theta_min: f64, theta_max: f64, points: usize, spacing: Spacing) -> Result<Self> {
        let lo = ReducedTemperature::new(theta_min)?;
        let hi = ReducedTemperature::new(theta_max)?;
        if !(theta_min < theta_max) {
            return Err(Error::invalid("theta_max", "must exceed theta_min"));
        }
        if points < 2 {
            return Err(Error::invalid("points", "need at least two grid points"));
        }
        Ok(Self {
            theta_min: lo,
            theta_max: hi,
            points,
            spacing,
        })
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min.value()
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max.value()
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// Grid nodes in increasing order; both endpoints are reproduced exactly.
    pub fn nodes(&self) -> Vec<f64> {
        let (lo, hi) = (self.theta_min(), self.theta_max());
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return lo;
                }
                if i == self.points - 1 {
                    return hi;
                }
                let s = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => lo + s * (hi - lo),
                    Spacing::Logarithmic => (lo.ln() + s * (hi.ln() - lo.ln())).exp(),
                }
            })
            .collect()
    }
}

/// `-theta ln(1 + exp(-w/theta))`.
pub fn fermi_mode_f(omega: f64, theta: ReducedTemperature) -> f64 {
    let t = theta.value();
    -t * (-omega / t).exp().ln_1p()
}

/// `-d f / d theta = ln(1 + e^-u) + u/(e^u + 1)`, `u = w/theta`.
pub fn fermi_mode_entropy(omega: f64, theta: ReducedTemperature) -> f64 {
    let u = omega / theta.value();
    let e = (-u).exp();
    e.ln_1p() + u * e / (1.0 + e)
}

/// `-theta d^2 f / d theta^2 = (u/2)^2 sech^2(u/2)`, `u = w/theta`.
pub fn fermi_mode_cv(omega: f64, theta: ReducedTemperature) -> f64 {
    let u = omega / theta.value();
    let e = (-u).exp();
    let d = 1.0 + e;
    u * u * e / (d * d)
}

fn quad_options() -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-13,
        abs_tol: 0.0,
        max_intervals: 8000,
    }
}

/// Breakpoints for `(1/pi) int kernel(w/theta) W(w) dw` on a bath with `omega0 = 1`:
/// the resonance (or the two overdamped scales) and the thermal cutoff.
pub(crate) fn weight_breakpoints(bath: &OhmicBath, theta: f64) -> Vec<f64> {
    let r = roots(bath);
    let mut cands = vec![bath.omega0()];
    if r.is_real() {
        for z in [r.z.re, r.z_star.re] {
            cands.extend([0.25 * z, z, 4.0 * z]);
        }
    } else {
        let w1 = r.omega1.re;
        let half = 0.5 * bath.gamma0();
        cands.extend([0.5 * w1, w1, 2.0 * w1]);
        for k in [1.0, 4.0, 16.0] {
            cands.push(w1 - k * half);
            cands.push(w1 + k * half);
        }
    }
    cands.extend([theta, 5.0 * theta, 40.0 * theta]);
    let hi = cands.iter().copied().fold(0.0, f64::max);
    breakpoints(0.0, hi, cands)
}

fn weighted_integral(bath: &OhmicBath, theta: f64, kernel: impl Fn(f64) -> f64) -> Result<f64> {
    let b = bath.reduced();
    let pts = weight_breakpoints(&b, theta);
    let res = integrate_semi_infinite(|w| kernel(w) * spectral_weight(w, &b), &pts, &quad_options())?;
    Ok(res.value / PI)
}

/// Free energy in units of `hbar omega0`.
pub fn free_energy(bath: &OhmicBath, theta: ReducedTemperature) -> Result<f64> {
    weighted_integral(bath, theta.value(), |w| fermi_mode_f(w, theta))
}

/// Entropy in units of `k_B`.
pub fn entropy(bath: &OhmicBath, theta: ReducedTemperature) -> Result<f64> {
    weighted_integral(bath, theta.value(), |w| fermi_mode_entropy(w, theta))
}

/// Specific heat in units of `k_B`.
pub fn specific_heat(bath: &OhmicBath, theta: ReducedTemperature) -> Result<f64> {
    weighted_integral(bath, theta.value(), |w| fermi_mode_cv(w, theta))
}

pub fn thermo_point(bath: &OhmicBath, theta: ReducedTemperature) -> Result<ThermoPoint> {
    let wrap = |e: Error| Error::AtTemperature {
        theta: theta.value(),
        source: Box::new(e),
    };
    Ok(ThermoPoint {
        theta,
        free_energy: free_energy(bath, theta).map_err(wrap)?,
        entropy: entropy(bath, theta).map_err(wrap)?,
        cv: specific_heat(bath, theta).map_err(wrap)?,
    })
}

/// Mean energy of an isolated spin, `-(1/2) tanh(1/(2 theta))`.
pub fn single_spin_energy(theta: ReducedTemperature) -> f64 {
    -0.5 * (0.5 / theta.value()).tanh()
}

/// Schottky heat capacity of an isolated spin.
pub fn single_spin_cv(theta: ReducedTemperature) -> f64 {
    fermi_mode_cv(1.0, theta)
}

/// One point per grid node, in grid order.
///
/// Nodes are evaluated in parallel; the first failing node (in grid order) is reported.
pub fn thermo_scan(bath: &OhmicBath, grid: &ScanGrid) -> Result<Vec<ThermoPoint>> {
    let results: Vec<Result<ThermoPoint>> = grid
        .nodes()
        .into_par_iter()
        .map(|t| thermo_point(bath, ReducedTemperature::new(t)?))
        .collect();
    results.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub theta_r: ReducedTemperature,
    pub cv_peak: f64,
}

/// Coarse grid density of the peak search, per decade of theta.
const PEAK_GRID_PER_DECADE: usize = 24;

/// Location and height of the specific-heat maximum inside `[lo, hi]`.
///
/// Every interior local maximum of a coarse logarithmic grid is refined by
/// golden-section search; the highest refined peak wins. Strong damping gives
/// two well separated peaks of comparable height, so all of them are refined
/// before comparing.
pub fn transition_temperature(bath: &OhmicBath, window: (f64, f64)) -> Result<Transition> {
    let (lo, hi) = window;
    let grid = {
        let decades = (hi / lo).log10().max(0.0);
        let n = ((decades * PEAK_GRID_PER_DECADE as f64).ceil() as usize).max(8) + 1;
        ScanGrid::new(lo, hi, n, Spacing::Logarithmic)?
    };
    let nodes = grid.nodes();
    let cv = |t: f64| -> Result<f64> {
        specific_heat(bath, ReducedTemperature::new(t)?).map_err(|e| Error::AtTemperature {
            theta: t,
            source: Box::new(e),
        })
    };
    let values = nodes
        .par_iter()
        .map(|&t| cv(t))
        .collect::<Vec<Result<f64>>>()
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;

    let mut best: Option<(f64, f64)> = None;
    for i in 1..nodes.len() - 1 {
        if values[i] >= values[i - 1] && values[i] > values[i + 1] {
            let (t, v) = golden_max(|x| cv(x.exp()), nodes[i - 1].ln(), nodes[i + 1].ln())?;
            let t = t.exp();
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((t, v));
            }
        }
    }
    let (t, v) = best.ok_or(Error::Bracket { lo, hi })?;
    Ok(Transition {
        theta_r: ReducedTemperature::new(t)?,
        cv_peak: v,
    })
}

fn golden_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > 1e-8 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Ordinary least-squares line with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("x", "need at least two paired samples"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("x", "abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Local exponent `d ln Cv / d ln theta` from a symmetric difference.
pub fn cv_log_slope(bath: &OhmicBath, theta: ReducedTemperature) -> Result<f64> {
    let t = theta.value();
    let h: f64 = 1e-3;
    let up = specific_heat(bath, ReducedTemperature::new(t * h.exp())?)?;
    let down = specific_heat(bath, ReducedTemperature::new(t * (-h).exp())?)?;
    Ok((up.ln() - down.ln()) / (2.0 * h))
}
