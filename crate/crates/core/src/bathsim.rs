//! A finite harmonic bath realizing the Ohmic spectral density.
//!
//! The bath is `J(w) = gamma0 w` up to a sharp cutoff, split into `N` bins
//! with one mode per bin and `c_k^2 = (2/pi) J(w_k) w_k dw_k`. It backs three
//! independent checks of the continuum results: normal modes and the
//! free-energy difference they imply, the statistics of the c-number noise,
//! and symplectic integration of the coupled equations of motion.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accel::{compensated_sum, CompensatedSum};
use crate::error::{Error, Result};
use crate::quad::{integrate_pieces, QuadOptions};
use crate::susceptibility::DiscreteCoupling;
use crate::thermo::{fermi_mode_f, ReducedTemperature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyScheme {
    /// Equal bins, mode at each bin centre.
    Linear,
    /// A first bin `[0, w_c/N^2]` followed by geometrically growing bins; modes at
    /// geometric bin centres.
    Logarithmic,
}

/// Ohmic `J(w) = gamma0 w` on `[0, cutoff]`, in units of `omega0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensitySpec {
    pub gamma0: f64,
    pub cutoff: f64,
    pub n_modes: usize,
    pub scheme: FrequencyScheme,
}

pub const DEFAULT_CUTOFF: f64 = 50.0;

impl SpectralDensitySpec {
    pub fn new(gamma0: f64, cutoff: f64, n_modes: usize, scheme: FrequencyScheme) -> Result<Self> {
        if !(gamma0 > 0.0 && gamma0.is_finite()) {
            return Err(Error::invalid("gamma0", format!("must be finite and > 0, got {gamma0}")));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::invalid("cutoff", format!("must be finite and > 0, got {cutoff}")));
        }
        if n_modes == 0 {
            return Err(Error::invalid("n_modes", "need at least one mode"));
        }
        if cutoff < 10.0 {
            log::warn!("cutoff {cutoff} is below 10 omega0; the bath is far from Ohmic near the system frequency");
        }
        Ok(Self {
            gamma0,
            cutoff,
            n_modes,
            scheme,
        })
    }

    /// `(2/pi) int_0^cutoff J(w)/w^2 dw`.
    pub fn kernel_at_zero(&self) -> f64 {
        2.0 / PI * self.gamma0 * self.cutoff
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBath {
    coupling: DiscreteCoupling,
    /// Continuum value of `sum_k c_k^2/w_k^2`.
    pub kernel_target: f64,
    /// Largest deviation of the discrete cumulative kernel weight
    /// `sum_{w_k <= w} c_k^2/w_k^2` from its continuum counterpart, relative to
    /// `kernel_target`. First order in the bin width.
    pub kernel_error: f64,
}

impl DiscreteBath {
    /// A bath from explicit modes; the continuum target is taken to be its own kernel.
    pub fn from_coupling(coupling: DiscreteCoupling) -> Self {
        let kernel_target = coupling.counterterm();
        Self {
            coupling,
            kernel_target,
            kernel_error: 0.0,
        }
    }

    pub fn coupling(&self) -> &DiscreteCoupling {
        &self.coupling
    }

    pub fn len(&self) -> usize {
        self.coupling.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coupling.is_empty()
    }

    pub fn frequencies(&self) -> &[f64] {
        self.coupling.frequencies()
    }

    pub fn couplings(&self) -> &[f64] {
        self.coupling.couplings()
    }

    pub fn max_frequency(&self) -> f64 {
        self.frequencies().last().copied().unwrap_or(0.0)
    }
}

fn bin_edges(spec: &SpectralDensitySpec) -> Vec<f64> {
    let n = spec.n_modes;
    let wc = spec.cutoff;
    match spec.scheme {
        FrequencyScheme::Linear => (0..=n).map(|j| wc * j as f64 / n as f64).collect(),
        FrequencyScheme::Logarithmic => {
            let mut edges = vec![0.0];
            if n == 1 {
                edges.push(wc);
                return edges;
            }
            let first = wc / (n * n) as f64;
            let ratio = (wc / first).ln();
            for j in 1..=n {
                let s = (j - 1) as f64 / (n - 1) as f64;
                edges.push(if j == n { wc } else { first * (ratio * s).exp() });
            }
            edges
        }
    }
}

pub fn discretize(spec: &SpectralDensitySpec) -> DiscreteBath {
    let edges = bin_edges(spec);
    let mut omega = Vec::with_capacity(spec.n_modes);
    let mut c = Vec::with_capacity(spec.n_modes);
    for e in edges.windows(2) {
        let (lo, hi) = (e[0], e[1]);
        let w = match spec.scheme {
            FrequencyScheme::Logarithmic if lo > 0.0 => (lo * hi).sqrt(),
            _ => 0.5 * (lo + hi),
        };
        let j = spec.gamma0 * w;
        omega.push(w);
        c.push((2.0 / PI * j * w * (hi - lo)).sqrt());
    }
    let coupling = DiscreteCoupling::new(omega, c).expect("bins are ordered and couplings real");

    // The cumulative weight is a staircase; its worst deviation from the
    // continuum line occurs at a bin edge or just before a step.
    let slope = 2.0 / PI * spec.gamma0;
    let mut cumulative = 0.0;
    let mut worst: f64 = 0.0;
    for (k, (w, ck)) in coupling.modes().enumerate() {
        worst = worst.max((slope * w - cumulative).abs());
        cumulative += ck * ck / (w * w);
        worst = worst.max((slope * w - cumulative).abs());
        worst = worst.max((slope * edges[k + 1] - cumulative).abs());
    }
    let kernel_target = spec.kernel_at_zero();
    DiscreteBath {
        coupling,
        kernel_target,
        kernel_error: worst / kernel_target,
    }
}

/// `gamma(t) = sum_k (c_k^2/w_k^2) cos(w_k t)`.
pub fn memory_kernel(bath: &DiscreteBath, t: f64) -> f64 {
    compensated_sum(bath.coupling.modes().map(|(w, c)| c * c / (w * w) * (w * t).cos()))
}

/// Sharp-cutoff Ohmic kernel `(2/pi) gamma0 sin(w_c t)/t`.
pub fn continuum_kernel(gamma0: f64, cutoff: f64, t: f64) -> f64 {
    if t == 0.0 {
        2.0 / PI * gamma0 * cutoff
    } else {
        2.0 / PI * gamma0 * (cutoff * t).sin() / t
    }
}

/// System coordinate and momentum plus bath coordinates and momenta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub r: f64,
    pub rho: f64,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl PhaseState {
    pub fn at_rest(n_modes: usize) -> Self {
        Self {
            r: 0.0,
            rho: 0.0,
            alphas: vec![0.0; n_modes],
            betas: vec![0.0; n_modes],
        }
    }
}

/// Variances `(Var alpha_k, Var beta_k) = (tanh(w/2theta)/(2w), (w/2) tanh(w/2theta))`.
pub fn mode_variances(omega: f64, theta: ReducedTemperature) -> (f64, f64) {
    let t = (0.5 * omega / theta.value()).tanh();
    (t / (2.0 * omega), 0.5 * omega * t)
}

/// Bath initial conditions drawn from the spin-bath Gaussian; `r = rho = 0`.
pub fn sample_initial(bath: &DiscreteBath, theta: ReducedTemperature, seed: u64) -> PhaseState {
    sample_initial_stream(bath, theta, seed, 0)
}

/// As [`sample_initial`] on an independent stream, so ensemble member `stream`
/// is the same whichever thread draws it.
pub fn sample_initial_stream(bath: &DiscreteBath, theta: ReducedTemperature, seed: u64, stream: u64) -> PhaseState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut state = PhaseState::at_rest(bath.len());
    for (k, &w) in bath.frequencies().iter().enumerate() {
        let (va, vb) = mode_variances(w, theta);
        let za: f64 = rng.sample(StandardNormal);
        let zb: f64 = rng.sample(StandardNormal);
        state.alphas[k] = va.sqrt() * za;
        state.betas[k] = vb.sqrt() * zb;
    }
    state
}

/// `eta(t) = sum_k c_k alpha_k(0) cos(w_k t) + (c_k/w_k) beta_k(0) sin(w_k t)`.
pub fn noise_trajectory(bath: &DiscreteBath, initial: &PhaseState, t_grid: &[f64]) -> Vec<f64> {
    t_grid
        .iter()
        .map(|&t| {
            compensated_sum(bath.coupling.modes().enumerate().map(|(k, (w, c))| {
                let (s, co) = (w * t).sin_cos();
                c * initial.alphas[k] * co + c / w * initial.betas[k] * s
            }))
        })
        .collect()
}

/// Noise on the uniform grid `t_i = i h`, `i < n`, by rotating each mode's phasor.
fn noise_on_uniform_grid(bath: &DiscreteBath, initial: &PhaseState, h: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (k, (w, c)) in bath.coupling.modes().enumerate() {
        let a = c * initial.alphas[k];
        let b = c / w * initial.betas[k];
        let (s1, c1) = (w * h).sin_cos();
        let (mut s, mut co) = (0.0f64, 1.0f64);
        for (i, slot) in out.iter_mut().enumerate() {
            // Re-anchor periodically so the rotation error stays at rounding level.
            if i % 64 == 0 {
                let (si, ci) = (w * h * i as f64).sin_cos();
                s = si;
                co = ci;
            }
            *slot += a * co + b * s;
            let next_c = co * c1 - s * s1;
            s = s * c1 + co * s1;
            co = next_c;
        }
    }
    out
}

/// Discrete-bath target `sum_k c_k^2/(2 w_k) tanh(w_k/2theta) cos(w_k tau)`.
pub fn noise_correlation_target(bath: &DiscreteBath, theta: ReducedTemperature, tau: f64) -> f64 {
    compensated_sum(
        bath.coupling
            .modes()
            .map(|(w, c)| c * c / (2.0 * w) * (0.5 * w / theta.value()).tanh() * (w * tau).cos()),
    )
}

/// Continuum counterpart `(2/pi) int_0^{w_c} (J(w)/w) (w/2) tanh(w/2theta) cos(w tau) dw`.
pub fn continuum_noise_correlation(spec: &SpectralDensitySpec, theta: ReducedTemperature, tau: f64) -> Result<f64> {
    let wc = spec.cutoff;
    // One piece per half period of the cosine keeps every piece non-oscillatory.
    let pieces = ((wc * tau.abs() / PI).ceil() as usize).clamp(8, 4096);
    let pts: Vec<f64> = (0..=pieces).map(|i| wc * i as f64 / pieces as f64).collect();
    let opts = QuadOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-14 * spec.gamma0 * wc * wc,
        max_intervals: 20_000,
    };
    let res = integrate_pieces(
        |w: f64| spec.gamma0 * 0.5 * w * (0.5 * w / theta.value()).tanh() * (w * tau).cos(),
        &pts,
        &opts,
    )?;
    Ok(2.0 / PI * res.value)
}

/// Lag layout of the noise autocorrelation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdrSetup {
    pub lag_step: f64,
    pub n_lags: usize,
    /// Each sample averages the lagged product over this many time origins,
    /// spaced one full lag window apart.
    pub n_origins: usize,
}

impl Default for FdrSetup {
    fn default() -> Self {
        Self {
            lag_step: 0.1,
            n_lags: 50,
            n_origins: 16,
        }
    }
}

impl FdrSetup {
    pub fn lags(&self) -> Vec<f64> {
        (0..self.n_lags).map(|j| j as f64 * self.lag_step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub lags: Vec<f64>,
    pub autocorr: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrReport {
    pub theta: f64,
    pub stats: EnsembleStats,
    /// Discrete-bath expectation at each lag.
    pub target: Vec<f64>,
    pub z_scores: Vec<f64>,
    /// Ensemble mean of the noise (origin-averaged) at each lag and its standard error.
    pub mean: Vec<f64>,
    pub mean_stderr: Vec<f64>,
    pub mean_z_scores: Vec<f64>,
    /// `|C(0) - sum_k c_k^2 tanh/(2 w_k)| / sum_k ...`.
    pub variance_rel_error: f64,
}

impl FdrReport {
    pub fn fraction_within(&self, sigmas: f64) -> f64 {
        let inside = self.z_scores.iter().filter(|z| z.abs() <= sigmas).count();
        inside as f64 / self.z_scores.len() as f64
    }

    pub fn max_abs_mean_z(&self) -> f64 {
        self.mean_z_scores.iter().fold(0.0, |m, z| m.max(z.abs()))
    }
}

/// Monte-Carlo check of the noise autocorrelation against the discrete target.
///
/// Sample `s` uses RNG stream `s` of `seed`; per-sample results are reduced in
/// sample order with compensated sums, so the report does not depend on the
/// number of worker threads.
pub fn verify_fdr(
    bath: &DiscreteBath,
    theta: ReducedTemperature,
    n_samples: usize,
    setup: &FdrSetup,
    seed: u64,
) -> Result<FdrReport> {
    if n_samples < 100 {
        return Err(Error::invalid("n_samples", format!("need at least 100, got {n_samples}")));
    }
    if setup.n_lags == 0 || setup.n_origins == 0 || !(setup.lag_step > 0.0) {
        return Err(Error::invalid("setup", "need positive lag step and at least one lag and origin"));
    }
    let (nl, no) = (setup.n_lags, setup.n_origins);
    let per_sample: Vec<(Vec<f64>, Vec<f64>)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|s| {
            let init = sample_initial_stream(bath, theta, seed, s);
            let eta = noise_on_uniform_grid(bath, &init, setup.lag_step, no * nl);
            let mut corr = vec![0.0; nl];
            let mut mean = vec![0.0; nl];
            for o in 0..no {
                let base = o * nl;
                for j in 0..nl {
                    corr[j] += eta[base] * eta[base + j];
                    mean[j] += eta[base + j];
                }
            }
            for j in 0..nl {
                corr[j] /= no as f64;
                mean[j] /= no as f64;
            }
            (corr, mean)
        })
        .collect();

    let n = n_samples as f64;
    let moments = |pick: &dyn Fn(&(Vec<f64>, Vec<f64>)) -> f64| -> (f64, f64) {
        let m = per_sample.iter().map(pick).collect::<CompensatedSum>().value() / n;
        let var = per_sample
            .iter()
            .map(|x| (pick(x) - m).powi(2))
            .collect::<CompensatedSum>()
            .value()
            / (n - 1.0);
        (m, (var / n).sqrt())
    };

    let lags = setup.lags();
    let mut autocorr = Vec::with_capacity(nl);
    let mut stderr = Vec::with_capacity(nl);
    let mut mean = Vec::with_capacity(nl);
    let mut mean_stderr = Vec::with_capacity(nl);
    for j in 0..nl {
        let (c, ce) = moments(&|x| x.0[j]);
        let (m, me) = moments(&|x| x.1[j]);
        autocorr.push(c);
        stderr.push(ce);
        mean.push(m);
        mean_stderr.push(me);
    }
    let target: Vec<f64> = lags.iter().map(|&t| noise_correlation_target(bath, theta, t)).collect();
    let z_scores = autocorr
        .iter()
        .zip(&target)
        .zip(&stderr)
        .map(|((a, t), e)| (a - t) / e)
        .collect();
    let mean_z_scores = mean.iter().zip(&mean_stderr).map(|(m, e)| m / e).collect();
    let variance_rel_error = ((autocorr[0] - target[0]) / target[0]).abs();
    Ok(FdrReport {
        theta: theta.value(),
        stats: EnsembleStats {
            lags,
            autocorr,
            stderr,
            n_samples,
        },
        target,
        z_scores,
        mean,
        mean_stderr,
        mean_z_scores,
        variance_rel_error,
    })
}

/// Total energy `rho^2/2 + w0^2 r^2/2 + sum_k [beta_k^2/2 + (w_k^2/2)(alpha_k - c_k r/w_k^2)^2]`.
pub fn energy(bath: &DiscreteBath, omega0: f64, state: &PhaseState) -> f64 {
    let system = 0.5 * state.rho * state.rho + 0.5 * omega0 * omega0 * state.r * state.r;
    let bath_part = compensated_sum(bath.coupling.modes().enumerate().map(|(k, (w, c))| {
        let shift = state.alphas[k] - c * state.r / (w * w);
        0.5 * state.betas[k] * state.betas[k] + 0.5 * w * w * shift * shift
    }));
    system + bath_part
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub energies: Vec<f64>,
}

fn accelerations(bath: &DiscreteBath, omega0: f64, s: &PhaseState, acc_r: &mut f64, acc_a: &mut [f64]) {
    let mut force = -omega0 * omega0 * s.r;
    for (k, (w, c)) in bath.coupling.modes().enumerate() {
        force += c * (s.alphas[k] - c * s.r / (w * w));
        acc_a[k] = -w * w * s.alphas[k] + c * s.r;
    }
    *acc_r = force;
}

/// Velocity-Verlet integration of the system and all bath modes.
///
/// The state is recorded every `record_every` steps (and at `t = 0`). Energy is
/// monitored at every recorded step; growth beyond ten times its initial value
/// aborts with [`Error::Instability`].
pub fn integrate(
    bath: &DiscreteBath,
    omega0: f64,
    initial: &PhaseState,
    dt: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", format!("must be finite and > 0, got {dt}")));
    }
    if record_every == 0 {
        return Err(Error::invalid("record_every", "must be at least 1"));
    }
    let n = bath.len();
    if initial.alphas.len() != n || initial.betas.len() != n {
        return Err(Error::invalid("initial", "bath coordinate count differs from the bath size"));
    }
    let mut s = initial.clone();
    let e0 = energy(bath, omega0, &s);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![s.clone()],
        energies: vec![e0],
    };
    let mut ar = 0.0;
    let mut aa = vec![0.0; n];
    accelerations(bath, omega0, &s, &mut ar, &mut aa);
    let half = 0.5 * dt;
    for step in 1..=n_steps {
        s.rho += half * ar;
        for k in 0..n {
            s.betas[k] += half * aa[k];
        }
        s.r += dt * s.rho;
        for k in 0..n {
            s.alphas[k] += dt * s.betas[k];
        }
        accelerations(bath, omega0, &s, &mut ar, &mut aa);
        s.rho += half * ar;
        for k in 0..n {
            s.betas[k] += half * aa[k];
        }
        if step % record_every == 0 || step == n_steps {
            let e = energy(bath, omega0, &s);
            if !e.is_finite() || e > 10.0 * e0 && e > 0.0 {
                return Err(Error::Instability {
                    step,
                    initial: e0,
                    current: e,
                });
            }
            traj.times.push(step as f64 * dt);
            traj.states.push(s.clone());
            traj.energies.push(e);
        }
    }
    Ok(traj)
}

/// Normal-mode frequencies from the dense eigenproblem of the coupled quadratic form
/// (diagonal `w0^2 + sum c_k^2/w_k^2, w_k^2`; off-diagonal `-c_k`), ascending.
pub fn normal_modes(bath: &DiscreteBath, omega0: f64) -> Result<Vec<f64>> {
    let n = bath.len() + 1;
    let mut m = DMatrix::<f64>::zeros(n, n);
    m[(0, 0)] = omega0 * omega0 + bath.coupling.counterterm();
    for (k, (w, c)) in bath.coupling.modes().enumerate() {
        m[(k + 1, k + 1)] = w * w;
        m[(0, k + 1)] = -c;
        m[(k + 1, 0)] = -c;
    }
    let eig = m.symmetric_eigenvalues();
    let mut sq: Vec<f64> = eig.iter().copied().collect();
    if sq.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    sq.sort_by(f64::total_cmp);
    if sq[0] <= 0.0 {
        return Err(Error::Eigen(format!("non-positive squared frequency {}", sq[0])));
    }
    Ok(sq.into_iter().map(f64::sqrt).collect())
}

/// `sum_i f(Omega_i) - sum_j f(w_j)`: free energy of system plus bath minus bath alone.
pub fn discrete_free_energy(modes: &[f64], bath_frequencies: &[f64], theta: ReducedTemperature) -> Result<f64> {
    if modes.len() != bath_frequencies.len() + 1 {
        return Err(Error::invalid(
            "modes",
            format!(
                "expected {} normal modes for {} bath modes, got {}",
                bath_frequencies.len() + 1,
                bath_frequencies.len(),
                modes.len()
            ),
        ));
    }
    let coupled = modes.iter().map(|&w| fermi_mode_f(w, theta));
    let bare = bath_frequencies.iter().map(|&w| -fermi_mode_f(w, theta));
    Ok(compensated_sum(coupled.chain(bare)))
}
