//! The four subcommands. Each returns its report; rendering happens in `report`.

use rayon::prelude::*;
use spinbath::bathsim::{
    discrete_free_energy, discretize, normal_modes, verify_fdr, DiscreteBath, FdrSetup, FrequencyScheme,
    SpectralDensitySpec,
};
use spinbath::series::{
    cv_high_t_leading, cv_low_t, cv_low_t_closed, free_energy_high_t, free_energy_via_g, GMethod,
};
use spinbath::susceptibility::response_zeros;
use spinbath::thermo::{
    cv_log_slope, free_energy, linear_fit, single_spin_cv, specific_heat, thermo_scan, transition_temperature,
};
use spinbath::{OhmicBath, ReducedTemperature, ScanGrid, Spacing};

use crate::config::{Command, RunConfig};
use crate::report::{CheckReport, CheckRow, Render, ScanReport, ScanRow, TransitionReport, TransitionRow};
use crate::{CliError, Outcome};

pub fn dispatch(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Scan => {
            let r = scan(cfg)?;
            Ok(Outcome {
                text: r.render(cfg),
                passed: true,
            })
        }
        Command::Transition => {
            let r = transition(cfg)?;
            Ok(Outcome {
                text: r.render(cfg),
                passed: true,
            })
        }
        Command::SeriesCheck => checked(cfg, series_check(cfg)?),
        Command::BathVerify => checked(cfg, bath_verify(cfg)?),
    }
}

fn checked(cfg: &RunConfig, r: CheckReport) -> Result<Outcome, CliError> {
    Ok(Outcome {
        text: r.render(cfg),
        passed: r.passed,
    })
}

fn bath(ratio: f64) -> Result<OhmicBath, CliError> {
    OhmicBath::from_ratio(ratio).map_err(|e| CliError::numeric(format!("at ratio {ratio}"), e))
}

fn theta(t: f64) -> Result<ReducedTemperature, CliError> {
    ReducedTemperature::new(t).map_err(|e| CliError::numeric(format!("at theta {t}"), e))
}

fn at(ratio: f64, t: f64) -> impl Fn(spinbath::Error) -> CliError {
    move |e| CliError::numeric(format!("at ratio {ratio}, theta {t}"), e)
}

fn grid(cfg: &RunConfig) -> Result<ScanGrid, CliError> {
    let spacing = if cfg.log { Spacing::Logarithmic } else { Spacing::Linear };
    ScanGrid::new(cfg.theta_min, cfg.theta_max, cfg.points, spacing)
        .map_err(|e| CliError::Usage(format!("temperature grid: {e}")))
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn scan(cfg: &RunConfig) -> Result<ScanReport, CliError> {
    let grid = grid(cfg)?;
    let mut rows = Vec::new();
    for &ratio in &cfg.ratios {
        let b = bath(ratio)?;
        let points = thermo_scan(&b, &grid).map_err(|e| CliError::numeric(format!("at ratio {ratio}"), e))?;
        let slopes: Vec<f64> = points
            .par_iter()
            .map(|p| cv_log_slope(&b, p.theta).map_err(at(ratio, p.theta.value())))
            .collect::<Result<_, _>>()?;
        rows.extend(points.iter().zip(slopes).map(|(p, s)| ScanRow {
            ratio,
            theta: p.theta.value(),
            free_energy: p.free_energy,
            entropy: p.entropy,
            cv: p.cv,
            cv_log_slope: s,
        }));
    }
    Ok(ScanReport { rows })
}

pub fn transition(cfg: &RunConfig) -> Result<TransitionReport, CliError> {
    let window = (cfg.theta_min, cfg.theta_max);
    let rows: Vec<TransitionRow> = cfg
        .ratios
        .par_iter()
        .map(|&ratio| {
            let tr = transition_temperature(&bath(ratio)?, window)
                .map_err(|e| CliError::numeric(format!("at ratio {ratio}"), e))?;
            Ok(TransitionRow {
                ratio,
                theta_r: tr.theta_r.value(),
                cv_peak: tr.cv_peak,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.ratio.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.theta_r).collect();
    let fit = linear_fit(&x, &y).map_err(|e| CliError::numeric("in the semilog fit", e))?;
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
    let pairs = || sorted.windows(2);
    Ok(TransitionReport {
        theta_r_strictly_increasing: pairs().all(|w| w[1].theta_r > w[0].theta_r),
        cv_peak_strictly_decreasing: pairs().all(|w| w[1].cv_peak < w[0].cv_peak),
        rows,
        fit,
    })
}

const LOW_T_RATIOS: [f64; 3] = [0.1, 0.5, 1.0];
const LOW_T_THETAS: [f64; 3] = [0.005, 0.01, 0.02];
const LOW_T_TOL: f64 = 0.01;
const SINGLE_SPIN_RATIO: f64 = 1e-3;
const SINGLE_SPIN_THETA: f64 = 10.0;
const SINGLE_SPIN_TOL: f64 = 0.02;
const HIGH_T_RATIO: f64 = 0.01;

pub fn series_check(cfg: &RunConfig) -> Result<CheckReport, CliError> {
    let nodes = grid(cfg)?.nodes();
    let pairs: Vec<(f64, f64)> = cfg
        .ratios
        .iter()
        .flat_map(|&r| nodes.iter().map(move |&t| (r, t)))
        .collect();
    let dual: Vec<Vec<CheckRow>> = pairs
        .par_iter()
        .map(|&(r, t)| {
            let b = bath(r)?;
            let th = theta(t)?;
            let quad = free_energy(&b, th).map_err(at(r, t))?;
            let mut out = Vec::new();
            for (name, method) in [("dual-arctan", GMethod::Arctan), ("dual-cisi", GMethod::CiSi)] {
                let g = free_energy_via_g(&b, th, method).map_err(at(r, t))?;
                let err = (g.re - quad).abs().max(g.im.abs()) / quad.abs();
                out.push(CheckRow::at_most(name, Some(r), Some(t), err, cfg.tol));
            }
            Ok(out)
        })
        .collect::<Result<_, CliError>>()?;
    let mut checks: Vec<CheckRow> = dual.into_iter().flatten().collect();

    let low_pairs: Vec<(f64, f64)> = LOW_T_RATIOS
        .iter()
        .flat_map(|&r| LOW_T_THETAS.iter().map(move |&t| (r, t)))
        .collect();
    let low: Vec<Vec<CheckRow>> = low_pairs
        .par_iter()
        .map(|&(r, t)| {
            let b = bath(r)?;
            let th = theta(t)?;
            let quad = specific_heat(&b, th).map_err(at(r, t))?;
            let series = cv_low_t(&b, th, 3, 1e-6).map_err(at(r, t))?.value;
            let closed = cv_low_t_closed(&b, th);
            Ok(vec![
                CheckRow::at_most("lowt-series-vs-quadrature", Some(r), Some(t), rel(series, quad), LOW_T_TOL),
                CheckRow::at_most("lowt-closed-vs-series", Some(r), Some(t), rel(closed, series), 1e-10),
            ])
        })
        .collect::<Result<_, CliError>>()?;
    checks.extend(low.into_iter().flatten());

    let (r, t) = (SINGLE_SPIN_RATIO, SINGLE_SPIN_THETA);
    let th = theta(t)?;
    let cv = specific_heat(&bath(r)?, th).map_err(at(r, t))?;
    let leading = cv_high_t_leading(&bath(r)?, th);
    checks.push(CheckRow::at_most(
        "hight-equilibrium-factor",
        Some(r),
        Some(t),
        rel(cv, leading.equilibrium),
        SINGLE_SPIN_TOL,
    ));
    checks.push(CheckRow::info("hight-single-spin-exact", Some(r), Some(t), rel(cv, single_spin_cv(th))));

    let r = HIGH_T_RATIO;
    let b = bath(r)?;
    let cv = specific_heat(&b, th).map_err(at(r, t))?;
    let expansion = free_energy_high_t(&b, th);
    let terms = expansion.cv_terms(th);
    checks.push(CheckRow::info("hight-expansion-vs-quadrature", Some(r), Some(t), rel(expansion.cv(th), cv)));
    checks.push(CheckRow::info(
        "hight-leading-regularized-over-quoted",
        Some(r),
        Some(t),
        terms[2] / cv_high_t_leading(&b, th).cv,
    ));
    Ok(CheckReport::new(checks, Vec::new()))
}

const FDR_MIN_FRACTION: f64 = 0.95;
const FDR_SIGMAS: f64 = 2.0;
const FDR_MEAN_MAX_Z: f64 = 3.0;
const FDR_VARIANCE_TOL: f64 = 0.01;
const FREE_ENERGY_TOL: f64 = 0.01;
const NORMAL_MODE_N: usize = 8;
const NORMAL_MODE_TOL: f64 = 1e-10;

fn linear_bath(ratio: f64, cutoff: f64, n: usize) -> Result<DiscreteBath, CliError> {
    let spec = SpectralDensitySpec::new(ratio, cutoff, n, FrequencyScheme::Linear)
        .map_err(|e| CliError::Usage(format!("bath: {e}")))?;
    Ok(discretize(&spec))
}

pub fn bath_verify(cfg: &RunConfig) -> Result<CheckReport, CliError> {
    let mut checks = Vec::new();
    let mut fdr = Vec::new();
    for &r in &cfg.ratios {
        let noise_bath = linear_bath(r, cfg.cutoff, cfg.modes)?;
        for &t in &cfg.fdr_thetas {
            let rep = verify_fdr(&noise_bath, theta(t)?, cfg.samples, &FdrSetup::default(), cfg.seed)
                .map_err(at(r, t))?;
            checks.push(CheckRow::at_least(
                "fdr-lags-within-2sigma",
                Some(r),
                Some(t),
                rep.fraction_within(FDR_SIGMAS),
                FDR_MIN_FRACTION,
            ));
            checks.push(CheckRow::at_most("fdr-mean-max-z", Some(r), Some(t), rep.max_abs_mean_z(), FDR_MEAN_MAX_Z));
            checks.push(CheckRow::at_most(
                "fdr-variance",
                Some(r),
                Some(t),
                rep.variance_rel_error,
                FDR_VARIANCE_TOL,
            ));
            fdr.push(rep);
        }

        let fe_bath = linear_bath(r, cfg.cutoff, cfg.fe_modes)?;
        let zeros = response_zeros(1.0, fe_bath.coupling());
        let b = bath(r)?;
        let rows: Vec<CheckRow> = cfg
            .fe_thetas
            .par_iter()
            .map(|&t| {
                let th = theta(t)?;
                let discrete = discrete_free_energy(&zeros, fe_bath.frequencies(), th).map_err(at(r, t))?;
                let continuum = free_energy(&b, th).map_err(at(r, t))?;
                Ok(CheckRow::at_most(
                    "free-energy-discrete-vs-continuum",
                    Some(r),
                    Some(t),
                    rel(discrete, continuum),
                    FREE_ENERGY_TOL,
                ))
            })
            .collect::<Result<_, CliError>>()?;
        checks.extend(rows);

        let small = linear_bath(r, cfg.cutoff, NORMAL_MODE_N)?;
        let eig = normal_modes(&small, 1.0).map_err(|e| CliError::numeric(format!("at ratio {r}"), e))?;
        let sec = response_zeros(1.0, small.coupling());
        let dev = eig
            .iter()
            .zip(&sec)
            .map(|(a, b)| (a - b).abs())
            .fold(if eig.len() == sec.len() { 0.0 } else { f64::INFINITY }, f64::max);
        checks.push(CheckRow::at_most("normal-modes-eigen-vs-secular", Some(r), None, dev, NORMAL_MODE_TOL));
    }
    Ok(CheckReport::new(checks, fdr))
}
