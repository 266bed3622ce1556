use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use spinbath::bathsim::{
    discrete_free_energy, discretize, verify_fdr, FdrSetup, FrequencyScheme, SpectralDensitySpec,
};
use spinbath::series::{free_energy_via_g, g_arctan, g_high_t_cisi, g_low_t, GArgument, GMethod};
use spinbath::susceptibility::response_zeros;
use spinbath::thermo::{entropy, free_energy, specific_heat, thermo_scan};
use spinbath::{OhmicBath, ReducedTemperature, ScanGrid, Spacing};

fn th(t: f64) -> ReducedTemperature {
    ReducedTemperature::new(t).unwrap()
}

fn bath(r: f64) -> OhmicBath {
    OhmicBath::from_ratio(r).unwrap()
}

fn pool(n: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_is_minus_free_energy_slope(lr in -2.0f64..2.0, lt in -1.5f64..1.5) {
        let (r, t) = (10f64.powf(lr), 10f64.powf(lt));
        let h = 1e-4 * t;
        let up = free_energy(&bath(r), th(t + h)).unwrap();
        let down = free_energy(&bath(r), th(t - h)).unwrap();
        let s = entropy(&bath(r), th(t)).unwrap();
        prop_assert!(((-(up - down) / (2.0 * h)) - s).abs() <= 1e-7 * s.abs().max(1e-3));
    }

    #[test]
    fn both_g_forms_agree_off_axis(re in 0.05f64..30.0, im in -30.0f64..30.0) {
        let y = GArgument::new(Complex64::new(re, im)).unwrap();
        let a = g_arctan(y).unwrap();
        let c = g_high_t_cisi(y, 120, 1e-13).unwrap().value;
        prop_assert!((a - c).norm() <= 1e-9 * a.norm().max(1e-3));
    }

    #[test]
    fn free_energy_via_g_is_real(lr in -2.0f64..1.5, lt in -1.0f64..1.5) {
        let f = free_energy_via_g(&bath(10f64.powf(lr)), th(10f64.powf(lt)), GMethod::Arctan).unwrap();
        prop_assert!(f.im.abs() <= 1e-12 * f.re.abs());
    }
}

#[test]
fn low_t_series_matches_arctan_for_large_argument() {
    for y in [Complex64::new(40.0, 10.0), Complex64::new(100.0, -60.0), Complex64::new(25.0, 0.0)] {
        let arg = GArgument::new(y).unwrap();
        let series = g_low_t(arg, 12, 1e-12).unwrap();
        let err = (series.value - g_arctan(arg).unwrap()).norm();
        // asymptotic: bounded by the first omitted term
        assert!(err <= series.tail_estimate + 1e-14 * series.value.norm(), "{y}: {err:e}");
    }
}

/// Linear bins converge quadratically in `N` towards the cutoff-limited value,
/// which sits within 1% of the continuum Ohmic result.
#[test]
fn discrete_free_energy_converges_with_bath_size() {
    let r = 0.5;
    let exact = free_energy(&bath(r), th(1.0)).unwrap();
    let f = |n: usize| {
        let b = discretize(&SpectralDensitySpec::new(r, 50.0, n, FrequencyScheme::Linear).unwrap());
        let zeros = response_zeros(1.0, b.coupling());
        discrete_free_energy(&zeros, b.frequencies(), th(1.0)).unwrap()
    };
    let v: Vec<f64> = [128, 256, 512, 1024].iter().map(|&n| f(n)).collect();
    let steps: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for w in steps.windows(2) {
        let ratio = w[0] / w[1];
        assert!(ratio > 3.0 && ratio < 5.0, "{steps:?}");
    }
    assert!(((v[3] - exact) / exact).abs() < 0.01);
}

#[test]
fn scan_is_thread_count_independent() {
    let grid = ScanGrid::new(1e-2, 1e2, 33, Spacing::Logarithmic).unwrap();
    let b = bath(2.0);
    let one = pool(1).install(|| thermo_scan(&b, &grid)).unwrap();
    let four = pool(4).install(|| thermo_scan(&b, &grid)).unwrap();
    assert_eq!(one, four);
    assert_eq!(one[10].cv, specific_heat(&b, one[10].theta).unwrap());
}

#[test]
fn fdr_report_is_thread_count_independent() {
    let b = discretize(&SpectralDensitySpec::new(0.5, 20.0, 24, FrequencyScheme::Linear).unwrap());
    let setup = FdrSetup {
        lag_step: 0.2,
        n_lags: 10,
        n_origins: 4,
    };
    let run = |n| pool(n).install(|| verify_fdr(&b, th(1.0), 300, &setup, 5).unwrap());
    assert_eq!(run(1), run(3));
}

#[test]
fn overdamped_and_underdamped_meet_continuously() {
    let below = free_energy(&bath(2.0 - 1e-9), th(0.7)).unwrap();
    let above = free_energy(&bath(2.0 + 1e-9), th(0.7)).unwrap();
    let at = free_energy(&bath(2.0), th(0.7)).unwrap();
    assert_relative_eq!(below, at, max_relative = 1e-8);
    assert_relative_eq!(above, at, max_relative = 1e-8);
}
