use std::process::{Command, Output};

use spinbath_cli::report::{CheckReport, Document, ScanReport, TransitionReport, SCHEMA_VERSION};

fn spinbath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinbath"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

/// Data rows of a CSV document (header comments and column line removed).
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn series_check_default_passes() {
    let o = spinbath(&["series-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("# passed=true"));
}

#[test]
fn series_check_tolerance_below_rounding_fails_honestly() {
    let o = spinbath(&["series-check", "--tol", "1e-17", "--ratios", "0.1", "--points", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains(",fail"));
    assert!(text.contains("# passed=false"));
}

#[test]
fn series_check_json_round_trips() {
    let o = spinbath(&["series-check", "--format", "json"]);
    let text = stdout(&o);
    let doc: Document<CheckReport> = serde_json::from_str(&text).unwrap();
    assert_eq!(doc.schema_version, SCHEMA_VERSION);
    assert!(doc.results.passed);
    let again = serde_json::to_string_pretty(&doc).unwrap() + "\n";
    assert_eq!(again, text);
}

#[test]
fn scan_csv_layout_and_metadata() {
    let o = spinbath(&["scan", "--ratios", "0.1,1", "--points", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for key in ["# spinbath ", "# units: ", "# config: command=scan", "# seed: 42"] {
        assert!(text.contains(key), "missing {key}");
    }
    assert!(!text.contains("threads"));
    assert!(text.contains("\nratio,theta,free_energy,entropy,cv,cv_log_slope\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 10);
    assert!(r.iter().all(|row| row.len() == 6));
}

fn cv_columns(text: &str) -> Vec<(f64, Vec<f64>)> {
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    for row in rows(text) {
        let ratio: f64 = row[0].parse().unwrap();
        let cv: f64 = row[4].parse().unwrap();
        match out.last_mut() {
            Some((r, v)) if *r == ratio => v.push(cv),
            _ => out.push((ratio, vec![cv])),
        }
    }
    out
}

fn monotone(cv: &[f64], increasing: bool) -> bool {
    cv.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

#[test]
fn scan_low_t_increasing_high_t_decreasing() {
    let low = stdout(&spinbath(&[
        "scan", "--ratios", "0.1,1", "--theta-min", "1e-3", "--theta-max", "1e-1", "--points", "100",
    ]));
    for (r, cv) in cv_columns(&low) {
        assert!(monotone(&cv, true), "ratio {r} not increasing at low T");
    }
    let high = stdout(&spinbath(&[
        "scan", "--ratios", "0.1,1", "--theta-min", "3", "--theta-max", "100", "--points", "40",
    ]));
    for (r, cv) in cv_columns(&high) {
        assert!(monotone(&cv, false), "ratio {r} not decreasing at high T");
    }
}

/// Strong damping splits the specific heat into two humps, near `0.5/r` and
/// `0.5 r`, so neither window is monotone at r = 10.
#[test]
fn scan_strong_damping_has_two_humps() {
    let argmax = |cv: &[f64]| (0..cv.len()).max_by(|&a, &b| cv[a].total_cmp(&cv[b])).unwrap();
    let low = stdout(&spinbath(&[
        "scan", "--ratios", "10", "--theta-min", "1e-3", "--theta-max", "1e-1", "--points", "100",
    ]));
    let (_, cv) = &cv_columns(&low)[0];
    let k = argmax(cv);
    assert!(k > 0 && k < cv.len() - 1);
    assert!(monotone(&cv[..=k], true) && monotone(&cv[k..], false));
    let high = stdout(&spinbath(&[
        "scan", "--ratios", "10", "--theta-min", "3", "--theta-max", "100", "--points", "40",
    ]));
    let (_, cv) = &cv_columns(&high)[0];
    let k = argmax(cv);
    assert!(k > 0 && k < cv.len() - 1);
    assert!(monotone(&cv[..=k], true) && monotone(&cv[k..], false));
}

#[test]
fn scan_strong_damping_crossover_is_smooth() {
    let o = spinbath(&[
        "scan", "--ratios", "1000", "--theta-min", "1e-6", "--theta-max", "1e4", "--points", "81", "--format", "json",
    ]);
    let doc: Document<ScanReport> = serde_json::from_str(&stdout(&o)).unwrap();
    let slopes: Vec<f64> = doc.results.rows.iter().map(|r| r.cv_log_slope).collect();
    assert!(doc.results.rows.iter().all(|r| r.cv > 0.0));
    // eight nodes per decade: the local exponent never jumps
    assert!(slopes.windows(2).all(|w| (w[1] - w[0]).abs() < 0.5), "{slopes:?}");
    assert!((slopes[0] - 1.0).abs() < 0.05, "{}", slopes[0]);
    assert!(*slopes.last().unwrap() < 0.0);
}

#[test]
fn transition_reports_fit() {
    let o = spinbath(&["transition", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Document<TransitionReport> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc.results.rows.len(), 9);
    let f = doc.results.fit;
    assert!(f.r_squared > 0.0 && f.r_squared <= 1.0);
    assert!(doc.results.cv_peak_strictly_decreasing);
}

#[test]
fn transition_without_peak_is_numeric_failure_naming_ratio() {
    let o = spinbath(&["transition", "--ratios", "0.01,0.1", "--theta-min", "5", "--theta-max", "50"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ratio 0.01"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["scan", "--theta-min", "2", "--theta-max", "1"][..],
        &["scan", "--ratios", "-1"],
        &["scan", "--bogus"],
        &["transition", "--ratios", "1,2"],
        &["bath-verify", "--samples", "5"],
        &["bath-verify", "--modes", "0"],
        &["scan", "--threads", "0"],
        &["frobnicate"],
    ] {
        assert_eq!(spinbath(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# scan setup\nratios = 0.5\npoints = 4\nformat = json\nseed = 5\n").unwrap();
    let out = dir.path().join("out.csv");
    let o = spinbath(&[
        "scan",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
        "--points",
        "3",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# seed: 5"));
    let r = rows(&text);
    assert_eq!(r.len(), 3);
    assert!(r.iter().all(|row| row[0].starts_with("5.0")));
}

#[test]
fn bad_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "temperature = 3\n").unwrap();
    assert_eq!(spinbath(&["scan", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["scan", "--ratios", "0.3", "--points", "12", "--seed", "11"];
    assert_eq!(spinbath(&args).stdout, spinbath(&args).stdout);
}

const SMALL_BATH: [&str; 10] = [
    "bath-verify",
    "--modes",
    "32",
    "--fe-modes",
    "128",
    "--samples",
    "400",
    "--fdr-thetas",
    "1",
    "--format",
];

#[test]
fn bath_verify_seed_changes_statistics() {
    let run = |seed: &str| -> Document<CheckReport> {
        let mut args = SMALL_BATH.to_vec();
        args.extend(["json", "--fe-thetas", "1", "--seed", seed]);
        serde_json::from_str(&stdout(&spinbath(&args))).unwrap()
    };
    let a = run("1");
    let b = run("2");
    assert_eq!(a.results.fdr.len(), 1);
    assert_ne!(a.results.fdr[0].stats.autocorr, b.results.fdr[0].stats.autocorr);
    // deterministic parts do not depend on the seed
    let fe = |d: &Document<CheckReport>| {
        d.results
            .checks
            .iter()
            .filter(|c| !c.check.starts_with("fdr"))
            .map(|c| c.measured)
            .collect::<Vec<_>>()
    };
    assert_eq!(fe(&a), fe(&b));
}

#[test]
fn bath_verify_csv_lists_every_check() {
    let mut args = SMALL_BATH.to_vec();
    args.extend(["csv", "--fe-thetas", "0.5,2"]);
    let o = spinbath(&args);
    assert!(matches!(o.status.code(), Some(0) | Some(1)));
    let names: Vec<String> = rows(&stdout(&o)).into_iter().map(|r| r[0].clone()).collect();
    assert_eq!(
        names,
        [
            "fdr-lags-within-2sigma",
            "fdr-mean-max-z",
            "fdr-variance",
            "free-energy-discrete-vs-continuum",
            "free-energy-discrete-vs-continuum",
            "normal-modes-eigen-vs-secular",
        ]
    );
}
