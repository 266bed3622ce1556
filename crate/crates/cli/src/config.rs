//! Run configuration: command-line flags layered over an optional key=value file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by all subcommands. Every field is optional so that a config
/// file can fill in whatever the command line leaves out.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Damping ratio gamma0/omega0 (repeatable; alias of --ratios)
    #[arg(long = "ratio", value_name = "R")]
    pub ratio: Vec<f64>,
    /// Comma-separated damping ratios
    #[arg(long, value_delimiter = ',', value_name = "R,R,..")]
    pub ratios: Option<Vec<f64>>,
    #[arg(long, value_name = "THETA")]
    pub theta_min: Option<f64>,
    #[arg(long, value_name = "THETA")]
    pub theta_max: Option<f64>,
    #[arg(long, value_name = "N")]
    pub points: Option<usize>,
    /// Logarithmic temperature grid (`--log=false` for linear)
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub log: Option<bool>,
    /// Bath modes for the noise ensemble
    #[arg(long, value_name = "N")]
    pub modes: Option<usize>,
    /// Bath modes for the free-energy comparison
    #[arg(long, value_name = "N")]
    pub fe_modes: Option<usize>,
    /// Ensemble size
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,
    /// Bath cutoff frequency in units of omega0
    #[arg(long, value_name = "W")]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance of the dual-representation checks
    #[arg(long)]
    pub tol: Option<f64>,
    /// Temperatures of the noise-statistics check
    #[arg(long, value_delimiter = ',', value_name = "T,T,..")]
    pub fdr_thetas: Option<Vec<f64>>,
    /// Temperatures of the free-energy check
    #[arg(long, value_delimiter = ',', value_name = "T,T,..")]
    pub fe_thetas: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (stdout if absent)
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Worker threads (default: all cores); never changes results
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Flat key=value file; flags override its entries
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Scan,
    Transition,
    SeriesCheck,
    BathVerify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Scan => "scan",
            Command::Transition => "transition",
            Command::SeriesCheck => "series-check",
            Command::BathVerify => "bath-verify",
        }
    }
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub ratios: Vec<f64>,
    pub theta_min: f64,
    pub theta_max: f64,
    pub points: usize,
    pub log: bool,
    pub modes: usize,
    pub fe_modes: usize,
    pub samples: usize,
    pub cutoff: f64,
    pub seed: u64,
    pub tol: f64,
    pub fdr_thetas: Vec<f64>,
    pub fe_thetas: Vec<f64>,
    pub format: Format,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

pub const MAX_MODES: usize = 100_000;
pub const MAX_SAMPLES: usize = 10_000_000;

fn defaults(command: Command) -> RunConfig {
    let transition_ratios: Vec<f64> = (0..9).map(|i| 10f64.powf(-2.0 + 0.5 * i as f64)).collect();
    let (ratios, theta_min, theta_max, points) = match command {
        Command::Scan => (vec![0.1, 1.0, 10.0], 1e-3, 1e3, 200),
        Command::Transition => (transition_ratios, 1e-3, 1e3, 0),
        Command::SeriesCheck => (vec![0.1, 1.0, 4.0], 0.1, 10.0, 3),
        Command::BathVerify => (vec![0.5], 0.5, 2.0, 3),
    };
    RunConfig {
        command,
        ratios,
        theta_min,
        theta_max,
        points,
        log: true,
        modes: 256,
        fe_modes: 2048,
        samples: 20_000,
        cutoff: spinbath::bathsim::DEFAULT_CUTOFF,
        seed: 42,
        tol: 1e-8,
        fdr_thetas: vec![0.2, 1.0, 5.0],
        fe_thetas: vec![0.5, 1.0, 2.0],
        format: Format::Csv,
        output: None,
        threads: None,
    }
}

/// Parse a flat `key = value` file. Blank lines and `#` comments are ignored;
/// keys may use `-` or `_`.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", n + 1)))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').map(|s| parse_value(key, s.trim())).collect()
}

fn apply_file(cfg: &mut RunConfig, map: &BTreeMap<String, String>, base: &Path) -> Result<(), CliError> {
    for (k, v) in map {
        match k.as_str() {
            "ratio" | "ratios" => cfg.ratios = parse_list(k, v)?,
            "theta-min" => cfg.theta_min = parse_value(k, v)?,
            "theta-max" => cfg.theta_max = parse_value(k, v)?,
            "points" => cfg.points = parse_value(k, v)?,
            "log" => cfg.log = parse_value(k, v)?,
            "modes" => cfg.modes = parse_value(k, v)?,
            "fe-modes" => cfg.fe_modes = parse_value(k, v)?,
            "samples" => cfg.samples = parse_value(k, v)?,
            "cutoff" => cfg.cutoff = parse_value(k, v)?,
            "seed" => cfg.seed = parse_value(k, v)?,
            "tol" => cfg.tol = parse_value(k, v)?,
            "fdr-thetas" => cfg.fdr_thetas = parse_list(k, v)?,
            "fe-thetas" => cfg.fe_thetas = parse_list(k, v)?,
            "format" => {
                cfg.format = Format::from_str(v, true)
                    .map_err(|_| CliError::Usage(format!("config key `format`: unknown format `{v}`")))?
            }
            "output" => cfg.output = Some(base.join(v)),
            "threads" => cfg.threads = Some(parse_value(k, v)?),
            other => return Err(CliError::Usage(format!("unknown config key `{other}`"))),
        }
    }
    Ok(())
}

/// Resolve flag > file > command default, then validate.
pub fn resolve(command: Command, flags: &Flags) -> Result<RunConfig, CliError> {
    let mut cfg = defaults(command);
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        apply_file(&mut cfg, &parse_config_file(&text)?, base)?;
    }
    let mut ratios = flags.ratio.clone();
    if let Some(r) = &flags.ratios {
        ratios.extend(r);
    }
    if !ratios.is_empty() {
        cfg.ratios = ratios;
    }
    macro_rules! take {
        ($($field:ident),*) => { $( if let Some(v) = flags.$field.clone() { cfg.$field = v; } )* };
    }
    take!(theta_min, theta_max, points, log, modes, fe_modes, samples, cutoff, seed, tol, fdr_thetas, fe_thetas, format);
    if flags.output.is_some() {
        cfg.output = flags.output.clone();
    }
    if flags.threads.is_some() {
        cfg.threads = flags.threads;
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be finite and > 0, got {v}")))
    }
}

pub fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.ratios.is_empty() {
        return Err(CliError::Usage("at least one ratio is required".into()));
    }
    for &r in &cfg.ratios {
        positive("ratio", r)?;
    }
    positive("theta-min", cfg.theta_min)?;
    positive("theta-max", cfg.theta_max)?;
    if cfg.theta_min >= cfg.theta_max {
        return Err(CliError::Usage("theta-min must be below theta-max".into()));
    }
    match cfg.command {
        Command::Scan if cfg.points < 2 => {
            return Err(CliError::Usage("points must be at least 2".into()));
        }
        Command::Transition => {
            let lo = cfg.ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = cfg.ratios.iter().copied().fold(0.0, f64::max);
            if hi / lo < 10.0 * (1.0 - 1e-12) {
                return Err(CliError::Usage("transition ratios must span at least one decade".into()));
            }
        }
        _ => {}
    }
    for (name, n) in [("modes", cfg.modes), ("fe-modes", cfg.fe_modes)] {
        if n == 0 || n > MAX_MODES {
            return Err(CliError::Usage(format!("{name} must be in 1..={MAX_MODES}, got {n}")));
        }
    }
    if cfg.samples < 100 || cfg.samples > MAX_SAMPLES {
        return Err(CliError::Usage(format!("samples must be in 100..={MAX_SAMPLES}, got {}", cfg.samples)));
    }
    positive("cutoff", cfg.cutoff)?;
    positive("tol", cfg.tol)?;
    for &t in cfg.fdr_thetas.iter().chain(&cfg.fe_thetas) {
        positive("theta", t)?;
    }
    if cfg.threads == Some(0) {
        return Err(CliError::Usage("threads must be at least 1".into()));
    }
    Ok(())
}

impl RunConfig {
    /// `key=value` pairs echoed into output headers. Thread count and output
    /// path are omitted: they never change the results.
    pub fn echo(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = write!(
            s,
            "command={} ratios={} theta-min={:?} theta-max={:?} points={} log={} modes={} fe-modes={} \
             samples={} cutoff={:?} seed={} tol={:?} fdr-thetas={} fe-thetas={}",
            self.command.name(),
            list(&self.ratios),
            self.theta_min,
            self.theta_max,
            self.points,
            self.log,
            self.modes,
            self.fe_modes,
            self.samples,
            self.cutoff,
            self.seed,
            self.tol,
            list(&self.fdr_thetas),
            list(&self.fe_thetas),
        );
        s
    }
}
