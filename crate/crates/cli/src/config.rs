//! Argument parsing and the resolved run configuration.
//!
//! Values come from three layers: command-line flags, an optional
//! `--config` file (TOML `key = value` lines, or the JSON emitted by a
//! previous run), and built-in defaults. Flags win over the file, the file
//! wins over defaults.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use subscan::selector::{ScanMethod, DEFAULT_EXACT_BUDGET};
use subscan::thresholds::{critical_value, ClassifyConfig};
use subscan::Dims;

use crate::error::CliError;

pub const THREADS_ENV: &str = "SUBSCAN_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    Generate,
    Select,
    Classify,
    Calibrate,
    Detect,
    Risk,
    Sweep,
    VectorRisk,
    Maxgauss,
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Auto,
    Exact,
    Heuristic,
    BruteForce,
}

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  usage or validation error
  3  file could not be read or written
  4  dimension mismatch
  5  domain error or invalid parameter
  6  exact enumeration budget exceeded
  7  selftest failure
  8  malformed input file";

#[derive(Debug, Parser)]
#[command(
    name = "subscan",
    version,
    about = "Scan selection, detection and Monte Carlo risk of a sparse planted submatrix",
    after_help = EXIT_CODES
)]
pub struct Args {
    pub verb: Verb,

    /// Config file (TOML key = value, or JSON output of a previous run)
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Matrix rows
    #[arg(long = "N")]
    pub big_n: Option<usize>,
    /// Matrix columns
    #[arg(long = "M")]
    pub big_m: Option<usize>,
    /// Planted rows
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Planted columns
    #[arg(long = "m")]
    pub m: Option<usize>,

    /// Signal level
    #[arg(long)]
    pub a: Option<f64>,
    /// Comma-separated multipliers of the critical level
    #[arg(long = "mult", value_delimiter = ',')]
    pub multipliers: Option<Vec<f64>>,
    /// Planted row indices for `generate`
    #[arg(long = "rows", value_delimiter = ',')]
    pub support_rows: Option<Vec<usize>>,
    /// Planted column indices for `generate`
    #[arg(long = "cols", value_delimiter = ',')]
    pub support_cols: Option<Vec<usize>>,

    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    /// Heuristic restarts
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Exact enumeration budget (subsets)
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Classifier margin
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub det_large: Option<f64>,
    #[arg(long)]
    pub det_small: Option<f64>,
    /// Number of Gaussians for `maxgauss`
    #[arg(long = "J")]
    pub count: Option<usize>,
    /// Threshold multiplier for `maxgauss`
    #[arg(long = "t")]
    pub t: Option<f64>,

    /// Worker thread cap (results do not depend on it)
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,

    /// Matrix CSV (input for select/detect, output for generate)
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Metadata JSON (defaults to the matrix path with a .json extension)
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Calibration JSON for `detect`
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Output JSON path (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output CSV path for `sweep`
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Layer read from a config file; every key optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    #[serde(rename = "M")]
    pub big_m: Option<usize>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub a: Option<f64>,
    #[serde(alias = "mult")]
    pub multipliers: Option<Vec<f64>>,
    pub support_rows: Option<Vec<usize>>,
    pub support_cols: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub method: Option<MethodName>,
    pub restarts: Option<usize>,
    pub budget: Option<u64>,
    pub alpha: Option<f64>,
    pub margin: Option<f64>,
    pub det_large: Option<f64>,
    pub det_small: Option<f64>,
    #[serde(rename = "J")]
    pub count: Option<usize>,
    pub t: Option<f64>,
    pub threads: Option<usize>,
    pub matrix: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    pub calibration: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    // present in echoed configs; informational only
    pub verb: Option<Verb>,
    pub a_star: Option<f64>,
    pub resolved_method: Option<ScanMethod>,
}

pub fn load_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    if let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) {
        // output files carry the resolved configuration under "config"
        let inner = value.get("config").cloned().unwrap_or(value);
        return serde_json::from_value(inner)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())));
    }
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

/// Fully resolved configuration; echoed into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub verb: Verb,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub big_n: Option<usize>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub big_m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multipliers: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_rows: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_cols: Option<Vec<usize>>,
    pub trials: usize,
    pub seed: u64,
    pub method: MethodName,
    pub restarts: usize,
    pub budget: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolved_method: Option<ScanMethod>,
    pub alpha: f64,
    pub margin: f64,
    pub det_large: f64,
    pub det_small: f64,
    #[serde(rename = "J", skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_RESTARTS: usize = 20;
pub const DEFAULT_ALPHA: f64 = 0.05;

impl RunConfig {
    pub fn dims(&self) -> Option<Dims> {
        Dims::new(self.big_n?, self.big_m?, self.n?, self.m?).ok()
    }

    pub fn classify_config(&self) -> ClassifyConfig {
        ClassifyConfig {
            margin: self.margin,
            det_large: self.det_large,
            det_small: self.det_small,
        }
    }

    pub fn meta_path(&self) -> Option<PathBuf> {
        self.meta
            .clone()
            .or_else(|| self.matrix.as_ref().map(|p| p.with_extension("json")))
    }
}

fn resolve_method(name: MethodName, dims: &Dims, budget: u64, restarts: usize) -> ScanMethod {
    match name {
        MethodName::Auto => ScanMethod::auto(dims.rows(), dims.cols(), dims.sub_rows(), dims.sub_cols(), budget, restarts),
        MethodName::Exact => ScanMethod::Exact { budget },
        MethodName::Heuristic => ScanMethod::Heuristic { restarts },
        MethodName::BruteForce => ScanMethod::BruteForce,
    }
}

/// Parses `argv` (including the program name) into a validated config.
/// Every violated constraint is reported at once.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| CliError::Clap(e.to_string(), e.use_stderr()))?;
    let file = match &args.config {
        Some(p) => load_file_config(p)?,
        None => FileConfig::default(),
    };
    resolve(args, file)
}

fn resolve(args: Args, file: FileConfig) -> Result<RunConfig, CliError> {
    let verb = args.verb;
    let mut cfg = RunConfig {
        verb,
        big_n: args.big_n.or(file.big_n),
        big_m: args.big_m.or(file.big_m),
        n: args.n.or(file.n),
        m: args.m.or(file.m),
        a: args.a.or(file.a),
        multipliers: args.multipliers.or(file.multipliers),
        a_star: None,
        support_rows: args.support_rows.or(file.support_rows),
        support_cols: args.support_cols.or(file.support_cols),
        trials: args.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
        seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        method: args.method.or(file.method).unwrap_or(MethodName::Auto),
        restarts: args.restarts.or(file.restarts).unwrap_or(DEFAULT_RESTARTS),
        budget: args.budget.or(file.budget).unwrap_or(DEFAULT_EXACT_BUDGET),
        resolved_method: None,
        alpha: args.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA),
        margin: args.margin.or(file.margin).unwrap_or(ClassifyConfig::default().margin),
        det_large: args.det_large.or(file.det_large).unwrap_or(ClassifyConfig::default().det_large),
        det_small: args.det_small.or(file.det_small).unwrap_or(ClassifyConfig::default().det_small),
        count: args.count.or(file.count),
        t: args.t.or(file.t),
        threads: args.threads.or(file.threads),
        matrix: args.matrix.or(file.matrix),
        meta: args.meta.or(file.meta),
        calibration: args.calibration.or(file.calibration),
        out: args.out.or(file.out),
        csv: args.csv.or(file.csv),
    };

    let mut problems = Vec::new();
    let needs_dims = matches!(
        verb,
        Verb::Generate | Verb::Classify | Verb::Calibrate | Verb::Risk | Verb::Sweep
    );
    if needs_dims {
        for (name, v) in [("N", cfg.big_n), ("M", cfg.big_m), ("n", cfg.n), ("m", cfg.m)] {
            if v.is_none() {
                problems.push(format!("--{name} is required for this verb"));
            }
        }
    }
    if verb == Verb::VectorRisk {
        for (name, v) in [("N", cfg.big_n), ("n", cfg.n)] {
            if v.is_none() {
                problems.push(format!("--{name} is required for vector-risk"));
            }
        }
    }
    // shape constraints whenever the values are present
    if let (Some(n_big), Some(n)) = (cfg.big_n, cfg.n) {
        if n > n_big {
            problems.push(format!("n <= N violated (n = {n}, N = {n_big})"));
        }
        if n == 0 {
            problems.push("n must be at least 1".into());
        }
    }
    if let (Some(m_big), Some(m)) = (cfg.big_m, cfg.m) {
        if m > m_big {
            problems.push(format!("m <= M violated (m = {m}, M = {m_big})"));
        }
        if m == 0 {
            problems.push("m must be at least 1".into());
        }
    }
    if let Some(a) = cfg.a {
        if !(a.is_finite() && a >= 0.0) {
            problems.push(format!("a must be finite and >= 0 (got {a})"));
        }
    }
    if cfg.trials == 0 {
        problems.push("trials must be positive".into());
    }
    if cfg.restarts == 0 {
        problems.push("restarts must be positive".into());
    }
    if cfg.threads == Some(0) {
        problems.push("threads must be positive".into());
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        problems.push(format!("alpha must lie in (0, 1) (got {})", cfg.alpha));
    }
    if !(cfg.margin > 0.0 && cfg.margin < 0.5) {
        problems.push(format!("margin must lie in (0, 0.5) (got {})", cfg.margin));
    }

    match verb {
        Verb::Generate => {
            if cfg.a.is_none() {
                problems.push("--a is required for generate".into());
            }
            if cfg.matrix.is_none() {
                problems.push("--matrix (output CSV path) is required for generate".into());
            }
            if cfg.support_rows.is_some() != cfg.support_cols.is_some() {
                problems.push("--rows and --cols must be given together".into());
            }
        }
        Verb::Select => {
            if cfg.matrix.is_none() {
                problems.push("--matrix is required for select".into());
            }
        }
        Verb::Detect => {
            if cfg.matrix.is_none() {
                problems.push("--matrix is required for detect".into());
            }
            if cfg.calibration.is_none() {
                problems.push("--calibration is required for detect".into());
            }
        }
        Verb::Classify => {
            if cfg.a.is_none() {
                problems.push("--a is required for classify".into());
            }
        }
        Verb::Risk | Verb::VectorRisk => {
            if cfg.a.is_none() && cfg.multipliers.as_ref().is_none_or(|v| v.len() != 1) {
                problems.push("--a (or a single --mult) is required".into());
            }
        }
        Verb::Sweep => match &cfg.multipliers {
            None => problems.push("--mult is required for sweep".into()),
            Some(v) if v.is_empty() => problems.push("--mult must not be empty".into()),
            Some(v) => {
                if v.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
                    problems.push("multipliers must be positive".into());
                }
                if v.windows(2).any(|w| w[0] >= w[1]) {
                    problems.push("multipliers must be strictly ascending".into());
                }
            }
        },
        Verb::Maxgauss => {
            if cfg.count.is_none() {
                problems.push("--J is required for maxgauss".into());
            }
            if cfg.t.is_none() {
                problems.push("--t is required for maxgauss".into());
            }
            if cfg.count == Some(0) {
                problems.push("J must be at least 1".into());
            }
            if cfg.trials < 100 {
                problems.push(format!("maxgauss needs trials >= 100 (got {})", cfg.trials));
            }
        }
        Verb::Calibrate => {
            if (cfg.trials as f64) * cfg.alpha < 100.0 - 1e-9 {
                problems.push(format!(
                    "calibration needs trials >= 100 / alpha = {}",
                    (100.0 / cfg.alpha).ceil()
                ));
            }
        }
        Verb::Selftest => {}
    }

    if !problems.is_empty() {
        return Err(CliError::Validation(problems));
    }

    if let Some(dims) = cfg.dims() {
        cfg.resolved_method = Some(resolve_method(cfg.method, &dims, cfg.budget, cfg.restarts));
        if matches!(verb, Verb::Sweep | Verb::Risk) && dims.sub_rows() < dims.rows() && dims.sub_cols() < dims.cols() {
            cfg.a_star = critical_value(&dims).ok();
        }
    }
    if verb == Verb::VectorRisk {
        if let (Some(big), Some(n)) = (cfg.big_n, cfg.n) {
            cfg.a_star = subscan::thresholds::vector_critical_value(big, n).ok();
        }
    }
    Ok(cfg)
}
