//! Verb dispatch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use subscan::detection::{calibrate, detect, DetectionCalibration};
use subscan::io::{load_matrix, read_matrix_csv, save_matrix, MatrixMeta};
use subscan::montecarlo::{estimate_risk, max_gauss_exceedance, sweep, vector_risk};
use subscan::selector::{select, ScanMethod};
use subscan::thresholds::classify;
use subscan::{generate, make_support, parallel, Dims, Observation, SignalSpec, Support};

use crate::config::{RunConfig, Verb};
use crate::error::CliError;
use crate::selftest;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A verb's JSON document plus the number of failed selftest properties.
pub struct Output {
    pub doc: Value,
    pub failed: usize,
}

fn envelope(cfg: &RunConfig, result: impl Serialize) -> Result<Value, CliError> {
    Ok(json!({
        "tool": "subscan",
        "version": VERSION,
        "config": cfg,
        "result": serde_json::to_value(result).map_err(|e| CliError::Io(e.to_string()))?,
    }))
}

fn required_dims(cfg: &RunConfig) -> Result<Dims, CliError> {
    let (Some(big_n), Some(big_m), Some(n), Some(m)) = (cfg.big_n, cfg.big_m, cfg.n, cfg.m) else {
        return Err(CliError::Usage("--N, --M, --n and --m are required".into()));
    };
    Ok(Dims::new(big_n, big_m, n, m)?)
}

fn method_for(cfg: &RunConfig, dims: &Dims) -> ScanMethod {
    cfg.resolved_method.unwrap_or_else(|| {
        ScanMethod::auto(dims.rows(), dims.cols(), dims.sub_rows(), dims.sub_cols(), cfg.budget, cfg.restarts)
    })
}

fn level(cfg: &RunConfig) -> Result<f64, CliError> {
    if let Some(a) = cfg.a {
        return Ok(a);
    }
    match (cfg.multipliers.as_deref(), cfg.a_star) {
        (Some([k]), Some(a_star)) => Ok(k * a_star),
        _ => Err(CliError::Usage("cannot resolve the signal level: give --a".into())),
    }
}

/// Runs the verb without writing its main document.
pub fn execute(cfg: &RunConfig) -> Result<Output, CliError> {
    let doc = match cfg.verb {
        Verb::Generate => {
            let dims = required_dims(cfg)?;
            let support = match (&cfg.support_rows, &cfg.support_cols) {
                (Some(r), Some(c)) => make_support(&dims, r.clone(), c.clone())?,
                _ => Support::top_left(&dims),
            };
            let a = cfg.a.unwrap_or(0.0);
            let y = generate(&dims, &support, &SignalSpec::uniform(a)?, cfg.seed)?;
            let matrix = cfg.matrix.clone().expect("validated");
            let meta_path = cfg.meta_path().expect("validated");
            let meta = MatrixMeta {
                dims,
                support: Some(support.clone()),
                a: Some(a),
                seed: Some(cfg.seed),
                provenance: Some(json!({ "tool": "subscan", "version": VERSION, "config": cfg })),
            };
            save_matrix(&y, &meta, &matrix, &meta_path)?;
            envelope(cfg, json!({ "matrix": matrix, "meta": meta_path, "dims": dims, "support": support }))?
        }
        Verb::Select => {
            let (y, meta) = load_observation(cfg)?;
            let dims = *y.dims();
            let method = method_for(cfg, &dims);
            let start = Instant::now();
            let result = select(&y, dims.sub_rows(), dims.sub_cols(), &method, cfg.seed)?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let mut doc = envelope(cfg, &result)?;
            doc["method"] = serde_json::to_value(method).unwrap_or(Value::Null);
            doc["timing_ms"] = json!(elapsed);
            doc["planted"] = serde_json::to_value(&meta.support).unwrap_or(Value::Null);
            doc
        }
        Verb::Classify => {
            let dims = required_dims(cfg)?;
            let label = classify(&dims, cfg.a.expect("validated"), &cfg.classify_config())?;
            envelope(cfg, label)?
        }
        Verb::Calibrate => {
            let dims = required_dims(cfg)?;
            let cal = calibrate(&dims, cfg.alpha, cfg.trials, cfg.seed, method_for(cfg, &dims))?;
            envelope(cfg, cal)?
        }
        Verb::Detect => {
            let cal = load_calibration(cfg.calibration.as_deref().expect("validated"))?;
            let y = load_for_detection(cfg, &cal)?;
            let d = detect(&y, &cal)?;
            let mut doc = envelope(cfg, d)?;
            doc["reject"] = json!(d.reject);
            doc["linear_value"] = json!(d.linear_value);
            doc["scan_value"] = json!(d.scan_value);
            doc["thresholds"] = json!({ "linear_crit": cal.linear_crit, "scan_crit": cal.scan_crit });
            doc
        }
        Verb::Risk => {
            let dims = required_dims(cfg)?;
            let est = estimate_risk(&dims, level(cfg)?, cfg.trials, cfg.seed, &method_for(cfg, &dims))?;
            envelope(cfg, est)?
        }
        Verb::Sweep => {
            let dims = required_dims(cfg)?;
            let mults = cfg.multipliers.clone().expect("validated");
            let result = sweep(&dims, &mults, cfg.trials, cfg.seed, &method_for(cfg, &dims))?;
            if let Some(path) = &cfg.csv {
                let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                let mut w = BufWriter::new(f);
                result.write_csv(&mut w)?;
                w.flush().map_err(|e| CliError::Io(e.to_string()))?;
            }
            envelope(cfg, result)?
        }
        Verb::VectorRisk => {
            let (big_n, n) = (cfg.big_n.expect("validated"), cfg.n.expect("validated"));
            envelope(cfg, vector_risk(big_n, n, level(cfg)?, cfg.trials, cfg.seed)?)?
        }
        Verb::Maxgauss => {
            let (count, t) = (cfg.count.expect("validated"), cfg.t.expect("validated"));
            let p = max_gauss_exceedance(count, t, cfg.trials, cfg.seed)?;
            envelope(cfg, json!({ "J": count, "t": t, "trials": cfg.trials, "probability": p }))?
        }
        Verb::Selftest => {
            let report = selftest::run_all(cfg.seed);
            let failed = report.iter().filter(|p| !p.pass).count();
            let doc = envelope(cfg, json!({ "properties": report, "failed": failed }))?;
            return Ok(Output { doc, failed });
        }
    };
    Ok(Output { doc, failed: 0 })
}

fn load_observation(cfg: &RunConfig) -> Result<(Observation, MatrixMeta), CliError> {
    let matrix = cfg.matrix.as_deref().expect("validated");
    let meta_path = cfg.meta_path().expect("validated");
    let (y, mut meta) = load_matrix(matrix, &meta_path)?;
    // explicit shape flags override the metadata's planted shape
    if cfg.n.is_some() || cfg.m.is_some() {
        let d = meta.dims;
        meta.dims = Dims::new(d.rows(), d.cols(), cfg.n.unwrap_or(d.sub_rows()), cfg.m.unwrap_or(d.sub_cols()))?;
        return Ok((y.with_dims(meta.dims)?, meta));
    }
    Ok((y, meta))
}

fn load_calibration(path: &Path) -> Result<DetectionCalibration, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Core(e.into()))?;
    let inner = value.get("result").cloned().unwrap_or(value);
    serde_json::from_value(inner).map_err(|e| CliError::Core(e.into()))
}

fn load_for_detection(cfg: &RunConfig, cal: &DetectionCalibration) -> Result<Observation, CliError> {
    let matrix = cfg.matrix.as_deref().expect("validated");
    match cfg.meta_path() {
        Some(meta) if meta.exists() => Ok(load_matrix(matrix, &meta)?.0),
        _ => {
            let f = File::open(matrix).map_err(|e| CliError::Io(format!("{}: {e}", matrix.display())))?;
            let (rows, cols, data) = read_matrix_csv(std::io::BufReader::new(f))?;
            let d = cal.dims;
            if rows != d.rows() || cols != d.cols() {
                return Err(subscan::Error::DimensionMismatch(format!(
                    "matrix is {rows}x{cols}, calibration was for {}x{}",
                    d.rows(),
                    d.cols()
                ))
                .into());
            }
            Ok(Observation::new(d, data)?)
        }
    }
}

fn emit(cfg: &RunConfig, doc: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(doc).map_err(|e| CliError::Io(e.to_string()))?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Executes `cfg`, writes its output and returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let outcome = match cfg.threads {
        Some(k) => parallel::with_threads(k, || execute(cfg)).map_err(CliError::from).and_then(|r| r),
        None => execute(cfg),
    };
    let result = outcome.and_then(|out| {
        emit(cfg, &out.doc)?;
        if out.failed > 0 {
            Err(CliError::SelftestFailed(out.failed))
        } else {
            Ok(())
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.report());
            e.exit_code()
        }
    }
}
