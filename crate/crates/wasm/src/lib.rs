//! Browser bindings. Every export takes plain numbers and returns a JSON
//! string; errors come back as `{"error": "..."}`.

use serde_json::{json, Value};
use subscan::montecarlo::sweep;
use subscan::selector::{select, ScanMethod};
use subscan::thresholds::{classify, ClassifyConfig};
use subscan::{generate, Dims, SignalSpec, Support};
use wasm_bindgen::prelude::*;

fn respond(r: subscan::Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn dims(big_n: u32, big_m: u32, n: u32, m: u32) -> subscan::Result<Dims> {
    Dims::new(big_n as usize, big_m as usize, n as usize, m as usize)
}

/// Thresholds and regime labels for signal level `a`.
#[wasm_bindgen]
pub fn regime(big_n: u32, big_m: u32, n: u32, m: u32, a: f64) -> String {
    respond((|| {
        let label = classify(&dims(big_n, big_m, n, m)?, a, &ClassifyConfig::default())?;
        Ok(serde_json::to_value(label)?)
    })())
}

/// Risk curve over multiples of `a*`, using the heuristic selector.
#[wasm_bindgen]
pub fn phase_curve(big_n: u32, big_m: u32, n: u32, m: u32, multipliers: &[f64], trials: u32, seed: u32) -> String {
    respond((|| {
        let d = dims(big_n, big_m, n, m)?;
        let method = ScanMethod::auto(d.rows(), d.cols(), d.sub_rows(), d.sub_cols(), 200_000, 10);
        let s = sweep(&d, multipliers, trials as usize, seed as u64, &method)?;
        Ok(serde_json::to_value(s)?)
    })())
}

/// Plants `a` on a random-position block, then runs the selector. Returns
/// the matrix (row-major), the planted support and the recovered one.
#[wasm_bindgen]
pub fn sample_and_scan(big_n: u32, big_m: u32, n: u32, m: u32, a: f64, seed: u32) -> String {
    respond((|| {
        let d = dims(big_n, big_m, n, m)?;
        let seed = seed as u64;
        let planted = scattered_support(&d, seed)?;
        let y = generate(&d, &planted, &SignalSpec::uniform(a)?, seed)?;
        let method = ScanMethod::auto(d.rows(), d.cols(), d.sub_rows(), d.sub_cols(), 2_000_000, 20);
        let found = select(&y, d.sub_rows(), d.sub_cols(), &method, seed)?;
        Ok(json!({
            "rows": d.rows(),
            "cols": d.cols(),
            "data": y.data(),
            "planted": planted,
            "found": found,
        }))
    })())
}

/// Evenly spread rows and columns, rotated by the seed so the block is not
/// always in the same place.
fn scattered_support(d: &Dims, seed: u64) -> subscan::Result<Support> {
    let spread = |len: usize, k: usize, shift: u64| -> Vec<usize> {
        let off = (shift % len as u64) as usize;
        (0..k).map(|i| (i * len / k + off) % len).collect()
    };
    let mix = subscan::rng::derive(seed, 0x6465_6d6f, 0);
    subscan::make_support(d, spread(d.rows(), d.sub_rows(), mix), spread(d.cols(), d.sub_cols(), mix >> 32))
}
