//! Monte Carlo estimation of the selection risk `P(C_hat != C0)`.
//!
//! Trial `t` of a run with master seed `s` draws its noise from the key
//! `derive(s, TRIAL, t)`, and any randomized selector in that trial is keyed
//! from the same value. The noise therefore depends only on `(s, t)`: a sweep
//! over signal levels reuses each trial's noise matrix at every level
//! (common random numbers), and the single-level estimate is the same as the
//! matching sweep point.

use std::io::Write;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::model::{generate_null, Dims, SignalSpec, Support};
use crate::selector::{select, vector_select, Method, ScanMethod};
use crate::stats::{wilson_interval, Z95};
use crate::thresholds::critical_value;
use crate::{parallel, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub trials: usize,
    pub failures: usize,
    pub risk: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean of `|C_hat ∩ C0| / (nm)`.
    pub mean_overlap: f64,
    /// Trials where the returned objective fell short of the planted
    /// block's own sum, i.e. the selector provably missed the scan maximum.
    /// Always 0 for exact methods.
    pub suboptimal: usize,
    pub selector_method: Method,
    pub dims: Dims,
    pub a: f64,
    pub seed: u64,
}

impl RiskEstimate {
    #[allow(clippy::too_many_arguments)]
    fn from_counts(
        failures: usize,
        suboptimal: usize,
        overlap_cells: u64,
        trials: usize,
        dims: Dims,
        a: f64,
        seed: u64,
        selector_method: Method,
    ) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures as u64, trials as u64, Z95);
        let cells = (dims.sub_rows() * dims.sub_cols()) as f64;
        RiskEstimate {
            trials,
            failures,
            risk: failures as f64 / trials as f64,
            ci_low,
            ci_high,
            mean_overlap: overlap_cells as f64 / (cells * trials as f64),
            suboptimal,
            selector_method,
            dims,
            a,
            seed,
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub multiplier: f64,
    pub a: f64,
    pub estimate: RiskEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub dims: Dims,
    pub a_star_used: f64,
    pub grid: Vec<SweepPoint>,
}

impl SweepResult {
    /// Flat table: `a,multiplier,risk,ci_low,ci_high,mean_overlap,trials`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "a,multiplier,risk,ci_low,ci_high,mean_overlap,trials")?;
        for p in &self.grid {
            let e = &p.estimate;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_f64(p.a),
                fmt_f64(p.multiplier),
                fmt_f64(e.risk),
                fmt_f64(e.ci_low),
                fmt_f64(e.ci_high),
                fmt_f64(e.mean_overlap),
                e.trials
            )?;
        }
        Ok(())
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    Ok(())
}

/// Risk at each level in `levels` for the planted `support`, all levels
/// sharing each trial's noise.
pub fn risk_curve(
    dims: &Dims,
    support: &Support,
    levels: &[f64],
    trials: usize,
    seed: u64,
    method: &ScanMethod,
) -> Result<Vec<RiskEstimate>> {
    check_trials(trials)?;
    support.check_against(dims)?;
    let signals: Vec<SignalSpec> = levels.iter().map(|&a| SignalSpec::uniform(a)).collect::<Result<_>>()?;
    let (n, m) = (dims.sub_rows(), dims.sub_cols());

    // per trial, per level: (hit, overlapping cells, provably suboptimal)
    let outcomes: Result<Vec<Vec<(bool, usize, bool)>>> = parallel::map_indexed(trials, |t| {
        let key = rng::derive(seed, rng::tag::TRIAL, t as u64);
        let noise = generate_null(dims, key);
        let select_seed = rng::derive(key, rng::tag::SELECT, 0);
        signals
            .iter()
            .map(|sig| {
                let y = noise.with_signal(support, sig)?;
                let r = select(&y, n, m, method, select_seed)?;
                let planted = y.support_sum(support);
                Ok((r.support == *support, r.support.overlap(support), r.objective < planted))
            })
            .collect()
    })
    .into_iter()
    .collect();
    let outcomes = outcomes?;

    Ok(levels
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let failures = outcomes.iter().filter(|o| !o[k].0).count();
            let overlap: u64 = outcomes.iter().map(|o| o[k].1 as u64).sum();
            let suboptimal = outcomes.iter().filter(|o| o[k].2).count();
            RiskEstimate::from_counts(failures, suboptimal, overlap, trials, *dims, a, seed, method.tag())
        })
        .collect())
}

/// Selection risk with the planted block at the top-left corner. The risk
/// does not depend on where the block sits.
pub fn estimate_risk(dims: &Dims, a: f64, trials: usize, seed: u64, method: &ScanMethod) -> Result<RiskEstimate> {
    estimate_risk_for_support(dims, &Support::top_left(dims), a, trials, seed, method)
}

pub fn estimate_risk_for_support(
    dims: &Dims,
    support: &Support,
    a: f64,
    trials: usize,
    seed: u64,
    method: &ScanMethod,
) -> Result<RiskEstimate> {
    Ok(risk_curve(dims, support, &[a], trials, seed, method)?.remove(0))
}

/// Risk at `a = multiplier * a*` for each multiplier.
pub fn sweep(dims: &Dims, multipliers: &[f64], trials: usize, seed: u64, method: &ScanMethod) -> Result<SweepResult> {
    if multipliers.is_empty() {
        return Err(Error::InvalidParameter("multiplier list is empty".into()));
    }
    if multipliers.iter().any(|&k| !(k.is_finite() && k > 0.0)) {
        return Err(Error::InvalidParameter("multipliers must be positive".into()));
    }
    if multipliers.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("multipliers must be strictly ascending".into()));
    }
    let a_star = critical_value(dims)?;
    let levels: Vec<f64> = multipliers.iter().map(|k| k * a_star).collect();
    let estimates = risk_curve(dims, &Support::top_left(dims), &levels, trials, seed, method)?;
    Ok(SweepResult {
        dims: *dims,
        a_star_used: a_star,
        grid: multipliers
            .iter()
            .zip(levels)
            .zip(estimates)
            .map(|((&multiplier, a), estimate)| SweepPoint { multiplier, a, estimate })
            .collect(),
    })
}

/// Risk of top-`n` selection in the vector model `X_i = a 1{i < n} + noise`.
/// The estimate reports dims `N x 1` with an `n x 1` block.
pub fn vector_risk(len: usize, n: usize, a: f64, trials: usize, seed: u64) -> Result<RiskEstimate> {
    if n < 2 || n >= len {
        return Err(Error::Domain(format!("vector risk needs 2 <= n < N (n = {n}, N = {len})")));
    }
    check_trials(trials)?;
    SignalSpec::uniform(a)?;
    let dims = Dims::new(len, 1, n, 1)?;
    let outcomes: Result<Vec<(bool, usize)>> = parallel::map_indexed(trials, |t| {
        let key = rng::derive(seed, rng::tag::TRIAL, t as u64);
        let mut r = rng::stream(key, 0);
        let x: Vec<f64> = (0..len)
            .map(|i| {
                let z: f64 = StandardNormal.sample(&mut r);
                if i < n {
                    z + a
                } else {
                    z
                }
            })
            .collect();
        let chosen = vector_select(&x, n)?;
        let common = chosen.iter().filter(|&&i| i < n).count();
        Ok((common == n, common))
    })
    .into_iter()
    .collect();
    let outcomes = outcomes?;
    let failures = outcomes.iter().filter(|o| !o.0).count();
    let overlap = outcomes.iter().map(|o| o.1 as u64).sum();
    Ok(RiskEstimate::from_counts(failures, 0, overlap, trials, dims, a, seed, Method::Vector))
}

/// Estimates `P(max_{j <= J} eta_j >= t sqrt(2 log J))` for i.i.d. standard
/// normal `eta`. For `J = 1` the threshold is 0.
pub fn max_gauss_exceedance(count: usize, t: f64, trials: usize, seed: u64) -> Result<f64> {
    if count == 0 {
        return Err(Error::InvalidParameter("need J >= 1".into()));
    }
    if trials < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 trials, got {trials}")));
    }
    let threshold = t * (2.0 * (count as f64).ln()).sqrt();
    let maxima = parallel::map_indexed(trials, |k| {
        let mut r = rng::stream(rng::derive(seed, rng::tag::GAUSS, k as u64), 0);
        (0..count)
            .map(|_| StandardNormal.sample(&mut r))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    Ok(maxima.iter().filter(|&&x| x >= threshold).count() as f64 / trials as f64)
}
