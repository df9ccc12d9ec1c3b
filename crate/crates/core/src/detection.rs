//! Detection of a planted submatrix: the union of a linear (grand-sum) test
//! and a scan test, each calibrated by simulation under the null.
//!
//! The level `alpha` is split evenly between the two sub-tests (Bonferroni),
//! and each critical value is an empirical order statistic of the null
//! distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{generate_null, Dims, Observation};
use crate::selector::{select, ScanMethod};
use crate::stats::empirical_quantile;
use crate::{parallel, rng};

/// `sum_ij Y_ij / sqrt(NM)`: exactly standard normal under the null.
pub fn linear_statistic(y: &Observation) -> f64 {
    y.data().iter().sum::<f64>() / (y.dims().cells() as f64).sqrt()
}

/// Scan objective standardized by `sqrt(nm)`.
pub fn scan_statistic(y: &Observation, n: usize, m: usize, method: &ScanMethod, seed: u64) -> Result<f64> {
    let r = select(y, n, m, method, seed)?;
    Ok(r.objective / ((n * m) as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionCalibration {
    pub alpha: f64,
    pub scan_crit: f64,
    pub linear_crit: f64,
    pub trials: usize,
    pub dims: Dims,
    pub seed: u64,
    /// The scan statistic must be computed the same way at test time.
    pub method: ScanMethod,
    /// Level given to each sub-test.
    pub per_test_alpha: f64,
}

/// Seed for the heuristic scan applied to trial `index` of a stream tag.
fn scan_seed(key: u64) -> u64 {
    rng::derive(key, rng::tag::SELECT, 0)
}

/// Null draws of `(linear, scan)` for trials `0..trials` under `tag`.
pub(crate) fn null_statistics(
    dims: &Dims,
    trials: usize,
    seed: u64,
    tag: u64,
    method: &ScanMethod,
) -> Result<Vec<(f64, f64)>> {
    let (n, m) = (dims.sub_rows(), dims.sub_cols());
    parallel::map_indexed(trials, |t| {
        let key = rng::derive(seed, tag, t as u64);
        let y = generate_null(dims, key);
        Ok((linear_statistic(&y), scan_statistic(&y, n, m, method, scan_seed(key))?))
    })
    .into_iter()
    .collect()
}

/// Simulates `trials` null matrices and records the `1 - alpha/2` quantiles
/// of both statistics.
pub fn calibrate(dims: &Dims, alpha: f64, trials: usize, seed: u64, method: ScanMethod) -> Result<DetectionCalibration> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if (trials as f64) * alpha < 100.0 - 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "need trials >= 100 / alpha = {} for alpha = {alpha}, got {trials}",
            (100.0 / alpha).ceil()
        )));
    }
    let draws = null_statistics(dims, trials, seed, rng::tag::NULL, &method)?;
    let (mut linear, mut scan): (Vec<f64>, Vec<f64>) = draws.into_iter().unzip();
    linear.sort_by(f64::total_cmp);
    scan.sort_by(f64::total_cmp);
    let per_test_alpha = alpha / 2.0;
    let q = 1.0 - per_test_alpha;
    Ok(DetectionCalibration {
        alpha,
        scan_crit: empirical_quantile(&scan, q),
        linear_crit: empirical_quantile(&linear, q),
        trials,
        dims: *dims,
        seed,
        method,
        per_test_alpha,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub reject: bool,
    pub linear_reject: bool,
    pub scan_reject: bool,
    pub linear_value: f64,
    pub scan_value: f64,
}

/// Rejects the null as soon as either sub-test rejects.
pub fn detect(y: &Observation, calibration: &DetectionCalibration) -> Result<Decision> {
    detect_seeded(y, calibration, scan_seed(calibration.seed))
}

pub(crate) fn detect_seeded(y: &Observation, cal: &DetectionCalibration, seed: u64) -> Result<Decision> {
    let d = &cal.dims;
    if y.rows() != d.rows() || y.cols() != d.cols() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, calibration was for {}x{}",
            y.rows(),
            y.cols(),
            d.rows(),
            d.cols()
        )));
    }
    let linear_value = linear_statistic(y);
    let scan_value = scan_statistic(y, d.sub_rows(), d.sub_cols(), &cal.method, seed)?;
    let linear_reject = linear_value > cal.linear_crit;
    let scan_reject = scan_value > cal.scan_crit;
    Ok(Decision {
        reject: linear_reject || scan_reject,
        linear_reject,
        scan_reject,
        linear_value,
        scan_value,
    })
}

/// Fraction of `trials` fresh null matrices (independent of the calibration
/// draws) that the calibrated test rejects.
pub fn null_rejection_rate(cal: &DetectionCalibration, trials: usize, seed: u64) -> Result<f64> {
    let draws = null_statistics(&cal.dims, trials, seed, rng::tag::FRESH, &cal.method)?;
    let rejected = draws
        .iter()
        .filter(|(l, s)| *l > cal.linear_crit || *s > cal.scan_crit)
        .count();
    Ok(rejected as f64 / trials as f64)
}

/// Rejection rate when `a` is planted on the top-left block, over `trials`
/// seeded draws. Draw `t` uses the same noise for every `a`.
pub fn power(cal: &DetectionCalibration, a: f64, trials: usize, seed: u64) -> Result<f64> {
    use crate::model::{SignalSpec, Support};
    let dims = cal.dims;
    let support = Support::top_left(&dims);
    let signal = SignalSpec::uniform(a)?;
    let decisions: Result<Vec<bool>> = parallel::map_indexed(trials, |t| {
        let key = rng::derive(seed, rng::tag::TRIAL, t as u64);
        let y = generate_null(&dims, key).with_signal(&support, &signal)?;
        Ok(detect_seeded(&y, cal, scan_seed(key))?.reject)
    })
    .into_iter()
    .collect();
    Ok(decisions?.iter().filter(|&&r| r).count() as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate, SignalSpec, Support};

    #[test]
    fn linear_statistic_basics() {
        let d = Dims::new(3, 4, 1, 1).unwrap();
        assert_eq!(linear_statistic(&Observation::new(d, vec![0.0; 12]).unwrap()), 0.0);
        let single = Observation::new(Dims::new(1, 1, 1, 1).unwrap(), vec![2.0]).unwrap();
        assert_eq!(scan_statistic(&single, 1, 1, &ScanMethod::exact(), 0).unwrap(), 2.0);
    }

    #[test]
    fn linear_statistic_null_variance() {
        let d = Dims::new(20, 20, 2, 2).unwrap();
        let v: Vec<f64> = (0..10_000).map(|s| linear_statistic(&generate_null(&d, s))).collect();
        let (mean, var, _, _) = crate::stats::moments(&v);
        assert!(mean.abs() < 0.04, "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn linear_statistic_shift_under_signal() {
        let d = Dims::new(100, 100, 10, 10).unwrap();
        let s = Support::top_left(&d);
        let sig = SignalSpec::uniform(1.0).unwrap();
        let mean = (0..1000)
            .map(|seed| linear_statistic(&generate(&d, &s, &sig, seed).unwrap()))
            .sum::<f64>()
            / 1000.0;
        // a nm / sqrt(NM) = 1
        assert!((mean - 1.0).abs() < 0.1, "{mean}");
    }

    #[test]
    fn scan_statistic_equals_scaled_objective() {
        let d = Dims::new(9, 8, 2, 3).unwrap();
        let y = generate_null(&d, 4);
        let obj = crate::selector::scan_exact(&y, 2, 3).unwrap().objective;
        assert_eq!(scan_statistic(&y, 2, 3, &ScanMethod::exact(), 0).unwrap(), obj / 6f64.sqrt());
    }

    #[test]
    fn scan_statistic_null_band() {
        let d = Dims::new(20, 20, 3, 3).unwrap();
        let mean = (0..500)
            .map(|s| scan_statistic(&generate_null(&d, s), 3, 3, &ScanMethod::exact(), 0).unwrap())
            .sum::<f64>()
            / 500.0;
        let center = (2.0 * (6.0 * (20.0f64 / 3.0).ln())).sqrt();
        assert!(mean > 0.75 * center && mean < 1.25 * center, "{mean} vs {center}");
    }

    #[test]
    fn calibration_guards_and_determinism() {
        let d = Dims::new(15, 15, 2, 2).unwrap();
        let m = ScanMethod::exact();
        assert!(calibrate(&d, 1.0, 1000, 0, m).is_err());
        assert!(calibrate(&d, 0.0, 1000, 0, m).is_err());
        assert!(calibrate(&d, 0.1, 999, 0, m).is_err());
        let a = calibrate(&d, 0.1, 1000, 5, m).unwrap();
        let b = calibrate(&d, 0.1, 1000, 5, m).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.per_test_alpha, 0.05);
    }

    #[test]
    fn detect_on_extremes() {
        let d = Dims::new(15, 15, 2, 2).unwrap();
        let cal = calibrate(&d, 0.1, 1000, 5, ScanMethod::exact()).unwrap();
        assert!(cal.linear_crit > 0.0 && cal.scan_crit > 0.0);
        let zeros = Observation::new(d, vec![0.0; 225]).unwrap();
        assert!(!detect(&zeros, &cal).unwrap().reject);
        let s = Support::top_left(&d);
        let loud = generate(&d, &s, &SignalSpec::uniform(1e4).unwrap(), 1).unwrap();
        let dec = detect(&loud, &cal).unwrap();
        assert!(dec.reject && dec.linear_reject && dec.scan_reject);
        let other = generate_null(&Dims::new(14, 15, 2, 2).unwrap(), 0);
        assert!(matches!(detect(&other, &cal), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn power_is_monotone_with_common_noise() {
        let d = Dims::new(20, 20, 3, 3).unwrap();
        let cal = calibrate(&d, 0.1, 1000, 9, ScanMethod::exact()).unwrap();
        let mut prev = 0.0;
        for a in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
            let p = power(&cal, a, 300, 17).unwrap();
            assert!(p >= prev, "a = {a}: {p} < {prev}");
            prev = p;
        }
        assert!(prev > 0.9);
    }
}
