//! Small statistical helpers shared by the Monte Carlo and detection code.

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
///
/// The endpoints are clamped so that `0 <= low <= p <= high <= 1` holds
/// exactly, including at `p = 0` and `p = 1` where rounding could otherwise
/// leave them a few ulps on the wrong side.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = (center - half).clamp(0.0, p);
    let high = (center + half).clamp(p, 1.0);
    let low = if successes == 0 { 0.0 } else { low };
    let high = if successes == trials { 1.0 } else { high };
    (low, high)
}

/// Type-1 empirical quantile: the `ceil(q * len)`-th order statistic of an
/// ascending slice (1-based), with `q = 0` mapped to the minimum.
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let len = sorted.len();
    let rank = (q * len as f64).ceil() as usize;
    sorted[rank.clamp(1, len) - 1]
}

/// Sample mean, unbiased variance, skewness and (non-excess) kurtosis.
pub fn moments(values: &[f64]) -> (f64, f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let var = m2 / (n - 1.0);
    let pop = m2 / n;
    let skew = (m3 / n) / pop.powf(1.5);
    let kurt = (m4 / n) / (pop * pop);
    (mean, var, skew, kurt)
}
