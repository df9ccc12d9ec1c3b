//! Problem instances and seeded observation generation.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Axis, Error, Result};
use crate::{parallel, rng};

/// Matrix size `N x M` and planted submatrix size `n x m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    #[serde(rename = "N")]
    rows: usize,
    #[serde(rename = "M")]
    cols: usize,
    #[serde(rename = "n")]
    sub_rows: usize,
    #[serde(rename = "m")]
    sub_cols: usize,
}

impl Dims {
    pub fn new(rows: usize, cols: usize, sub_rows: usize, sub_cols: usize) -> Result<Self> {
        let mut problems = Vec::new();
        if sub_rows == 0 {
            problems.push("n must be at least 1".to_string());
        }
        if sub_cols == 0 {
            problems.push("m must be at least 1".to_string());
        }
        if sub_rows > rows {
            problems.push(format!("n <= N violated (n = {sub_rows}, N = {rows})"));
        }
        if sub_cols > cols {
            problems.push(format!("m <= M violated (m = {sub_cols}, M = {cols})"));
        }
        if !problems.is_empty() {
            return Err(Error::InvalidDims(problems.join("; ")));
        }
        Ok(Dims {
            rows,
            cols,
            sub_rows,
            sub_cols,
        })
    }

    /// Shape of a plain `N x M` matrix, with a `1 x 1` placeholder submatrix.
    pub fn matrix(rows: usize, cols: usize) -> Result<Self> {
        Dims::new(rows, cols, 1, 1)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn sub_rows(&self) -> usize {
        self.sub_rows
    }

    pub fn sub_cols(&self) -> usize {
        self.sub_cols
    }

    /// Row sparsity `p = n / N`.
    pub fn p(&self) -> f64 {
        self.sub_rows as f64 / self.rows as f64
    }

    /// Column sparsity `q = m / M`.
    pub fn q(&self) -> f64 {
        self.sub_cols as f64 / self.cols as f64
    }

    /// Same dimensions with rows and columns exchanged.
    pub fn transposed(&self) -> Dims {
        Dims {
            rows: self.cols,
            cols: self.rows,
            sub_rows: self.sub_cols,
            sub_cols: self.sub_rows,
        }
    }

    /// Re-validates dimensions read from an untrusted source.
    pub fn validated(self) -> Result<Self> {
        Dims::new(self.rows, self.cols, self.sub_rows, self.sub_cols)
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }
}

/// A candidate submatrix `C = A x B`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Support {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

fn canonical_indices(axis: Axis, mut ids: Vec<usize>, expected: usize, len: usize) -> Result<Vec<usize>> {
    if ids.len() != expected {
        return Err(Error::Cardinality {
            axis,
            expected,
            got: ids.len(),
        });
    }
    if let Some(&index) = ids.iter().find(|&&i| i >= len) {
        return Err(Error::IndexOutOfRange { axis, index, len });
    }
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateIndex { axis, index: w[0] });
    }
    Ok(ids)
}

/// Validates and canonicalizes (sorts) row and column index lists.
pub fn make_support(dims: &Dims, row_ids: Vec<usize>, col_ids: Vec<usize>) -> Result<Support> {
    let rows = canonical_indices(Axis::Row, row_ids, dims.sub_rows, dims.rows)?;
    let cols = canonical_indices(Axis::Col, col_ids, dims.sub_cols, dims.cols)?;
    Ok(Support { rows, cols })
}

impl Support {
    pub fn new(dims: &Dims, rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        make_support(dims, rows, cols)
    }

    /// The top-left block: rows `0..n`, columns `0..m`.
    pub fn top_left(dims: &Dims) -> Support {
        Support {
            rows: (0..dims.sub_rows).collect(),
            cols: (0..dims.sub_cols).collect(),
        }
    }

    /// Builds a support from index lists already known to be sorted and
    /// distinct. Callers inside the crate guarantee this.
    pub(crate) fn from_sorted(rows: Vec<usize>, cols: Vec<usize>) -> Support {
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(cols.windows(2).all(|w| w[0] < w[1]));
        Support { rows, cols }
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    /// Number of cells shared with `other`.
    pub fn overlap(&self, other: &Support) -> usize {
        count_common(&self.rows, &other.rows) * count_common(&self.cols, &other.cols)
    }

    /// Checks that this support has the shape and range required by `dims`.
    pub fn check_against(&self, dims: &Dims) -> Result<()> {
        if self.rows.len() != dims.sub_rows || self.cols.len() != dims.sub_cols {
            return Err(Error::DimensionMismatch(format!(
                "support is {}x{}, dims require {}x{}",
                self.rows.len(),
                self.cols.len(),
                dims.sub_rows,
                dims.sub_cols
            )));
        }
        let out_row = self.rows.last().is_some_and(|&r| r >= dims.rows);
        let out_col = self.cols.last().is_some_and(|&c| c >= dims.cols);
        if out_row || out_col {
            return Err(Error::DimensionMismatch(format!(
                "support indices exceed the {}x{} matrix",
                dims.rows, dims.cols
            )));
        }
        Ok(())
    }

    /// Validates a support read from an untrusted source against `dims`.
    pub fn validated(self, dims: &Dims) -> Result<Support> {
        make_support(dims, self.rows, self.cols)
    }
}

fn count_common(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Signal on the support: every cell has mean `a`, or an explicit table of
/// per-cell means (row-major over the support, each `>= a`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    a: f64,
    means: Option<Vec<f64>>,
}

impl SignalSpec {
    pub fn uniform(a: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::InvalidParameter(format!("signal level must be finite and >= 0, got {a}")));
        }
        Ok(SignalSpec { a, means: None })
    }

    pub fn with_means(a: f64, means: Vec<f64>) -> Result<Self> {
        SignalSpec::uniform(a)?;
        if let Some(bad) = means.iter().find(|&&s| !(s.is_finite() && s >= a)) {
            return Err(Error::InvalidParameter(format!("mean {bad} is below the minimum level {a}")));
        }
        Ok(SignalSpec { a, means: Some(means) })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn means(&self) -> Option<&[f64]> {
        self.means.as_deref()
    }
}

/// An `N x M` data matrix, dense and row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    dims: Dims,
    data: Vec<f64>,
}

impl Observation {
    pub fn new(dims: Dims, data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.cells() {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {}x{} matrix",
                data.len(),
                dims.rows,
                dims.cols
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: idx / dims.cols,
                col: idx % dims.cols,
            });
        }
        Ok(Observation { dims, data })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.cells());
        for i in 0..dims.rows {
            for j in 0..dims.cols {
                data.push(f(i, j));
            }
        }
        Observation::new(dims, data)
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn rows(&self) -> usize {
        self.dims.rows
    }

    pub fn cols(&self) -> usize {
        self.dims.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dims.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.dims.cols;
        &self.data[i * c..(i + 1) * c]
    }

    pub fn transpose(&self) -> Observation {
        let (r, c) = (self.dims.rows, self.dims.cols);
        let mut data = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                data[j * r + i] = self.data[i * c + j];
            }
        }
        Observation {
            dims: self.dims.transposed(),
            data,
        }
    }

    /// Sum of the entries of `support`, rows then columns ascending.
    pub fn support_sum(&self, support: &Support) -> f64 {
        let mut total = 0.0;
        for &i in &support.rows {
            let row = self.row(i);
            for &j in &support.cols {
                total += row[j];
            }
        }
        total
    }

    /// Adds `signal` on `support` to a copy of this matrix.
    pub fn with_signal(&self, support: &Support, signal: &SignalSpec) -> Result<Observation> {
        support.check_against(&self.dims)?;
        if let Some(means) = signal.means() {
            if means.len() != support.rows.len() * support.cols.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} means supplied for a {}x{} support",
                    means.len(),
                    support.rows.len(),
                    support.cols.len()
                )));
            }
        }
        let mut out = self.clone();
        let c = self.dims.cols;
        let width = support.cols.len();
        for (si, &i) in support.rows.iter().enumerate() {
            for (sj, &j) in support.cols.iter().enumerate() {
                let s = match signal.means() {
                    Some(means) => means[si * width + sj],
                    None => signal.a,
                };
                out.data[i * c + j] += s;
            }
        }
        Ok(out)
    }

    /// Copy with a different planted-shape annotation; the data is unchanged.
    pub fn with_dims(mut self, dims: Dims) -> Result<Observation> {
        if dims.rows != self.dims.rows || dims.cols != self.dims.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, metadata says {}x{}",
                self.dims.rows, self.dims.cols, dims.rows, dims.cols
            )));
        }
        self.dims = dims;
        Ok(self)
    }
}

/// Standard Gaussian noise: row `i` is drawn from stream `i` of the
/// generator keyed by `seed`.
fn noise(dims: &Dims, seed: u64) -> Vec<f64> {
    let cols = dims.cols;
    let rows = parallel::map_indexed(dims.rows, |i| {
        let mut r = rng::stream(seed, i as u64);
        (0..cols).map(|_| StandardNormal.sample(&mut r)).collect::<Vec<f64>>()
    });
    rows.concat()
}

/// Draws `Y = S + noise` with the signal planted on `support`.
pub fn generate(dims: &Dims, support: &Support, signal: &SignalSpec, seed: u64) -> Result<Observation> {
    support.check_against(dims)?;
    generate_null(dims, seed).with_signal(support, signal)
}

/// Pure-noise matrix; identical to [`generate`] with `a = 0` and the same seed.
pub fn generate_null(dims: &Dims, seed: u64) -> Observation {
    Observation {
        dims: *dims,
        data: noise(dims, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::moments;

    fn dims(n: usize, m: usize, a: usize, b: usize) -> Dims {
        Dims::new(n, m, a, b).unwrap()
    }

    #[test]
    fn support_construction_and_canonical_order() {
        let d = dims(4, 4, 2, 2);
        let s = make_support(&d, vec![0, 1], vec![2, 3]).unwrap();
        assert_eq!(s.rows(), &[0, 1]);
        assert_eq!(s.cols(), &[2, 3]);
        assert_eq!(make_support(&d, vec![1, 0], vec![3, 2]).unwrap(), s);
    }

    #[test]
    fn support_validation_errors_are_distinct() {
        let d = dims(4, 4, 2, 2);
        assert_eq!(
            make_support(&d, vec![0, 0], vec![2, 3]),
            Err(Error::DuplicateIndex { axis: Axis::Row, index: 0 })
        );
        assert_eq!(
            make_support(&d, vec![0, 4], vec![2, 3]),
            Err(Error::IndexOutOfRange { axis: Axis::Row, index: 4, len: 4 })
        );
        assert_eq!(
            make_support(&d, vec![0, 1], vec![2]),
            Err(Error::Cardinality { axis: Axis::Col, expected: 2, got: 1 })
        );
    }

    #[test]
    fn dims_validation_lists_every_violation() {
        let err = Dims::new(5, 3, 10, 4).unwrap_err().to_string();
        assert!(err.contains("n <= N"), "{err}");
        assert!(err.contains("m <= M"), "{err}");
        assert!(Dims::new(3, 3, 0, 1).is_err());
    }

    #[test]
    fn zero_signal_grand_mean() {
        let d = dims(1000, 1000, 5, 5);
        let y = generate(&d, &Support::top_left(&d), &SignalSpec::uniform(0.0).unwrap(), 3).unwrap();
        let mean = y.data().iter().sum::<f64>() / 1e6;
        assert!(mean.abs() < 4.0 / 1e3, "{mean}");
    }

    #[test]
    fn same_seed_same_matrix() {
        let d = dims(30, 20, 3, 2);
        let s = make_support(&d, vec![4, 9, 1], vec![0, 19]).unwrap();
        let sig = SignalSpec::uniform(1.5).unwrap();
        let a = generate(&d, &s, &sig, 42).unwrap();
        let b = generate(&d, &s, &sig, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate(&d, &s, &sig, 43).unwrap());
    }

    #[test]
    fn planted_and_background_means() {
        let d = dims(50, 50, 5, 5);
        let s = Support::top_left(&d);
        let sig = SignalSpec::uniform(3.0).unwrap();
        let (mut on, mut off) = (0.0, 0.0);
        let seeds = 10_000u64;
        for seed in 0..seeds {
            let y = generate(&d, &s, &sig, seed).unwrap();
            for i in 0..50 {
                for j in 0..50 {
                    if i < 5 && j < 5 {
                        on += y.get(i, j);
                    } else {
                        off += y.get(i, j);
                    }
                }
            }
        }
        let tol = 4.0 / (25.0 * seeds as f64).sqrt();
        let on_mean = on / (25.0 * seeds as f64);
        let off_mean = off / (2475.0 * seeds as f64);
        assert!((on_mean - 3.0).abs() < tol, "{on_mean}");
        assert!(off_mean.abs() < tol, "{off_mean}");
    }

    #[test]
    fn null_matches_zero_signal_generation() {
        let d = dims(12, 7, 2, 3);
        let zero = generate(&d, &Support::top_left(&d), &SignalSpec::uniform(0.0).unwrap(), 11).unwrap();
        assert_eq!(generate_null(&d, 11), zero);
        let single = generate_null(&dims(1, 1, 1, 1), 5);
        assert_eq!(single.data().len(), 1);
        assert!(single.get(0, 0).is_finite());
    }

    #[test]
    fn noise_moments_are_standard_normal() {
        let y = generate_null(&dims(1000, 1000, 1, 1), 2024);
        let (mean, var, skew, kurt) = moments(y.data());
        assert!(mean.abs() < 0.004);
        assert!((var - 1.0).abs() < 0.01, "{var}");
        assert!(skew.abs() < 0.05, "{skew}");
        assert!((kurt - 3.0).abs() < 0.1, "{kurt}");
    }

    #[test]
    fn centered_populations_agree() {
        let d = dims(40, 40, 8, 8);
        let s = Support::top_left(&d);
        let sig = SignalSpec::uniform(2.0).unwrap();
        let (mut on, mut off, mut n_on, mut n_off) = (0.0, 0.0, 0usize, 0usize);
        for seed in 0..200 {
            let y = generate(&d, &s, &sig, seed).unwrap();
            for i in 0..40 {
                for j in 0..40 {
                    if i < 8 && j < 8 {
                        on += y.get(i, j) - 2.0;
                        n_on += 1;
                    } else {
                        off += y.get(i, j);
                        n_off += 1;
                    }
                }
            }
        }
        let diff = on / n_on as f64 - off / n_off as f64;
        let sigma = (1.0 / n_on as f64 + 1.0 / n_off as f64).sqrt();
        assert!(diff.abs() < 4.0 * sigma, "{diff}");
    }

    #[test]
    fn heterogeneous_means() {
        let d = dims(3, 3, 1, 2);
        let s = make_support(&d, vec![1], vec![0, 2]).unwrap();
        assert!(SignalSpec::with_means(1.0, vec![0.5, 2.0]).is_err());
        let sig = SignalSpec::with_means(1.0, vec![1.0, 5.0]).unwrap();
        let base = generate_null(&d, 1);
        let y = generate(&d, &s, &sig, 1).unwrap();
        assert_eq!(y.get(1, 0), base.get(1, 0) + 1.0);
        assert_eq!(y.get(1, 2), base.get(1, 2) + 5.0);
        assert_eq!(y.get(0, 0), base.get(0, 0));
    }

    #[test]
    fn support_from_other_dims_is_rejected() {
        let s = Support::top_left(&dims(10, 10, 3, 3));
        let d = dims(10, 10, 2, 2);
        assert!(matches!(
            generate(&d, &s, &SignalSpec::uniform(1.0).unwrap(), 0),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn observation_rejects_non_finite() {
        let d = Dims::matrix(1, 2).unwrap();
        assert_eq!(
            Observation::new(d, vec![0.0, f64::NAN]),
            Err(Error::NonFinite { row: 0, col: 1 })
        );
    }
}
