//! The scan selector: the `n x m` submatrix with the largest entry sum.
//!
//! For a fixed row set `A`, the best column set is simply the `m` columns
//! with the largest sums restricted to `A`. [`scan_exact`] therefore only
//! enumerates one side (whichever has fewer subsets) and resolves the other
//! by top-`k` selection. [`scan_heuristic`] alternates the two top-`k` steps
//! from random starts, and [`scan_brute_force`] enumerates both sides as a
//! reference.
//!
//! Ties are broken towards the lexicographically smallest row list, then
//! the lexicographically smallest column list.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::combin::{binomial, next_lex, RevolvingDoor};
use crate::error::{Error, Result};
use crate::model::{Observation, Support};
use crate::{parallel, rng};

pub const DEFAULT_EXACT_BUDGET: u64 = 10_000_000;
pub const BRUTE_FORCE_BUDGET: u64 = 1_000_000;
pub const MAX_ALTERNATIONS: usize = 1000;

/// How a scan maximizer is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanMethod {
    Exact { budget: u64 },
    Heuristic { restarts: usize },
    BruteForce,
}

impl ScanMethod {
    pub fn exact() -> Self {
        ScanMethod::Exact {
            budget: DEFAULT_EXACT_BUDGET,
        }
    }

    pub fn heuristic(restarts: usize) -> Self {
        ScanMethod::Heuristic { restarts }
    }

    /// Exact when the cheaper side has at most `budget` subsets, otherwise
    /// the heuristic with `restarts` random starts.
    pub fn auto(rows: usize, cols: usize, n: usize, m: usize, budget: u64, restarts: usize) -> Self {
        if binomial(rows, n).min(binomial(cols, m)) <= budget {
            ScanMethod::Exact { budget }
        } else {
            ScanMethod::Heuristic { restarts }
        }
    }

    pub fn tag(&self) -> Method {
        match self {
            ScanMethod::Exact { .. } => Method::Exact,
            ScanMethod::Heuristic { .. } => Method::Heuristic,
            ScanMethod::BruteForce => Method::BruteForce,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Heuristic,
    BruteForce,
    Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorResult {
    pub support: Support,
    /// Sum of the data over `support`.
    pub objective: f64,
    pub method: Method,
    /// Accepted alternations summed over restarts (heuristic only).
    pub iterations: usize,
    pub restarts_used: usize,
}

/// Dispatches to the selector named by `method`; `seed` only matters for
/// the heuristic.
pub fn select(y: &Observation, n: usize, m: usize, method: &ScanMethod, seed: u64) -> Result<SelectorResult> {
    match *method {
        ScanMethod::Exact { budget } => scan_exact_with_budget(y, n, m, budget),
        ScanMethod::Heuristic { restarts } => scan_heuristic(y, n, m, restarts, seed),
        ScanMethod::BruteForce => scan_brute_force(y, n, m),
    }
}

fn check_shape(y: &Observation, n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 || n > y.rows() || m > y.cols() {
        return Err(Error::DimensionMismatch(format!(
            "cannot select a {n}x{m} block from a {}x{} matrix",
            y.rows(),
            y.cols()
        )));
    }
    Ok(())
}

#[inline]
fn desc(values: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    }
}

/// Indices of the `k` largest values, ascending; equal values prefer the
/// smaller index.
pub fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    assert!(k >= 1 && k <= values.len());
    let mut idx: Vec<usize> = (0..values.len()).collect();
    if k < values.len() {
        idx.select_nth_unstable_by(k - 1, desc(values));
        idx.truncate(k);
    }
    idx.sort_unstable();
    idx
}

/// Sum of `values[idx]` in the order given.
#[inline]
fn gather_sum(values: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| values[i]).sum()
}

/// Sum of the `k` largest values, using `scratch` (same length) as workspace.
#[inline]
fn sum_top_k(values: &[f64], scratch: &mut [f64], k: usize) -> f64 {
    if k == values.len() {
        return values.iter().sum();
    }
    scratch.copy_from_slice(values);
    scratch.select_nth_unstable_by(k - 1, |a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    scratch[..k].iter().sum()
}

/// Best candidate so far, in the original row/column orientation.
#[derive(Debug, Clone)]
struct Best {
    objective: f64,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl Best {
    fn empty() -> Self {
        Best {
            objective: f64::NEG_INFINITY,
            rows: Vec::new(),
            cols: Vec::new(),
        }
    }

    fn beats(&self, other: &Best) -> bool {
        self.objective > other.objective
            || (self.objective == other.objective && (&self.rows, &self.cols) < (&other.rows, &other.cols))
    }

    fn offer(&mut self, candidate: Best) {
        if candidate.beats(self) {
            *self = candidate;
        }
    }
}

#[inline]
fn add_row(colsum: &mut [f64], row: &[f64]) {
    for (s, v) in colsum.iter_mut().zip(row) {
        *s += v;
    }
}

#[inline]
fn sub_row(colsum: &mut [f64], row: &[f64]) {
    for (s, v) in colsum.iter_mut().zip(row) {
        *s -= v;
    }
}

/// Enumerates `k_rows`-subsets of the rows of `y`; `transposed` says whether
/// `y` is the transpose of the caller's matrix (affects only tie keys).
fn exact_oriented(y: &Observation, k_rows: usize, k_cols: usize, transposed: bool) -> Best {
    let nr = y.rows();
    let nc = y.cols();

    // Work units: subsets grouped by their largest one or two elements.
    let parts: Vec<(usize, usize)> = if k_rows == 1 {
        (0..nr).map(|t| (t, usize::MAX)).collect()
    } else {
        (1..nr)
            .flat_map(|t1| (k_rows - 2..t1).map(move |t2| (t1, t2)))
            .collect()
    };

    let solve_part = |&(t1, t2): &(usize, usize)| -> Best {
        let mut best = Best::empty();
        let mut colsum = vec![0.0; nc];
        let mut scratch = vec![0.0; nc];
        let mut door = if k_rows == 1 {
            RevolvingDoor::new(0, 0)
        } else {
            RevolvingDoor::new(t2, k_rows - 2)
        };
        add_row(&mut colsum, y.row(t1));
        if k_rows >= 2 {
            add_row(&mut colsum, y.row(t2));
        }
        for &r in door.current() {
            add_row(&mut colsum, y.row(r));
        }
        loop {
            let s = sum_top_k(&colsum, &mut scratch, k_cols);
            if s + 1e-9 * (1.0 + s.abs()) >= best.objective {
                let cols = top_k(&colsum, k_cols);
                let objective = gather_sum(&colsum, &cols);
                let mut rows = door.current().to_vec();
                if k_rows >= 2 {
                    rows.push(t2);
                }
                rows.push(t1);
                let candidate = if transposed {
                    Best { objective, rows: cols, cols: rows }
                } else {
                    Best { objective, rows, cols }
                };
                best.offer(candidate);
            }
            match door.advance() {
                Some((out, inn)) => {
                    sub_row(&mut colsum, y.row(out));
                    add_row(&mut colsum, y.row(inn));
                }
                None => break,
            }
        }
        best
    };

    let per_part = parallel::map_indexed(parts.len(), |p| solve_part(&parts[p]));
    let mut best = Best::empty();
    for b in per_part {
        best.offer(b);
    }
    best
}

/// Global scan maximizer with the default enumeration budget.
pub fn scan_exact(y: &Observation, n: usize, m: usize) -> Result<SelectorResult> {
    scan_exact_with_budget(y, n, m, DEFAULT_EXACT_BUDGET)
}

/// Global scan maximizer; fails if the cheaper side has more than `budget`
/// subsets.
pub fn scan_exact_with_budget(y: &Observation, n: usize, m: usize, budget: u64) -> Result<SelectorResult> {
    check_shape(y, n, m)?;
    let by_rows = binomial(y.rows(), n);
    let by_cols = binomial(y.cols(), m);
    let count = by_rows.min(by_cols);
    if count > budget {
        return Err(Error::BudgetExceeded { count, budget });
    }
    let best = if by_rows <= by_cols {
        exact_oriented(y, n, m, false)
    } else {
        exact_oriented(&y.transpose(), m, n, true)
    };
    Ok(finish(y, best, Method::Exact, 0, 0))
}

fn finish(y: &Observation, best: Best, method: Method, iterations: usize, restarts_used: usize) -> SelectorResult {
    let support = Support::from_sorted(best.rows, best.cols);
    SelectorResult {
        objective: y.support_sum(&support),
        support,
        method,
        iterations,
        restarts_used,
    }
}

/// Exhaustive search over every row-set x column-set pair.
pub fn scan_brute_force(y: &Observation, n: usize, m: usize) -> Result<SelectorResult> {
    check_shape(y, n, m)?;
    let count = binomial(y.rows(), n).saturating_mul(binomial(y.cols(), m));
    if count > BRUTE_FORCE_BUDGET {
        return Err(Error::BudgetExceeded {
            count,
            budget: BRUTE_FORCE_BUDGET,
        });
    }
    let mut best = Best::empty();
    let mut rows: Vec<usize> = (0..n).collect();
    loop {
        let mut cols: Vec<usize> = (0..m).collect();
        loop {
            let objective: f64 = rows
                .iter()
                .map(|&i| {
                    let row = y.row(i);
                    cols.iter().map(|&j| row[j]).sum::<f64>()
                })
                .sum();
            // lexicographic visiting order: strict improvement keeps the smallest key
            if objective > best.objective {
                best = Best {
                    objective,
                    rows: rows.clone(),
                    cols: cols.clone(),
                };
            }
            if !next_lex(&mut cols, y.cols()) {
                break;
            }
        }
        if !next_lex(&mut rows, y.rows()) {
            break;
        }
    }
    Ok(finish(y, best, Method::BruteForce, 0, 0))
}

fn column_sums(y: &Observation, rows: &[usize]) -> Vec<f64> {
    let mut colsum = vec![0.0; y.cols()];
    for &i in rows {
        add_row(&mut colsum, y.row(i));
    }
    colsum
}

fn row_sums(y: &Observation, cols: &[usize]) -> Vec<f64> {
    (0..y.rows())
        .map(|i| {
            let row = y.row(i);
            gather_sum(row, cols)
        })
        .collect()
}

/// One alternating-maximization run from `init_rows`. Returns the fixed
/// point, the number of accepted alternations and the objective after each
/// accepted step (strictly increasing).
fn ascend(y: &Observation, n: usize, m: usize, init_rows: Vec<usize>) -> (Best, usize, Vec<f64>) {
    let mut rows = init_rows;
    let colsum = column_sums(y, &rows);
    let mut cols = top_k(&colsum, m);
    let mut objective = gather_sum(&colsum, &cols);
    let mut trace = vec![objective];
    let mut accepted = 0;
    while accepted < MAX_ALTERNATIONS {
        let rowsum = row_sums(y, &cols);
        let mut next_rows = top_k(&rowsum, n);
        let colsum = column_sums(y, &next_rows);
        let next_cols = top_k(&colsum, m);
        let next_obj = gather_sum(&colsum, &next_cols);
        if next_obj > objective {
            std::mem::swap(&mut rows, &mut next_rows);
            cols = next_cols;
            objective = next_obj;
            trace.push(objective);
            accepted += 1;
        } else {
            break;
        }
    }
    (Best { objective, rows, cols }, accepted, trace)
}

/// Rows ranked by the sum of their `m` largest entries.
fn greedy_rows(y: &Observation, n: usize, m: usize) -> Vec<usize> {
    let mut scratch = vec![0.0; y.cols()];
    let score: Vec<f64> = (0..y.rows()).map(|i| sum_top_k(y.row(i), &mut scratch, m)).collect();
    top_k(&score, n)
}

/// Initial rows for a restart: restart 0 starts from [`greedy_rows`], the
/// others from uniform random `n`-subsets.
fn initial_rows(y: &Observation, n: usize, m: usize, seed: u64, restart: usize) -> Vec<usize> {
    if restart == 0 {
        greedy_rows(y, n, m)
    } else {
        random_rows(y, n, seed, restart)
    }
}

fn random_rows(y: &Observation, n: usize, seed: u64, restart: usize) -> Vec<usize> {
    let mut r = rng::stream(rng::derive(seed, rng::tag::RESTART, 0), restart as u64);
    let mut rows = rand::seq::index::sample(&mut r, y.rows(), n).into_vec();
    rows.sort_unstable();
    rows
}

/// Best fixed point of alternating maximization over `restarts` initial row
/// sets (see [`initial_rows`]). Restart `r` always uses the same stream, so adding
/// restarts never lowers the objective.
pub fn scan_heuristic(y: &Observation, n: usize, m: usize, restarts: usize, seed: u64) -> Result<SelectorResult> {
    check_shape(y, n, m)?;
    if restarts == 0 {
        return Err(Error::InvalidParameter("heuristic needs at least one restart".into()));
    }
    let runs = parallel::map_indexed(restarts, |r| {
        let (best, accepted, _) = ascend(y, n, m, initial_rows(y, n, m, seed, r));
        (best, accepted)
    });
    let mut best = Best::empty();
    let mut iterations = 0;
    for (b, accepted) in runs {
        iterations += accepted;
        best.offer(b);
    }
    Ok(finish(y, best, Method::Heuristic, iterations, restarts))
}

/// Indices of the `n` largest entries of `x` (ascending); ties prefer the
/// smaller index. This maximizes the coordinate sum over all size-`n` sets.
pub fn vector_select(x: &[f64], n: usize) -> Result<Vec<usize>> {
    if n == 0 || n > x.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot select {n} of {} coordinates",
            x.len()
        )));
    }
    Ok(top_k(x, n))
}

/// `log(dP_0 / dP_C) = -a * sum_C Y + a^2 |C| / 2`, where `P_0` is pure noise
/// and `P_C` has mean `a` on `support`.
pub fn log_lr(y: &Observation, support: &Support, a: f64) -> Result<f64> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::InvalidParameter(format!("signal level must be finite and >= 0, got {a}")));
    }
    let out_row = support.rows().last().is_some_and(|&r| r >= y.rows());
    let out_col = support.cols().last().is_some_and(|&c| c >= y.cols());
    if out_row || out_col {
        return Err(Error::DimensionMismatch("support lies outside the matrix".into()));
    }
    let cells = (support.rows().len() * support.cols().len()) as f64;
    Ok(-a * y.support_sum(support) + a * a * cells / 2.0)
}
