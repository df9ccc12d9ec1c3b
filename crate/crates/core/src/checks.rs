//! Randomized property suites over the selectors and thresholds.
//!
//! Each check draws its own instances from `seed` and returns a
//! [`CheckReport`] counting violations, so the same code backs the CLI
//! `selftest` verb (small counts) and the acceptance suite (full counts).

use serde::Serialize;

use crate::combin::next_lex;
use crate::model::{generate_null, Dims, Observation, Support};
use crate::rng;
use crate::selector::{scan_brute_force, scan_exact, top_k};
use crate::thresholds::{compute, critical_value};

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub instances: usize,
    pub violations: usize,
    /// First violation, if any.
    pub example: Option<String>,
}

impl CheckReport {
    fn new(name: &'static str) -> Self {
        CheckReport {
            name,
            instances: 0,
            violations: 0,
            example: None,
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.violations += 1;
            if self.example.is_none() {
                self.example = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.instances > 0
    }
}

const TAG_SHAPE: u64 = 0x7368_6170_6500_0010;
const TAG_DATA: u64 = 0x6461_7461_0000_0011;
const TAG_PERM: u64 = 0x7065_726d_0000_0012;

/// Uniform integer in `lo..=hi` from instance `(seed, tag, index)`.
fn pick(seed: u64, tag: u64, index: u64, lo: usize, hi: usize) -> usize {
    lo + (rng::derive(seed, tag, index) % (hi - lo + 1) as u64) as usize
}

/// Random shape with `N, M in 2..=max_side` and `n, m in 1..=min(side, max_sub)`.
fn random_shape(seed: u64, i: u64, max_side: usize, max_sub: usize) -> Dims {
    let rows = pick(seed, TAG_SHAPE, 4 * i, 2, max_side);
    let cols = pick(seed, TAG_SHAPE, 4 * i + 1, 2, max_side);
    let n = pick(seed, TAG_SHAPE, 4 * i + 2, 1, rows.min(max_sub));
    let m = pick(seed, TAG_SHAPE, 4 * i + 3, 1, cols.min(max_sub));
    Dims::new(rows, cols, n, m).expect("valid by construction")
}

fn random_matrix(seed: u64, i: u64, dims: &Dims) -> Observation {
    generate_null(dims, rng::derive(seed, TAG_DATA, i))
}

/// `scan_exact` and `scan_brute_force` return the same support and objective.
pub fn oracle_equivalence(instances: usize, max_side: usize, max_sub: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("oracle_equivalence");
    for i in 0..instances as u64 {
        let d = random_shape(seed, i, max_side, max_sub);
        let y = random_matrix(seed, i, &d);
        let e = scan_exact(&y, d.sub_rows(), d.sub_cols()).expect("within budget");
        let b = scan_brute_force(&y, d.sub_rows(), d.sub_cols()).expect("within budget");
        rep.record(e.support == b.support && e.objective == b.objective, || {
            format!("{d:?}: exact {:?} ({}) vs brute {:?} ({})", e.support, e.objective, b.support, b.objective)
        });
    }
    rep
}

/// For every row subset and every column count, the top-`m` column-sum
/// reduction equals the exhaustive maximum over column subsets.
pub fn decomposition_lemma(matrices: usize, max_side: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("decomposition_lemma");
    for i in 0..matrices as u64 {
        let rows = pick(seed, TAG_SHAPE, 2 * i, 1, max_side);
        let cols = pick(seed, TAG_SHAPE, 2 * i + 1, 1, max_side);
        let y = random_matrix(seed, i, &Dims::matrix(rows, cols).expect("positive"));
        let mut ok = true;
        let mut first_bad = None;
        for mask in 1u32..(1 << rows) {
            let a: Vec<usize> = (0..rows).filter(|r| mask & (1 << r) != 0).collect();
            let colsum: Vec<f64> = (0..cols).map(|j| a.iter().map(|&r| y.get(r, j)).sum()).collect();
            for m in 1..=cols {
                let reduced: f64 = top_k(&colsum, m).iter().map(|&j| colsum[j]).sum();
                let mut best = f64::NEG_INFINITY;
                let mut b: Vec<usize> = (0..m).collect();
                loop {
                    let v: f64 = a.iter().map(|&r| b.iter().map(|&j| y.get(r, j)).sum::<f64>()).sum();
                    best = best.max(v);
                    if !next_lex(&mut b, cols) {
                        break;
                    }
                }
                if (reduced - best).abs() > 1e-12 * (1.0 + best.abs()) {
                    ok = false;
                    first_bad.get_or_insert((a.clone(), m, reduced, best));
                }
            }
        }
        rep.record(ok, || format!("{rows}x{cols}: {first_bad:?}"));
    }
    rep
}

/// Which transformation an invariance check applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    Shift(f64),
    Scale(f64),
    Permute,
}

/// `scan_exact` support is unchanged by `Y + c` and `lambda Y`, and moves
/// with row/column permutations.
pub fn invariance(transform: Transform, instances: usize, seed: u64) -> CheckReport {
    let name = match transform {
        Transform::Shift(_) => "shift_invariance",
        Transform::Scale(_) => "scale_invariance",
        Transform::Permute => "permutation_equivariance",
    };
    let mut rep = CheckReport::new(name);
    for i in 0..instances as u64 {
        let d = random_shape(seed, i, 9, 3);
        let (n, m) = (d.sub_rows(), d.sub_cols());
        let y = random_matrix(seed, i, &d);
        let base = scan_exact(&y, n, m).expect("within budget").support;
        let ok = match transform {
            Transform::Shift(c) => {
                let z = Observation::from_fn(d, |r, j| y.get(r, j) + c).expect("finite");
                scan_exact(&z, n, m).expect("within budget").support == base
            }
            Transform::Scale(l) => {
                let z = Observation::from_fn(d, |r, j| l * y.get(r, j)).expect("finite");
                scan_exact(&z, n, m).expect("within budget").support == base
            }
            Transform::Permute => {
                let sigma = permutation(seed, 2 * i, d.rows());
                let tau = permutation(seed, 2 * i + 1, d.cols());
                // z[r][j] = y[sigma r][tau j]
                let z = Observation::from_fn(d, |r, j| y.get(sigma[r], tau[j])).expect("finite");
                let s = scan_exact(&z, n, m).expect("within budget").support;
                let mut rows: Vec<usize> = s.rows().iter().map(|&r| sigma[r]).collect();
                let mut cols: Vec<usize> = s.cols().iter().map(|&j| tau[j]).collect();
                rows.sort_unstable();
                cols.sort_unstable();
                Support::from_sorted(rows, cols) == base
            }
        };
        rep.record(ok, || format!("{d:?} instance {i}"));
    }
    rep
}

fn permutation(seed: u64, index: u64, len: usize) -> Vec<usize> {
    let mut r = rng::stream(rng::derive(seed, TAG_PERM, index), 0);
    let mut p: Vec<usize> = (0..len).collect();
    rand::seq::SliceRandom::shuffle(&mut p[..], &mut r);
    p
}

/// `B = min(A1, A2, A)` exactly, `B(a*) = 1` within `1e-12` relative, and
/// transposition swaps `A1` and `A2` exactly.
pub fn threshold_identities(instances: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("threshold_identities");
    for i in 0..instances as u64 {
        let rows = pick(seed, TAG_SHAPE, 4 * i, 3, 5000);
        let cols = pick(seed, TAG_SHAPE, 4 * i + 1, 3, 5000);
        let n = pick(seed, TAG_SHAPE, 4 * i + 2, 1, rows - 1);
        let m = pick(seed, TAG_SHAPE, 4 * i + 3, 1, cols - 1);
        let d = Dims::new(rows, cols, n, m).expect("valid");
        let a = 0.01 + (rng::derive(seed, TAG_DATA, i) % 10_000) as f64 / 500.0;
        let t = compute(&d, a).expect("n < N, m < M");
        let s = compute(&d.transposed(), a).expect("n < N, m < M");
        let a_star = critical_value(&d).expect("valid");
        let b_star = compute(&d, a_star).expect("valid").min_ratio;
        let ok = t.min_ratio == t.row_side.min(t.col_side).min(t.joint)
            && (b_star - 1.0).abs() <= 1e-12
            && t.row_side == s.col_side
            && t.col_side == s.row_side
            && t.joint == s.joint
            && t.min_ratio == s.min_ratio
            && t.a_star == s.a_star;
        rep.record(ok, || format!("{d:?}, a = {a}: {t:?} / B(a*) = {b_star}"));
    }
    rep
}
