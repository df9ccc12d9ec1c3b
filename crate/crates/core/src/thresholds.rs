//! Closed-form critical quantities and the detection/selection regime
//! classifier.
//!
//! With `p = n/N`, `q = m/M` and natural logarithms:
//!
//! ```text
//! A  = a sqrt(nm) / sqrt(2 (n log(1/p) + m log(1/q)))
//! A1 = a sqrt(m)  / (sqrt(2) (sqrt(log n) + sqrt(log(N - n))))
//! A2 = a sqrt(n)  / (sqrt(2) (sqrt(log m) + sqrt(log(M - m))))
//! B  = min(A1, A2, A)
//! ```
//!
//! Scan selection is consistent when `B > 1` and impossible for every
//! selector when `B < 1`, so the critical level `a*` is the `a` with
//! `B(a) = 1`. Detection additionally succeeds when `a^2 nmpq -> inf`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dims;

/// All quantities are linear in `a` except `det_quantity`, which is quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub a: f64,
    /// `A`: the joint (severe sparsity) ratio.
    #[serde(rename = "A")]
    pub joint: f64,
    /// `A1`: the row-side (moderate sparsity) ratio.
    #[serde(rename = "A1")]
    pub row_side: f64,
    /// `A2`: the column-side ratio.
    #[serde(rename = "A2")]
    pub col_side: f64,
    /// `B = min(A1, A2, A)`.
    #[serde(rename = "B")]
    pub min_ratio: f64,
    pub a_star: f64,
    /// `a^2 n m p q = (a n m)^2 / (N M)`.
    pub det_quantity: f64,
}

impl Thresholds {
    /// Which quantity attains the minimum `B`.
    pub fn sparsity(&self) -> Sparsity {
        if self.min_ratio == self.joint {
            Sparsity::Severe
        } else {
            Sparsity::Moderate
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sparsity {
    /// `B = A`.
    Severe,
    /// `B = A1` or `B = A2`.
    Moderate,
}

/// Per-unit-signal coefficients: each ratio is `a` times one of these.
#[derive(Debug, Clone, Copy)]
struct Coefficients {
    joint: f64,
    row_side: f64,
    col_side: f64,
}

fn coefficients(dims: &Dims) -> Result<Coefficients> {
    let (big_n, big_m) = (dims.rows(), dims.cols());
    let (n, m) = (dims.sub_rows(), dims.sub_cols());
    if n >= big_n || m >= big_m {
        return Err(Error::Domain(format!(
            "thresholds need n < N and m < M (got n = {n}, N = {big_n}, m = {m}, M = {big_m})"
        )));
    }
    let (nf, mf) = (n as f64, m as f64);
    let (big_nf, big_mf) = (big_n as f64, big_m as f64);
    // ln(1) = 0 covers the n = 1 / m = 1 convention
    let row_den = (nf.ln().sqrt() + ((big_n - n) as f64).ln().sqrt()) * std::f64::consts::SQRT_2;
    let col_den = (mf.ln().sqrt() + ((big_m - m) as f64).ln().sqrt()) * std::f64::consts::SQRT_2;
    if row_den == 0.0 {
        return Err(Error::Domain("log(n) and log(N - n) both vanish (N = 2, n = 1)".into()));
    }
    if col_den == 0.0 {
        return Err(Error::Domain("log(m) and log(M - m) both vanish (M = 2, m = 1)".into()));
    }
    let joint_den = (2.0 * (nf * (big_nf / nf).ln() + mf * (big_mf / mf).ln())).sqrt();
    Ok(Coefficients {
        joint: (nf * mf).sqrt() / joint_den,
        row_side: mf.sqrt() / row_den,
        col_side: nf.sqrt() / col_den,
    })
}

/// Evaluates `A`, `A1`, `A2`, `B`, `a*` and the detection quantity at level `a`.
pub fn compute(dims: &Dims, a: f64) -> Result<Thresholds> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::Domain(format!("signal level must be finite and >= 0, got {a}")));
    }
    let k = coefficients(dims)?;
    let joint = a * k.joint;
    let row_side = a * k.row_side;
    let col_side = a * k.col_side;
    let nm = (dims.sub_rows() * dims.sub_cols()) as f64;
    Ok(Thresholds {
        a,
        joint,
        row_side,
        col_side,
        min_ratio: row_side.min(col_side).min(joint),
        a_star: critical_value(dims)?,
        det_quantity: (a * nm).powi(2) / dims.cells() as f64,
    })
}

/// Critical signal level: the largest of the three closed-form terms
///
/// ```text
/// (sqrt(2 log n) + sqrt(2 log(N - n))) / sqrt(m)
/// (sqrt(2 log m) + sqrt(2 log(M - m))) / sqrt(n)
/// sqrt(2 (n log(N/n) + m log(M/m))) / sqrt(nm)
/// ```
pub fn critical_value(dims: &Dims) -> Result<f64> {
    coefficients(dims)?;
    let (big_n, big_m) = (dims.rows(), dims.cols());
    let (n, m) = (dims.sub_rows(), dims.sub_cols());
    let (nf, mf) = (n as f64, m as f64);
    let row_term = ((2.0 * nf.ln()).sqrt() + (2.0 * ((big_n - n) as f64).ln()).sqrt()) / mf.sqrt();
    let col_term = ((2.0 * mf.ln()).sqrt() + (2.0 * ((big_m - m) as f64).ln()).sqrt()) / nf.sqrt();
    let joint_term = (2.0 * (nf * (big_n as f64 / nf).ln() + mf * (big_m as f64 / mf).ln())).sqrt()
        / (nf * mf).sqrt();
    Ok(row_term.max(col_term).max(joint_term))
}

/// Critical level of the vector problem: `sqrt(2 log N) + sqrt(2 log n)`.
pub fn vector_critical_value(len: usize, n: usize) -> Result<f64> {
    if n < 2 || n >= len {
        return Err(Error::Domain(format!("vector critical value needs 2 <= n < N (n = {n}, N = {len})")));
    }
    Ok((2.0 * (len as f64).ln()).sqrt() + (2.0 * (n as f64).ln()).sqrt())
}

/// Vector critical level when `n = N^beta`: `sqrt(2) (1 + sqrt(beta)) sqrt(log N)`.
///
/// Exactly [`vector_critical_value`] evaluated at real-valued `n = N^beta`.
pub fn vector_critical_value_polynomial(len: usize, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) || len < 2 {
        return Err(Error::Domain(format!("need beta in (0, 1) and N >= 2 (beta = {beta}, N = {len})")));
    }
    Ok(std::f64::consts::SQRT_2 * (1.0 + beta.sqrt()) * (len as f64).ln().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRegime {
    Consistent,
    Inconsistent,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionRegime {
    Distinguishable,
    Indistinguishable,
    Boundary,
}

/// Finite-size proxies for the asymptotic conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    /// Margin `eps`: `B > 1 + eps` counts as "liminf B > 1".
    pub margin: f64,
    /// `det_quantity >= det_large` counts as "a^2 nmpq -> inf" (heuristic).
    pub det_large: f64,
    /// `det_quantity <= det_small` counts as "a^2 nmpq -> 0" (heuristic).
    pub det_small: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            margin: 0.05,
            det_large: 10.0,
            det_small: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub quantity: String,
    pub value: f64,
    pub relation: String,
    pub threshold: f64,
    pub holds: bool,
}

fn cmp(quantity: &str, value: f64, relation: &str, threshold: f64) -> Comparison {
    let holds = match relation {
        ">" => value > threshold,
        "<" => value < threshold,
        ">=" => value >= threshold,
        "<=" => value <= threshold,
        _ => unreachable!("unknown relation {relation}"),
    };
    Comparison {
        quantity: quantity.into(),
        value,
        relation: relation.into(),
        threshold,
        holds,
    }
}

/// Everything the labels were derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub dims: Dims,
    pub thresholds: Thresholds,
    pub sparsity: Sparsity,
    pub config: ClassifyConfig,
    pub comparisons: Vec<Comparison>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub selection: SelectionRegime,
    pub detection: DetectionRegime,
    pub basis: Basis,
}

fn selection_label(min_ratio: f64, margin: f64) -> SelectionRegime {
    if min_ratio > 1.0 + margin {
        SelectionRegime::Consistent
    } else if min_ratio < 1.0 - margin {
        SelectionRegime::Inconsistent
    } else {
        SelectionRegime::Boundary
    }
}

/// Places `(dims, a)` in the selection/detection table.
pub fn classify(dims: &Dims, a: f64, config: &ClassifyConfig) -> Result<RegimeLabel> {
    let eps = config.margin;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!("margin must lie in (0, 0.5), got {eps}")));
    }
    if !(config.det_small >= 0.0 && config.det_small < config.det_large) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= det_small < det_large (got {} and {})",
            config.det_small, config.det_large
        )));
    }
    let t = compute(dims, a)?;
    let hi = 1.0 + eps;
    let lo = 1.0 - eps;

    let comparisons = vec![
        cmp("B", t.min_ratio, ">", hi),
        cmp("B", t.min_ratio, "<", lo),
        cmp("A", t.joint, ">", hi),
        cmp("A", t.joint, "<", lo),
        cmp("A1", t.row_side, "<", lo),
        cmp("A2", t.col_side, "<", lo),
        cmp("det_quantity", t.det_quantity, ">=", config.det_large),
        cmp("det_quantity", t.det_quantity, "<=", config.det_small),
    ];

    let selection = selection_label(t.min_ratio, eps);
    let detection = if t.det_quantity >= config.det_large || t.joint > hi {
        DetectionRegime::Distinguishable
    } else if t.det_quantity <= config.det_small && t.joint < lo {
        DetectionRegime::Indistinguishable
    } else {
        DetectionRegime::Boundary
    };

    let mut notes = vec![format!(
        "det_quantity cutoffs {} / {} are heuristic finite-size proxies",
        config.det_large, config.det_small
    )];
    if dims.sub_rows() == 1 {
        notes.push("n = 1: sqrt(log n) term taken as 0".into());
    }
    if dims.sub_cols() == 1 {
        notes.push("m = 1: sqrt(log m) term taken as 0".into());
    }
    if detection == DetectionRegime::Indistinguishable {
        notes.push(
            "balance condition n log(1/p) ~ m log(1/q) required by the detection lower bound is not checked"
                .into(),
        );
    }

    Ok(RegimeLabel {
        selection,
        detection,
        basis: Basis {
            dims: *dims,
            thresholds: t,
            sparsity: t.sparsity(),
            config: *config,
            comparisons,
            notes,
        },
    })
}
