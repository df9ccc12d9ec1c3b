//! Selection and detection of a sparse elevated-mean submatrix hidden in a
//! Gaussian noise matrix.
//!
//! The crate covers the full experimental loop:
//!
//! - [`model`]: problem dimensions, supports, and seeded generation of
//!   `Y = S + noise`.
//! - [`thresholds`]: the closed-form critical quantities `A`, `A1`, `A2`,
//!   `B`, the critical signal level `a*`, and the detection/selection regime
//!   classifier.
//! - [`selector`]: the scan selector (exact enumeration, alternating
//!   heuristic, brute-force oracle), the vector-case selector and the
//!   log-likelihood ratio.
//! - [`detection`]: the combined linear + scan test with Monte Carlo
//!   calibration under the null.
//! - [`montecarlo`]: selection risk estimation, signal sweeps with common
//!   random numbers, and the Gaussian-maximum exceedance check.
//!
//! Every random quantity is drawn from counter-based ChaCha streams keyed by
//! a master seed and a trial/row index, so results do not depend on the
//! number of worker threads.

pub mod checks;
pub mod combin;
pub mod detection;
pub mod error;
pub mod io;
pub mod model;
pub mod montecarlo;
pub mod parallel;
pub mod rng;
pub mod selector;
pub mod stats;
pub mod thresholds;

pub use error::{Axis, Error, Result};
pub use model::{generate, generate_null, make_support, Dims, Observation, SignalSpec, Support};
pub use selector::{Method, ScanMethod, SelectorResult};
pub use thresholds::{ClassifyConfig, RegimeLabel, Thresholds};
