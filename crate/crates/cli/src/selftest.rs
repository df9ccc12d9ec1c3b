//! Reduced-scale property suites for `subscan selftest`.

use serde::Serialize;
use subscan::checks::{self, CheckReport, Transform};
use subscan::montecarlo::estimate_risk;
use subscan::selector::ScanMethod;
use subscan::stats::{wilson_interval, Z95};
use subscan::{parallel, Dims};

#[derive(Debug, Clone, Serialize)]
pub struct Property {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl From<CheckReport> for Property {
    fn from(r: CheckReport) -> Self {
        Property {
            name: r.name.to_string(),
            pass: r.passed(),
            detail: match &r.example {
                Some(e) => format!("{}/{} violations; first: {e}", r.violations, r.instances),
                None => format!("{} instances", r.instances),
            },
        }
    }
}

fn thread_independence(seed: u64) -> Property {
    let d = Dims::new(15, 15, 2, 2).expect("valid");
    let run = |k| {
        parallel::with_threads(k, || estimate_risk(&d, 2.0, 60, seed, &ScanMethod::exact()))
            .expect("pool")
            .expect("risk")
    };
    let (one, three) = (run(1), run(3));
    Property {
        name: "thread_independence".into(),
        pass: one == three,
        detail: format!("risk {} with 1 and 3 threads", one.risk),
    }
}

fn wilson_extremes() -> Property {
    let (lo0, hi0) = wilson_interval(0, 50, Z95);
    let (lo1, hi1) = wilson_interval(50, 50, Z95);
    let z2 = Z95 * Z95;
    let pass = lo0 == 0.0
        && (hi0 - z2 / (50.0 + z2)).abs() < 1e-15
        && hi1 == 1.0
        && (lo1 - 50.0 / (50.0 + z2)).abs() < 1e-15;
    Property {
        name: "wilson_extremes".into(),
        pass,
        detail: format!("[{lo0}, {hi0}] and [{lo1}, {hi1}]"),
    }
}

/// Runs every property, printing one line each to stderr.
pub fn run_all(seed: u64) -> Vec<Property> {
    let props: Vec<Property> = vec![
        checks::oracle_equivalence(100, 7, 3, seed).into(),
        checks::decomposition_lemma(30, 5, seed).into(),
        checks::threshold_identities(500, seed).into(),
        checks::invariance(Transform::Shift(3.7), 50, seed).into(),
        checks::invariance(Transform::Scale(2.5), 50, seed).into(),
        checks::invariance(Transform::Permute, 50, seed).into(),
        thread_independence(seed),
        wilson_extremes(),
    ];
    for p in &props {
        eprintln!("{} {}: {}", if p.pass { "PASS" } else { "FAIL" }, p.name, p.detail);
    }
    props
}
