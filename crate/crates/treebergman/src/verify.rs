//! Machine-checkable verification suites: every identity the crate promises,
//! run at configurable parameters with a fixed seed and reported row by row.

use crate::params::Params;

/// Configuration for a suite run.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunConfig {
    pub params: Params,
    pub seed: u64,
}

/// One verification row.
#[derive(Debug, Clone)]
pub struct Check {
    pub id: String,
    pub anchor: String,
    pub input: String,
    pub expected: String,
    pub got: String,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    fn against(
        id: &str,
        anchor: &str,
        input: String,
        expected: f64,
        got: f64,
        tol: f64,
    ) -> Self {
        let scale = 1.0f64.max(expected.abs());
        Self {
            id: id.to_string(),
            anchor: anchor.to_string(),
            input,
            expected: format!("{expected}"),
            got: format!("{got}"),
            tol,
            pass: (got - expected).abs() <= tol * scale,
        }
    }

    fn bound(id: &str, anchor: &str, input: String, limit: f64, got: f64, tol: f64) -> Self {
        Self {
            id: id.to_string(),
            anchor: anchor.to_string(),
            input,
            expected: format!("<= {limit}"),
            got: format!("{got}"),
            tol,
            pass: got <= limit * (1.0 + tol) + tol,
        }
    }

    fn flag(id: &str, anchor: &str, input: String, pass: bool) -> Self {
        Self {
            id: id.to_string(),
            anchor: anchor.to_string(),
            input,
            expected: "true".into(),
            got: format!("{pass}"),
            tol: 0.0,
            pass,
        }
    }
}

mod suites;

pub use suites::{run_suite, suite_ids, SuiteId};
