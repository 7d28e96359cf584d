//! Global parameters and the shared geometric-sum helpers.
//!
//! Every sum in this crate follows the empty-sum convention: a sum whose
//! starting index exceeds its ending index is exactly `0.0`.

use crate::error::{Error, Result};

/// The pair `(q, alpha)` plus the numeric tolerance and default truncation
/// depth used by the verification oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    q: u32,
    alpha: f64,
    tol: f64,
    depth: u32,
}

impl Params {
    /// Branching parameter `q >= 2` and measure exponent `alpha > 1`.
    pub fn new(q: u32, alpha: f64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParams(format!("q must be >= 2, got {q}")));
        }
        if !alpha.is_finite() || alpha <= 1.0 {
            return Err(Error::InvalidParams(format!(
                "alpha must be a finite real > 1, got {alpha}"
            )));
        }
        Ok(Self {
            q,
            alpha,
            tol: 1e-9,
            depth: 40,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !tol.is_finite() || tol <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "tol must be a finite real > 0, got {tol}"
            )));
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn with_depth(mut self, depth: u32) -> Result<Self> {
        if depth < 1 {
            return Err(Error::InvalidParams("depth must be >= 1".into()));
        }
        self.depth = depth;
        Ok(self)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn qf(&self) -> f64 {
        f64::from(self.q)
    }

    /// `q^k` for integer `k` (possibly negative).
    pub fn q_pow(&self, k: i64) -> f64 {
        self.qf().powi(k as i32)
    }

    /// `q^e` for real exponents; all `q^{alpha k}`-type weights go through
    /// here so equal inputs give bit-identical values everywhere.
    pub fn q_powf(&self, e: f64) -> f64 {
        self.qf().powf(e)
    }
}

impl Default for Params {
    fn default() -> Self {
        Self {
            q: 2,
            alpha: 2.0,
            tol: 1e-9,
            depth: 40,
        }
    }
}

/// `sum_{i=0}^{m} q^{-i}`, and `0` when `m < 0`.
pub fn geom_sum_inv(q: u32, m: i64) -> f64 {
    if m < 0 {
        return 0.0;
    }
    let r = 1.0 / f64::from(q);
    (1.0 - r.powi(m as i32 + 1)) / (1.0 - r)
}

/// `sum_{j=0}^{m} q^{j}`, and `0` when `m < 0`.
pub fn geom_sum(q: u32, m: i64) -> f64 {
    if m < 0 {
        return 0.0;
    }
    let qf = f64::from(q);
    (qf.powi(m as i32 + 1) - 1.0) / (qf - 1.0)
}

/// `sum_{i=from}^{inf} r^i` for `0 < r < 1`.
pub fn geom_tail(r: f64, from: i64) -> f64 {
    debug_assert!(r > 0.0 && r < 1.0);
    r.powi(from as i32) / (1.0 - r)
}
