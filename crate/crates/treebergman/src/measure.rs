//! The horocyclic measures, exact masses of sectors and balls, and the
//! doubling / non-doubling diagnostics.
//!
//! Everything here is a closed form (geometric series) except
//! [`counting_ball_measure`], which enumerates an edge-distance ball; that
//! keeps truncation error out of every downstream identity.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::tree::{DyadicSet, Vertex};

/// Weight `q^{-alpha k}` of a single vertex at horocyclic index `k`.
pub fn level_weight(p: &Params, k: i64) -> f64 {
    p.q_powf(-p.alpha() * k as f64)
}

/// Measure of the single vertex `x`.
pub fn vertex_measure(p: &Params, x: &Vertex) -> f64 {
    level_weight(p, x.level())
}

/// Exact measure of the sector generated by `v`:
/// `q^{-alpha level(v)} / (1 - q^{1-alpha})`.
pub fn sector_measure(p: &Params, v: &Vertex) -> f64 {
    level_weight(p, v.level()) / (1.0 - p.q_powf(1.0 - p.alpha()))
}

pub fn cell_measure(p: &Params, cell: &DyadicSet) -> f64 {
    match cell {
        DyadicSet::Singleton(x) => vertex_measure(p, x),
        DyadicSet::Sector(v) => sector_measure(p, v),
    }
}

/// The Gromov ball of radius `r > 0` around `x`: a singleton when
/// `floor(-ln r) > level(x)`, otherwise the sector generated by the ancestor
/// of `x` at index `floor(-ln r)`.
pub fn gromov_ball(x: &Vertex, r: f64) -> Result<DyadicSet> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "ball radius must be > 0, got {r}"
        )));
    }
    let cut = (-r.ln()).floor() as i64;
    if cut > x.level() {
        Ok(DyadicSet::Singleton(x.clone()))
    } else {
        Ok(DyadicSet::Sector(x.ancestor(x.level() - cut)))
    }
}

/// Exact measure of the Gromov ball `B(x, r)`.
pub fn ball_measure(p: &Params, x: &Vertex, r: f64) -> Result<f64> {
    Ok(cell_measure(p, &gromov_ball(x, r)?))
}

/// The doubling constant of the Gromov-distance space:
/// `max{ q^alpha, 1/(1 - q^{1-alpha}) }`.
pub fn doubling_constant(p: &Params) -> f64 {
    let grow = p.q_powf(p.alpha());
    let fill = 1.0 / (1.0 - p.q_powf(1.0 - p.alpha()));
    grow.max(fill)
}

/// Largest observed ratio `sigma(B(x,2r)) / sigma(B(x,r))` over the sample.
/// Always bounded by [`doubling_constant`].
pub fn doubling_ratio_sup(p: &Params, sample: &[(Vertex, f64)]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument(
            "doubling ratio needs a nonempty sample".into(),
        ));
    }
    let mut sup = f64::NEG_INFINITY;
    for (x, r) in sample {
        let ratio = ball_measure(p, x, 2.0 * *r)? / ball_measure(p, x, *r)?;
        sup = sup.max(ratio);
    }
    Ok(sup)
}

/// Largest edge-distance ball radius that [`counting_ball`] will enumerate
/// for branching `q` (about 16k vertices).
pub fn counting_ball_limit(q: u32) -> i64 {
    let mut n = 0i64;
    while ball_size(q, n + 1) <= 16_000.0 {
        n += 1;
    }
    n
}

fn ball_size(q: u32, n: i64) -> f64 {
    // 1 + sum_{i=1}^n (q+1) q^{i-1}
    1.0 + f64::from(q + 1) * crate::params::geom_sum(q, n - 1)
}

/// All vertices within edge distance `n` of `v`.
pub fn counting_ball(q: u32, v: &Vertex, n: i64) -> Result<Vec<Vertex>> {
    if n < 0 {
        return Err(Error::InvalidArgument(format!(
            "ball radius must be >= 0, got {n}"
        )));
    }
    let limit = counting_ball_limit(q);
    if n > limit {
        return Err(Error::EnumerationLimit {
            what: "edge-distance ball",
            requested: n,
            limit,
        });
    }
    let mut seen: BTreeSet<Vertex> = BTreeSet::new();
    seen.insert(v.clone());
    let mut frontier = vec![v.clone()];
    for _ in 0..n {
        let mut next = Vec::new();
        for x in frontier {
            let mut nbrs = x.successors(q);
            nbrs.push(x.predecessor());
            for y in nbrs {
                if seen.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    Ok(seen.into_iter().collect())
}

/// Measure of the edge-distance ball `B_d(v, n)`, by exhaustive enumeration.
pub fn counting_ball_measure(p: &Params, v: &Vertex, n: i64) -> Result<f64> {
    let ball = counting_ball(p.q(), v, n)?;
    Ok(ball.iter().map(|x| vertex_measure(p, x)).sum())
}
