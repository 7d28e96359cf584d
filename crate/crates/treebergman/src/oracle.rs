//! Independent verification routes: truncated series with certified tail
//! bounds and level-aggregated summation over the tree.
//!
//! Nothing here reuses the closed forms it is meant to check. Coefficients
//! are re-summed term by term from their defining series, the kernel is
//! re-summed from its symmetric series with the zero-sum kernel evaluated by
//! actual vertex navigation, and inner products are level sums of pointwise
//! basis values weighted by slice counts.

use crate::bergman::{eval_basis, helmert_basis, zero_sum_kernel, BasisIndex, Coefficients};
use crate::measure::level_weight;
use crate::params::{geom_sum, geom_sum_inv, geom_tail, Params};
use crate::tree::Vertex;

/// A truncated sum together with a bound on everything it discarded.
#[derive(Debug, Clone, Copy)]
pub struct PartialSum {
    pub value: f64,
    pub tail_bound: f64,
}

impl PartialSum {
    /// Whether `candidate` agrees with the full sum this truncation
    /// certifies, up to `slack` of absolute headroom.
    pub fn covers(&self, candidate: f64, slack: f64) -> bool {
        (candidate - self.value).abs() <= self.tail_bound + slack
    }
}

/// Partial sum of the sector-measure series
/// `sum_{i=0}^{depth} q^i q^{-alpha(level+i)}`.
pub fn sector_measure_series(p: &Params, v: &Vertex, depth: i64) -> PartialSum {
    let mut value = 0.0;
    for i in 0..=depth {
        value += p.q_pow(i) * level_weight(p, v.level() + i);
    }
    let ratio = p.q_powf(1.0 - p.alpha());
    let tail_bound = level_weight(p, v.level()) * geom_tail(ratio, depth + 1);
    PartialSum { value, tail_bound }
}

/// Partial sums of the two coefficient series at generator index zero
/// (their common level-independent factors): term `l` is
/// `q^{-alpha(l+1)} (sum_{i<=l} q^{-i}) (sum_{j<=l} q^j)` for the first and
/// the same with the second factor stopped at `l-1` for the companion.
pub fn coefficient_series(p: &Params, terms: i64) -> (PartialSum, PartialSum) {
    let mut c = 0.0;
    let mut cp = 0.0;
    for l in 0..=terms {
        let w = p.q_powf(-p.alpha() * (l + 1) as f64);
        let inv = geom_sum_inv(p.q(), l);
        c += w * inv * geom_sum(p.q(), l);
        cp += w * inv * geom_sum(p.q(), l - 1);
    }
    // term l is below q^{(1-alpha)(l+1)} * q^2/(q-1)^2
    let factor = p.qf() * p.qf() / ((p.qf() - 1.0) * (p.qf() - 1.0));
    let ratio = p.q_powf(1.0 - p.alpha());
    let tail_bound = factor * geom_tail(ratio, terms + 2);
    (
        PartialSum {
            value: c,
            tail_bound,
        },
        PartialSum {
            value: cp,
            tail_bound,
        },
    )
}

/// Partial sum of the symmetric kernel series: `m_terms` terms starting at
/// the confluent boundary index, every zero-sum kernel value obtained by
/// predecessor navigation. Coefficients are evaluated before the kernel
/// factor so vanishing empty sums suppress the boundary term without ever
/// forming a negative predecessor power.
pub fn kernel_series(coeffs: &Coefficients, v: &Vertex, x: &Vertex, m_terms: i64) -> PartialSum {
    let q = coeffs.q();
    let hv = v.level();
    let hx = x.level();
    let hw = v.confluent(x).level();
    let start = -hw - 1;
    let mut value = 0.0;
    for m in start..start + m_terms {
        let jsum = geom_sum_inv(q, m + hv);
        let isum = geom_sum_inv(q, m + hx);
        if jsum == 0.0 || isum == 0.0 {
            continue;
        }
        let u = v.ancestor(hv + m + 1);
        let s = v.ancestor(hv + m);
        let t = x.ancestor(hx + m);
        value += jsum * isum * zero_sum_kernel(&u, &s, &t, q) / coeffs.b(-m - 1);
    }
    // |term_m| <= q^{-alpha(m+1)}/c * (q/(q-1))^2
    let factor = (coeffs.qf() / (coeffs.qf() - 1.0)).powi(2) / coeffs.c();
    let ratio = coeffs.q_powf(-coeffs.alpha());
    let tail_bound = factor * geom_tail(ratio, start + m_terms + 1);
    PartialSum { value, tail_bound }
}

/// Inner product of two unnormalized basis functions by direct summation
/// over the tree, one horocycle at a time down to `depth` below the deeper
/// generator. Within a level the summand is constant on each child sector of
/// the deeper generator, so the level sum is the pointwise product times the
/// exact slice count; no coefficient identities are used.
pub fn basis_pair_inner_product(
    a: &BasisIndex,
    b: &BasisIndex,
    p: &Params,
    depth: i64,
) -> PartialSum {
    let q = p.q();
    let (deep, shallow) = if a.vertex().is_in_sector(b.vertex()) {
        (a, b)
    } else if b.vertex().is_in_sector(a.vertex()) {
        (b, a)
    } else {
        return PartialSum {
            value: 0.0,
            tail_bound: 0.0,
        };
    };
    let dv = deep.vertex();
    let children = dv.successors(q);
    let helmert = helmert_basis(q);
    let abs_deep: f64 = helmert[deep.j() as usize - 1].iter().map(|x| x.abs()).sum();

    let mut value = 0.0;
    for k in dv.level() + 1..=dv.level() + depth {
        // representative of each child class carries the whole class count
        let count = p.q_pow(k - dv.level() - 1);
        let mut level_total = 0.0;
        for child in &children {
            let rep = descend_first(child, k - child.level(), q);
            level_total += eval_basis(deep, &rep, q) * eval_basis(shallow, &rep, q) * count;
        }
        value += level_total * level_weight(p, k);
    }
    // |level k| <= sigma-weight * (q/(q-1))^2 * sum|helmert| * q^{k-level-1}
    let sup = (p.qf() / (p.qf() - 1.0)).powi(2) * abs_deep;
    let k_next = dv.level() + depth + 1;
    let per_level = level_weight(p, k_next) * sup * p.q_pow(depth);
    let tail_bound = per_level / (1.0 - p.q_powf(1.0 - p.alpha()));
    PartialSum { value, tail_bound }
}

fn descend_first(v: &Vertex, steps: i64, q: u32) -> Vertex {
    let mut cur = v.clone();
    for _ in 0..steps {
        cur = cur.successors(q).swap_remove(0);
    }
    cur
}

/// Inner product of two basis combinations by expanding bilinearly over
/// [`basis_pair_inner_product`], normalizing each pair; tail bounds
/// accumulate through the same expansion.
pub fn combo_inner_product(
    f: &crate::bergman::HarmonicCombo,
    g: &crate::bergman::HarmonicCombo,
    p: &Params,
    depth: i64,
) -> PartialSum {
    let coeffs = f.coefficients();
    let mut value = 0.0;
    let mut tail_bound = 0.0;
    for (a, ca) in f.terms() {
        for (b, cb) in g.terms() {
            let norm = (crate::bergman::basis_norm_sq(a, coeffs)
                * crate::bergman::basis_norm_sq(b, coeffs))
            .sqrt();
            let pair = basis_pair_inner_product(a, b, p, depth);
            value += ca * cb * pair.value / norm;
            tail_bound += (ca * cb / norm).abs() * pair.tail_bound;
        }
    }
    PartialSum { value, tail_bound }
}
