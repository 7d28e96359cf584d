//! The orthonormal basis of the harmonic Bergman space, the coefficient
//! family behind its inner products, and the reproducing kernel in closed
//! form and as a certified series.
//!
//! Basis functions are harmonic extensions of zero-sum bumps on successor
//! sets. The zero-sum space at each vertex carries a fixed real orthonormal
//! (Helmert) basis under the canonical successor ordering, which keeps every
//! scalar in the crate real and every expansion reproducible.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::harmonic::Evaluable;
use crate::params::{geom_sum_inv, Params};
use crate::tree::Vertex;

/// The closed forms of the inner-product coefficient family. `b(n)` and
/// `bp(n)` are `q^{-alpha n}` times the fixed factors `c` and `cp`; `d(n,k)`
/// is the kernel-series coefficient `(sum_{j<=n} q^{-j}) / b(k-n-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    q: u32,
    alpha: f64,
    c: f64,
    cp: f64,
}

/// Sums the two coefficient series in closed form by regrouping them into
/// geometric series with ratios `q^{1-alpha}`, `q^{-alpha}`, `q^{-1-alpha}`.
pub fn coefficients(p: &Params) -> Coefficients {
    let a = p.alpha();
    let t1 = p.q_powf(1.0 - a) / (1.0 - p.q_powf(1.0 - a));
    let t2 = p.q_powf(-a) / (1.0 - p.q_powf(-a));
    let t3 = p.q_powf(-1.0 - a) / (1.0 - p.q_powf(-1.0 - a));
    let denom = (1.0 - 1.0 / p.qf()) * (p.qf() - 1.0);
    let c = (t1 - 2.0 * t2 + t3) / denom;
    let cp = (t1 / p.qf() - (1.0 + 1.0 / p.qf()) * t2 + t3) / denom;
    Coefficients {
        q: p.q(),
        alpha: a,
        c,
        cp,
    }
}

impl Coefficients {
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn qf(&self) -> f64 {
        f64::from(self.q)
    }

    /// The level-independent factor of `b(n)`.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// The level-independent factor of `bp(n)`.
    pub fn cp(&self) -> f64 {
        self.cp
    }

    pub fn q_powf(&self, e: f64) -> f64 {
        self.qf().powf(e)
    }

    /// `b(n) = c * q^{-alpha n}`: the squared norm of any unnormalized basis
    /// function generated at horocyclic index `n`.
    pub fn b(&self, n: i64) -> f64 {
        self.c * self.q_powf(-self.alpha * n as f64)
    }

    /// `bp(n) = cp * q^{-alpha n}`: the companion coefficient multiplying the
    /// generator value in the extension inner product.
    pub fn bp(&self, n: i64) -> f64 {
        self.cp * self.q_powf(-self.alpha * n as f64)
    }

    /// Kernel-series coefficient `(sum_{j=0}^{n} q^{-j}) * b(k-n-1)^{-1}`.
    pub fn d(&self, n: i64, k: i64) -> f64 {
        geom_sum_inv(self.q, n) / self.b(k - n - 1)
    }
}

/// The fixed orthonormal basis of the zero-sum space on `q` slots:
/// `q - 1` vectors of length `q`, vector `j` (1-based) reading
/// `1/sqrt(j(j+1))` on slots `< j`, `-j/sqrt(j(j+1))` on slot `j`, `0` after.
pub fn helmert_basis(q: u32) -> Vec<Vec<f64>> {
    let q = q as usize;
    (1..q)
        .map(|j| {
            let norm = 1.0 / ((j * (j + 1)) as f64).sqrt();
            (0..q)
                .map(|i| match i.cmp(&j) {
                    std::cmp::Ordering::Less => norm,
                    std::cmp::Ordering::Equal => -(j as f64) * norm,
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect()
        })
        .collect()
}

/// Index of the basis function generated at `v` from the `j`-th Helmert
/// vector, `j` in `1..=q-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex {
    v: Vertex,
    j: u32,
}

impl BasisIndex {
    pub fn new(v: Vertex, j: u32, q: u32) -> Result<Self> {
        if j < 1 || j > q - 1 {
            return Err(Error::InvalidArgument(format!(
                "basis slot j must lie in 1..={}, got {j}",
                q - 1
            )));
        }
        v.check_digits(q)?;
        Ok(Self { v, j })
    }

    pub fn vertex(&self) -> &Vertex {
        &self.v
    }

    pub fn j(&self) -> u32 {
        self.j
    }
}

/// Value at `x` of the unnormalized basis function of `idx`: zero outside
/// the punctured sector of its vertex, otherwise the geometric progression
/// factor times the Helmert value of the child direction.
pub fn eval_basis(idx: &BasisIndex, x: &Vertex, q: u32) -> f64 {
    let depth = x.level() - idx.v.level();
    if depth < 1 || x.ancestor(depth) != idx.v {
        return 0.0;
    }
    let child = x.ancestor(depth - 1);
    let slot = idx
        .v
        .successor_slot(&child, q)
        .expect("ancestor one level below the generator is a successor");
    let helmert = helmert_basis(q);
    geom_sum_inv(q, depth - 1) * helmert[idx.j as usize - 1][slot]
}

/// Squared Bergman norm `b(level)` of the unnormalized basis function;
/// normalization divides by its square root, and the value does not depend
/// on the Helmert slot.
pub fn basis_norm_sq(idx: &BasisIndex, coeffs: &Coefficients) -> f64 {
    coeffs.b(idx.v.level())
}

/// A finite combination of normalized basis functions. Exactly evaluable
/// anywhere; its Bergman norm is the Euclidean norm of the coefficients.
#[derive(Debug, Clone)]
pub struct HarmonicCombo {
    terms: BTreeMap<BasisIndex, f64>,
    coeffs: Coefficients,
}

impl HarmonicCombo {
    pub fn new(coeffs: Coefficients) -> Self {
        Self {
            terms: BTreeMap::new(),
            coeffs,
        }
    }

    pub fn from_terms<I: IntoIterator<Item = (BasisIndex, f64)>>(
        coeffs: Coefficients,
        terms: I,
    ) -> Self {
        let mut combo = Self::new(coeffs);
        for (idx, c) in terms {
            combo.set(idx, c);
        }
        combo
    }

    pub fn set(&mut self, idx: BasisIndex, c: f64) {
        if c == 0.0 {
            self.terms.remove(&idx);
        } else {
            self.terms.insert(idx, c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisIndex, f64)> {
        self.terms.iter().map(|(i, &c)| (i, c))
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum()
    }

    /// Lowest horocyclic index among the generating vertices.
    pub fn min_level(&self) -> Option<i64> {
        self.terms.keys().map(|i| i.v.level()).min()
    }
}

impl Evaluable for HarmonicCombo {
    fn value_at(&self, x: &Vertex) -> f64 {
        self.terms()
            .map(|(idx, c)| {
                c * eval_basis(idx, x, self.coeffs.q) / basis_norm_sq(idx, &self.coeffs).sqrt()
            })
            .sum()
    }
}

/// Inner product of two combinations, by orthonormality of the basis.
pub fn inner_product(f: &HarmonicCombo, g: &HarmonicCombo) -> f64 {
    let (small, large) = if f.terms.len() <= g.terms.len() {
        (f, g)
    } else {
        (g, f)
    };
    small
        .terms()
        .filter_map(|(idx, c)| large.terms.get(idx).map(|&d| c * d))
        .sum()
}

/// Inner product of an evaluable harmonic function against the harmonic
/// extension of a zero-sum seed on the successors of `y`:
/// `sum_z seed(z) (f(z) b(level y) - f(y) bp(level y))`. The seed is given in
/// canonical successor order and must sum to zero.
pub fn extension_inner_product(
    f: &impl Evaluable,
    y: &Vertex,
    seed: &[f64],
    coeffs: &Coefficients,
) -> Result<f64> {
    let q = coeffs.q;
    if seed.len() != q as usize {
        return Err(Error::InvalidArgument(format!(
            "seed must have q = {q} entries, got {}",
            seed.len()
        )));
    }
    let total: f64 = seed.iter().sum();
    let scale = seed.iter().fold(1.0f64, |m, s| m.max(s.abs()));
    if total.abs() > 1e-12 * scale {
        return Err(Error::InvalidArgument(format!(
            "seed values must sum to zero, got {total:e}"
        )));
    }
    let b = coeffs.b(y.level());
    let bp = coeffs.bp(y.level());
    let fy = f.value_at(y);
    Ok(y.successors(q)
        .iter()
        .zip(seed)
        .map(|(z, s)| s * (f.value_at(z) * b - fy * bp))
        .sum())
}

/// Inner product of two unnormalized basis functions along the closed-form
/// route: disjoint supports pair to zero, equal generators reduce to the
/// Helmert dot product, nested generators reduce to a successor-set sum.
pub fn basis_inner_product(a: &BasisIndex, b: &BasisIndex, coeffs: &Coefficients) -> f64 {
    let q = coeffs.q;
    if a.v == b.v {
        let helmert = helmert_basis(q);
        let dot: f64 = helmert[a.j as usize - 1]
            .iter()
            .zip(&helmert[b.j as usize - 1])
            .map(|(x, y)| x * y)
            .sum();
        return coeffs.b(a.v.level()) * dot;
    }
    // order so `deep` generates the smaller sector
    let (deep, shallow) = if a.v.is_in_sector(&b.v) {
        (a, b)
    } else if b.v.is_in_sector(&a.v) {
        (b, a)
    } else {
        return 0.0;
    };
    let helmert = helmert_basis(q);
    let seed = &helmert[shallow.j as usize - 1];
    let g = FnBasis {
        idx: deep.clone(),
        q,
    };
    extension_inner_product(&g, &shallow.v, seed, coeffs)
        .expect("helmert seeds sum to zero")
}

struct FnBasis {
    idx: BasisIndex,
    q: u32,
}

impl Evaluable for FnBasis {
    fn value_at(&self, x: &Vertex) -> f64 {
        eval_basis(&self.idx, x, self.q)
    }
}

/// The reproducing kernel of the zero-sum space on the successors of `u`,
/// extended by zero: vanishes unless both arguments lie strictly below `u`,
/// and otherwise reads `(q-1)/q` or `-1/q` according to whether they share
/// the child sector.
pub fn zero_sum_kernel(u: &Vertex, s: &Vertex, t: &Vertex, q: u32) -> f64 {
    let ds = s.level() - u.level();
    let dt = t.level() - u.level();
    if ds < 1 || dt < 1 || s.ancestor(ds) != *u || t.ancestor(dt) != *u {
        return 0.0;
    }
    if s.ancestor(ds - 1) == t.ancestor(dt - 1) {
        (f64::from(q) - 1.0) / f64::from(q)
    } else {
        -1.0 / f64::from(q)
    }
}

/// Value at `x` of the harmonic extension of the zero-sum kernel column
/// through the `n`-th predecessor chain of `v`. Bounded by 1 everywhere.
pub fn extended_zero_sum_kernel(n: i64, v: &Vertex, x: &Vertex, q: u32) -> f64 {
    assert!(n >= 0, "series index must be nonnegative");
    let w = v.ancestor(n);
    let u = w.predecessor();
    let depth_in_u = x.level() - u.level();
    if depth_in_u < 1 || x.ancestor(depth_in_u) != u {
        return 0.0;
    }
    let factor = geom_sum_inv(q, x.level() - w.level());
    if x.is_in_sector(&w) {
        factor * (f64::from(q) - 1.0) / f64::from(q)
    } else {
        -factor / f64::from(q)
    }
}

/// Partial sum of the kernel series together with a certified bound on the
/// discarded tail.
#[derive(Debug, Clone, Copy)]
pub struct SeriesPartial {
    pub partial: f64,
    pub tail_bound: f64,
}

/// The reproducing kernel, evaluated in closed form.
#[derive(Debug, Clone, Copy)]
pub struct BergmanKernel {
    coeffs: Coefficients,
}

impl BergmanKernel {
    pub fn new(coeffs: Coefficients) -> Self {
        Self { coeffs }
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    /// `K(v, x)`, by splitting the kernel series at the confluent: the single
    /// boundary term is taken verbatim (it vanishes by the empty-sum
    /// convention when the confluent is one of the two arguments, which also
    /// keeps every predecessor power nonnegative), and the rest regroups into
    /// three geometric series. Symmetric in its arguments.
    pub fn eval(&self, v: &Vertex, x: &Vertex) -> f64 {
        let cf = &self.coeffs;
        let q = cf.qf();
        let a = cf.alpha;
        let hv = v.level();
        let hx = x.level();
        let hw = v.confluent(x).level();

        let boundary = if hw < hv && hw < hx {
            -(1.0 / q) * (cf.q_powf(a * hw as f64) / cf.c)
                * geom_sum_inv(cf.q, hv - hw - 1)
                * geom_sum_inv(cf.q, hx - hw - 1)
        } else {
            0.0
        };

        let av = cf.q_powf(-(hv as f64) - 1.0);
        let bx = cf.q_powf(-(hx as f64) - 1.0);
        let s1 = cf.q_powf(a * hw as f64) / (1.0 - cf.q_powf(-a));
        let s2 = cf.q_powf((a + 1.0) * hw as f64) / (1.0 - cf.q_powf(-a - 1.0));
        let s3 = cf.q_powf((a + 2.0) * hw as f64) / (1.0 - cf.q_powf(-a - 2.0));
        let prefactor = (q - 1.0) / (q * cf.c * (1.0 - 1.0 / q).powi(2));
        let main = prefactor * cf.q_powf(-a) * (s1 - (av + bx) * s2 + av * bx * s3);

        boundary + main
    }

    /// Partial sum `sum_{n=0}^{N} d(n, level v) * GammaExt_n(v, x)` of the
    /// kernel series, with the geometric tail bound coming from
    /// `|GammaExt| <= 1` and the decay of the series coefficients.
    pub fn series_partial(&self, v: &Vertex, x: &Vertex, n_terms: i64) -> Result<SeriesPartial> {
        if n_terms < 0 {
            return Err(Error::InvalidArgument(format!(
                "series length must be >= 0, got {n_terms}"
            )));
        }
        let cf = &self.coeffs;
        let hv = v.level();
        let partial: f64 = (0..=n_terms)
            .map(|n| cf.d(n, hv) * extended_zero_sum_kernel(n, v, x, cf.q))
            .sum();
        let q = cf.qf();
        let tail_bound = (q / (q - 1.0)) * cf.q_powf(cf.alpha * (hv - n_terms - 2) as f64)
            / (cf.c * (1.0 - cf.q_powf(-cf.alpha)));
        Ok(SeriesPartial {
            partial,
            tail_bound,
        })
    }

    /// `<f, K(v, .)>` for a finite basis combination, through the closed-form
    /// pairing of the series terms against `f`. The series truncates exactly
    /// once the predecessor chain of `v` climbs above every generator of `f`,
    /// and the result equals `f(v)`.
    pub fn reproduce(&self, f: &HarmonicCombo, v: &Vertex) -> f64 {
        let Some(min_level) = f.min_level() else {
            return 0.0;
        };
        let q = self.coeffs.q;
        let qf = self.coeffs.qf();
        let n_max = (v.level() - min_level).max(0);
        let mut total = 0.0;
        for n in 0..=n_max {
            let a0 = f.value_at(&v.ancestor(n));
            let a1 = f.value_at(&v.ancestor(n + 1));
            let a2 = f.value_at(&v.ancestor(n + 2));
            total += geom_sum_inv(q, n) * (a0 - (qf + 1.0) / qf * a1 + a2 / qf);
        }
        total
    }

    /// The kernel column at `v` as an evaluable function of its second slot.
    pub fn column(&self, v: Vertex) -> KernelColumn {
        KernelColumn { kernel: *self, v }
    }
}

/// `z -> K(v, z)` for a fixed `v`.
#[derive(Debug, Clone)]
pub struct KernelColumn {
    kernel: BergmanKernel,
    v: Vertex,
}

impl Evaluable for KernelColumn {
    fn value_at(&self, x: &Vertex) -> f64 {
        self.kernel.eval(&self.v, x)
    }
}
