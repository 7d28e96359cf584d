//! The combinatorial Laplacian, finitely supported functions, the level-sum
//! identity on sectors, and harmonic extension below a horoball.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::measure::level_weight;
use crate::params::{geom_sum, geom_sum_inv, Params};
use crate::tree::Vertex;

/// Anything that can be evaluated at a vertex. Finite functions, harmonic
/// extensions, basis combinations and kernel columns all share this
/// interface so the Laplacian and level-sum checks apply uniformly.
pub trait Evaluable {
    fn value_at(&self, x: &Vertex) -> f64;
}

impl<T: Evaluable + ?Sized> Evaluable for &T {
    fn value_at(&self, x: &Vertex) -> f64 {
        (**self).value_at(x)
    }
}

/// Adapter exposing a closure as an [`Evaluable`] function.
pub struct FnFunction<F: Fn(&Vertex) -> f64>(pub F);

impl<F: Fn(&Vertex) -> f64> Evaluable for FnFunction<F> {
    fn value_at(&self, x: &Vertex) -> f64 {
        (self.0)(x)
    }
}

/// A finitely supported real function on vertices; reads as `0` off its
/// support and never stores zero entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FiniteFunction {
    entries: BTreeMap<Vertex, f64>,
}

impl FiniteFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn point_mass(v: Vertex, value: f64) -> Self {
        let mut f = Self::new();
        f.set(v, value);
        f
    }

    pub fn from_entries<I: IntoIterator<Item = (Vertex, f64)>>(entries: I) -> Self {
        let mut f = Self::new();
        for (v, val) in entries {
            f.set(v, val);
        }
        f
    }

    /// Sets `f(v) = value`, dropping the entry when the value is zero.
    pub fn set(&mut self, v: Vertex, value: f64) {
        if value == 0.0 {
            self.entries.remove(&v);
        } else {
            self.entries.insert(v, value);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> impl Iterator<Item = &Vertex> {
        self.entries.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vertex, f64)> {
        self.entries.iter().map(|(v, &c)| (v, c))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_entries(self.entries().map(|(v, val)| (v.clone(), c * val)))
    }

    /// Confluent of the whole support, when nonempty.
    pub fn support_hull(&self) -> Option<Vertex> {
        let mut it = self.entries.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, v| acc.confluent(v)))
    }

    pub fn l1_norm(&self, p: &Params) -> f64 {
        self.entries()
            .map(|(v, c)| c.abs() * level_weight(p, v.level()))
            .sum()
    }

    pub fn l2_norm_sq(&self, p: &Params) -> f64 {
        self.entries()
            .map(|(v, c)| c * c * level_weight(p, v.level()))
            .sum()
    }

    /// Serializes as `anchor:word,value` lines. Values round-trip exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (v, c) in self.entries() {
            let _ = writeln!(out, "{v},{c}");
        }
        out
    }

    /// Parses the `anchor:word,value` line format written by [`to_csv`].
    /// Blank lines are skipped; errors carry the 1-based line number.
    ///
    /// [`to_csv`]: FiniteFunction::to_csv
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut f = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let (vtx, val) = trimmed.rsplit_once(',').ok_or(Error::ParseCsv {
                line,
                reason: "expected `anchor:word,value`".into(),
            })?;
            let vertex: Vertex = vtx.trim().parse().map_err(|e| Error::ParseCsv {
                line,
                reason: format!("{e}"),
            })?;
            let value: f64 = val.trim().parse().map_err(|_| Error::ParseCsv {
                line,
                reason: format!("`{}` is not a number", val.trim()),
            })?;
            f.set(vertex, value);
        }
        Ok(f)
    }
}

impl Evaluable for FiniteFunction {
    fn value_at(&self, x: &Vertex) -> f64 {
        self.entries.get(x).copied().unwrap_or(0.0)
    }
}

/// `(1/(q+1)) sum_{y ~ x} f(y) - f(x)`; zero exactly when `f` has the mean
/// property at `x`.
pub fn laplacian_at(f: &impl Evaluable, x: &Vertex, q: u32) -> f64 {
    let mut nbr_sum = f.value_at(&x.predecessor());
    for z in x.successors(q) {
        nbr_sum += f.value_at(&z);
    }
    nbr_sum / f64::from(q + 1) - f.value_at(x)
}

/// True when the Laplacian vanishes (within `tol`, relative to the local
/// scale of `f`) at every vertex of `region`.
pub fn is_harmonic_on<'a, I>(f: &impl Evaluable, region: I, q: u32, tol: f64) -> bool
where
    I: IntoIterator<Item = &'a Vertex>,
{
    region.into_iter().all(|x| {
        let scale = 1.0f64.max(f.value_at(x).abs());
        laplacian_at(f, x, q).abs() <= tol * scale
    })
}

/// Both sides of the level-sum identity on the sector of `y`: the brute-force
/// slice sum on the left, `gs(n) f(y) - gs(n-1) f(p(y))` on the right. The
/// two agree whenever `f` is harmonic on the sector.
pub fn level_sum(f: &impl Evaluable, y: &Vertex, n: i64, q: u32) -> Result<(f64, f64)> {
    if n < 0 {
        return Err(Error::InvalidArgument(format!(
            "level offset must be >= 0, got {n}"
        )));
    }
    let slice = y.sector_level_slice(n, q)?;
    let lhs: f64 = slice.iter().map(|x| f.value_at(x)).sum();
    let rhs = geom_sum(q, n) * f.value_at(y) - geom_sum(q, n - 1) * f.value_at(&y.predecessor());
    Ok((lhs, rhs))
}

/// A function equal to a stored finite part on the horoball of index
/// `level + 1` and extended harmonically below it; the extension is constant
/// on the level slices of each sector rooted at index `level + 1`.
#[derive(Debug, Clone)]
pub struct ExtendedFunction {
    base: FiniteFunction,
    level: i64,
    q: u32,
}

impl ExtendedFunction {
    pub fn base(&self) -> &FiniteFunction {
        &self.base
    }

    pub fn level(&self) -> i64 {
        self.level
    }
}

impl Evaluable for ExtendedFunction {
    fn value_at(&self, x: &Vertex) -> f64 {
        let m = x.level() - self.level - 1;
        if m <= 0 {
            return self.base.value_at(x);
        }
        let y = x.ancestor(m);
        let s = geom_sum_inv(self.q, m);
        s * self.base.value_at(&y) - (s - 1.0) * self.base.value_at(&y.predecessor())
    }
}

/// Extends `base` below the horoball of index `level`.
///
/// The precondition (harmonicity of `base` on that horoball) is checked
/// best-effort on the stored support: the Laplacian is evaluated at every
/// horoball vertex within distance 1 of the support, which are exactly the
/// vertices where it can be nonzero for a finitely supported function.
pub fn harmonic_extension(
    base: FiniteFunction,
    level: i64,
    q: u32,
    tol: f64,
) -> Result<ExtendedFunction> {
    let mut to_check: BTreeSet<Vertex> = BTreeSet::new();
    for v in base.support() {
        if v.level() <= level {
            to_check.insert(v.clone());
        }
        let p = v.predecessor();
        if p.level() <= level {
            to_check.insert(p);
        }
        for z in v.successors(q) {
            if z.level() <= level {
                to_check.insert(z);
            }
        }
    }
    for x in &to_check {
        let residual = laplacian_at(&base, x, q);
        let scale = 1.0f64.max(base.value_at(x).abs());
        if residual.abs() > tol * scale {
            return Err(Error::NotHarmonic {
                vertex: x.to_string(),
                residual,
            });
        }
    }
    Ok(ExtendedFunction { base, level, q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(s: &str) -> Vertex {
        s.parse().unwrap()
    }

    #[test]
    fn laplacian_of_constants_vanishes() {
        let f = FnFunction(|_: &Vertex| 3.25);
        for s in ["0:", "2:13", "-5:2"] {
            assert_eq!(laplacian_at(&f, &v(s), 2), 0.0);
            assert_eq!(laplacian_at(&f, &v(s), 3), 0.0);
        }
    }

    #[test]
    fn laplacian_of_exponential_level_function_vanishes() {
        for q in [2u32, 3, 5] {
            let f = FnFunction(move |x: &Vertex| f64::from(q).powi(-(x.level() as i32)));
            for s in ["0:", "1:2", "-3:101"] {
                assert!(laplacian_at(&f, &v(s), q).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn laplacian_of_level_function_is_constant() {
        let f = FnFunction(|x: &Vertex| x.level() as f64);
        for s in ["0:", "4:11", "-2:"] {
            assert_relative_eq!(laplacian_at(&f, &v(s), 2), 1.0 / 3.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn level_sum_examples() {
        let f = FnFunction(|x: &Vertex| 2f64.powi(-(x.level() as i32)));
        let (lhs, rhs) = level_sum(&f, &v("0:"), 1, 2).unwrap();
        assert_relative_eq!(lhs, 1.0, max_relative = 1e-14);
        assert_relative_eq!(rhs, 1.0, max_relative = 1e-14);
        // n = 0 collapses to f(y) on both sides
        let (lhs, rhs) = level_sum(&f, &v("0:11"), 0, 2).unwrap();
        assert_eq!(lhs, rhs);
        assert!(level_sum(&f, &v("0:"), -1, 2).is_err());
    }

    #[test]
    fn harmonic_extension_of_zero_sum_seed() {
        // seed +t/-t on the two successors of y, extended below
        let y = v("0:");
        let t = 0.75;
        let kids = y.successors(2);
        let seed = FiniteFunction::from_entries([
            (kids[0].clone(), t),
            (kids[1].clone(), -t),
        ]);
        let g = harmonic_extension(seed, y.level(), 2, 1e-12).unwrap();
        // two levels below y, inside the first child's sector
        let x = kids[0].successors(2)[1].clone();
        assert_relative_eq!(g.value_at(&x), 1.5 * t, max_relative = 1e-14);
        // global bound max|seed| * q/(q-1)
        for z in y.sector_level_slice(6, 2).unwrap() {
            assert!(g.value_at(&z).abs() <= t * 2.0 + 1e-12);
        }
        // harmonic at every vertex near the seed
        let region = crate::measure::counting_ball(2, &y, 4).unwrap();
        assert!(is_harmonic_on(&g, region.iter(), 2, 1e-12));
    }

    #[test]
    fn zero_extends_to_zero() {
        let g = harmonic_extension(FiniteFunction::new(), 0, 2, 1e-12).unwrap();
        assert_eq!(g.value_at(&v("0:1101")), 0.0);
    }

    #[test]
    fn extension_rejects_non_harmonic_base() {
        let bad = FiniteFunction::point_mass(v("0:"), 1.0);
        let err = harmonic_extension(bad, 1, 2, 1e-12).unwrap_err();
        assert!(matches!(err, Error::NotHarmonic { .. }));
    }

    #[test]
    fn point_mass_is_not_harmonic_at_its_support() {
        let f = FiniteFunction::point_mass(v("0:1"), 1.0);
        let x = v("0:1");
        assert!(!is_harmonic_on(&f, [&x], 2, 1e-9));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let f = FiniteFunction::from_entries([
            (v("0:"), 1.0 / 3.0),
            (v("-2:10"), -0.625_848_934_718_832_5),
            (v("5:412").predecessor(), 17.0),
        ]);
        let again = FiniteFunction::from_csv(&f.to_csv()).unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let err = FiniteFunction::from_csv("0:,1.0\n0:01,2.0\n").unwrap_err();
        match err {
            Error::ParseCsv { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(FiniteFunction::from_csv("0:;1.0").is_err());
        assert!(FiniteFunction::from_csv("0:,abc").is_err());
    }
}
