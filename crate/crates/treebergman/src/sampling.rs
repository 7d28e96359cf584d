//! Seeded random generators for the verification suites. Everything is
//! driven by a counter-based stream cipher so a `(seed, q)` pair fully
//! determines every randomized check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bergman::{BasisIndex, Coefficients, HarmonicCombo};
use crate::harmonic::FiniteFunction;
use crate::tree::Vertex;

pub struct Sampler {
    rng: ChaCha8Rng,
    q: u32,
}

impl Sampler {
    pub fn new(seed: u64, q: u32) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            q,
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    /// A nonzero signed amplitude, bounded away from zero.
    pub fn amplitude(&mut self) -> f64 {
        let mag = self.uniform(0.1, 4.0);
        if self.rng.gen() {
            mag
        } else {
            -mag
        }
    }

    /// A random canonical vertex with anchor in `[anchor_lo, anchor_hi]` and
    /// a word of length up to `max_word`.
    pub fn vertex(&mut self, anchor_lo: i64, anchor_hi: i64, max_word: usize) -> Vertex {
        let anchor = self.int(anchor_lo, anchor_hi);
        let len = self.rng.gen_range(0..=max_word);
        let mut word = Vec::with_capacity(len);
        for i in 0..len {
            let lo = if i == 0 { 1 } else { 0 };
            word.push(self.rng.gen_range(lo..self.q) as u8);
        }
        Vertex::new(anchor, word).expect("first digit is drawn nonzero")
    }

    /// A uniform descendant of `v`, `depth` levels down (`depth = 0` gives
    /// `v` itself).
    pub fn descendant(&mut self, v: &Vertex, depth: i64) -> Vertex {
        let mut cur = v.clone();
        for _ in 0..depth {
            let kids = cur.successors(self.q);
            let pick = self.rng.gen_range(0..kids.len());
            cur = kids.into_iter().nth(pick).expect("q >= 2 successors");
        }
        cur
    }

    /// A finite function with `n` support points scattered near the
    /// reference vertex.
    pub fn finite_function(&mut self, n: usize) -> FiniteFunction {
        let mut f = FiniteFunction::new();
        while f.len() < n {
            let v = self.vertex(-3, 3, 4);
            let a = self.amplitude();
            f.set(v, a);
        }
        f
    }

    /// Zero-sum values on a successor set, with at least one entry of unit
    /// size.
    pub fn zero_sum_values(&mut self) -> Vec<f64> {
        let q = self.q as usize;
        let mut vals: Vec<f64> = (0..q).map(|_| self.uniform(-1.0, 1.0)).collect();
        let mean = vals.iter().sum::<f64>() / q as f64;
        for v in &mut vals {
            *v -= mean;
        }
        let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if top < 1e-3 {
            vals[0] += 1.0;
            vals[q - 1] -= 1.0;
        }
        vals
    }

    /// A combination of `terms` normalized basis functions with generators
    /// near the reference vertex.
    pub fn combo(&mut self, coeffs: Coefficients, terms: usize) -> HarmonicCombo {
        let mut combo = HarmonicCombo::new(coeffs);
        while combo.terms().count() < terms {
            let v = self.vertex(-2, 2, 3);
            let j = self.rng.gen_range(1..self.q);
            let idx = BasisIndex::new(v, j, self.q).expect("j drawn in range");
            combo.set(idx, self.amplitude());
        }
        combo
    }
}
