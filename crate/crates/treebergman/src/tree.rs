//! Canonical coordinates on the `q`-homogeneous tree with a distinguished
//! boundary point.
//!
//! A vertex is addressed relative to a fixed reference geodesic
//! `(r_k)_{k in Z}` running to the boundary point: `anchor` is the horocyclic
//! index of the highest ancestor lying on the geodesic and `word` is the
//! digit sequence of the descent path from it. Digit `0` at a geodesic vertex
//! is reserved to mean "continue the geodesic", so a nonempty word never
//! starts with `0`; this makes the coordinate canonical and structural
//! equality coincide with vertex equality.
//!
//! The horocyclic index of `(anchor, word)` is `anchor + word.len()`.
//! Indices decrease toward the boundary point: predecessors move up,
//! successors move down.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const SLICE_ENUMERATION_LIMIT: i64 = 4_000_000;

/// A tree vertex in canonical coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    anchor: i64,
    word: Vec<u8>,
}

impl Vertex {
    /// Builds a vertex, rejecting non-canonical words (leading digit 0).
    pub fn new(anchor: i64, word: Vec<u8>) -> Result<Self> {
        if word.first() == Some(&0) {
            return Err(Error::InvalidArgument(
                "non-canonical word: leading digit 0 is reserved for the reference geodesic"
                    .into(),
            ));
        }
        Ok(Self { anchor, word })
    }

    /// The reference-geodesic vertex `r_k`.
    pub fn reference(k: i64) -> Self {
        Self {
            anchor: k,
            word: Vec::new(),
        }
    }

    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    pub fn word(&self) -> &[u8] {
        &self.word
    }

    /// Horocyclic index of this vertex.
    pub fn level(&self) -> i64 {
        self.anchor + self.word.len() as i64
    }

    /// Checks that every digit is a legal branch label for branching `q`.
    pub fn check_digits(&self, q: u32) -> Result<()> {
        match self.word.iter().find(|&&d| u32::from(d) >= q) {
            Some(&d) => Err(Error::InvalidArgument(format!(
                "digit {d} out of range for q = {q}"
            ))),
            None => Ok(()),
        }
    }

    /// The unique neighbour one horocycle up (toward the boundary point).
    pub fn predecessor(&self) -> Vertex {
        match self.word.split_last() {
            Some((_, head)) => Vertex {
                anchor: self.anchor,
                word: head.to_vec(),
            },
            None => Vertex {
                anchor: self.anchor - 1,
                word: Vec::new(),
            },
        }
    }

    /// `n`-th predecessor; `n = 0` is the identity.
    pub fn ancestor(&self, n: i64) -> Vertex {
        assert!(n >= 0, "ancestor power must be nonnegative");
        let n = n as usize;
        if n <= self.word.len() {
            Vertex {
                anchor: self.anchor,
                word: self.word[..self.word.len() - n].to_vec(),
            }
        } else {
            Vertex {
                anchor: self.anchor - (n - self.word.len()) as i64,
                word: Vec::new(),
            }
        }
    }

    /// The `q` neighbours one horocycle down, in canonical order: for a
    /// geodesic vertex the geodesic child comes first, then digits `1..q-1`;
    /// off the geodesic the children are the digits `0..q-1` in order.
    pub fn successors(&self, q: u32) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(q as usize);
        if self.word.is_empty() {
            out.push(Vertex::reference(self.anchor + 1));
            for d in 1..q {
                out.push(Vertex {
                    anchor: self.anchor,
                    word: vec![d as u8],
                });
            }
        } else {
            for d in 0..q {
                let mut word = self.word.clone();
                word.push(d as u8);
                out.push(Vertex {
                    anchor: self.anchor,
                    word,
                });
            }
        }
        out
    }

    /// Position of `child` in `self.successors(q)`, or `None` if it is not a
    /// successor of `self`.
    pub fn successor_slot(&self, child: &Vertex, q: u32) -> Option<usize> {
        if child.level() != self.level() + 1 || child.predecessor() != *self {
            return None;
        }
        let slot = if self.word.is_empty() {
            if child.word.is_empty() {
                0
            } else {
                child.word[0] as usize
            }
        } else {
            *child.word.last().expect("child of off-geodesic vertex has a word") as usize
        };
        (slot < q as usize).then_some(slot)
    }

    /// First common vertex of the two chains toward the boundary point.
    ///
    /// With different anchors the only shared ancestors are geodesic
    /// vertices, the deepest being the smaller anchor; with equal anchors
    /// the chains agree exactly along the common word prefix.
    pub fn confluent(&self, other: &Vertex) -> Vertex {
        if self.anchor != other.anchor {
            return Vertex::reference(self.anchor.min(other.anchor));
        }
        let lcp = self
            .word
            .iter()
            .zip(&other.word)
            .take_while(|(a, b)| a == b)
            .count();
        Vertex {
            anchor: self.anchor,
            word: self.word[..lcp].to_vec(),
        }
    }

    /// Edge-counting distance.
    pub fn edge_distance(&self, other: &Vertex) -> i64 {
        let c = self.confluent(other);
        (self.level() - c.level()) + (other.level() - c.level())
    }

    /// Horocyclic Gromov distance: `0` on the diagonal, `e^{-level(confluent)}`
    /// otherwise. (Points then belong to all their own balls.)
    pub fn gromov_distance(&self, other: &Vertex) -> f64 {
        if self == other {
            0.0
        } else {
            (-(self.confluent(other).level() as f64)).exp()
        }
    }

    /// Whether `self` lies in the sector generated by `v` (including `v`).
    pub fn is_in_sector(&self, v: &Vertex) -> bool {
        let drop = self.level() - v.level();
        drop >= 0 && self.ancestor(drop) == *v
    }

    /// All vertices of the sector of `self` exactly `n` horocycles below it.
    /// There are `q^n` of them.
    pub fn sector_level_slice(&self, n: i64, q: u32) -> Result<Vec<Vertex>> {
        if n < 0 {
            return Err(Error::InvalidArgument(format!(
                "slice depth must be >= 0, got {n}"
            )));
        }
        let size = (q as f64).powi(n as i32);
        if size > SLICE_ENUMERATION_LIMIT as f64 {
            return Err(Error::EnumerationLimit {
                what: "sector level slice",
                requested: size as i64,
                limit: SLICE_ENUMERATION_LIMIT,
            });
        }
        let mut layer = vec![self.clone()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(layer.len() * q as usize);
            for v in &layer {
                next.extend(v.successors(q));
            }
            layer = next;
        }
        Ok(layer)
    }

    /// The unique cell of the level-`k` dyadic partition containing `self`.
    pub fn dyadic_cell(&self, k: i64) -> DyadicSet {
        if self.level() >= k {
            DyadicSet::Sector(self.ancestor(self.level() - k))
        } else {
            DyadicSet::Singleton(self.clone())
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.anchor)?;
        for d in &self.word {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for Vertex {
    type Err = Error;

    /// Parses the textual `anchor:word` form, e.g. `0:`, `0:1`, `-2:10`.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::ParseVertex {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (anchor_str, word_str) = s.split_once(':').ok_or_else(|| err("missing `:`"))?;
        if word_str.contains(':') {
            return Err(err("more than one `:`"));
        }
        let anchor: i64 = anchor_str
            .trim()
            .parse()
            .map_err(|_| err("anchor is not an integer"))?;
        let mut word = Vec::with_capacity(word_str.len());
        for ch in word_str.trim().chars() {
            let d = ch.to_digit(10).ok_or_else(|| err("word digits must be 0-9"))?;
            word.push(d as u8);
        }
        if word.first() == Some(&0) {
            return Err(err("non-canonical word: leading digit 0"));
        }
        Ok(Vertex { anchor, word })
    }
}

/// A member of the dyadic family: a sector or a single point. These are
/// exactly the balls of the Gromov distance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DyadicSet {
    Singleton(Vertex),
    Sector(Vertex),
}

impl DyadicSet {
    pub fn generator(&self) -> &Vertex {
        match self {
            DyadicSet::Singleton(v) | DyadicSet::Sector(v) => v,
        }
    }

    pub fn contains(&self, x: &Vertex) -> bool {
        match self {
            DyadicSet::Singleton(v) => v == x,
            DyadicSet::Sector(v) => x.is_in_sector(v),
        }
    }

    /// Set inclusion among dyadic sets.
    pub fn is_subset_of(&self, other: &DyadicSet) -> bool {
        match (self, other) {
            (DyadicSet::Singleton(a), _) => other.contains(a),
            (DyadicSet::Sector(_), DyadicSet::Singleton(_)) => false,
            (DyadicSet::Sector(a), DyadicSet::Sector(_)) => other.contains(a),
        }
    }
}

impl fmt::Display for DyadicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DyadicSet::Singleton(v) => write!(f, "point({v})"),
            DyadicSet::Sector(v) => write!(f, "U({v})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Vertex {
        s.parse().unwrap()
    }

    #[test]
    fn predecessor_examples() {
        assert_eq!(v("0:1").predecessor(), v("0:"));
        assert_eq!(v("0:").predecessor(), v("-1:"));
        assert_eq!(v("-2:10").predecessor(), v("-2:1"));
    }

    #[test]
    fn successor_examples_q2() {
        assert_eq!(v("0:").successors(2), vec![v("1:"), v("0:1")]);
        assert_eq!(v("0:1").successors(2), vec![v("0:10"), v("0:11")]);
        for x in [v("0:"), v("3:12"), v("-4:2")] {
            assert_eq!(x.successors(2).len(), 2);
        }
    }

    #[test]
    fn successor_slots_follow_canonical_order() {
        let x = v("0:");
        for (i, child) in x.successors(3).iter().enumerate() {
            assert_eq!(x.successor_slot(child, 3), Some(i));
        }
        assert_eq!(x.successor_slot(&v("0:"), 3), None);
        assert_eq!(x.successor_slot(&v("0:21"), 3), None);
    }

    #[test]
    fn confluent_examples() {
        assert_eq!(v("0:10").confluent(&v("0:11")), v("0:1"));
        assert_eq!(v("0:1").confluent(&v("1:")), v("0:"));
        assert_eq!(v("3:").confluent(&v("-1:")), v("-1:"));
        let x = v("2:11");
        assert_eq!(x.confluent(&x), x);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(v("0:1").edge_distance(&v("1:")), 2);
        let x = v("-1:320");
        assert_eq!(x.edge_distance(&x), 0);
        assert_eq!(x.edge_distance(&x.predecessor()), 1);
    }

    #[test]
    fn gromov_distance_examples() {
        let x = v("0:1");
        assert_eq!(x.gromov_distance(&x), 0.0);
        assert_eq!(v("0:1").gromov_distance(&v("1:")), 1.0);
        // siblings below a level-2 vertex meet at their parent
        let p = v("2:");
        let kids = p.successors(2);
        let d = kids[0].gromov_distance(&kids[1]);
        assert!((d - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn level_slice_counts() {
        let x = v("0:");
        assert_eq!(x.sector_level_slice(0, 2).unwrap(), vec![x.clone()]);
        assert_eq!(x.sector_level_slice(1, 2).unwrap(), x.successors(2));
        assert_eq!(x.sector_level_slice(5, 2).unwrap().len(), 32);
        for y in x.sector_level_slice(4, 2).unwrap() {
            assert_eq!(y.confluent(&x), x);
            assert_eq!(y.level(), x.level() + 4);
        }
        assert!(x.sector_level_slice(-1, 2).is_err());
    }

    #[test]
    fn dyadic_cell_examples() {
        let x = v("0:111");
        assert_eq!(x.dyadic_cell(1), DyadicSet::Sector(v("0:1")));
        let y = v("0:");
        assert_eq!(y.dyadic_cell(2), DyadicSet::Singleton(y.clone()));
        assert_eq!(x.dyadic_cell(x.level()), DyadicSet::Sector(x.clone()));
    }

    #[test]
    fn parsing_round_trips_and_rejects() {
        for s in ["0:", "0:1", "-2:10", "17:2013"] {
            assert_eq!(v(s).to_string(), s);
        }
        assert!("0:01".parse::<Vertex>().is_err());
        assert!("0".parse::<Vertex>().is_err());
        assert!("x:1".parse::<Vertex>().is_err());
        assert!("0:1:2".parse::<Vertex>().is_err());
        assert!("0:1a".parse::<Vertex>().is_err());
        assert!(Vertex::new(0, vec![0, 1]).is_err());
        assert!(v("0:7").check_digits(2).is_err());
        assert!(v("0:7").check_digits(8).is_ok());
    }

    #[test]
    fn sector_membership() {
        let g = v("0:1");
        assert!(g.is_in_sector(&g));
        assert!(v("0:101").is_in_sector(&g));
        assert!(!v("0:2").is_in_sector(&g));
        assert!(!v("0:").is_in_sector(&g));
        // geodesic sectors contain later geodesic vertices
        assert!(v("3:").is_in_sector(&v("1:")));
        assert!(!v("0:").is_in_sector(&v("1:")));
    }

    #[test]
    fn dyadic_subset_relation() {
        let big = DyadicSet::Sector(v("0:"));
        let small = DyadicSet::Sector(v("0:11"));
        let pt = DyadicSet::Singleton(v("0:11"));
        assert!(small.is_subset_of(&big));
        assert!(!big.is_subset_of(&small));
        assert!(pt.is_subset_of(&small));
        assert!(!small.is_subset_of(&pt));
    }
}
