//! Property tests for the structural invariants: canonical coordinates,
//! metric laws, measure bounds, norms, and the decomposition identities.

use proptest::prelude::*;

use treebergman::bergman::{coefficients, extension_inner_product, BergmanKernel};
use treebergman::harmonic::{Evaluable, FiniteFunction};
use treebergman::measure::{
    ball_measure, doubling_constant, gromov_ball, sector_measure, vertex_measure,
};
use treebergman::operators::{cz_decompose, PiecewiseFunction};
use treebergman::sampling::Sampler;
use treebergman::{Params, Vertex};

const Q: u32 = 2;

fn arb_vertex() -> impl Strategy<Value = Vertex> {
    (
        -6i64..=6,
        prop::collection::vec(0u8..Q as u8, 0..8),
    )
        .prop_map(|(anchor, mut word)| {
            if word.first() == Some(&0) {
                word[0] = 1 + word[0] % (Q as u8 - 1).max(1);
            }
            Vertex::new(anchor, word).expect("first digit forced nonzero")
        })
}

/// Reference confluent: walk both chains up one edge at a time.
fn confluent_by_walking(a: &Vertex, b: &Vertex) -> Vertex {
    let mut a = a.clone();
    let mut b = b.clone();
    while a.level() > b.level() {
        a = a.predecessor();
    }
    while b.level() > a.level() {
        b = b.predecessor();
    }
    while a != b {
        a = a.predecessor();
        b = b.predecessor();
    }
    a
}

proptest! {
    #[test]
    fn parent_child_round_trip(x in arb_vertex()) {
        for child in x.successors(Q) {
            prop_assert_eq!(child.predecessor(), x.clone());
            prop_assert_eq!(child.level(), x.level() + 1);
        }
        let text = x.to_string();
        prop_assert_eq!(text.parse::<Vertex>().unwrap(), x);
    }

    #[test]
    fn confluent_matches_the_walking_oracle(a in arb_vertex(), b in arb_vertex()) {
        let fast = a.confluent(&b);
        prop_assert_eq!(&fast, &confluent_by_walking(&a, &b));
        prop_assert!(fast.level() <= a.level().min(b.level()));
        prop_assert_eq!(a.confluent(&b), b.confluent(&a));
    }

    #[test]
    fn edge_distance_is_a_metric(a in arb_vertex(), b in arb_vertex(), c in arb_vertex()) {
        prop_assert_eq!(a.edge_distance(&a), 0);
        prop_assert_eq!(a.edge_distance(&b), b.edge_distance(&a));
        prop_assert!(a.edge_distance(&c) <= a.edge_distance(&b) + b.edge_distance(&c));
        if a != b {
            prop_assert!(a.edge_distance(&b) > 0);
        }
    }

    #[test]
    fn gromov_distance_is_an_ultrametric(a in arb_vertex(), b in arb_vertex(), c in arb_vertex()) {
        let lhs = a.gromov_distance(&c);
        prop_assert!(lhs <= a.gromov_distance(&b).max(b.gromov_distance(&c)) + 1e-15);
    }

    #[test]
    fn points_inhabit_their_own_balls(x in arb_vertex(), lr in -6.0f64..6.0) {
        // the diagonal convention makes every ball contain its center
        let ball = gromov_ball(&x, lr.exp()).unwrap();
        prop_assert!(ball.contains(&x));
    }

    #[test]
    fn dyadic_cells_nest(x in arb_vertex(), k in -6i64..8) {
        let fine = x.dyadic_cell(k);
        let coarse = x.dyadic_cell(k - 1);
        prop_assert!(fine.contains(&x));
        prop_assert!(fine.is_subset_of(&coarse));
    }

    #[test]
    fn doubling_ratio_respects_the_constant(x in arb_vertex(), lr in -6.0f64..6.0) {
        let p = Params::default();
        let r = lr.exp();
        let ratio = ball_measure(&p, &x, 2.0 * r).unwrap() / ball_measure(&p, &x, r).unwrap();
        prop_assert!(ratio <= doubling_constant(&p) * (1.0 + 1e-12));
    }

    #[test]
    fn sector_measure_splits_over_children(x in arb_vertex()) {
        let p = Params::default();
        let kids: f64 = x.successors(Q).iter().map(|z| sector_measure(&p, z)).sum();
        let total = sector_measure(&p, &x);
        prop_assert!((total - vertex_measure(&p, &x) - kids).abs() <= 1e-12 * total);
    }

    #[test]
    fn csv_round_trip_is_lossless(
        entries in prop::collection::vec((arb_vertex(), -1e6f64..1e6), 0..12)
    ) {
        let f = FiniteFunction::from_entries(entries);
        let parsed = FiniteFunction::from_csv(&f.to_csv()).unwrap();
        prop_assert_eq!(parsed, f);
    }

    #[test]
    fn lp_norms_obey_the_triangle_inequality(
        a in prop::collection::vec((arb_vertex(), -10.0f64..10.0), 1..8),
        b in prop::collection::vec((arb_vertex(), -10.0f64..10.0), 1..8),
        p_exp in 1.0f64..4.0,
    ) {
        let p = Params::default();
        let fa = FiniteFunction::from_entries(a);
        let fb = FiniteFunction::from_entries(b);
        let mut sum = fa.clone();
        for (v, c) in fb.entries() {
            sum.set(v.clone(), sum.value_at(v) + c);
        }
        let na = PiecewiseFunction::from_finite(&fa).lp_norm(p_exp, &p).unwrap();
        let nb = PiecewiseFunction::from_finite(&fb).lp_norm(p_exp, &p).unwrap();
        let ns = PiecewiseFunction::from_finite(&sum).lp_norm(p_exp, &p).unwrap();
        prop_assert!(ns <= na + nb + 1e-9 * (na + nb).max(1.0));
    }

    #[test]
    fn cz_reassembles_exactly(
        entries in prop::collection::vec((arb_vertex(), -20.0f64..20.0), 1..8),
        frac in 0.05f64..1.0,
    ) {
        let p = Params::default();
        let f = FiniteFunction::from_entries(entries);
        prop_assume!(!f.is_empty());
        let peak = f.entries().fold(0.0f64, |m, (_, c)| m.max(c.abs()));
        let out = cz_decompose(&f, peak * frac, &p).unwrap();
        for (x, _) in f.entries() {
            let total = out.good.value_at(x)
                + out.bad.iter().map(|(_, b)| b.value_at(x)).sum::<f64>();
            prop_assert!((total - f.value_at(x)).abs() <= 1e-12 * (1.0 + f.value_at(x).abs()));
        }
        for (cell, b) in &out.bad {
            let scale = 1.0f64.max(f.l1_norm(&p));
            prop_assert!(b.integral_over(cell, &p).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn kernel_is_symmetric_everywhere(a in arb_vertex(), b in arb_vertex()) {
        let kernel = BergmanKernel::new(coefficients(&Params::default()));
        prop_assert!((kernel.eval(&a, &b) - kernel.eval(&b, &a)).abs() <= 1e-12);
    }
}

/// The extension inner product against a genuinely summed pairing: pair a
/// random basis combination with the harmonic extension of a random zero-sum
/// seed by summing over the sector down to a certified depth.
#[test]
fn extension_inner_product_matches_direct_summation() {
    let p = Params::default();
    let cf = coefficients(&p);
    let q = p.q();
    let mut s = Sampler::new(42, q);
    for round in 0..5 {
        let f = s.combo(cf, 5);
        let y = s.vertex(-2, 2, 2);
        let seed_vals = s.zero_sum_values();
        let got = extension_inner_product(&f, &y, &seed_vals, &cf).unwrap();

        // direct: sum f * seed-extension * weight over the sector of y
        let seed = FiniteFunction::from_entries(
            y.successors(q).into_iter().zip(seed_vals.iter().copied()),
        );
        let ext = treebergman::harmonic::harmonic_extension(seed, y.level(), q, 1e-12).unwrap();
        let depth = 14;
        let mut direct = 0.0;
        for n in 1..=depth {
            for x in y.sector_level_slice(n, q).unwrap() {
                direct += f.value_at(&x) * ext.value_at(&x) * vertex_measure(&p, &x);
            }
        }
        // crude sup bounds give a geometric tail certificate
        let bound_f: f64 = f
            .terms()
            .map(|(idx, c)| {
                c.abs() * (p.qf() / (p.qf() - 1.0))
                    / treebergman::bergman::basis_norm_sq(idx, &cf).sqrt()
            })
            .sum();
        let bound_ext =
            seed_vals.iter().fold(0.0f64, |m, v| m.max(v.abs())) * p.qf() / (p.qf() - 1.0);
        let level_mass = vertex_measure(&p, &y) * p.q_powf(1.0 - p.alpha());
        let tail = bound_f * bound_ext * level_mass
            * p.q_powf((1.0 - p.alpha()) * depth as f64)
            / (1.0 - p.q_powf(1.0 - p.alpha()));
        assert!(
            (got - direct).abs() <= tail + 1e-11 * (1.0 + got.abs()),
            "round {round}: closed {got} vs direct {direct} (tail {tail})"
        );
    }
}
