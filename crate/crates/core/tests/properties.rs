//! Property tests for the action laws, canonical forms, orbit
//! agreement, and the budget semantics of lazy membership.

use markerlab::defaults::WALK_HORIZON_1D;
use markerlab::markers1d::{level_handle, vanishing_markers_1d};
use markerlab::point::OdoPoint;
use markerlab::sets::{seed_sweep, SetHandle};
use markerlab::spiral;
use markerlab::system::SystemSpec;
use markerlab::word::GroupWord;
use markerlab::{Membership, Point};
use proptest::prelude::*;

fn arb_bits(max_len: usize, min_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..2, min_len..=max_len)
}

fn arb_odo() -> impl Strategy<Value = OdoPoint> {
    (arb_bits(6, 0), arb_bits(5, 1))
        .prop_map(|(p, w)| OdoPoint::new(&p, &w).expect("bits in range"))
}

fn arb_lattice_point() -> impl Strategy<Value = Point> {
    (0u32..3, -500i64..500, -500i64..500).prop_map(|(label, a, b)| Point::Lattice { label, a, b })
}

proptest! {
    #[test]
    fn action_law_lattice(
        x in arb_lattice_point(),
        p1 in -50i64..50, q1 in -50i64..50,
        p2 in -50i64..50, q2 in -50i64..50,
    ) {
        let sys = SystemSpec::LabeledLattice { labels: 3 };
        let w1 = GroupWord::st(p1, q1);
        let w2 = GroupWord::st(p2, q2);
        let lhs = sys.apply(&w1, &sys.apply(&w2, &x).unwrap()).unwrap();
        let rhs = sys.apply(&w1.compose(&w2).unwrap(), &x).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn action_law_product_odometer(
        l in arb_odo(), r in arb_odo(),
        p1 in -6i64..6, q1 in -6i64..6,
        p2 in -6i64..6, q2 in -6i64..6,
    ) {
        let sys = SystemSpec::ProductOdometer;
        let x = Point::ProdOdo(l, r);
        prop_assume!(sys.admissible(&x));
        let w1 = GroupWord::st(p1, q1);
        let w2 = GroupWord::st(p2, q2);
        let lhs = sys.apply(&w1, &sys.apply(&w2, &x).unwrap()).unwrap();
        let rhs = sys.apply(&w1.compose(&w2).unwrap(), &x).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn commutativity(x in arb_lattice_point()) {
        let sys = SystemSpec::LabeledLattice { labels: 3 };
        let s = GroupWord::s(1);
        let t = GroupWord::t(1);
        let a = sys.apply(&s, &sys.apply(&t, &x).unwrap()).unwrap();
        let b = sys.apply(&t, &sys.apply(&s, &x).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn canonicalization_idempotent(p in arb_odo()) {
        let again = OdoPoint::new(p.prefix(), p.period()).unwrap();
        prop_assert_eq!(&again, &p);
        // Value-level equality too.
        prop_assert_eq!(OdoPoint::from_rational(&p.value()), p);
    }

    /// Orbit agreement on the lattice: the orbit index of a generator
    /// word's image is found within 4*(|p|+|q|+maxcoord)^2.
    #[test]
    fn lattice_orbit_agreement(
        label in 0u32..2,
        a in -60i64..60, b in -60i64..60,
        p in -40i64..40, q in -40i64..40,
    ) {
        let sys = SystemSpec::LabeledLattice { labels: 2 };
        let x = Point::Lattice { label, a, b };
        let y = sys.apply(&GroupWord::st(p, q), &x).unwrap();
        let c = (a.abs().max(b.abs()) + p.abs() + q.abs()) as u64;
        let bound = 4 * c * c;
        let j = sys.r_index_of(&x, &y, bound);
        prop_assert!(j.is_some(), "index not found within 4*(|p|+|q|+maxcoord)^2");
        prop_assert_eq!(sys.r_apply(j.unwrap(), &x).unwrap(), y);
    }

    #[test]
    fn product_orbit_agreement(
        l in arb_odo(), r in arb_odo(),
        p in -4i64..=4, q in -4i64..=4,
    ) {
        let sys = SystemSpec::ProductOdometer;
        let x = Point::ProdOdo(l, r);
        prop_assume!(sys.admissible(&x));
        let y = sys.apply(&GroupWord::st(p, q), &x).unwrap();
        let j = sys.r_index_of(&x, &y, u64::MAX >> 1);
        prop_assert!(j.is_some(), "generator step left the R-orbit");
        prop_assert_eq!(sys.r_apply(j.unwrap(), &x).unwrap(), y);
    }

    /// Spiral roundtrip on a wide coordinate range.
    #[test]
    fn spiral_roundtrip(a in -100_000i64..100_000, b in -100_000i64..100_000) {
        let k = spiral::point_to_index(a, b);
        prop_assert_eq!(spiral::index_to_point(k), (a, b));
    }

    /// Budget monotonicity: once resolved, the answer is stable under
    /// larger budgets.
    #[test]
    fn budget_monotone_markers(n in -512i64..512, h1 in 16u64..128, extra in 1u64..512) {
        let sys = SystemSpec::IntegerLine { labels: 1 };
        let chain = vanishing_markers_1d(sys, 4, WALK_HORIZON_1D).unwrap();
        let handle = level_handle(&chain, 4);
        let x = Point::line(0, n);
        let small = handle.eval(&x, h1);
        let big = handle.eval(&x, h1 + extra);
        if small.is_resolved() {
            prop_assert_eq!(small, big);
        }
    }

    /// Complement coherence on resolved queries.
    #[test]
    fn complement_xor(n in -512i64..512) {
        let sys = SystemSpec::IntegerLine { labels: 1 };
        let chain = vanishing_markers_1d(sys, 3, WALK_HORIZON_1D).unwrap();
        let a = level_handle(&chain, 3);
        let c = a.not();
        let x = Point::line(0, n);
        let ma = a.eval(&x, WALK_HORIZON_1D);
        let mc = c.eval(&x, WALK_HORIZON_1D);
        if ma.is_resolved() {
            prop_assert_eq!(ma.is_in(), !mc.is_in());
        }
    }

    /// Image coherence: x in w.A iff w^-1 x in A, at the same budget.
    #[test]
    fn image_coherence(x in arb_lattice_point(), p in -20i64..20, q in -20i64..20) {
        let sys = SystemSpec::LabeledLattice { labels: 3 };
        let seed = seed_sweep(sys).unwrap();
        let w = GroupWord::st(p, q);
        let img = seed.image(w);
        let y = sys.apply(&w.inverse(), &x).unwrap();
        prop_assert_eq!(img.eval(&x, 64), seed.eval(&y, 64));
    }
}

/// Clearing memo tables changes speed only, never a resolved answer.
#[test]
fn memo_transparency() {
    let sys = SystemSpec::DyadicOdometer;
    let chain = vanishing_markers_1d(sys, 5, WALK_HORIZON_1D).unwrap();
    let handle = level_handle(&chain, 5);
    let pts = markerlab::sample::sample_points(sys, 120, 0, 77, 0);
    let before: Vec<Membership> = pts
        .iter()
        .map(|x| handle.eval(x, WALK_HORIZON_1D))
        .collect();
    handle.clear_memo();
    let after: Vec<Membership> = pts
        .iter()
        .map(|x| handle.eval(x, WALK_HORIZON_1D))
        .collect();
    assert_eq!(before, after);
}

/// Handles are shareable across threads; concurrent evaluation agrees
/// with sequential evaluation.
#[test]
fn concurrent_evaluation_consistent() {
    use std::sync::Arc;
    let sys = SystemSpec::LabeledLattice { labels: 1 };
    let seed = seed_sweep(sys).unwrap();
    let mk = markerlab::sweep::weak_rokhlin_2d(sys, 2, 2, seed, 1 << 14, 1 << 14).unwrap();
    let handle: Arc<SetHandle> = Arc::new(mk.handle());
    let mut threads = Vec::new();
    for t in 0..4 {
        let h = handle.clone();
        threads.push(std::thread::spawn(move || {
            let mut acc = Vec::new();
            for a in -10i64..=10 {
                for b in -10i64..=10 {
                    if (a + b + t) % 2 == 0 {
                        let x = Point::lattice(0, a, b);
                        acc.push((a, b, h.eval(&x, 1 << 14)));
                    }
                }
            }
            acc
        }));
    }
    let sequential = |a: i64, b: i64| handle.eval(&Point::lattice(0, a, b), 1 << 14);
    for th in threads {
        for (a, b, m) in th.join().unwrap() {
            assert_eq!(m, sequential(a, b));
        }
    }
}
