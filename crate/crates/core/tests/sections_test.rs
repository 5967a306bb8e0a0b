//! Orbit stripping, decomposition, and first-return machinery against
//! direct windowed evaluation.

use markerlab::membership::Membership;
use markerlab::point::OdoPoint;
use markerlab::sections::{
    decompose, first_exit, induced_step, strip_full_orbits, strip_full_orbits_within,
    GeneratingFamily, SectionError,
};
use markerlab::sets::{Primitive, SetHandle};
use markerlab::system::SystemSpec;
use markerlab::word::GroupWord;
use markerlab::Point;

const H: u64 = 1 << 10;

fn line() -> SystemSpec {
    SystemSpec::IntegerLine { labels: 1 }
}

#[test]
fn strip_leaves_witnessed_members_unchanged() {
    // Every dyadic congruence member has an orbit witness within 2^i
    // steps, so its invariant core is empty and C_i = A_i.
    let sys = line();
    let fam = GeneratingFamily::dyadic_line(sys, 4);
    let stripped = strip_full_orbits(&fam, GroupWord::s(1));
    for (i, member) in fam.members().iter().enumerate() {
        let c = &stripped.members()[2 * i]; // stripped member, before its complement
        for n in -64..=64i64 {
            let x = Point::line(0, n);
            assert_eq!(
                c.eval(&x, H),
                member.eval(&x, H),
                "member {i} changed at {n}"
            );
        }
    }
}

#[test]
fn strip_of_full_space_never_resolves_in() {
    let sys = line();
    let fam = GeneratingFamily::from_base(vec![SetHandle::all(sys)]);
    let stripped = strip_full_orbits(&fam, GroupWord::s(1));
    // The stripped full member is A \ core with core Unknown-In forever:
    // it can never resolve In, and its core never resolves at all.
    let c = &stripped.members()[0];
    for n in -10..=10i64 {
        let x = Point::line(0, n);
        assert_ne!(c.eval(&x, 64), Membership::In);
    }
}

#[test]
fn strip_preserves_separation_on_odometer() {
    let sys = SystemSpec::DyadicOdometer;
    let fam = GeneratingFamily::cylinders(sys, 5);
    let stripped = strip_full_orbits(&fam, GroupWord::s(1));
    let pts = markerlab::sample::sample_points(sys, 64, 0, 5, 7);
    let mut pairs = 0;
    for (i, x) in pts.iter().enumerate() {
        for y in pts.iter().skip(i + 1) {
            if x == y {
                continue;
            }
            pairs += 1;
            if pairs > 1000 {
                return;
            }
            // The original family separates points differing in the
            // first five bits; the stripped family must do the same.
            if fam.separates(x, y, H) == Some(true) {
                assert_eq!(
                    stripped.separates(x, y, H),
                    Some(true),
                    "separation lost for {x} vs {y}"
                );
            }
        }
    }
}

/// Direct staged evaluation of the decomposition on a window.
fn window_oracle(radius: i64, members: &[&dyn Fn(i64) -> bool]) -> (Vec<i64>, Vec<i64>) {
    let scan = 4 * radius;
    let in_window_stage =
        |stages: &Vec<Vec<i64>>, n: usize, x: i64| -> bool { stages[n].contains(&x) };
    let mut stages: Vec<Vec<i64>> = Vec::new();
    for n in 0..members.len() {
        let mut stage = Vec::new();
        for x in -(radius * 8)..=(radius * 8) {
            if !members[n](x) {
                continue;
            }
            let mut hit = false;
            'scan: for k in -scan..=scan {
                for m in 0..n {
                    if in_window_stage(&stages, m, x + k) {
                        hit = true;
                        break 'scan;
                    }
                }
            }
            if !hit {
                stage.push(x);
            }
        }
        stages.push(stage);
    }
    let mut b = Vec::new();
    let mut c = Vec::new();
    for x in -radius..=radius {
        let in_b = stages.iter().any(|s| s.contains(&x));
        if in_b {
            b.push(x);
        } else {
            let sat = (-scan..=scan).any(|k| stages.iter().any(|s| s.contains(&(x + k))));
            if sat {
                c.push(x);
            }
        }
    }
    (b, c)
}

#[test]
fn decompose_full_line_matches_windowed_evaluation() {
    let sys = line();
    let fam = GeneratingFamily::dyadic_line(sys, 3);
    let stripped = strip_full_orbits(&fam, GroupWord::s(1));
    let (b, c) = decompose(SetHandle::all(sys), &stripped, 512);
    // Oracle members mirror the stripped family: each dyadic member and
    // its complement (cores are empty on the line, intersections too).
    let m0 = |x: i64| x.rem_euclid(2) == 0;
    let m0c = |x: i64| x.rem_euclid(2) != 0;
    let m1 = |x: i64| x.div_euclid(2).rem_euclid(2) == 0;
    let m1c = |x: i64| x.div_euclid(2).rem_euclid(2) != 0;
    let m2 = |x: i64| x.div_euclid(4).rem_euclid(2) == 0;
    let m2c = |x: i64| x.div_euclid(4).rem_euclid(2) != 0;
    let members: Vec<&dyn Fn(i64) -> bool> = vec![&m0, &m0c, &m1, &m1c, &m2, &m2c];
    let (ob, oc) = window_oracle(100, &members);
    assert!(ob.contains(&0));
    assert!(oc.contains(&1));
    for n in -100..=100i64 {
        let x = Point::line(0, n);
        let mb = b.eval(&x, H);
        let mc = c.eval(&x, H);
        // Disjoint and covering where resolved.
        if mb.is_resolved() && mc.is_resolved() {
            assert_ne!((mb, mc), (Membership::In, Membership::In), "overlap at {n}");
            assert_ne!((mb, mc), (Membership::Out, Membership::Out), "gap at {n}");
        }
        if mb.is_resolved() {
            assert_eq!(mb.is_in(), ob.contains(&n), "kept part differs at {n}");
        }
        if mc.is_resolved() {
            assert_eq!(mc.is_in(), oc.contains(&n), "saturated part differs at {n}");
        }
    }
    assert_eq!(b.eval(&Point::line(0, 0), H), Membership::In);
    assert_eq!(c.eval(&Point::line(0, 1), H), Membership::In);
}

#[test]
fn decompose_saturations_agree() {
    // Every window point reaches both parts within the scan.
    let sys = line();
    let fam = GeneratingFamily::dyadic_line(sys, 3);
    let stripped = strip_full_orbits(&fam, GroupWord::s(1));
    let (b, c) = decompose(SetHandle::all(sys), &stripped, 512);
    for n in -40..=40i64 {
        for part in [&b, &c] {
            let hit = (-64..=64i64).any(|k| part.eval(&Point::line(0, n + k), H).is_in());
            assert!(hit, "part misses the orbit of {n}");
        }
    }
}

#[test]
fn decompose_proper_target_walks_induced_map() {
    // Decomposing the evens uses the first-return map (+2 on the line);
    // the family is stripped relative to that induced system first. The
    // parts are disjoint, cover the target, and never leave it.
    let sys = line();
    let evens = SetHandle::primitive(
        sys,
        Primitive::Congruence1 {
            modulus: 2,
            residue: 0,
        },
    );
    let fam = GeneratingFamily::from_base(vec![
        SetHandle::primitive(
            sys,
            Primitive::Congruence1 {
                modulus: 4,
                residue: 0,
            },
        ),
        SetHandle::primitive(
            sys,
            Primitive::Congruence1 {
                modulus: 8,
                residue: 0,
            },
        ),
    ]);
    let stripped = strip_full_orbits_within(&fam, GroupWord::s(1), &evens);
    let (b, c) = decompose(evens.clone(), &stripped, 256);
    let mut b_hits = 0;
    let mut c_hits = 0;
    for n in -80..=80i64 {
        let x = Point::line(0, n);
        let mb = b.eval(&x, H);
        let mc = c.eval(&x, H);
        if n.rem_euclid(2) == 1 {
            assert!(
                !mb.is_in() && !mc.is_in(),
                "parts escaped the target at {n}"
            );
            continue;
        }
        if mb.is_resolved() && mc.is_resolved() {
            assert_ne!(mb, mc, "parts must split the target at {n}");
        }
        if mb.is_in() {
            b_hits += 1;
        }
        if mc.is_in() {
            c_hits += 1;
        }
    }
    assert!(
        b_hits > 5 && c_hits > 5,
        "degenerate split: {b_hits}/{c_hits}"
    );
    // Saturation within the target: both parts are met along the
    // induced orbit of any target point.
    for n in [-40i64, -2, 0, 2, 40] {
        for part in [&b, &c] {
            let hit = (-64..=64i64).any(|k| part.eval(&Point::line(0, n + 2 * k), H).is_in());
            assert!(hit, "part misses the induced orbit of {n}");
        }
    }
}

#[test]
fn induced_step_examples() {
    let sys = line();
    let evens = SetHandle::primitive(
        sys,
        Primitive::Congruence1 {
            modulus: 2,
            residue: 0,
        },
    );
    let (y, n) = induced_step(&evens, &Point::line(0, 4), H).unwrap();
    assert_eq!((y, n), (Point::line(0, 6), 2));

    let odo = SystemSpec::DyadicOdometer;
    let seed = SetHandle::primitive(odo, Primitive::BitCylinder { index: 0, bit: 0 });
    let zero = Point::Odo(OdoPoint::zero());
    let (y, n) = induced_step(&seed, &zero, H).unwrap();
    assert_eq!(n, 2, "the odometer alternates bit 0");
    assert_eq!(y, Point::parse("odo:01|0").unwrap());

    // A singleton never returns.
    let single = SetHandle::primitive(sys, Primitive::SingletonLine { n: 3 });
    assert_eq!(
        induced_step(&single, &Point::line(0, 3), 128).err(),
        Some(SectionError::HorizonExhausted { spent: 128 })
    );

    // Precondition: the point must resolve In.
    assert_eq!(
        induced_step(&evens, &Point::line(0, 3), H).err(),
        Some(SectionError::NotInSet)
    );
}

#[test]
fn induced_step_is_bijective_on_samples() {
    // Forward first return then backward first return comes home.
    let sys = SystemSpec::DyadicOdometer;
    let seed = SetHandle::primitive(sys, Primitive::BitCylinder { index: 0, bit: 0 });
    let samples = markerlab::sample::sample_points(sys, 100, 0, 3, 9);
    for x in samples {
        if !seed.eval(&x, H).is_in() {
            continue;
        }
        let (y, n) = induced_step(&seed, &x, H).unwrap();
        // Walk backward to the previous member.
        let mut back = y.clone();
        let mut steps = 0u64;
        loop {
            back = sys.apply(&GroupWord::s(-1), &back).unwrap();
            steps += 1;
            if seed.eval(&back, H).is_in() {
                break;
            }
        }
        assert_eq!(back, x, "first return is not invertible at {x}");
        assert_eq!(steps, n);
    }
}

#[test]
fn first_exit_examples() {
    let sys = line();
    // The interval [0,5] as a union of singletons.
    let mut interval = SetHandle::empty(sys);
    for n in 0..=5 {
        interval = interval.or(&SetHandle::primitive(sys, Primitive::SingletonLine { n }));
    }
    let x = Point::line(0, 3);
    assert_eq!(
        first_exit(&interval, &x, 1, &GroupWord::s(1), H).unwrap(),
        3
    );
    assert_eq!(
        first_exit(&interval, &x, -1, &GroupWord::s(1), H).unwrap(),
        4
    );
    // Consistency: all intermediate points stay inside.
    for k in 1..3 {
        let y = sys.apply(&GroupWord::s(k), &x).unwrap();
        assert!(interval.eval(&y, H).is_in());
    }
}
