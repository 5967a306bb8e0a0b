//! Sweeps beyond the planar lattice: the 3D lattice and the product
//! odometer, including a 3D window-materialization oracle mirroring the
//! planar one.

use markerlab::defaults;
use markerlab::membership::Membership;
use markerlab::sets::seed_sweep;
use markerlab::spiral;
use markerlab::sweep::{build_stages, weak_rokhlin_d, Stage, Sweep};
use markerlab::system::SystemSpec;
use markerlab::verify::{verify_complete_section, verify_disjointness, Region};
use markerlab::Point;
use std::collections::HashMap;

#[test]
fn three_dimensional_products_disjoint() {
    let sys = SystemSpec::Lattice3 { labels: 1 };
    let radius = 12i64;
    let h = defaults::lattice_horizon(radius) * 16;
    let mk = weak_rokhlin_d(sys, &[2, 2, 2], None, u64::MAX >> 1, h).unwrap();
    let set = mk.handle();
    let words = mk.product_words();
    assert_eq!(words.len(), 8);
    let report = verify_disjointness(
        &set,
        &words,
        &Region::Lattice3Window {
            labels: 1,
            radius: 6,
        },
        h,
    );
    assert!(report.pass, "violations: {:?}", report.violations);
    assert!(report.resolved > 0);
    // Nonempty: the orbit of the origin meets the set.
    let cs = verify_complete_section(
        &set,
        &[Point::Lattice3 {
            label: 0,
            a: 0,
            b: 0,
            c: 0,
        }],
        h,
    );
    assert!(cs.pass, "{:?}", cs.violations);
}

#[test]
fn bounds_of_one_return_seed_3d() {
    let sys = SystemSpec::Lattice3 { labels: 1 };
    let mk = weak_rokhlin_d(sys, &[1, 1, 1], None, 1 << 12, 1 << 12).unwrap();
    let seed = seed_sweep(sys).unwrap();
    let set = mk.handle();
    for a in -3..=3 {
        for b in -3..=3 {
            for c in -3..=3 {
                let x = Point::Lattice3 { label: 0, a, b, c };
                assert_eq!(set.eval(&x, 64), seed.eval(&x, 64));
            }
        }
    }
}

#[test]
fn product_odometer_sweep_smoke() {
    let sys = SystemSpec::ProductOdometer;
    let mk = weak_rokhlin_d(sys, &[2, 3], None, 1 << 16, 1 << 10).unwrap();
    let set = mk.handle();
    let words = mk.product_words();
    let pts = markerlab::sample::sample_points(sys, 150, 0, 5, 1);
    let report = verify_disjointness(&set, &words, &Region::Points(pts), 1 << 10);
    assert!(report.pass, "violations: {:?}", report.violations);
    assert!(
        report.resolved > 50,
        "too few resolved points: {} resolved, {} unknown",
        report.resolved,
        report.unknown
    );
}

// ------------------------------------------------------------------
// 3D window oracle: the same literal set algorithm as the planar
// oracle, over 3-vectors, with taint tracking for runs that reach the
// window edge or depend on undetermined cells.

type Cell3 = (i64, i64, i64);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    In,
    Out,
    Unk,
}

fn ord_of(j: i128) -> u128 {
    if j < 0 {
        2 * (-j) as u128 - 2
    } else {
        2 * j as u128 - 1
    }
}

fn stratum3(c: Cell3, step: Cell3) -> i128 {
    spiral::point3_to_index(c.0 + step.0, c.1 + step.1, c.2 + step.2)
        - spiral::point3_to_index(c.0, c.1, c.2)
}

fn checkerboard3(c: Cell3) -> Tri {
    if (c.0 + c.1 + c.2).rem_euclid(2) == 0 {
        Tri::In
    } else {
        Tri::Out
    }
}

fn oracle_stage3(input: &dyn Fn(Cell3) -> Tri, step: Cell3, radius: i64) -> HashMap<Cell3, Tri> {
    let in_window = |c: Cell3| c.0.abs() <= radius && c.1.abs() <= radius && c.2.abs() <= radius;
    let prev_of = |c: Cell3| (c.0 - step.0, c.1 - step.1, c.2 - step.2);
    let next_of = |c: Cell3| (c.0 + step.0, c.1 + step.1, c.2 + step.2);
    struct Run {
        j: i128,
        cells: Vec<Cell3>,
        exit: Option<Cell3>,
        extent_taint: bool,
    }
    let mut runs: Vec<Run> = Vec::new();
    let mut run_of: HashMap<Cell3, usize> = HashMap::new();
    for a in -radius..=radius {
        for b in -radius..=radius {
            for cc in -radius..=radius {
                let c = (a, b, cc);
                if input(c) != Tri::In || run_of.contains_key(&c) {
                    continue;
                }
                let j = stratum3(c, step);
                let mut start = c;
                let mut extent_taint = false;
                loop {
                    let p = prev_of(start);
                    if !in_window(p) {
                        if stratum3(p, step) == j && input(p) != Tri::Out {
                            extent_taint = true;
                        }
                        break;
                    }
                    match (input(p), stratum3(p, step) == j) {
                        (Tri::In, true) => start = p,
                        (Tri::Unk, true) => {
                            extent_taint = true;
                            break;
                        }
                        _ => break,
                    }
                }
                let mut cells = vec![start];
                let mut cur = start;
                let mut exit = None;
                loop {
                    let nx = next_of(cur);
                    let same = stratum3(nx, step) == j;
                    match (input(nx), same) {
                        (Tri::In, true) => {
                            if !in_window(nx) {
                                extent_taint = true;
                                break;
                            }
                            cells.push(nx);
                            cur = nx;
                        }
                        (Tri::Unk, true) => {
                            extent_taint = true;
                            break;
                        }
                        _ => {
                            exit = Some(nx);
                            break;
                        }
                    }
                }
                let idx = runs.len();
                for rc in &cells {
                    run_of.insert(*rc, idx);
                }
                runs.push(Run {
                    j,
                    cells,
                    exit,
                    extent_taint,
                });
            }
        }
    }
    let mut order: Vec<i128> = runs.iter().map(|r| r.j).collect();
    order.sort_by_key(|&j| ord_of(j));
    order.dedup();
    let mut alive: HashMap<Cell3, Tri> = HashMap::new();
    let mut result: HashMap<Cell3, Tri> = HashMap::new();
    let alive_at = |alive: &HashMap<Cell3, Tri>, c: Cell3| -> Tri {
        match alive.get(&c) {
            Some(t) => *t,
            None => input(c),
        }
    };
    for j in order {
        #[derive(Clone, Copy, PartialEq)]
        enum Class {
            TypeA,
            TypeB,
            Unknown,
        }
        let mut classes: Vec<(usize, Class)> = Vec::new();
        for (idx, run) in runs.iter().enumerate() {
            if run.j != j {
                continue;
            }
            let class = if run.extent_taint {
                Class::Unknown
            } else {
                match alive_at(&alive, run.exit.expect("clean run has an exit")) {
                    Tri::In => Class::TypeB,
                    Tri::Out => Class::TypeA,
                    Tri::Unk => Class::Unknown,
                }
            };
            classes.push((idx, class));
        }
        for (idx, class) in classes {
            let run = &runs[idx];
            match class {
                Class::TypeA => {
                    for c in &run.cells {
                        result.insert(*c, Tri::Out);
                    }
                    result.insert(*run.cells.last().unwrap(), Tri::In);
                }
                Class::TypeB => {
                    for c in &run.cells {
                        alive.insert(*c, Tri::Out);
                        result.insert(*c, Tri::Out);
                    }
                }
                Class::Unknown => {
                    for c in &run.cells {
                        alive.insert(*c, Tri::Unk);
                        result.insert(*c, Tri::Unk);
                    }
                    if !run.extent_taint {
                        for c in &run.cells[..run.cells.len() - 1] {
                            result.insert(*c, Tri::Out);
                        }
                    }
                }
            }
        }
    }
    let mut out = HashMap::new();
    for a in -radius..=radius {
        for b in -radius..=radius {
            for cc in -radius..=radius {
                let c = (a, b, cc);
                let t = match result.get(&c) {
                    Some(t) => *t,
                    None => match input(c) {
                        Tri::In => unreachable!("every In cell joined a run"),
                        Tri::Out => Tri::Out,
                        Tri::Unk => Tri::Unk,
                    },
                };
                out.insert(c, t);
            }
        }
    }
    out
}

fn materialize3(stages: &[Stage], radius: i64) -> Vec<HashMap<Cell3, Tri>> {
    let mut per_stage: Vec<HashMap<Cell3, Tri>> = Vec::new();
    {
        let mut seed = HashMap::new();
        for a in -radius..=radius {
            for b in -radius..=radius {
                for c in -radius..=radius {
                    seed.insert((a, b, c), checkerboard3((a, b, c)));
                }
            }
        }
        per_stage.push(seed);
    }
    for (t, st) in stages.iter().enumerate() {
        let exps = st.step.exponents().unwrap();
        let step = (exps[0], exps[1], exps[2]);
        let prev = per_stage[t].clone();
        let input = move |c: Cell3| -> Tri {
            if t == 0 {
                checkerboard3(c)
            } else {
                prev.get(&c).copied().unwrap_or(Tri::Unk)
            }
        };
        per_stage.push(oracle_stage3(&input, step, radius));
    }
    per_stage
}

#[test]
fn engine_matches_oracle_3d_2_2_2() {
    let sys = SystemSpec::Lattice3 { labels: 1 };
    let radius = 9i64;
    let seed = seed_sweep(sys).unwrap();
    let (stages, cuts) = build_stages(&[2, 2, 2]);
    let h = defaults::lattice3_horizon(radius + 4);
    let sweep = Sweep::new(sys, seed, stages.clone(), cuts, h, h);
    let mat = materialize3(&stages, radius);
    let mut determinate_final = 0usize;
    for (t, expect) in mat.iter().enumerate() {
        for (&(a, b, c), &want) in expect {
            let want = match want {
                Tri::In => Membership::In,
                Tri::Out => Membership::Out,
                Tri::Unk => continue,
            };
            if t == stages.len() {
                determinate_final += 1;
            }
            let x = Point::Lattice3 { label: 0, a, b, c };
            let got = sweep.membership_after(t, &x, h);
            assert_eq!(got, want, "stage {t}: mismatch at ({a},{b},{c})");
        }
    }
    assert!(
        determinate_final >= 400,
        "oracle too tainted: {determinate_final} determinate cells"
    );
}

/// Stage-local separation and monotonicity on the product odometer,
/// straight from the engine on admissible samples.
#[test]
fn product_odometer_stagewise_separated() {
    let sys = SystemSpec::ProductOdometer;
    let seed = seed_sweep(sys).unwrap();
    let (stages, cuts) = build_stages(&[2, 3]);
    let h = 1 << 10;
    let sweep = Sweep::new(sys, seed, stages.clone(), cuts, 1 << 16, h);
    let samples = markerlab::sample::sample_points(sys, 120, 0, 13, 6);
    let mut separated_checks = 0u64;
    for t in 1..=stages.len() {
        let step = stages[t - 1].step;
        for x in &samples {
            let now = sweep.membership_after(t, x, h);
            if !now.is_in() {
                continue;
            }
            assert!(
                sweep.membership_after(t - 1, x, h).is_in(),
                "stage {t} not monotone at {x}"
            );
            let fwd = sys.apply(&step, x).unwrap();
            let m = sweep.membership_after(t, &fwd, h);
            if m.is_resolved() {
                separated_checks += 1;
                assert!(m.is_out(), "stage {t} image overlap at {x}");
            }
        }
    }
    assert!(
        separated_checks > 50,
        "too few resolved separation checks: {separated_checks}"
    );
}

/// Budget monotonicity of sweep queries: resolved answers never change
/// under a larger budget.
#[test]
fn sweep_budget_monotone() {
    let sys = SystemSpec::LabeledLattice { labels: 1 };
    let seed = seed_sweep(sys).unwrap();
    let mk = markerlab::sweep::weak_rokhlin_2d(sys, 3, 3, seed, 1 << 14, 1 << 14).unwrap();
    let set = mk.handle();
    for a in -10..=10i64 {
        for b in -10..=10i64 {
            let x = Point::lattice(0, a, b);
            let small = set.eval(&x, 64);
            set.clear_memo();
            let big = set.eval(&x, 1 << 14);
            if small.is_resolved() {
                assert_eq!(small, big, "answer changed with budget at ({a},{b})");
            }
        }
    }
}
