//! Deterministic seeded point sampling.
//!
//! Counter-based ChaCha streams keyed by (seed, stream) so suites can
//! draw independently without perturbing each other. Same seed, same
//! list.

use crate::point::{OdoPoint, Point};
use crate::system::SystemSpec;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic admissible points. The radius bounds lattice and line
/// coordinates; odometer draws use short random prefixes and periods.
pub fn sample_points(
    sys: SystemSpec,
    count: usize,
    radius: i64,
    seed: u64,
    stream: u64,
) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = draw(sys, radius, &mut rng);
        if sys.admissible(&p) {
            out.push(p);
        }
    }
    out
}

fn draw(sys: SystemSpec, radius: i64, rng: &mut ChaCha8Rng) -> Point {
    match sys {
        SystemSpec::LabeledLattice { labels } => Point::Lattice {
            label: rng.random_range(0..labels),
            a: rng.random_range(-radius..=radius),
            b: rng.random_range(-radius..=radius),
        },
        SystemSpec::Lattice3 { labels } => Point::Lattice3 {
            label: rng.random_range(0..labels),
            a: rng.random_range(-radius..=radius),
            b: rng.random_range(-radius..=radius),
            c: rng.random_range(-radius..=radius),
        },
        SystemSpec::IntegerLine { labels } => Point::Line {
            label: rng.random_range(0..labels),
            n: rng.random_range(-radius..=radius),
        },
        SystemSpec::DyadicOdometer => Point::Odo(draw_odo(rng, false)),
        SystemSpec::ProductOdometer => Point::ProdOdo(draw_odo(rng, true), draw_odo(rng, true)),
        SystemSpec::CyclicLine { modulus } => Point::Line {
            label: 0,
            n: rng.random_range(0..modulus),
        },
    }
}

fn draw_odo(rng: &mut ChaCha8Rng, forbid_constant: bool) -> OdoPoint {
    loop {
        let plen = rng.random_range(0..=6usize);
        let wlen = rng.random_range(1..=5usize);
        let prefix: Vec<u8> = (0..plen).map(|_| rng.random_range(0..2u8)).collect();
        let period: Vec<u8> = (0..wlen).map(|_| rng.random_range(0..2u8)).collect();
        let p = OdoPoint::new(&prefix, &period).expect("bits are valid");
        if forbid_constant && p.eventually_constant() {
            continue;
        }
        return p;
    }
}
