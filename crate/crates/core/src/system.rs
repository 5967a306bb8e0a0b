//! Built-in computable systems and their group actions.
//!
//! Each system declares its commuting generators and an explicit orbit
//! generator `R` whose orbits coincide with the full group orbits on
//! admissible points. `R` is system data, not something derived: the
//! lattice systems use the spiral enumeration within a label copy, the
//! odometers use 2-adic addition (on the bit-interleaved coding for the
//! product), and the line uses its own translation.
//!
//! Descriptor syntax: `lat:<labels>`, `lat3:<labels>`, `line:<labels>`,
//! `odo`, `podo`, `cyc:<modulus>` (a deliberately periodic diagnostic
//! system on which freeness fails).

use crate::defaults::{LATTICE3_COORD_BOUND, LATTICE_COORD_BOUND};
use crate::point::{OdoPoint, Point};
use crate::spiral;
use crate::word::GroupWord;
use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ActionError {
    #[error("point is not admissible for this system")]
    InadmissiblePoint,
    #[error("word is not supported by this system")]
    WordNotSupported,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemSpec {
    /// Independent copies of the translation action on the 2D lattice.
    LabeledLattice { labels: u32 },
    /// 3D generalization.
    Lattice3 { labels: u32 },
    /// Independent copies of the shift on the integers (1D).
    IntegerLine { labels: u32 },
    /// The dyadic adding machine (1D).
    DyadicOdometer,
    /// Product of two dyadic odometers (2D).
    ProductOdometer,
    /// Rotation on Z/m: a deliberately periodic fixture on which
    /// freeness checks must fail.
    CyclicLine { modulus: i64 },
}

impl SystemSpec {
    pub fn parse(text: &str) -> Option<SystemSpec> {
        let mut parts = text.splitn(2, ':');
        let head = parts.next()?;
        let arg = parts.next();
        match (head, arg) {
            ("lat", Some(n)) => Some(SystemSpec::LabeledLattice {
                labels: n.parse().ok()?,
            }),
            ("lat", None) => Some(SystemSpec::LabeledLattice { labels: 1 }),
            ("lat3", Some(n)) => Some(SystemSpec::Lattice3 {
                labels: n.parse().ok()?,
            }),
            ("lat3", None) => Some(SystemSpec::Lattice3 { labels: 1 }),
            ("line", Some(n)) => Some(SystemSpec::IntegerLine {
                labels: n.parse().ok()?,
            }),
            ("line", None) => Some(SystemSpec::IntegerLine { labels: 1 }),
            ("odo", None) => Some(SystemSpec::DyadicOdometer),
            ("podo", None) => Some(SystemSpec::ProductOdometer),
            ("cyc", Some(m)) => Some(SystemSpec::CyclicLine {
                modulus: m.parse().ok()?,
            }),
            _ => None,
        }
    }

    /// Number of commuting generators.
    pub fn dimension(&self) -> usize {
        match self {
            SystemSpec::LabeledLattice { .. } | SystemSpec::ProductOdometer => 2,
            SystemSpec::Lattice3 { .. } => 3,
            _ => 1,
        }
    }

    pub fn labels(&self) -> u32 {
        match *self {
            SystemSpec::LabeledLattice { labels }
            | SystemSpec::Lattice3 { labels }
            | SystemSpec::IntegerLine { labels } => labels,
            _ => 1,
        }
    }

    pub fn generators(&self) -> Vec<GroupWord> {
        match self.dimension() {
            1 => vec![GroupWord::s(1)],
            2 => vec![GroupWord::s(1), GroupWord::t(1)],
            _ => vec![
                GroupWord::ST3 { p: 1, q: 0, u: 0 },
                GroupWord::ST3 { p: 0, q: 1, u: 0 },
                GroupWord::ST3 { p: 0, q: 0, u: 1 },
            ],
        }
    }

    pub fn admissible(&self, x: &Point) -> bool {
        match (self, x) {
            (SystemSpec::LabeledLattice { labels }, Point::Lattice { label, a, b }) => {
                label < labels && a.abs() <= LATTICE_COORD_BOUND && b.abs() <= LATTICE_COORD_BOUND
            }
            (SystemSpec::Lattice3 { labels }, Point::Lattice3 { label, a, b, c }) => {
                label < labels
                    && a.abs() <= LATTICE3_COORD_BOUND
                    && b.abs() <= LATTICE3_COORD_BOUND
                    && c.abs() <= LATTICE3_COORD_BOUND
            }
            (SystemSpec::IntegerLine { labels }, Point::Line { label, .. }) => label < labels,
            (SystemSpec::DyadicOdometer, Point::Odo(_)) => true,
            (SystemSpec::ProductOdometer, Point::ProdOdo(l, r)) => {
                !l.eventually_constant() && !r.eventually_constant()
            }
            (SystemSpec::CyclicLine { modulus }, Point::Line { label, n }) => {
                *label == 0 && *n >= 0 && n < modulus
            }
            _ => false,
        }
    }

    /// Apply a group word. `RPow` requires the system's orbit generator.
    pub fn apply(&self, w: &GroupWord, x: &Point) -> Result<Point, ActionError> {
        if !self.admissible(x) {
            return Err(ActionError::InadmissiblePoint);
        }
        if let GroupWord::RPow(k) = w {
            return self.r_apply(*k, x);
        }
        match (self, x, w) {
            (
                SystemSpec::LabeledLattice { .. },
                Point::Lattice { label, a, b },
                GroupWord::ST { p, q },
            ) => self.check(Point::Lattice {
                label: *label,
                a: a + p,
                b: b + q,
            }),
            (
                SystemSpec::Lattice3 { .. },
                Point::Lattice3 { label, a, b, c },
                GroupWord::ST3 { p, q, u },
            ) => self.check(Point::Lattice3 {
                label: *label,
                a: a + p,
                b: b + q,
                c: c + u,
            }),
            (
                SystemSpec::IntegerLine { .. },
                Point::Line { label, n },
                GroupWord::ST { p, q: 0 },
            ) => self.check(Point::Line {
                label: *label,
                n: n + p,
            }),
            (SystemSpec::DyadicOdometer, Point::Odo(o), GroupWord::ST { p, q: 0 }) => {
                Ok(Point::Odo(o.add_int(&BigInt::from(*p))))
            }
            (SystemSpec::ProductOdometer, Point::ProdOdo(l, r), GroupWord::ST { p, q }) => Ok(
                Point::ProdOdo(l.add_int(&BigInt::from(*p)), r.add_int(&BigInt::from(*q))),
            ),
            (
                SystemSpec::CyclicLine { modulus },
                Point::Line { label, n },
                GroupWord::ST { p, q: 0 },
            ) => Ok(Point::Line {
                label: *label,
                n: (n + p).rem_euclid(*modulus),
            }),
            _ => Err(ActionError::WordNotSupported),
        }
    }

    fn check(&self, p: Point) -> Result<Point, ActionError> {
        if self.admissible(&p) {
            Ok(p)
        } else {
            Err(ActionError::InadmissiblePoint)
        }
    }

    /// k-th power of the orbit generator.
    pub fn r_apply(&self, k: i128, x: &Point) -> Result<Point, ActionError> {
        if !self.admissible(x) {
            return Err(ActionError::InadmissiblePoint);
        }
        match (self, x) {
            (SystemSpec::LabeledLattice { .. }, Point::Lattice { label, a, b }) => {
                let idx = spiral::point_to_index(*a, *b) + k;
                let (a2, b2) = spiral::index_to_point(idx);
                self.check(Point::Lattice {
                    label: *label,
                    a: a2,
                    b: b2,
                })
            }
            (SystemSpec::Lattice3 { .. }, Point::Lattice3 { label, a, b, c }) => {
                let idx = spiral::point3_to_index(*a, *b, *c) + k;
                let (a2, b2, c2) = spiral::index3_to_point(idx);
                self.check(Point::Lattice3 {
                    label: *label,
                    a: a2,
                    b: b2,
                    c: c2,
                })
            }
            (SystemSpec::IntegerLine { .. }, Point::Line { label, n }) => {
                let moved = (*n as i128) + k;
                let n2 = i64::try_from(moved).map_err(|_| ActionError::InadmissiblePoint)?;
                self.check(Point::Line {
                    label: *label,
                    n: n2,
                })
            }
            (SystemSpec::DyadicOdometer, Point::Odo(o)) => {
                Ok(Point::Odo(o.add_int(&BigInt::from(k))))
            }
            (SystemSpec::ProductOdometer, Point::ProdOdo(l, r)) => {
                let z = l.interleave(r).add_int(&BigInt::from(k));
                let (l2, r2) = z.deinterleave();
                self.check(Point::ProdOdo(l2, r2))
            }
            (SystemSpec::CyclicLine { modulus }, Point::Line { label, n }) => {
                let n2 = ((*n as i128 + k).rem_euclid(*modulus as i128)) as i64;
                Ok(Point::Line {
                    label: *label,
                    n: n2,
                })
            }
            _ => Err(ActionError::InadmissiblePoint),
        }
    }

    /// The unique `j` with `|j| <= horizon` and `R^j x = y`, if any.
    ///
    /// All built-in generators admit an exact orbit index, so this is a
    /// closed-form difference rather than a walk; the horizon only bounds
    /// the accepted magnitude.
    pub fn r_index_of(&self, x: &Point, y: &Point, horizon: u64) -> Option<i128> {
        let j = self.r_index_raw(x, y)?;
        if j.unsigned_abs() <= horizon as u128 {
            Some(j)
        } else {
            None
        }
    }

    fn r_index_raw(&self, x: &Point, y: &Point) -> Option<i128> {
        match (self, x, y) {
            (
                SystemSpec::LabeledLattice { .. },
                Point::Lattice {
                    label: l1,
                    a: a1,
                    b: b1,
                },
                Point::Lattice {
                    label: l2,
                    a: a2,
                    b: b2,
                },
            ) => {
                if l1 != l2 {
                    return None;
                }
                Some(spiral::point_to_index(*a2, *b2) - spiral::point_to_index(*a1, *b1))
            }
            (
                SystemSpec::Lattice3 { .. },
                Point::Lattice3 {
                    label: l1,
                    a: a1,
                    b: b1,
                    c: c1,
                },
                Point::Lattice3 {
                    label: l2,
                    a: a2,
                    b: b2,
                    c: c2,
                },
            ) => {
                if l1 != l2 {
                    return None;
                }
                Some(
                    spiral::point3_to_index(*a2, *b2, *c2) - spiral::point3_to_index(*a1, *b1, *c1),
                )
            }
            (
                SystemSpec::IntegerLine { .. },
                Point::Line { label: l1, n: n1 },
                Point::Line { label: l2, n: n2 },
            ) => {
                if l1 != l2 {
                    return None;
                }
                Some(*n2 as i128 - *n1 as i128)
            }
            (SystemSpec::DyadicOdometer, Point::Odo(a), Point::Odo(b)) => {
                rational_int_diff(&b.value(), &a.value())
            }
            (SystemSpec::ProductOdometer, Point::ProdOdo(l1, r1), Point::ProdOdo(l2, r2)) => {
                rational_int_diff(&l2.interleave(r2).value(), &l1.interleave(r1).value())
            }
            (
                SystemSpec::CyclicLine { modulus },
                Point::Line { n: n1, .. },
                Point::Line { n: n2, .. },
            ) => {
                let d = (n2 - n1).rem_euclid(*modulus);
                // Smallest representative in absolute value.
                let alt = d - modulus;
                Some(if d.abs() <= alt.abs() {
                    d as i128
                } else {
                    alt as i128
                })
            }
            _ => None,
        }
    }

    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

/// `a - b` when it is a (bounded) rational integer.
fn rational_int_diff(a: &num_rational::BigRational, b: &num_rational::BigRational) -> Option<i128> {
    let d = a - b;
    if !d.denom().is_one() {
        return None;
    }
    i128::try_from(d.numer()).ok()
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SystemSpec::LabeledLattice { labels } => write!(f, "lat:{labels}"),
            SystemSpec::Lattice3 { labels } => write!(f, "lat3:{labels}"),
            SystemSpec::IntegerLine { labels } => write!(f, "line:{labels}"),
            SystemSpec::DyadicOdometer => write!(f, "odo"),
            SystemSpec::ProductOdometer => write!(f, "podo"),
            SystemSpec::CyclicLine { modulus } => write!(f, "cyc:{modulus}"),
        }
    }
}

/// Convenience sample point for each system (used as an orbit
/// representative and by seed spot checks).
pub fn base_point(sys: &SystemSpec, label: u32) -> Point {
    match sys {
        SystemSpec::LabeledLattice { .. } => Point::Lattice { label, a: 0, b: 0 },
        SystemSpec::Lattice3 { .. } => Point::Lattice3 {
            label,
            a: 0,
            b: 0,
            c: 0,
        },
        SystemSpec::IntegerLine { .. } | SystemSpec::CyclicLine { .. } => {
            Point::Line { label, n: 0 }
        }
        SystemSpec::DyadicOdometer => Point::Odo(OdoPoint::new(&[], &[0, 1]).unwrap()),
        SystemSpec::ProductOdometer => Point::ProdOdo(
            OdoPoint::new(&[], &[0, 1]).unwrap(),
            OdoPoint::new(&[], &[0, 0, 1]).unwrap(),
        ),
    }
}
