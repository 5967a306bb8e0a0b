//! Lazily evaluated membership procedures for constructed sets.
//!
//! A [`SetHandle`] is a defining recipe: a primitive predicate, a boolean
//! combination, an image under a group word, or a reference into a staged
//! construction (marker chains, sweep stages, decompositions). Evaluation
//! is deterministic in the point and the budget, and resolved answers are
//! budget-monotone. Staged constructions own their memo tables; clearing
//! them never changes a resolved answer.

use crate::membership::Membership;
use crate::point::Point;
use crate::system::SystemSpec;
use crate::word::GroupWord;
use std::fmt;
use std::sync::Arc;

/// Primitive point predicates. These always resolve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Primitive {
    All,
    Empty,
    LabelIs(u32),
    /// Bit `index` of the sequence equals `bit`. On the product odometer
    /// the index refers to the bit-interleaved coding.
    BitCylinder {
        index: u32,
        bit: u8,
    },
    /// Block checkerboard at scale `2^scale`: the sum of the floored
    /// coordinates is even. At scale 0 on the lattice this is the
    /// standard checkerboard; on the line it is the even integers.
    BlockParity {
        scale_log2: u32,
    },
    /// Line congruence `n = residue (mod modulus)`.
    Congruence1 {
        modulus: i64,
        residue: i64,
    },
    /// Lattice congruence on both coordinates.
    Congruence2 {
        ma: i64,
        ra: i64,
        mb: i64,
        rb: i64,
    },
    /// 3D lattice congruence.
    Congruence3 {
        ma: i64,
        ra: i64,
        mb: i64,
        rb: i64,
        mc: i64,
        rc: i64,
    },
    /// Singleton on the line (a wandering-set fixture).
    SingletonLine {
        n: i64,
    },
}

impl Primitive {
    fn holds(&self, x: &Point) -> bool {
        match (self, x) {
            (Primitive::All, _) => true,
            (Primitive::Empty, _) => false,
            (Primitive::LabelIs(l), Point::Lattice { label, .. })
            | (Primitive::LabelIs(l), Point::Lattice3 { label, .. })
            | (Primitive::LabelIs(l), Point::Line { label, .. }) => label == l,
            (Primitive::LabelIs(l), _) => *l == 0,
            (Primitive::BitCylinder { index, bit }, Point::Odo(o)) => {
                o.bit(*index as usize) == *bit
            }
            (Primitive::BitCylinder { index, bit }, Point::ProdOdo(l, r)) => {
                let i = *index as usize;
                let b = if i.is_multiple_of(2) {
                    l.bit(i / 2)
                } else {
                    r.bit(i / 2)
                };
                b == *bit
            }
            (Primitive::BlockParity { scale_log2 }, Point::Line { n, .. }) => {
                n.div_euclid(1 << scale_log2).rem_euclid(2) == 0
            }
            (Primitive::BlockParity { scale_log2 }, Point::Lattice { a, b, .. }) => {
                let s = 1i64 << scale_log2;
                (a.div_euclid(s) + b.div_euclid(s)).rem_euclid(2) == 0
            }
            (Primitive::BlockParity { scale_log2 }, Point::Lattice3 { a, b, c, .. }) => {
                let s = 1i64 << scale_log2;
                (a.div_euclid(s) + b.div_euclid(s) + c.div_euclid(s)).rem_euclid(2) == 0
            }
            (Primitive::Congruence1 { modulus, residue }, Point::Line { n, .. }) => {
                n.rem_euclid(*modulus) == *residue
            }
            (Primitive::Congruence2 { ma, ra, mb, rb }, Point::Lattice { a, b, .. }) => {
                a.rem_euclid(*ma) == *ra && b.rem_euclid(*mb) == *rb
            }
            (
                Primitive::Congruence3 {
                    ma,
                    ra,
                    mb,
                    rb,
                    mc,
                    rc,
                },
                Point::Lattice3 { a, b, c, .. },
            ) => a.rem_euclid(*ma) == *ra && b.rem_euclid(*mb) == *rb && c.rem_euclid(*mc) == *rc,
            (Primitive::SingletonLine { n }, Point::Line { n: m, .. }) => n == m,
            _ => false,
        }
    }

    /// True when the primitive set is provably disjoint from its
    /// translate under `w`, for any subset of it. Conservative.
    fn translate_disjoint(&self, w: &GroupWord) -> bool {
        match (self, w) {
            (Primitive::Congruence1 { modulus, .. }, GroupWord::ST { p, q: 0 }) => {
                p.rem_euclid(*modulus) != 0
            }
            (Primitive::Congruence2 { ma, mb, .. }, GroupWord::ST { p, q }) => {
                p.rem_euclid(*ma) != 0 || q.rem_euclid(*mb) != 0
            }
            (Primitive::Congruence3 { ma, mb, mc, .. }, GroupWord::ST3 { p, q, u }) => {
                p.rem_euclid(*ma) != 0 || q.rem_euclid(*mb) != 0 || u.rem_euclid(*mc) != 0
            }
            (Primitive::BlockParity { scale_log2: 0 }, GroupWord::ST { p, q }) => {
                (p + q).rem_euclid(2) == 1
            }
            (Primitive::BlockParity { scale_log2: 0 }, GroupWord::ST3 { p, q, u }) => {
                (p + q + u).rem_euclid(2) == 1
            }
            // Interleaved bit 0 flips with the parity of the first
            // exponent, bit 1 with the second; carries never reach down.
            (Primitive::BitCylinder { index: 0, .. }, GroupWord::ST { p, .. }) => {
                p.rem_euclid(2) == 1
            }
            (Primitive::BitCylinder { index: 1, .. }, GroupWord::ST { q, .. }) => {
                q.rem_euclid(2) == 1
            }
            (Primitive::SingletonLine { .. }, GroupWord::ST { p, q: 0 }) => *p != 0,
            _ => false,
        }
    }
}

/// A staged construction that decides membership lazily with memoization.
pub trait StagedSet: Send + Sync {
    fn member(&self, x: &Point, horizon: u64) -> Membership;
    /// The seed set the construction refines, when every stage output is
    /// a subset of it. Used for translate-disjointness certificates.
    fn certificate_seed(&self) -> Option<SetHandle> {
        None
    }
    fn clear_memo(&self) {}
    fn describe(&self) -> String;
}

enum SetNode {
    Prim(Primitive),
    Not(SetHandle),
    And(SetHandle, SetHandle),
    Or(SetHandle, SetHandle),
    Image {
        word: GroupWord,
        inner: SetHandle,
    },
    /// Largest invariant subset of `inner` under the walker: a witness
    /// step outside `inner` settles `Out`; `In` is never certified.
    /// With `within` set, the walk follows the first-return map of that
    /// set instead of the ambient generator.
    InvariantCore {
        walker: GroupWord,
        inner: SetHandle,
        within: Option<SetHandle>,
    },
    Staged(Arc<dyn StagedSet>),
}

#[derive(Clone)]
pub struct SetHandle {
    sys: SystemSpec,
    node: Arc<SetNode>,
}

impl SetHandle {
    pub fn primitive(sys: SystemSpec, p: Primitive) -> Self {
        SetHandle {
            sys,
            node: Arc::new(SetNode::Prim(p)),
        }
    }

    pub fn all(sys: SystemSpec) -> Self {
        Self::primitive(sys, Primitive::All)
    }

    pub fn empty(sys: SystemSpec) -> Self {
        Self::primitive(sys, Primitive::Empty)
    }

    pub fn staged(sys: SystemSpec, s: Arc<dyn StagedSet>) -> Self {
        SetHandle {
            sys,
            node: Arc::new(SetNode::Staged(s)),
        }
    }

    pub fn not(&self) -> Self {
        SetHandle {
            sys: self.sys,
            node: Arc::new(SetNode::Not(self.clone())),
        }
    }

    pub fn and(&self, other: &SetHandle) -> Self {
        SetHandle {
            sys: self.sys,
            node: Arc::new(SetNode::And(self.clone(), other.clone())),
        }
    }

    pub fn or(&self, other: &SetHandle) -> Self {
        SetHandle {
            sys: self.sys,
            node: Arc::new(SetNode::Or(self.clone(), other.clone())),
        }
    }

    pub fn diff(&self, other: &SetHandle) -> Self {
        self.and(&other.not())
    }

    /// The image `w . self`.
    pub fn image(&self, word: GroupWord) -> Self {
        SetHandle {
            sys: self.sys,
            node: Arc::new(SetNode::Image {
                word,
                inner: self.clone(),
            }),
        }
    }

    pub fn invariant_core(&self, walker: GroupWord) -> Self {
        SetHandle {
            sys: self.sys,
            node: Arc::new(SetNode::InvariantCore {
                walker,
                inner: self.clone(),
                within: None,
            }),
        }
    }

    /// Invariant core along the first-return map of `within`.
    pub fn invariant_core_within(&self, walker: GroupWord, within: &SetHandle) -> Self {
        SetHandle {
            sys: self.sys,
            node: Arc::new(SetNode::InvariantCore {
                walker,
                inner: self.clone(),
                within: Some(within.clone()),
            }),
        }
    }

    pub fn system(&self) -> SystemSpec {
        self.sys
    }

    pub fn is_all_primitive(&self) -> bool {
        matches!(&*self.node, SetNode::Prim(Primitive::All))
    }

    pub fn eval(&self, x: &Point, horizon: u64) -> Membership {
        match &*self.node {
            SetNode::Prim(p) => {
                if p.holds(x) {
                    Membership::In
                } else {
                    Membership::Out
                }
            }
            SetNode::Not(a) => a.eval(x, horizon).not(),
            SetNode::And(a, b) => a.eval(x, horizon).and(b.eval(x, horizon)),
            SetNode::Or(a, b) => a.eval(x, horizon).or(b.eval(x, horizon)),
            SetNode::Image { word, inner } => match self.sys.apply(&word.inverse(), x) {
                Ok(y) => inner.eval(&y, horizon),
                Err(_) => Membership::Out,
            },
            SetNode::InvariantCore {
                walker,
                inner,
                within,
            } => {
                if inner.eval(x, horizon).is_out() {
                    return Membership::Out;
                }
                let step = |pt: &Point, dir: &GroupWord| -> Option<Point> {
                    match within {
                        None => self.sys.apply(dir, pt).ok(),
                        Some(target) => crate::sections::induced_next(
                            self.sys,
                            dir,
                            |p, h| target.eval(p, h),
                            pt,
                            horizon,
                        )
                        .ok()
                        .map(|(y, _)| y),
                    }
                };
                let mut fwd = x.clone();
                let mut bwd = x.clone();
                let inv = walker.inverse();
                for k in 1..=horizon {
                    for (dir, pt) in [(walker, &mut fwd), (&inv, &mut bwd)] {
                        match step(pt, dir) {
                            Some(y) => {
                                *pt = y;
                                if inner.eval(pt, horizon).is_out() {
                                    return Membership::Out;
                                }
                            }
                            None => return Membership::horizon(2 * k),
                        }
                    }
                }
                Membership::horizon(2 * horizon)
            }
            SetNode::Staged(s) => s.member(x, horizon),
        }
    }

    /// True when `self` and `w . self` are provably disjoint, and the
    /// same holds for every subset of `self`.
    pub fn translate_disjoint(&self, w: &GroupWord) -> bool {
        if w.is_identity() {
            return false;
        }
        match &*self.node {
            SetNode::Prim(p) => p.translate_disjoint(w),
            SetNode::And(a, b) => a.translate_disjoint(w) || b.translate_disjoint(w),
            // Conjugation by a translation leaves the word unchanged
            // (the action is abelian).
            SetNode::Image { inner, .. } => inner.translate_disjoint(w),
            SetNode::Staged(s) => s
                .certificate_seed()
                .is_some_and(|seed| seed.translate_disjoint(w)),
            _ => false,
        }
    }

    pub fn clear_memo(&self) {
        match &*self.node {
            SetNode::Prim(_) => {}
            SetNode::Not(a) => a.clear_memo(),
            SetNode::And(a, b) | SetNode::Or(a, b) => {
                a.clear_memo();
                b.clear_memo();
            }
            SetNode::Image { inner, .. } => inner.clear_memo(),
            SetNode::InvariantCore { inner, .. } => inner.clear_memo(),
            SetNode::Staged(s) => s.clear_memo(),
        }
    }
}

impl fmt::Debug for SetHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            SetNode::Prim(p) => write!(f, "{p:?}"),
            SetNode::Not(a) => write!(f, "not({a:?})"),
            SetNode::And(a, b) => write!(f, "and({a:?},{b:?})"),
            SetNode::Or(a, b) => write!(f, "or({a:?},{b:?})"),
            SetNode::Image { word, inner } => write!(f, "img({word},{inner:?})"),
            SetNode::InvariantCore {
                walker,
                inner,
                within,
            } => match within {
                None => write!(f, "invcore({walker},{inner:?})"),
                Some(t) => write!(f, "invcore({walker},{inner:?} within {t:?})"),
            },
            SetNode::Staged(s) => write!(f, "{}", s.describe()),
        }
    }
}

/// The designated first-level seed of a 1D system: the bit-0 cylinder for
/// the odometer, the even integers for the line.
pub fn seed_1d(sys: SystemSpec) -> Option<SetHandle> {
    match sys {
        SystemSpec::DyadicOdometer => Some(SetHandle::primitive(
            sys,
            Primitive::BitCylinder { index: 0, bit: 0 },
        )),
        SystemSpec::IntegerLine { .. } => Some(SetHandle::primitive(
            sys,
            Primitive::Congruence1 {
                modulus: 2,
                residue: 0,
            },
        )),
        _ => None,
    }
}

/// The designated refinement at level `l >= 1`: a strictly finer
/// congruence or cylinder cutting each induced orbit in two.
pub fn refinement_1d(sys: SystemSpec, level: u32) -> Option<SetHandle> {
    match sys {
        SystemSpec::DyadicOdometer => Some(SetHandle::primitive(
            sys,
            Primitive::BitCylinder {
                index: level,
                bit: 0,
            },
        )),
        SystemSpec::IntegerLine { .. } => Some(SetHandle::primitive(
            sys,
            Primitive::Congruence1 {
                modulus: 1i64 << (level + 1),
                residue: 0,
            },
        )),
        _ => None,
    }
}

/// The shipped seed for multidimensional sweeps: the checkerboard on the
/// lattices, the product of bit-0 cylinders on the product odometer.
pub fn seed_sweep(sys: SystemSpec) -> Option<SetHandle> {
    match sys {
        SystemSpec::LabeledLattice { .. } | SystemSpec::Lattice3 { .. } => Some(
            SetHandle::primitive(sys, Primitive::BlockParity { scale_log2: 0 }),
        ),
        SystemSpec::ProductOdometer => {
            let left = SetHandle::primitive(sys, Primitive::BitCylinder { index: 0, bit: 0 });
            let right = SetHandle::primitive(sys, Primitive::BitCylinder { index: 1, bit: 0 });
            Some(left.and(&right))
        }
        SystemSpec::IntegerLine { .. } => seed_1d(sys),
        _ => None,
    }
}
