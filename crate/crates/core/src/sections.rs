//! Complete sections, generating families, decomposition, and
//! first-return machinery.
//!
//! The decomposition is evaluated per point: stage `n` keeps the points
//! of member `n` whose orbit avoids every earlier stage within the scan
//! budget, and the companion part collects the points saturated by a
//! stage without belonging to it. Wandering behavior at desk scale shows
//! up as `Unknown`, never as a silent pass.

use crate::membership::Membership;
use crate::memo::MemoTable;
use crate::point::Point;
use crate::sets::{Primitive, SetHandle, StagedSet};
use crate::system::SystemSpec;
use crate::word::GroupWord;
use std::sync::Arc;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SectionError {
    #[error("point does not resolve In the set")]
    NotInSet,
    #[error("no return found within {spent} steps")]
    HorizonExhausted { spent: u64 },
    #[error("walk left the admissible universe after {spent} steps")]
    WalkEscaped { spent: u64 },
}

/// An indexed family of sets, stored with each member's complement
/// adjacent so the family is closed under complement by construction.
#[derive(Clone)]
pub struct GeneratingFamily {
    members: Vec<SetHandle>,
}

impl GeneratingFamily {
    pub fn from_base(base: Vec<SetHandle>) -> Self {
        let mut members = Vec::with_capacity(base.len() * 2);
        for m in base {
            let c = m.not();
            members.push(m);
            members.push(c);
        }
        GeneratingFamily { members }
    }

    pub fn members(&self) -> &[SetHandle] {
        &self.members
    }

    /// Dyadic congruence family on the line: member `i` holds the points
    /// with an even quotient at scale `2^i`.
    pub fn dyadic_line(sys: SystemSpec, count: u32) -> Self {
        let base = (0..count)
            .map(|i| SetHandle::primitive(sys, Primitive::BlockParity { scale_log2: i }))
            .collect();
        Self::from_base(base)
    }

    /// Cylinder family on the odometer.
    pub fn cylinders(sys: SystemSpec, count: u32) -> Self {
        let base = (0..count)
            .map(|i| SetHandle::primitive(sys, Primitive::BitCylinder { index: i, bit: 0 }))
            .collect();
        Self::from_base(base)
    }

    /// True when some member separates the pair with both memberships
    /// resolved. `None` when every potential separator is unresolved.
    pub fn separates(&self, x: &Point, y: &Point, horizon: u64) -> Option<bool> {
        let mut all_resolved = true;
        for m in &self.members {
            let a = m.eval(x, horizon);
            let b = m.eval(y, horizon);
            if a.is_resolved() && b.is_resolved() {
                if a != b {
                    return Some(true);
                }
            } else {
                all_resolved = false;
            }
        }
        if all_resolved {
            Some(false)
        } else {
            None
        }
    }
}

/// Replace each member by its orbit-stripped version: `C_i = A_i \ B_i`
/// with `B_i` the largest walker-invariant subset, plus the intersections
/// `B_i ∩ C_j` the construction needs to keep generating.
pub fn strip_full_orbits(fam: &GeneratingFamily, walker: GroupWord) -> GeneratingFamily {
    strip_orbits_impl(fam, walker, None)
}

/// Orbit stripping relative to the first-return system of a target set:
/// members are restricted to the target and cores walk the induced map.
/// This is the preparation step for decomposing a proper subset.
pub fn strip_full_orbits_within(
    fam: &GeneratingFamily,
    walker: GroupWord,
    target: &SetHandle,
) -> GeneratingFamily {
    strip_orbits_impl(fam, walker, Some(target))
}

fn strip_orbits_impl(
    fam: &GeneratingFamily,
    walker: GroupWord,
    target: Option<&SetHandle>,
) -> GeneratingFamily {
    let members: Vec<SetHandle> = fam
        .members()
        .iter()
        .map(|m| match target {
            Some(t) => m.and(t),
            None => m.clone(),
        })
        .collect();
    let cores: Vec<SetHandle> = members
        .iter()
        .map(|a| match target {
            Some(t) => a.invariant_core_within(walker, t),
            None => a.invariant_core(walker),
        })
        .collect();
    let stripped: Vec<SetHandle> = members.iter().zip(&cores).map(|(a, b)| a.diff(b)).collect();
    let mut base = stripped.clone();
    for b in &cores {
        for c in &stripped {
            base.push(b.and(c));
        }
    }
    GeneratingFamily::from_base(base)
}

/// Scan forward along `walker` for the first return to `set`.
/// `is_in` abstracts the membership query so staged constructions can
/// reuse the loop on their own levels.
pub fn induced_next(
    sys: SystemSpec,
    walker: &GroupWord,
    is_in: impl Fn(&Point, u64) -> Membership,
    x: &Point,
    horizon: u64,
) -> Result<(Point, u64), SectionError> {
    let mut y = x.clone();
    for s in 1..=horizon {
        y = sys
            .apply(walker, &y)
            .map_err(|_| SectionError::WalkEscaped { spent: s })?;
        match is_in(&y, horizon) {
            Membership::In => return Ok((y, s)),
            Membership::Out => continue,
            Membership::Unknown(_) => return Err(SectionError::HorizonExhausted { spent: s }),
        }
    }
    Err(SectionError::HorizonExhausted { spent: horizon })
}

/// The induced (first-return) automorphism applied once: the smallest
/// `n >= 1` with `S^n x` back in the set, together with the image.
pub fn induced_step(
    set: &SetHandle,
    x: &Point,
    horizon: u64,
) -> Result<(Point, u64), SectionError> {
    if !set.eval(x, horizon).is_in() {
        return Err(SectionError::NotInSet);
    }
    let sys = set.system();
    let walker = sys.generators()[0];
    induced_next(sys, &walker, |p, h| set.eval(p, h), x, horizon)
}

/// Smallest `k >= 1` with `g^(direction*k) x` outside the set.
pub fn first_exit(
    set: &SetHandle,
    x: &Point,
    direction: i8,
    walker: &GroupWord,
    horizon: u64,
) -> Result<u64, SectionError> {
    if !set.eval(x, horizon).is_in() {
        return Err(SectionError::NotInSet);
    }
    let sys = set.system();
    let step = if direction >= 0 {
        *walker
    } else {
        walker.inverse()
    };
    let mut y = x.clone();
    for k in 1..=horizon {
        y = sys
            .apply(&step, &y)
            .map_err(|_| SectionError::WalkEscaped { spent: k })?;
        match set.eval(&y, horizon) {
            Membership::Out => return Ok(k),
            Membership::In => continue,
            Membership::Unknown(_) => return Err(SectionError::HorizonExhausted { spent: k }),
        }
    }
    Err(SectionError::HorizonExhausted { spent: horizon })
}

/// Staged two-part decomposition of a target set along a generating
/// family: stage `n` keeps member-`n` points whose orbit misses all
/// earlier stages, the companion part collects points saturated by a
/// stage they do not belong to.
pub struct Decomposition {
    sys: SystemSpec,
    walker: GroupWord,
    target: SetHandle,
    members: Vec<SetHandle>,
    scan: u64,
    stage_memo: Vec<MemoTable>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum DecompositionPart {
    Kept,
    Saturated,
}

impl Decomposition {
    pub fn new(target: SetHandle, fam: &GeneratingFamily, scan: u64) -> Arc<Self> {
        let sys = target.system();
        let members: Vec<SetHandle> = if target.is_all_primitive() {
            fam.members().to_vec()
        } else {
            fam.members().iter().map(|m| m.and(&target)).collect()
        };
        let stage_memo = (0..members.len()).map(|_| MemoTable::new()).collect();
        Arc::new(Decomposition {
            sys,
            walker: sys.generators()[0],
            target,
            members,
            scan,
            stage_memo,
        })
    }

    /// Advance one step along the orbit used for saturation scans: the
    /// ambient generator on the full space, the first-return map inside a
    /// proper target.
    fn orbit_step(&self, x: &Point, dir: i8, horizon: u64) -> Result<Point, SectionError> {
        let step = if dir >= 0 {
            self.walker
        } else {
            self.walker.inverse()
        };
        if self.target.is_all_primitive() {
            self.sys
                .apply(&step, x)
                .map_err(|_| SectionError::WalkEscaped { spent: 1 })
        } else {
            induced_next(self.sys, &step, |p, h| self.target.eval(p, h), x, horizon).map(|(y, _)| y)
        }
    }

    fn stage_membership(&self, n: usize, x: &Point, horizon: u64) -> Membership {
        if let Some(m) = self.stage_memo[n].get(x, horizon) {
            return m;
        }
        let m = self.compute_stage(n, x, horizon);
        self.stage_memo[n].put(x.clone(), horizon, m);
        m
    }

    fn compute_stage(&self, n: usize, x: &Point, horizon: u64) -> Membership {
        let own = self.members[n].eval(x, horizon);
        if !own.is_in() {
            return own;
        }
        if n == 0 {
            return Membership::In;
        }
        // Orbit scan for any earlier stage within the budget.
        match self.scan_for_earlier(n, x, horizon) {
            Membership::In => Membership::Out,
            Membership::Out => Membership::In,
            u => u,
        }
    }

    /// Does the orbit of `x` (within +-scan) hit some earlier stage?
    fn scan_for_earlier(&self, n: usize, x: &Point, horizon: u64) -> Membership {
        let mut saw_unknown = None;
        match self.earlier_at(n, x, horizon) {
            Membership::In => return Membership::In,
            Membership::Unknown(u) => saw_unknown = Some(u),
            Membership::Out => {}
        }
        for dir in [1i8, -1] {
            let mut y = x.clone();
            for _ in 0..self.scan {
                match self.orbit_step(&y, dir, horizon) {
                    Ok(next) => y = next,
                    Err(_) => {
                        saw_unknown.get_or_insert(crate::membership::UnknownInfo {
                            reason: crate::membership::UnknownReason::HorizonExhausted,
                            spent: self.scan,
                        });
                        break;
                    }
                }
                match self.earlier_at(n, &y, horizon) {
                    Membership::In => return Membership::In,
                    Membership::Unknown(u) => {
                        saw_unknown.get_or_insert(u);
                    }
                    Membership::Out => {}
                }
            }
        }
        match saw_unknown {
            Some(u) => Membership::Unknown(u),
            None => Membership::Out,
        }
    }

    fn earlier_at(&self, n: usize, y: &Point, horizon: u64) -> Membership {
        let mut unknown = None;
        for m in 0..n {
            match self.stage_membership(m, y, horizon) {
                Membership::In => return Membership::In,
                Membership::Unknown(u) => unknown = Some(u),
                Membership::Out => {}
            }
        }
        match unknown {
            Some(u) => Membership::Unknown(u),
            None => Membership::Out,
        }
    }

    fn part_membership(&self, part: DecompositionPart, x: &Point, horizon: u64) -> Membership {
        // Kept: member of some stage. Saturated: saturated by a stage
        // without belonging to it.
        let in_target = self.target.eval(x, horizon);
        if !in_target.is_in() {
            return in_target;
        }
        match part {
            DecompositionPart::Kept => self.any_stage(x, horizon),
            DecompositionPart::Saturated => match self.any_stage(x, horizon) {
                Membership::In => Membership::Out,
                Membership::Unknown(u) => Membership::Unknown(u),
                Membership::Out => self.scan_any_stage_on_orbit(x, horizon),
            },
        }
    }

    fn any_stage(&self, x: &Point, horizon: u64) -> Membership {
        let mut unknown = None;
        for n in 0..self.members.len() {
            match self.stage_membership(n, x, horizon) {
                Membership::In => return Membership::In,
                Membership::Unknown(u) => unknown = Some(u),
                Membership::Out => {}
            }
        }
        match unknown {
            Some(u) => Membership::Unknown(u),
            None => Membership::Out,
        }
    }

    fn scan_any_stage_on_orbit(&self, x: &Point, horizon: u64) -> Membership {
        let mut saw_unknown = None;
        for dir in [1i8, -1] {
            let mut y = x.clone();
            for _ in 0..self.scan {
                match self.orbit_step(&y, dir, horizon) {
                    Ok(next) => y = next,
                    Err(_) => break,
                }
                match self.any_stage(&y, horizon) {
                    Membership::In => return Membership::In,
                    Membership::Unknown(u) => {
                        saw_unknown.get_or_insert(u);
                    }
                    Membership::Out => {}
                }
            }
        }
        match saw_unknown {
            Some(u) => Membership::Unknown(u),
            None => Membership::Out,
        }
    }
}

struct DecompositionView {
    decomp: Arc<Decomposition>,
    part: DecompositionPart,
}

impl StagedSet for DecompositionView {
    fn member(&self, x: &Point, horizon: u64) -> Membership {
        self.decomp.part_membership(self.part, x, horizon)
    }

    fn certificate_seed(&self) -> Option<SetHandle> {
        Some(self.decomp.target.clone())
    }

    fn clear_memo(&self) {
        for t in &self.decomp.stage_memo {
            t.clear();
        }
    }

    fn describe(&self) -> String {
        match self.part {
            DecompositionPart::Kept => "decompose.B".to_string(),
            DecompositionPart::Saturated => "decompose.C".to_string(),
        }
    }
}

/// Split a target set into two disjoint pieces with equal saturations.
pub fn decompose(target: SetHandle, fam: &GeneratingFamily, scan: u64) -> (SetHandle, SetHandle) {
    let sys = target.system();
    let d = Decomposition::new(target, fam, scan);
    let b = SetHandle::staged(
        sys,
        Arc::new(DecompositionView {
            decomp: d.clone(),
            part: DecompositionPart::Kept,
        }),
    );
    let c = SetHandle::staged(
        sys,
        Arc::new(DecompositionView {
            decomp: d,
            part: DecompositionPart::Saturated,
        }),
    );
    (b, c)
}
