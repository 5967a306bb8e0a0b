//! Nested marker levels for 1D systems.
//!
//! Level 1 is the system's designated seed. Each later level refines the
//! previous one: intersect with the designated refinement set and keep
//! the points whose first return to the previous level leaves the
//! refinement. Points of level `n` sit at least `n` apart along every
//! orbit, so the level and its first `n-1` translates are pairwise
//! disjoint, and the levels are nested by construction.
//!
//! The recurrent adjustment replaces level `n` by
//! `(A_n \ A_inf) ∪ (union of S^i A_inf over n < |i| <= scan)` with
//! `A_inf` the budget-resolved intersection of the built levels, making
//! every resolved member recurrent at desk scale.

use crate::membership::Membership;
use crate::memo::MemoTable;
use crate::point::Point;
use crate::sets::{refinement_1d, seed_1d, SetHandle, StagedSet};
use crate::system::{base_point, SystemSpec};
use crate::word::GroupWord;
use std::sync::Arc;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MarkerError {
    #[error("system has no designated 1D seed")]
    UnsupportedSystem,
    #[error("seed failed its complete-section spot check")]
    InvalidSeed,
    #[error("depth must be at least 1")]
    BadDepth,
}

pub struct MarkerChain {
    sys: SystemSpec,
    seed: SetHandle,
    refinements: Vec<SetHandle>,
    depth: u32,
    walk_h: u64,
    memos: Vec<MemoTable>,
}

impl MarkerChain {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn system(&self) -> SystemSpec {
        self.sys
    }

    pub fn seed(&self) -> &SetHandle {
        &self.seed
    }

    pub fn membership(&self, level: u32, x: &Point, horizon: u64) -> Membership {
        assert!(level >= 1 && level <= self.depth);
        if level == 1 {
            return self.seed.eval(x, horizon);
        }
        let slot = (level - 2) as usize;
        if let Some(m) = self.memos[slot].get(x, horizon) {
            return m;
        }
        let m = self.compute(level, x, horizon);
        self.memos[slot].put(x.clone(), horizon, m);
        m
    }

    fn compute(&self, level: u32, x: &Point, horizon: u64) -> Membership {
        let prev = self.membership(level - 1, x, horizon);
        if !prev.is_in() {
            return prev;
        }
        let fine = &self.refinements[(level - 2) as usize];
        if fine.eval(x, horizon).is_out() {
            return Membership::Out;
        }
        // First return to the previous level; the new level keeps the
        // points whose return leaves the refinement.
        let step = GroupWord::s(1);
        let mut y = x.clone();
        for s in 1..=self.walk_h.min(horizon) {
            y = match self.sys.apply(&step, &y) {
                Ok(p) => p,
                Err(_) => return Membership::horizon(s),
            };
            match self.membership(level - 1, &y, horizon) {
                Membership::In => {
                    return fine.eval(&y, horizon).not();
                }
                Membership::Out => continue,
                Membership::Unknown(u) => return Membership::Unknown(u),
            }
        }
        Membership::horizon(self.walk_h.min(horizon))
    }

    pub fn clear_memo(&self) {
        for m in &self.memos {
            m.clear();
        }
    }
}

struct LevelView {
    chain: Arc<MarkerChain>,
    level: u32,
}

impl StagedSet for LevelView {
    fn member(&self, x: &Point, horizon: u64) -> Membership {
        self.chain.membership(self.level, x, horizon)
    }

    fn certificate_seed(&self) -> Option<SetHandle> {
        Some(self.chain.seed.clone())
    }

    fn clear_memo(&self) {
        self.chain.clear_memo();
    }

    fn describe(&self) -> String {
        format!("marker1d[{}]", self.level)
    }
}

/// Build the nested marker levels `A_1 ⊇ A_2 ⊇ ... ⊇ A_depth`.
pub fn vanishing_markers_1d(
    sys: SystemSpec,
    depth: u32,
    walk_h: u64,
) -> Result<Arc<MarkerChain>, MarkerError> {
    let seed = seed_1d(sys).ok_or(MarkerError::UnsupportedSystem)?;
    build_chain(sys, seed, depth, walk_h)
}

/// Same construction from an explicit seed (the seed must still admit
/// the system's designated refinements).
pub fn build_chain(
    sys: SystemSpec,
    seed: SetHandle,
    depth: u32,
    walk_h: u64,
) -> Result<Arc<MarkerChain>, MarkerError> {
    if depth == 0 {
        return Err(MarkerError::BadDepth);
    }
    spot_check_seed(sys, &seed, walk_h.min(256))?;
    let refinements = (1..depth)
        .map(|l| refinement_1d(sys, l).ok_or(MarkerError::UnsupportedSystem))
        .collect::<Result<Vec<_>, _>>()?;
    let memos = (1..depth).map(|_| MemoTable::new()).collect();
    Ok(Arc::new(MarkerChain {
        sys,
        seed,
        refinements,
        depth,
        walk_h,
        memos,
    }))
}

/// The seed and its complement must both appear on a probe orbit.
fn spot_check_seed(sys: SystemSpec, seed: &SetHandle, probe: u64) -> Result<(), MarkerError> {
    for label in 0..sys.labels() {
        let mut hit_in = false;
        let mut hit_out = false;
        let mut x = base_point(&sys, label);
        for _ in 0..=probe {
            match seed.eval(&x, probe) {
                Membership::In => hit_in = true,
                Membership::Out => hit_out = true,
                Membership::Unknown(_) => {}
            }
            if hit_in && hit_out {
                break;
            }
            x = match sys.apply(&GroupWord::s(1), &x) {
                Ok(p) => p,
                Err(_) => break,
            };
        }
        if !(hit_in && hit_out) {
            return Err(MarkerError::InvalidSeed);
        }
    }
    Ok(())
}

pub fn level_handle(chain: &Arc<MarkerChain>, level: u32) -> SetHandle {
    SetHandle::staged(
        chain.sys,
        Arc::new(LevelView {
            chain: chain.clone(),
            level,
        }),
    )
}

pub fn level_handles(chain: &Arc<MarkerChain>) -> Vec<SetHandle> {
    (1..=chain.depth).map(|l| level_handle(chain, l)).collect()
}

/// Budget-bounded recurrent replacement of the chain levels.
pub struct RecurrentSet {
    chain: Arc<MarkerChain>,
    /// Bound on the translate union; fixed at construction.
    scan: u64,
    memos: Vec<MemoTable>,
}

impl RecurrentSet {
    pub fn membership(&self, level: u32, x: &Point, horizon: u64) -> Membership {
        let slot = (level - 1) as usize;
        if let Some(m) = self.memos[slot].get(x, horizon) {
            return m;
        }
        let m = self.compute(level, x, horizon);
        self.memos[slot].put(x.clone(), horizon, m);
        m
    }

    fn compute(&self, level: u32, x: &Point, horizon: u64) -> Membership {
        let depth = self.chain.depth;
        let in_level = self.chain.membership(level, x, horizon);
        let in_core = self.chain.membership(depth, x, horizon);
        if in_level.is_in() && in_core.is_out() {
            return Membership::In;
        }
        // Translate-union scan: x in S^i A_inf for some level < |i| <= scan.
        let mut unknown = None;
        for mag in (level as i128 + 1)..=(self.scan as i128) {
            for i in [mag, -mag] {
                let y = match self.chain.sys.r_apply(-i, x) {
                    Ok(p) => p,
                    Err(_) => continue,
                };
                match self.chain.membership(depth, &y, horizon) {
                    Membership::In => return Membership::In,
                    Membership::Unknown(u) => unknown = Some(u),
                    Membership::Out => {}
                }
            }
        }
        if let Some(u) = unknown {
            return Membership::Unknown(u);
        }
        match (in_level, in_core) {
            (Membership::Unknown(u), _) | (_, Membership::Unknown(u)) => Membership::Unknown(u),
            _ => Membership::Out,
        }
    }
}

struct RecurrentView {
    set: Arc<RecurrentSet>,
    level: u32,
}

impl StagedSet for RecurrentView {
    fn member(&self, x: &Point, horizon: u64) -> Membership {
        self.set.membership(self.level, x, horizon)
    }

    fn clear_memo(&self) {
        for m in &self.set.memos {
            m.clear();
        }
    }

    fn describe(&self) -> String {
        format!("recurrent[{}]", self.level)
    }
}

/// Handles for the recurrent replacement of every chain level.
pub fn recurrent_adjust(chain: &Arc<MarkerChain>, scan: u64) -> Vec<SetHandle> {
    let set = Arc::new(RecurrentSet {
        chain: chain.clone(),
        scan,
        memos: (0..chain.depth).map(|_| MemoTable::new()).collect(),
    });
    (1..=chain.depth)
        .map(|level| {
            SetHandle::staged(
                chain.sys,
                Arc::new(RecurrentView {
                    set: set.clone(),
                    level,
                }),
            )
        })
        .collect()
}
