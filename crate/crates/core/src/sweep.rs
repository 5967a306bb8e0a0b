//! Staged separation sweep for free multidimensional actions.
//!
//! The target exponents of the index set are visited in lexicographic
//! order. Arriving at a target word `w`, one separation stage runs for
//! every difference `w * w_earlier^-1` not yet established (established
//! differences survive passage to subsets, so each class is processed
//! once). A single stage with step word `γ` shrinks the current base `A`
//! so that `A ∩ γA = ∅`:
//!
//!   * partition the base into strata `B_j = {x : γx = R^j x}` with `R`
//!     the system's orbit generator, bounding `|j|` by the stage bound;
//!   * within a stratum, `γ` agrees with `R^j`, so the γ-walk stays in
//!     the stratum until it leaves the base or changes stratum — process
//!     strata in the order -1, 1, -2, 2, ...; a maximal γ-run whose exit
//!     point is still alive at that moment is deleted (type b), and a
//!     run with a dead exit keeps exactly its final point (type a);
//!   * the stage result is the union of the kept points.
//!
//! Membership is decided per point by a memoized recursion: run-end
//! check, exit-aliveness chain (strictly decreasing processing order, so
//! it terminates), and a backward scan for the run start. A stage whose
//! step word provably separates the sweep seed is certified as the
//! identity and skipped.

use crate::membership::Membership;
use crate::memo::MemoTable;
use crate::point::Point;
use crate::sets::{refinement_1d, seed_1d, SetHandle, StagedSet};
use crate::system::SystemSpec;
use crate::word::GroupWord;
use std::sync::Arc;

/// Lexicographically ordered exponent tuples `0 <= k_i < bounds[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    pub bounds: Vec<u32>,
}

impl IndexSet {
    pub fn new(bounds: &[u32]) -> Self {
        assert!(!bounds.is_empty() && bounds.iter().all(|&b| b >= 1));
        IndexSet {
            bounds: bounds.to_vec(),
        }
    }

    pub fn count(&self) -> u64 {
        self.bounds.iter().map(|&b| b as u64).product()
    }

    pub fn tuples(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(self.count() as usize);
        let mut cur = vec![0i64; self.bounds.len()];
        loop {
            out.push(cur.clone());
            let mut pos = self.bounds.len();
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                cur[pos] += 1;
                if cur[pos] < self.bounds[pos] as i64 {
                    break;
                }
                cur[pos] = 0;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Stage {
    /// Target word whose arrival scheduled this stage.
    pub target: Vec<i64>,
    /// Earlier target the step separates from.
    pub versus: Vec<i64>,
    /// `target ∘ versus^-1`.
    pub step: GroupWord,
}

/// Processing order of the strata: -1, 1, -2, 2, ...
fn ord_of(j: i128) -> u128 {
    if j < 0 {
        2 * (-j) as u128 - 2
    } else {
        2 * j as u128 - 1
    }
}

fn diff_vec(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// One stage per new difference class, targets in lexicographic order.
/// Within a target, nearer earlier targets come first. Returns the
/// stages and, per target, the stage count after its processing.
///
/// Targets are lexicographically increasing, so every difference has a
/// positive leading exponent and the inverse class never reappears; a
/// flat dedup table over the bounded difference grid keeps the pair scan
/// allocation-free.
pub fn build_stages(bounds: &[u32]) -> (Vec<Stage>, Vec<(Vec<i64>, usize)>) {
    let tuples = IndexSet::new(bounds).tuples();
    let spans: Vec<i64> = bounds.iter().map(|&b| 2 * (b as i64 - 1) + 1).collect();
    let grid: usize = spans.iter().map(|&s| s as usize).product();
    let mut established = vec![false; grid];
    let diff_slot = |a: &[i64], b: &[i64]| -> usize {
        let mut slot = 0usize;
        for ((x, y), (&span, &bound)) in a.iter().zip(b).zip(spans.iter().zip(bounds)) {
            let offset = x - y + (bound as i64 - 1);
            slot = slot * span as usize + offset as usize;
        }
        slot
    };
    let mut stages = Vec::new();
    let mut cuts = Vec::new();
    for k in 1..tuples.len() {
        for i in (0..k).rev() {
            let slot = diff_slot(&tuples[k], &tuples[i]);
            if established[slot] {
                continue;
            }
            established[slot] = true;
            let d = diff_vec(&tuples[k], &tuples[i]);
            stages.push(Stage {
                target: tuples[k].clone(),
                versus: tuples[i].clone(),
                step: GroupWord::from_exponents(&d),
            });
        }
        cuts.push((tuples[k].clone(), stages.len()));
    }
    (stages, cuts)
}

pub struct Sweep {
    sys: SystemSpec,
    seed: SetHandle,
    stages: Vec<Stage>,
    /// Stage count after each target completes.
    target_cuts: Vec<(Vec<i64>, usize)>,
    identity: Vec<bool>,
    /// `effective[t]`: the stage level `t` collapses to after skipping
    /// trailing certified-identity stages (`effective[0] = 0`).
    effective: Vec<usize>,
    j_max: u64,
    walk_h: u64,
    after_memo: Vec<MemoTable>,
    removed_memo: Vec<MemoTable>,
}

impl Sweep {
    pub fn new(
        sys: SystemSpec,
        seed: SetHandle,
        stages: Vec<Stage>,
        target_cuts: Vec<(Vec<i64>, usize)>,
        j_max: u64,
        walk_h: u64,
    ) -> Arc<Self> {
        let identity: Vec<bool> = stages
            .iter()
            .map(|st| seed.translate_disjoint(&st.step))
            .collect();
        let mut effective = Vec::with_capacity(stages.len() + 1);
        effective.push(0usize);
        for (i, &id) in identity.iter().enumerate() {
            let lvl = if id { effective[i] } else { i + 1 };
            effective.push(lvl);
        }
        let after_memo = (0..stages.len()).map(|_| MemoTable::new()).collect();
        let removed_memo = (0..stages.len()).map(|_| MemoTable::new()).collect();
        Arc::new(Sweep {
            sys,
            seed,
            stages,
            target_cuts,
            identity,
            effective,
            j_max,
            walk_h,
            after_memo,
            removed_memo,
        })
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn seed(&self) -> &SetHandle {
        &self.seed
    }

    pub fn all_identity(&self) -> bool {
        self.identity.iter().all(|&b| b)
    }

    /// Membership in the set left after `t` stages (0 = the seed).
    pub fn membership_after(&self, t: usize, x: &Point, horizon: u64) -> Membership {
        let t = self.effective[t];
        if t == 0 {
            return self.seed.eval(x, horizon);
        }
        if let Some(m) = self.after_memo[t - 1].get(x, horizon) {
            return m;
        }
        let m = self.compute_stage(t, x, horizon);
        self.after_memo[t - 1].put(x.clone(), horizon, m);
        m
    }

    fn compute_stage(&self, t: usize, x: &Point, horizon: u64) -> Membership {
        let st = &self.stages[t - 1];
        let prev = self.membership_after(t - 1, x, horizon);
        if !prev.is_in() {
            return prev;
        }
        let fwd = match self.sys.apply(&st.step, x) {
            Ok(p) => p,
            Err(_) => return Membership::horizon(1),
        };
        let j = match self.sys.r_index_of(x, &fwd, self.j_max) {
            Some(j) => j,
            None => return Membership::stage_bound(0),
        };
        debug_assert!(j != 0, "step word fixed a point: action not free");
        if j == 0 {
            return Membership::Out;
        }
        // Run-end check: the γ-successor must leave the stratum.
        match self.in_stratum(t - 1, st, &fwd, j, horizon) {
            Membership::In => return Membership::Out,
            Membership::Unknown(u) => return Membership::Unknown(u),
            Membership::Out => {}
        }
        // The run's exit is the γ-successor; type a iff it is dead at
        // this stratum's processing time.
        match self.alive_chain(t, j, fwd, horizon) {
            Membership::In => return Membership::Out,
            Membership::Unknown(u) => return Membership::Unknown(u),
            Membership::Out => {}
        }
        // Backward scan for the run start.
        let back = st.step.inverse();
        let mut z = x.clone();
        for s in 1..=self.walk_h.min(horizon) {
            z = match self.sys.apply(&back, &z) {
                Ok(p) => p,
                Err(_) => return Membership::horizon(s),
            };
            match self.in_stratum(t - 1, st, &z, j, horizon) {
                Membership::Out => return Membership::In,
                Membership::Unknown(u) => return Membership::Unknown(u),
                Membership::In => {}
            }
        }
        Membership::horizon(self.walk_h.min(horizon))
    }

    /// Is `z` in the stage input and in stratum `j` of this stage?
    fn in_stratum(&self, lvl: usize, st: &Stage, z: &Point, j: i128, horizon: u64) -> Membership {
        let m = self.membership_after(lvl, z, horizon);
        if !m.is_in() {
            return m;
        }
        match self.stratum_index(st, z) {
            Some(jz) => {
                if jz == j {
                    Membership::In
                } else {
                    Membership::Out
                }
            }
            None => Membership::stage_bound(0),
        }
    }

    fn stratum_index(&self, st: &Stage, z: &Point) -> Option<i128> {
        let fwd = self.sys.apply(&st.step, z).ok()?;
        self.sys.r_index_of(z, &fwd, self.j_max)
    }

    /// Aliveness of `y` at the moment stratum `j_ctx` of stage `t` is
    /// processed: `y` is in the stage input and, if its own stratum was
    /// processed earlier, it was not removed there. The removal question
    /// chains through strictly earlier strata, so it is resolved
    /// iteratively.
    fn alive_chain(&self, t: usize, j_ctx: i128, y: Point, horizon: u64) -> Membership {
        let st = &self.stages[t - 1];
        // Frames of points whose `removed` value equals the aliveness of
        // the next link's point.
        let mut frames: Vec<Point> = Vec::new();
        let mut ctx = j_ctx;
        let mut cur = y;
        let tail = loop {
            // Not in the stage input at all: dead (Out), Unknown taints.
            let m = self.membership_after(t - 1, &cur, horizon);
            if !m.is_in() {
                break m;
            }
            let jc = match self.stratum_index(st, &cur) {
                Some(j) => j,
                None => break Membership::stage_bound(0),
            };
            debug_assert!(jc != 0);
            if ord_of(jc) >= ord_of(ctx) {
                break Membership::In; // untouched when ctx was processed
            }
            if let Some(removed) = self.removed_memo[t - 1].get(&cur, horizon) {
                break removed.not();
            }
            // Walk cur's run forward to its exit.
            let mut end = cur.clone();
            let mut exit = None;
            let mut fault = None;
            for s in 1..=self.walk_h.min(horizon) {
                let next = match self.sys.apply(&st.step, &end) {
                    Ok(p) => p,
                    Err(_) => {
                        fault = Some(Membership::horizon(s));
                        break;
                    }
                };
                match self.in_stratum(t - 1, st, &next, jc, horizon) {
                    Membership::In => end = next,
                    Membership::Out => {
                        exit = Some(next);
                        break;
                    }
                    Membership::Unknown(u) => {
                        fault = Some(Membership::Unknown(u));
                        break;
                    }
                }
            }
            if let Some(f) = fault {
                break f;
            }
            let Some(exit) = exit else {
                break Membership::horizon(self.walk_h.min(horizon));
            };
            // removed(cur) = alive(exit) in the context of stratum jc.
            frames.push(cur);
            ctx = jc;
            cur = exit;
        };
        // Unwind: tail is the aliveness of the last link's exit point.
        let mut alive = tail;
        for p in frames.into_iter().rev() {
            let removed = alive;
            self.removed_memo[t - 1].put(p, horizon, removed);
            alive = removed.not();
        }
        alive
    }

    pub fn clear_memo(&self) {
        for m in self.after_memo.iter().chain(self.removed_memo.iter()) {
            m.clear();
        }
    }
}

struct SweepView {
    sweep: Arc<Sweep>,
    stage: usize,
}

impl StagedSet for SweepView {
    fn member(&self, x: &Point, horizon: u64) -> Membership {
        self.sweep.membership_after(self.stage, x, horizon)
    }

    fn certificate_seed(&self) -> Option<SetHandle> {
        Some(self.sweep.seed.clone())
    }

    fn clear_memo(&self) {
        self.sweep.clear_memo();
    }

    fn describe(&self) -> String {
        format!("sweep[{}/{}]", self.stage, self.sweep.stages.len())
    }
}

pub fn sweep_stage_handle(sweep: &Arc<Sweep>, stage: usize) -> SetHandle {
    SetHandle::staged(
        sweep.sys,
        Arc::new(SweepView {
            sweep: sweep.clone(),
            stage,
        }),
    )
}

/// One separation stage applied to an arbitrary base set: the returned
/// set is contained in the base and disjoint from its own `step` image
/// on resolved points.
pub fn separation_step(base: SetHandle, step: GroupWord, j_max: u64, walk_h: u64) -> SetHandle {
    assert!(!step.is_identity());
    let sys = base.system();
    let stage = Stage {
        target: vec![],
        versus: vec![],
        step,
    };
    let sweep = Sweep::new(sys, base, vec![stage], vec![], j_max, walk_h);
    sweep_stage_handle(&sweep, 1)
}

/// The 1D incarnation: the nested-refinement chain evaluated through the
/// first-return machinery. Level `t` of the chain plays the role of the
/// set whose first `t-1` translates are pairwise disjoint.
pub struct InducedChain {
    sys: SystemSpec,
    seed: SetHandle,
    refinements: Vec<SetHandle>,
    depth: u32,
    walk_h: u64,
    memos: Vec<MemoTable>,
}

impl InducedChain {
    fn membership(&self, level: u32, x: &Point, horizon: u64) -> Membership {
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
        let walker = self.sys.generators()[0];
        let ret = crate::sections::induced_next(
            self.sys,
            &walker,
            |p, h| self.membership(level - 1, p, h),
            x,
            self.walk_h.min(horizon),
        );
        match ret {
            Ok((y, _)) => fine.eval(&y, horizon).not(),
            Err(e) => match e {
                crate::sections::SectionError::HorizonExhausted { spent }
                | crate::sections::SectionError::WalkEscaped { spent } => {
                    Membership::horizon(spent)
                }
                crate::sections::SectionError::NotInSet => Membership::Out,
            },
        }
    }
}

struct ChainView {
    chain: Arc<InducedChain>,
    level: u32,
}

impl StagedSet for ChainView {
    fn member(&self, x: &Point, horizon: u64) -> Membership {
        self.chain.membership(self.level, x, horizon)
    }

    fn certificate_seed(&self) -> Option<SetHandle> {
        Some(self.chain.seed.clone())
    }

    fn clear_memo(&self) {
        for m in &self.chain.memos {
            m.clear();
        }
    }

    fn describe(&self) -> String {
        format!("chain1d[{}]", self.level)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SweepError {
    #[error("dimension of the bounds does not match the system")]
    DimensionMismatch,
    #[error("system provides no seed for this construction")]
    NoSeed,
}

enum Backing {
    Sweep(Arc<Sweep>),
    Chain(Arc<InducedChain>),
}

/// A constructed marker set: the final set of a sweep together with the
/// declared product words whose images are pairwise disjoint.
pub struct MarkerSet {
    pub sys: SystemSpec,
    pub bounds: Vec<u32>,
    backing: Backing,
}

impl MarkerSet {
    pub fn handle(&self) -> SetHandle {
        match &self.backing {
            Backing::Sweep(s) => sweep_stage_handle(s, s.stage_count()),
            Backing::Chain(c) => SetHandle::staged(
                c.sys,
                Arc::new(ChainView {
                    chain: c.clone(),
                    level: c.depth,
                }),
            ),
        }
    }

    /// Declared products: `T1^(k1) ... Td^(kd)` over the index set.
    pub fn product_words(&self) -> Vec<GroupWord> {
        IndexSet::new(&self.bounds)
            .tuples()
            .iter()
            .map(|t| GroupWord::from_exponents(t))
            .collect()
    }

    /// The set as it stands after the sweep finished a given target.
    pub fn handle_after_target(&self, target: &[i64]) -> Option<SetHandle> {
        match &self.backing {
            Backing::Sweep(s) => {
                let cut = s
                    .target_cuts
                    .iter()
                    .find(|(t, _)| t == target)
                    .map(|(_, c)| *c)?;
                Some(sweep_stage_handle(s, cut))
            }
            Backing::Chain(_) => None,
        }
    }

    pub fn sweep(&self) -> Option<&Arc<Sweep>> {
        match &self.backing {
            Backing::Sweep(s) => Some(s),
            Backing::Chain(_) => None,
        }
    }
}

/// Weak tower base for a free 2D action: the products `S^i T^j A` over
/// the index set are pairwise disjoint on resolved points.
pub fn weak_rokhlin_2d(
    sys: SystemSpec,
    n: u32,
    m: u32,
    seed: SetHandle,
    j_max: u64,
    walk_h: u64,
) -> Result<MarkerSet, SweepError> {
    if sys.dimension() != 2 {
        return Err(SweepError::DimensionMismatch);
    }
    Ok(build_sweep_marker(sys, &[n, m], seed, j_max, walk_h))
}

fn build_sweep_marker(
    sys: SystemSpec,
    bounds: &[u32],
    seed: SetHandle,
    j_max: u64,
    walk_h: u64,
) -> MarkerSet {
    let (stages, cuts) = build_stages(bounds);
    let sweep = Sweep::new(sys, seed, stages, cuts, j_max, walk_h);
    MarkerSet {
        sys,
        bounds: bounds.to_vec(),
        backing: Backing::Sweep(sweep),
    }
}

/// The d-dimensional sweep. For d = 1 the stratified machinery
/// degenerates (every stratum is the whole base for `R = S`), so the
/// marker chain evaluated through the first-return map is used instead.
pub fn weak_rokhlin_d(
    sys: SystemSpec,
    bounds: &[u32],
    seed: Option<SetHandle>,
    j_max: u64,
    walk_h: u64,
) -> Result<MarkerSet, SweepError> {
    if bounds.len() != sys.dimension() {
        return Err(SweepError::DimensionMismatch);
    }
    if bounds.len() == 1 {
        let seed = match seed {
            Some(s) => s,
            None => seed_1d(sys).ok_or(SweepError::NoSeed)?,
        };
        let depth = bounds[0];
        let refinements = (1..depth)
            .map(|l| refinement_1d(sys, l).ok_or(SweepError::NoSeed))
            .collect::<Result<Vec<_>, _>>()?;
        let chain = Arc::new(InducedChain {
            sys,
            seed,
            refinements,
            depth,
            walk_h,
            memos: (1..depth).map(|_| MemoTable::new()).collect(),
        });
        return Ok(MarkerSet {
            sys,
            bounds: bounds.to_vec(),
            backing: Backing::Chain(chain),
        });
    }
    let seed = match seed {
        Some(s) => s,
        None => crate::sets::seed_sweep(sys).ok_or(SweepError::NoSeed)?,
    };
    Ok(build_sweep_marker(sys, bounds, seed, j_max, walk_h))
}
