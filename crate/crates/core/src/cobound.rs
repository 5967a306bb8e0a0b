//! Tower partitions and the alternating-sum function they carry.
//!
//! A plan fixes, per level `r`, an even horizontal width `n_r`, a
//! strictly increasing vertical height `m_r`, and a decreasing positive
//! rational weight `alpha_r`, subject to two exact inequalities: the
//! heights must not outrun the weight tails
//! (`m_r * tail(alpha) <= 1`), and each level's mass must dominate the
//! accumulated mass below it (`m_r alpha_r >= 2r + sum alpha_t m_t`).
//! Level `r` carries the function that alternates `+alpha_r, -alpha_r`
//! along the horizontal direction of its tower and vanishes outside it.
//!
//! Widths are even so that every complete horizontal pass cancels; the
//! horizontal partial sums of the total function then stay bounded by
//! `sum alpha_r`, while vertical sums over `m_r` steps from the level-r
//! base grow like `m_r alpha_r` minus interference, which is measured
//! and reported rather than assumed.
//!
//! All arithmetic is exact rational.

use crate::defaults;
use crate::membership::{Membership, UnknownInfo};
use crate::point::Point;
use crate::sets::{Primitive, SetHandle};
use crate::sweep::{weak_rokhlin_2d, MarkerSet};
use crate::system::SystemSpec;
use crate::verify::VerificationReport;
use crate::word::GroupWord;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Serialize exact rationals as `p/q`.
pub fn rat_str(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelPlan {
    pub n: u32,
    pub m: u64,
    pub alpha: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequencePlan {
    pub levels: Vec<LevelPlan>,
    /// Formal extension `alpha_(R+1)`, so the tail rule
    /// `sum_(s>r) alpha_s <= 2 alpha_(r+1)` covers the genuine infinite
    /// tail for every r up to and including R.
    pub tail_alpha: BigRational,
}

impl SequencePlan {
    pub fn r_max(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn level(&self, r: u32) -> &LevelPlan {
        &self.levels[(r - 1) as usize]
    }

    /// `2 * alpha_(r+1)`: upper bound for `sum_(s>r) alpha_s` under the
    /// halving convention, valid beyond the truncation.
    pub fn tail_bound(&self, r: u32) -> BigRational {
        let next = if r < self.r_max() {
            self.level(r + 1).alpha.clone()
        } else {
            self.tail_alpha.clone()
        };
        next * BigRational::from_integer(2.into())
    }
}

/// Canonical plan: `alpha_1 = 1/4`; each `m_r` is the least integer
/// above `m_(r-1)` satisfying the mass inequality; each next weight is
/// `min(alpha_r / 2, 1/(2 m_r))`; widths are `n_r = 2r`.
pub fn synthesize_sequences(r_max: u32) -> SequencePlan {
    assert!(r_max >= 1);
    let mut levels: Vec<LevelPlan> = Vec::new();
    let mut alpha = rat(1, 4);
    let mut mass_below = BigRational::zero();
    let mut prev_m: u64 = 0;
    for r in 1..=r_max {
        let rhs = BigRational::from_integer((2 * r as i64).into()) + &mass_below;
        let needed = (&rhs / &alpha).ceil().to_integer();
        let m = u64::try_from(&needed).unwrap_or(0).max(prev_m + 1);
        let level = LevelPlan {
            n: 2 * r,
            m,
            alpha: alpha.clone(),
        };
        mass_below += &level.alpha * BigRational::from_integer(m.into());
        let half = &alpha / BigRational::from_integer(2.into());
        let inv = BigRational::new(BigInt::one(), BigInt::from(2 * m));
        alpha = if half <= inv { half } else { inv };
        prev_m = m;
        levels.push(level);
    }
    SequencePlan {
        levels,
        tail_alpha: alpha,
    }
}

/// Exact check of both plan inequalities; slack is reported per level,
/// violations become findings.
pub fn validate_sequences(plan: &SequencePlan) -> VerificationReport {
    let mut report = VerificationReport::new(
        "sequence-plan",
        serde_json::json!({ "r_max": plan.r_max() }),
    );
    let one = BigRational::one();
    for r in 1..=plan.r_max() {
        let lv = plan.level(r);
        let m_r = BigRational::from_integer(lv.m.into());
        // Height/tail inequality via the tail rule.
        let tail_term = &m_r * plan.tail_bound(r);
        let slack = &one - &tail_term;
        report.stat(&format!("tail_slack_r{r}"), rat_str(&slack));
        if slack.is_negative() {
            report.pass = false;
            report.finding(format!(
                "height/tail inequality fails at r={r}: m_r*tail = {}",
                rat_str(&tail_term)
            ));
        }
        // Mass-domination inequality (r = 1 uses the m1*alpha1 >= 2
        // convention).
        let mass: BigRational = (1..r)
            .map(|t| {
                let l = plan.level(t);
                &l.alpha * BigRational::from_integer(l.m.into())
            })
            .sum();
        let lhs = &m_r * &lv.alpha;
        let rhs = BigRational::from_integer((2 * r as i64).into()) + mass;
        let slack = &lhs - &rhs;
        report.stat(&format!("mass_slack_r{r}"), rat_str(&slack));
        if slack.is_negative() {
            report.pass = false;
            report.finding(format!(
                "mass inequality fails at r={r}: {} < {}",
                rat_str(&lhs),
                rat_str(&rhs)
            ));
        }
        // Structural constraints.
        if !lv.n.is_multiple_of(2) {
            report.pass = false;
            report.finding(format!("width n_{r} = {} is odd", lv.n));
        }
        if r >= 2 {
            let prev = plan.level(r - 1);
            if lv.m <= prev.m {
                report.pass = false;
                report.finding(format!("heights not increasing at r={r}"));
            }
            let half = &prev.alpha / BigRational::from_integer(2.into());
            if lv.alpha > half {
                report.pass = false;
                report.finding(format!("weights do not halve at r={r}"));
            }
        }
        report.resolved += 2;
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellOutcome {
    Cell(u32, u64),
    Outside,
    Unknown(UnknownInfo),
}

/// Structural fast path: a tower whose base is exactly the congruence
/// `a = 0 (mod ma), b = 0 (mod mb)` locates cells by residue.
#[derive(Debug, Clone, Copy)]
struct CongruenceCells {
    ma: i64,
    mb: i64,
}

pub struct TowerPlan {
    pub level: u32,
    pub n: u32,
    pub m: u64,
    pub alpha: BigRational,
    pub base: SetHandle,
    marker: MarkerSet,
    fast: Option<CongruenceCells>,
}

impl TowerPlan {
    pub fn marker(&self) -> &MarkerSet {
        &self.marker
    }

    /// The unique cell `(i, j)` of the tower containing `x`, if any.
    pub fn cell_of(&self, x: &Point, horizon: u64) -> CellOutcome {
        if let (Some(f), Point::Lattice { a, b, .. }) = (self.fast, x) {
            let ra = a.rem_euclid(f.ma);
            let rb = b.rem_euclid(f.mb);
            return if ra < self.n as i64 && rb < self.m as i64 {
                CellOutcome::Cell(ra as u32, rb as u64)
            } else {
                CellOutcome::Outside
            };
        }
        let sys = self.base.system();
        let mut unknown = None;
        for i in 0..self.n {
            for j in 0..self.m {
                let w = GroupWord::st(-(i as i64), -(j as i64));
                let y = match sys.apply(&w, x) {
                    Ok(p) => p,
                    Err(_) => continue,
                };
                match self.base.eval(&y, horizon) {
                    Membership::In => return CellOutcome::Cell(i, j),
                    Membership::Unknown(u) => unknown = Some(u),
                    Membership::Out => {}
                }
            }
        }
        match unknown {
            Some(u) => CellOutcome::Unknown(u),
            None => CellOutcome::Outside,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("tower level {level}: cell membership unresolved")]
    UnknownCell { level: u32, info: UnknownInfo },
    #[error("unsupported system for towers")]
    UnsupportedSystem,
    #[error("plan level {level} is too large to materialize (m = {m})")]
    PlanTooLarge { level: u32, m: u64 },
}

pub struct TowerSet {
    pub sys: SystemSpec,
    pub plan: SequencePlan,
    pub towers: Vec<TowerPlan>,
}

/// Build one tower per plan level over a 2D lattice system. Each base is
/// an independent sweep invocation seeded with the doubled congruence
/// `(2 n_r, 2 m_r)`, which provably separates every in-range difference
/// word: all stages certify as the identity and the base coincides with
/// the seed, keeping membership O(1) at any plan size. The doubling
/// leaves three quarters of the plane outside the tower, so points
/// outside all towers exist at every level.
pub fn build_towers(sys: SystemSpec, plan: &SequencePlan) -> Result<TowerSet, EvalError> {
    if !matches!(sys, SystemSpec::LabeledLattice { .. }) {
        return Err(EvalError::UnsupportedSystem);
    }
    let mut towers = Vec::new();
    for (idx, lv) in plan.levels.iter().enumerate() {
        if lv.m > 1 << 20 {
            return Err(EvalError::PlanTooLarge {
                level: idx as u32 + 1,
                m: lv.m,
            });
        }
        let ma = 2 * lv.n as i64;
        let mb = 2 * lv.m as i64;
        let seed = SetHandle::primitive(
            sys,
            Primitive::Congruence2 {
                ma,
                ra: 0,
                mb,
                rb: 0,
            },
        );
        let marker = weak_rokhlin_2d(
            sys,
            lv.n,
            lv.m as u32,
            seed,
            defaults::JMAX_NONLATTICE as u64,
            defaults::WALK_HORIZON_1D,
        )
        .map_err(|_| EvalError::UnsupportedSystem)?;
        let fast = marker
            .sweep()
            .filter(|s| s.all_identity())
            .map(|_| CongruenceCells { ma, mb });
        towers.push(TowerPlan {
            level: idx as u32 + 1,
            n: lv.n,
            m: lv.m,
            alpha: lv.alpha.clone(),
            base: marker.handle(),
            marker,
            fast,
        });
    }
    Ok(TowerSet {
        sys,
        plan: plan.clone(),
        towers,
    })
}

impl TowerSet {
    /// Level contribution at a point: `(-1)^i alpha_r` in cell `(i, j)`,
    /// zero outside the tower.
    pub fn f_level(&self, r: u32, x: &Point, horizon: u64) -> Result<BigRational, EvalError> {
        let tw = &self.towers[(r - 1) as usize];
        match tw.cell_of(x, horizon) {
            CellOutcome::Cell(i, _) => {
                if i % 2 == 0 {
                    Ok(tw.alpha.clone())
                } else {
                    Ok(-tw.alpha.clone())
                }
            }
            CellOutcome::Outside => Ok(BigRational::zero()),
            CellOutcome::Unknown(info) => Err(EvalError::UnknownCell {
                level: tw.level,
                info,
            }),
        }
    }

    /// Total function: the sum of every level contribution.
    pub fn f_eval(&self, x: &Point, horizon: u64) -> Result<BigRational, EvalError> {
        let mut acc = BigRational::zero();
        for r in 1..=self.plan.r_max() {
            acc += self.f_level(r, x, horizon)?;
        }
        Ok(acc)
    }

    /// Exact bound for horizontal partial sums: the sum of the weights.
    pub fn horizontal_bound(&self) -> BigRational {
        self.plan.levels.iter().map(|l| l.alpha.clone()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepDirection {
    Horizontal,
    Vertical,
}

impl SweepDirection {
    pub fn word(self) -> GroupWord {
        match self {
            SweepDirection::Horizontal => GroupWord::s(1),
            SweepDirection::Vertical => GroupWord::t(1),
        }
    }

    pub fn letter(self) -> char {
        match self {
            SweepDirection::Horizontal => 'S',
            SweepDirection::Vertical => 'T',
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PartialSumReport {
    pub direction: char,
    pub start: String,
    pub requested_len: u64,
    pub resolved_len: u64,
    #[serde(serialize_with = "ser_rat")]
    pub min: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub max: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub final_sum: BigRational,
    #[serde(serialize_with = "ser_rat_vec")]
    pub per_level_final: Vec<BigRational>,
    /// Set when the walk hit an unresolved cell; the report covers the
    /// prefix before it.
    pub truncated: Option<String>,
    /// Running sums with the levels contributing at each step, kept when
    /// a trace is requested.
    pub trace: Option<Vec<TraceEntry>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub step: u64,
    pub numer: String,
    pub denom: String,
    pub levels: String,
}

fn ser_rat<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rat_str(r))
}

fn ser_rat_vec<S: serde::Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for r in v {
        seq.serialize_element(&rat_str(r))?;
    }
    seq.end()
}

/// Running sums `sum_(k<n) f(g^k x)` for `n <= len`, exact, with extrema
/// and per-level attribution.
pub fn partial_sums(
    towers: &TowerSet,
    x: &Point,
    direction: SweepDirection,
    len: u64,
    horizon: u64,
    keep_trace: bool,
) -> PartialSumReport {
    let word = direction.word();
    let levels = towers.plan.r_max();
    let mut report = PartialSumReport {
        direction: direction.letter(),
        start: x.to_string(),
        requested_len: len,
        resolved_len: 0,
        min: BigRational::zero(),
        max: BigRational::zero(),
        final_sum: BigRational::zero(),
        per_level_final: vec![BigRational::zero(); levels as usize],
        truncated: None,
        trace: if keep_trace { Some(Vec::new()) } else { None },
    };
    let mut y = x.clone();
    let mut sum = BigRational::zero();
    for step in 0..len {
        let mut step_total = BigRational::zero();
        let mut step_levels = vec![BigRational::zero(); levels as usize];
        let mut fault = None;
        let mut touched: Vec<String> = Vec::new();
        for r in 1..=levels {
            match towers.f_level(r, &y, horizon) {
                Ok(v) => {
                    if !v.is_zero() {
                        touched.push(r.to_string());
                    }
                    step_levels[(r - 1) as usize] = v.clone();
                    step_total += v;
                }
                Err(e) => {
                    fault = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = fault {
            // Drop the partially evaluated step so the attribution still
            // sums to the final value exactly.
            report.truncated = Some(format!("step {step}: {e}"));
            break;
        }
        for (acc, v) in report.per_level_final.iter_mut().zip(step_levels) {
            *acc += v;
        }
        sum += step_total;
        if sum < report.min {
            report.min = sum.clone();
        }
        if sum > report.max {
            report.max = sum.clone();
        }
        if let Some(trace) = report.trace.as_mut() {
            trace.push(TraceEntry {
                step,
                numer: sum.numer().to_string(),
                denom: sum.denom().to_string(),
                levels: if touched.is_empty() {
                    "-".to_string()
                } else {
                    touched.join("+")
                },
            });
        }
        report.resolved_len = step + 1;
        y = match towers.sys.apply(&word, &y) {
            Ok(p) => p,
            Err(_) => {
                report.truncated = Some(format!("step {step}: walk left admissible range"));
                break;
            }
        };
    }
    report.final_sum = sum;
    report
}

/// Transfer candidate for the horizontal direction:
/// `g(x) = max over 1 <= n <= len of the horizontal partial sums`.
/// `stabilized` records whether the running maximum stayed put over the
/// final quarter of the walk (a reporting device, not a proof).
pub fn transfer_g(
    towers: &TowerSet,
    x: &Point,
    len: u64,
    horizon: u64,
) -> Result<(BigRational, bool), EvalError> {
    let word = GroupWord::s(1);
    let mut y = x.clone();
    let mut sum = BigRational::zero();
    let mut best: Option<BigRational> = None;
    let mut last_improvement = 1u64;
    for n in 1..=len {
        sum += towers.f_eval(&y, horizon)?;
        match &best {
            Some(b) if &sum <= b => {}
            _ => {
                best = Some(sum.clone());
                last_improvement = n;
            }
        }
        y = towers
            .sys
            .apply(&word, &y)
            .map_err(|_| EvalError::UnsupportedSystem)?;
    }
    let best = best.expect("len >= 1");
    let stabilized = last_improvement <= len - len / 4;
    Ok((best, stabilized))
}

#[derive(Debug, Clone, Serialize)]
pub struct InterferenceEntry {
    pub level: u32,
    #[serde(serialize_with = "ser_rat")]
    pub measured: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub cap: BigRational,
    pub within_cap: bool,
}

/// The three-term split of a vertical sum over `m_r` steps from a
/// level-r base point: the level's own term (exactly `m_r alpha_r` when
/// the base column carries constant sign), the measured interference
/// from lower levels against their caps `alpha_t m_t`, and from higher
/// levels against `alpha_s m_r`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub level: u32,
    pub start: String,
    #[serde(serialize_with = "ser_rat")]
    pub main_term: BigRational,
    pub main_constant_sign: bool,
    pub lower: Vec<InterferenceEntry>,
    pub upper: Vec<InterferenceEntry>,
    #[serde(serialize_with = "ser_rat")]
    pub guaranteed: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub measured_total_abs: BigRational,
}

pub fn bound_decomposition(
    towers: &TowerSet,
    x: &Point,
    r: u32,
    horizon: u64,
) -> Result<BoundReport, EvalError> {
    let lv = towers.plan.level(r);
    let m_r = lv.m;
    let levels = towers.plan.r_max();
    let word = GroupWord::t(1);
    let mut per_level = vec![BigRational::zero(); levels as usize];
    let mut signs_constant = true;
    let mut first_sign: Option<bool> = None;
    let mut y = x.clone();
    for _ in 0..m_r {
        for s in 1..=levels {
            let v = towers.f_level(s, &y, horizon)?;
            if s == r && !v.is_zero() {
                let positive = v.is_positive();
                match first_sign {
                    None => first_sign = Some(positive),
                    Some(fs) if fs != positive => signs_constant = false,
                    _ => {}
                }
            }
            per_level[(s - 1) as usize] += v;
        }
        y = towers
            .sys
            .apply(&word, &y)
            .map_err(|_| EvalError::UnsupportedSystem)?;
    }
    let main_term = per_level[(r - 1) as usize].clone();
    let mut lower = Vec::new();
    for t in 1..r {
        let lt = towers.plan.level(t);
        let cap = &lt.alpha * BigRational::from_integer(lt.m.into());
        let measured = per_level[(t - 1) as usize].abs();
        lower.push(InterferenceEntry {
            level: t,
            within_cap: measured <= cap,
            measured,
            cap,
        });
    }
    let mut upper = Vec::new();
    for s in (r + 1)..=levels {
        let ls = towers.plan.level(s);
        let cap = &ls.alpha * BigRational::from_integer(m_r.into());
        let measured = per_level[(s - 1) as usize].abs();
        upper.push(InterferenceEntry {
            level: s,
            within_cap: measured <= cap,
            measured,
            cap,
        });
    }
    // Guaranteed lower bound with the truncated tail: the dropped part
    // of the infinite tail only strengthens it.
    let mut guaranteed = &lv.alpha * BigRational::from_integer(m_r.into());
    for e in &lower {
        guaranteed -= &e.cap;
    }
    for e in &upper {
        guaranteed -= &e.cap;
    }
    let measured_total_abs = per_level.iter().sum::<BigRational>().abs();
    Ok(BoundReport {
        level: r,
        start: x.to_string(),
        main_term,
        main_constant_sign: signs_constant,
        lower,
        upper,
        guaranteed,
        measured_total_abs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_plan_values() {
        let plan = synthesize_sequences(3);
        assert_eq!(plan.level(1).m, 8);
        assert_eq!(plan.level(2).m, 96);
        assert_eq!(plan.level(3).m, 2688);
        assert_eq!(plan.level(1).alpha, rat(1, 4));
        assert_eq!(plan.level(2).alpha, rat(1, 16));
        assert_eq!(plan.level(3).alpha, rat(1, 192));
        assert_eq!(
            plan.levels.iter().map(|l| l.n).collect::<Vec<_>>(),
            vec![2, 4, 6]
        );
        assert!(validate_sequences(&plan).pass);
    }

    #[test]
    fn tail_equality_boundary() {
        // m_1 * 2 alpha_2 = 8 * 1/8 = 1: the inequality is tight.
        let plan = synthesize_sequences(3);
        let term = BigRational::from_integer(plan.level(1).m.into()) * plan.tail_bound(1);
        assert_eq!(term, BigRational::one());
    }

    #[test]
    fn mutations_are_caught() {
        let base = synthesize_sequences(3);
        for r in 0..3 {
            let mut halved = base.clone();
            halved.levels[r].m /= 2;
            assert!(
                !validate_sequences(&halved).pass,
                "halving m_{} must fail",
                r + 1
            );
            let mut doubled = base.clone();
            doubled.levels[r].alpha = &base.levels[r].alpha * BigRational::from_integer(2.into());
            assert!(
                !validate_sequences(&doubled).pass,
                "doubling alpha_{} must fail",
                r + 1
            );
        }
    }

    #[test]
    fn plans_validate_up_to_eight() {
        for r_max in 1..=8 {
            let plan = synthesize_sequences(r_max);
            let rep = validate_sequences(&plan);
            assert!(rep.pass, "plan r_max={r_max}: {:?}", rep.findings);
        }
    }

    #[test]
    fn horizontal_bound_value() {
        let plan = synthesize_sequences(3);
        let towers = build_towers(SystemSpec::LabeledLattice { labels: 1 }, &plan).unwrap();
        assert_eq!(towers.horizontal_bound(), rat(61, 192));
    }

    #[test]
    fn tower_cells_and_f_values() {
        let plan = synthesize_sequences(3);
        let sys = SystemSpec::LabeledLattice { labels: 1 };
        let towers = build_towers(sys, &plan).unwrap();
        let h = 1 << 12;
        // Base point: in cell (0,0) of every tower, f = sum of weights.
        let origin = Point::lattice(0, 0, 0);
        assert_eq!(towers.f_eval(&origin, h).unwrap(), rat(61, 192));
        // One step right of the base of tower 1: cell (1, j); the other
        // towers see column 1 as well.
        let x = Point::lattice(0, 1, 0);
        assert_eq!(
            towers.f_level(1, &x, h).unwrap(),
            -rat(1, 4),
            "column 1 carries the negative sign"
        );
        // Outside every tower.
        let far = Point::lattice(0, 3, 17);
        assert_eq!(towers.f_level(1, &far, h).unwrap(), BigRational::zero());
        // Generic scan agrees with the congruence fast path.
        let tw = &towers.towers[0];
        for a in -6..6 {
            for b in -20..20 {
                let p = Point::lattice(0, a, b);
                let fast = tw.cell_of(&p, h);
                let slow = slow_cell(tw, &p, h);
                assert_eq!(fast, slow, "cell mismatch at ({a},{b})");
            }
        }
    }

    fn slow_cell(tw: &TowerPlan, x: &Point, h: u64) -> CellOutcome {
        let sys = tw.base.system();
        for i in 0..tw.n {
            for j in 0..tw.m {
                let w = GroupWord::st(-(i as i64), -(j as i64));
                if let Ok(y) = sys.apply(&w, x) {
                    if tw.base.eval(&y, h).is_in() {
                        return CellOutcome::Cell(i, j);
                    }
                }
            }
        }
        CellOutcome::Outside
    }

    #[test]
    fn pointwise_values_at_single_tower_points() {
        let plan = synthesize_sequences(3);
        let sys = SystemSpec::LabeledLattice { labels: 1 };
        let towers = build_towers(sys, &plan).unwrap();
        let h = 1 << 12;
        // Column 6 misses every tower: 6 mod 4 = 2, 6 mod 8 = 6,
        // 6 mod 12 = 6 all land in the padding.
        let outside = Point::lattice(0, 6, 0);
        assert!(towers.f_eval(&outside, h).unwrap().is_zero());
        // Column 14 is only inside the third tower (14 mod 12 = 2).
        let only3 = Point::lattice(0, 14, 0);
        assert_eq!(towers.f_eval(&only3, h).unwrap(), rat(1, 192));
        // Column 21, row 0: cell (1, j) of tower 1 and nothing else.
        let only1 = Point::lattice(0, 21, 0);
        assert_eq!(towers.f_eval(&only1, h).unwrap(), -rat(1, 4));
    }

    #[test]
    fn sums_from_outside_rows_vanish() {
        let plan = synthesize_sequences(3);
        let sys = SystemSpec::LabeledLattice { labels: 1 };
        let towers = build_towers(sys, &plan).unwrap();
        let h = 1 << 12;
        // Row 2872 lies in the padding band of every tower, so the whole
        // horizontal orbit misses them and every sum is zero.
        let x = Point::lattice(0, 5, 2872);
        let ps = partial_sums(&towers, &x, SweepDirection::Horizontal, 64, h, false);
        assert!(ps.final_sum.is_zero() && ps.min.is_zero() && ps.max.is_zero());
        let (g, stabilized) = transfer_g(&towers, &x, 256, h).unwrap();
        assert!(g.is_zero() && stabilized);
        // Telescoping with g = 0 on the whole walk forces f = 0.
        assert!(towers.f_eval(&x, h).unwrap().is_zero());
    }

    #[test]
    fn transfer_max_attained_at_first_step() {
        let plan = synthesize_sequences(3);
        let sys = SystemSpec::LabeledLattice { labels: 1 };
        let towers = build_towers(sys, &plan).unwrap();
        let h = 1 << 12;
        // Column 20 is cell (0, _) of tower 1 only; row 2976 keeps the
        // walk outside towers 2 and 3, so the pattern from here is
        // +1/4, -1/4, 0, 0 repeating and the maximum is hit at n = 1.
        let x = Point::lattice(0, 20, 2976);
        assert_eq!(towers.f_eval(&x, h).unwrap(), rat(1, 4));
        let (g, stabilized) = transfer_g(&towers, &x, 512, h).unwrap();
        assert!(stabilized);
        assert_eq!(g, rat(1, 4));
    }

    #[test]
    fn vertical_sum_from_level2_base_meets_its_bound() {
        let plan = synthesize_sequences(3);
        let sys = SystemSpec::LabeledLattice { labels: 1 };
        let towers = build_towers(sys, &plan).unwrap();
        let h = 1 << 12;
        let x = Point::lattice(0, 0, 0);
        let m2 = plan.level(2).m;
        let ps = partial_sums(&towers, &x, SweepDirection::Vertical, m2, h, false);
        assert!(ps.truncated.is_none());
        // The level-2 column contributes exactly m_2 alpha_2 = 6.
        assert_eq!(ps.per_level_final[1], rat(6, 1));
        assert!(
            ps.final_sum.abs() >= rat(2, 1),
            "sum {}",
            rat_str(&ps.final_sum)
        );
        // The final sum is exactly the sum of the level attributions.
        assert_eq!(ps.final_sum, ps.per_level_final.iter().sum::<BigRational>());
    }

    #[test]
    fn bound_decomposition_shapes() {
        let plan = synthesize_sequences(3);
        let sys = SystemSpec::LabeledLattice { labels: 1 };
        let towers = build_towers(sys, &plan).unwrap();
        let h = 1 << 12;
        let x = Point::lattice(0, 0, 0);
        let bd1 = bound_decomposition(&towers, &x, 1, h).unwrap();
        assert!(bd1.lower.is_empty(), "no lower levels at r = 1");
        assert_eq!(bd1.upper.len(), 2);
        assert!(bd1.main_constant_sign);
        assert_eq!(bd1.main_term, rat(2, 1));
        let bd2 = bound_decomposition(&towers, &x, 2, h).unwrap();
        assert_eq!(bd2.lower.len(), 1);
        assert_eq!(bd2.main_term, rat(6, 1));
        // Guaranteed bound from the truncated tail: 6 - 2 - 1/2 = 7/2.
        assert_eq!(bd2.guaranteed, rat(7, 2));
    }

    #[test]
    fn row_sums_cancel_on_even_widths() {
        let plan = synthesize_sequences(2);
        let sys = SystemSpec::LabeledLattice { labels: 1 };
        let towers = build_towers(sys, &plan).unwrap();
        let h = 1 << 12;
        for r in 1..=2u32 {
            let lv = towers.plan.level(r);
            let mut y = Point::lattice(0, 0, 0);
            let mut sum = BigRational::zero();
            let mut prefix_ok = true;
            for i in 0..lv.n {
                sum += towers.f_level(r, &y, h).unwrap();
                let expect = if i % 2 == 0 {
                    lv.alpha.clone()
                } else {
                    BigRational::zero()
                };
                prefix_ok &= sum == expect;
                y = towers.sys.apply(&GroupWord::s(1), &y).unwrap();
            }
            assert!(prefix_ok, "row prefix pattern broken at level {r}");
            assert!(sum.is_zero(), "full row must cancel at level {r}");
        }
    }
}
