//! Tri-state membership answers for lazily evaluated sets.
//!
//! A query either resolves (`In` / `Out`) or reports `Unknown` together
//! with the reason and the budget it spent. Resolved answers are
//! budget-monotone: a query that resolves at horizon `h` resolves
//! identically at every horizon `>= h`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnknownReason {
    /// An orbit walk or scan ran out of steps.
    HorizonExhausted,
    /// A stratum index exceeded the configured bound.
    StageBoundExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnknownInfo {
    pub reason: UnknownReason,
    /// Steps spent before giving up.
    pub spent: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    In,
    Out,
    Unknown(UnknownInfo),
}

impl Membership {
    pub fn unknown(reason: UnknownReason, spent: u64) -> Self {
        Membership::Unknown(UnknownInfo { reason, spent })
    }

    pub fn horizon(spent: u64) -> Self {
        Self::unknown(UnknownReason::HorizonExhausted, spent)
    }

    pub fn stage_bound(spent: u64) -> Self {
        Self::unknown(UnknownReason::StageBoundExceeded, spent)
    }

    pub fn is_in(self) -> bool {
        self == Membership::In
    }

    pub fn is_out(self) -> bool {
        self == Membership::Out
    }

    pub fn is_resolved(self) -> bool {
        !matches!(self, Membership::Unknown(_))
    }

    /// Kleene negation: resolved answers flip, `Unknown` stays.
    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        match self {
            Membership::In => Membership::Out,
            Membership::Out => Membership::In,
            u => u,
        }
    }

    /// Kleene conjunction: `Out` dominates, `Unknown` otherwise taints.
    pub fn and(self, other: Self) -> Self {
        match (self, other) {
            (Membership::Out, _) | (_, Membership::Out) => Membership::Out,
            (Membership::In, Membership::In) => Membership::In,
            (Membership::Unknown(u), _) | (_, Membership::Unknown(u)) => Membership::Unknown(u),
        }
    }

    /// Kleene disjunction: `In` dominates.
    pub fn or(self, other: Self) -> Self {
        match (self, other) {
            (Membership::In, _) | (_, Membership::In) => Membership::In,
            (Membership::Out, Membership::Out) => Membership::Out,
            (Membership::Unknown(u), _) | (_, Membership::Unknown(u)) => Membership::Unknown(u),
        }
    }
}
