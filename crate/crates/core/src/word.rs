//! Elements of the acting group.
//!
//! A word is either an exponent vector over the declared generators
//! (`ST(p, q)` meaning "p steps of the first generator, q of the second")
//! or an integer power of the system's orbit generator `R`. The generator
//! action is abelian, so composition adds exponent vectors.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupWord {
    /// S^p T^q for 1D and 2D systems (q must be 0 on 1D systems).
    ST { p: i64, q: i64 },
    /// T1^p T2^q T3^u for the 3D lattice.
    ST3 { p: i64, q: i64, u: i64 },
    /// R^k for a system with a declared orbit generator.
    RPow(i128),
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WordError {
    #[error("words act on different generator sets and cannot be composed")]
    Mixed,
}

impl GroupWord {
    pub fn identity_2d() -> Self {
        GroupWord::ST { p: 0, q: 0 }
    }

    pub fn s(p: i64) -> Self {
        GroupWord::ST { p, q: 0 }
    }

    pub fn t(q: i64) -> Self {
        GroupWord::ST { p: 0, q }
    }

    pub fn st(p: i64, q: i64) -> Self {
        GroupWord::ST { p, q }
    }

    pub fn is_identity(&self) -> bool {
        match *self {
            GroupWord::ST { p, q } => p == 0 && q == 0,
            GroupWord::ST3 { p, q, u } => p == 0 && q == 0 && u == 0,
            GroupWord::RPow(k) => k == 0,
        }
    }

    pub fn inverse(&self) -> Self {
        match *self {
            GroupWord::ST { p, q } => GroupWord::ST { p: -p, q: -q },
            GroupWord::ST3 { p, q, u } => GroupWord::ST3 {
                p: -p,
                q: -q,
                u: -u,
            },
            GroupWord::RPow(k) => GroupWord::RPow(-k),
        }
    }

    /// `self ∘ other`: apply `other` first. The action is abelian, so the
    /// exponents simply add.
    pub fn compose(&self, other: &Self) -> Result<Self, WordError> {
        match (*self, *other) {
            (GroupWord::ST { p, q }, GroupWord::ST { p: p2, q: q2 }) => Ok(GroupWord::ST {
                p: p + p2,
                q: q + q2,
            }),
            (
                GroupWord::ST3 { p, q, u },
                GroupWord::ST3 {
                    p: p2,
                    q: q2,
                    u: u2,
                },
            ) => Ok(GroupWord::ST3 {
                p: p + p2,
                q: q + q2,
                u: u + u2,
            }),
            (GroupWord::RPow(a), GroupWord::RPow(b)) => Ok(GroupWord::RPow(a + b)),
            _ => Err(WordError::Mixed),
        }
    }

    /// Exponent vector for generator words, `None` for `RPow`.
    pub fn exponents(&self) -> Option<Vec<i64>> {
        match *self {
            GroupWord::ST { p, q } => Some(vec![p, q]),
            GroupWord::ST3 { p, q, u } => Some(vec![p, q, u]),
            GroupWord::RPow(_) => None,
        }
    }

    /// Generator word from an exponent vector of dimension 1, 2, or 3.
    pub fn from_exponents(exps: &[i64]) -> Self {
        match exps {
            [p] => GroupWord::ST { p: *p, q: 0 },
            [p, q] => GroupWord::ST { p: *p, q: *q },
            [p, q, u] => GroupWord::ST3 {
                p: *p,
                q: *q,
                u: *u,
            },
            _ => panic!("unsupported exponent dimension {}", exps.len()),
        }
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GroupWord::ST { p, q } => write!(f, "st({p},{q})"),
            GroupWord::ST3 { p, q, u } => write!(f, "st3({p},{q},{u})"),
            GroupWord::RPow(k) => write!(f, "r({k})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_adds_exponents() {
        let a = GroupWord::st(2, -1);
        let b = GroupWord::st(-2, 4);
        assert_eq!(a.compose(&b).unwrap(), GroupWord::st(0, 3));
        assert_eq!(a.compose(&a.inverse()).unwrap(), GroupWord::identity_2d());
    }

    #[test]
    fn mixed_composition_rejected() {
        assert_eq!(
            GroupWord::s(1).compose(&GroupWord::RPow(1)),
            Err(WordError::Mixed)
        );
    }
}
