//! Executable constructions on computable dynamical systems: nested
//! marker levels for single automorphisms, staged tower bases for free
//! multidimensional actions, and the exact-rational alternating-sum
//! function whose horizontal partial sums stay bounded while its
//! vertical sums grow.
//!
//! Every constructed set is a lazily evaluated, memoized membership
//! procedure with tri-state answers under explicit step budgets. All
//! conclusions are re-verified empirically on windows and samples, with
//! Unknown answers tallied rather than silently dropped.

pub mod cobound;
pub mod defaults;
pub mod expr;
pub mod markers1d;
pub mod membership;
mod memo;
pub mod point;
pub mod sample;
pub mod sections;
pub mod sets;
pub mod spiral;
pub mod sweep;
pub mod system;
pub mod verify;
pub mod word;

pub use membership::{Membership, UnknownInfo, UnknownReason};
pub use point::{OdoPoint, Point};
pub use sets::{Primitive, SetHandle};
pub use system::SystemSpec;
pub use verify::VerificationReport;
pub use word::GroupWord;
