//! Default budgets and representation bounds.
//!
//! Every orbit walk, stratum search, and membership scan is bounded by an
//! explicit step budget. The constants here are the shipped defaults; all
//! entry points accept overrides.

/// Default walk horizon for line and odometer systems: 2^14 orbit steps
/// per query. Marker gaps at the shipped depths stay below 2^6, so this
/// leaves two orders of magnitude of margin.
pub const WALK_HORIZON_1D: u64 = 1 << 14;

/// Default stratum-index bound for non-lattice systems.
pub const JMAX_NONLATTICE: i128 = 1 << 12;

/// Walk horizon for a lattice window of radius `w`: 4*(2w+1)^2 steps.
/// The orbit-generator index of any point within the window is bounded by
/// the square of the window side, so this covers every in-window walk.
pub fn lattice_horizon(w: i64) -> u64 {
    let side = 2 * w.unsigned_abs() + 1;
    4 * side * side
}

/// Stratum-index bound matching [`lattice_horizon`].
pub fn lattice_jmax(w: i64) -> i128 {
    lattice_horizon(w) as i128
}

/// Walk horizon for the 3D lattice: the composed index bijection grows
/// with the fourth power of the coordinates, so a window of radius `w`
/// needs 16*(w+3)^4 steps to cover in-window index differences.
pub fn lattice3_horizon(w: i64) -> u64 {
    let s = w.unsigned_abs() + 3;
    16 * s * s * s * s
}

/// Stratum-index bound matching [`lattice3_horizon`].
pub fn lattice3_jmax(w: i64) -> i128 {
    lattice3_horizon(w) as i128
}

/// Admissible coordinate range for 2D lattice points. Spiral indices grow
/// quadratically in the coordinates; this bound keeps them inside i128
/// with a wide margin.
pub const LATTICE_COORD_BOUND: i64 = 1 << 30;

/// Admissible coordinate range for the 3D lattice. The composed index
/// bijection grows with the fourth power of the coordinates.
pub const LATTICE3_COORD_BOUND: i64 = 1 << 28;
