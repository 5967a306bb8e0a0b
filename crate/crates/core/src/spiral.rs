//! Doubly infinite spiral enumeration of the lattice.
//!
//! `index_to_point` / `point_to_index` form a bijection between the
//! integers and the 2D lattice in which consecutive indices land on
//! adjacent points. Index 0 sits at the origin; the positive arm walks a
//! counterclockwise square spiral starting with `1 -> (1,0)`; the negative
//! arm is the positive arm reflected through the origin, `-k -> -P(k)`.
//!
//! The positive arm uses straight runs of lengths 1,1,3,3,5,5,... in the
//! direction cycle right, up, left, down. With this pitch the two arms
//! interleave and tile the plane exactly once. Closed forms below follow
//! from the corner positions: the arm re-enters the bottom row `y = -2m`
//! at index `8m^2` on the point `(-2m, -2m)`.
//!
//! A composed variant enumerates the 3D lattice: split the index once to
//! get the last coordinate, then split the quotient for the first two.

/// Positive-arm segments for loop `m` (0-based), with inclusive index
/// ranges. See module docs for the derivation.
///
/// right: k in [8m^2+1,      8m^2+4m+1]   y = -2m,    x = k - 8m^2 - 2m
/// up:    k in [8m^2+4m+2,   8m^2+8m+2]   x = 2m+1,   y = k - 8m^2 - 6m - 1
/// left:  k in [8m^2+8m+3,   8m^2+12m+5]  y = 2m+1,   x = 8m^2 + 10m + 3 - k
/// down:  k in [8m^2+12m+6,  8(m+1)^2]    x = -2m-2,  y = 8m^2 + 14m + 6 - k
pub fn index_to_point(k: i128) -> (i64, i64) {
    if k == 0 {
        return (0, 0);
    }
    if k < 0 {
        let (a, b) = index_to_point(-k);
        return (-a, -b);
    }
    let mut m = ((k / 8) as u128).isqrt() as i128;
    while 8 * (m + 1) * (m + 1) < k {
        m += 1;
    }
    while m > 0 && 8 * m * m >= k {
        m -= 1;
    }
    debug_assert!(8 * m * m < k && k <= 8 * (m + 1) * (m + 1));
    let base = 8 * m * m;
    let (a, b) = if k <= base + 4 * m + 1 {
        (k - base - 2 * m, -2 * m)
    } else if k <= base + 8 * m + 2 {
        (2 * m + 1, k - base - 6 * m - 1)
    } else if k <= base + 12 * m + 5 {
        (base + 10 * m + 3 - k, 2 * m + 1)
    } else {
        (-2 * m - 2, base + 14 * m + 6 - k)
    };
    (a as i64, b as i64)
}

/// Inverse of [`index_to_point`].
pub fn point_to_index(a: i64, b: i64) -> i128 {
    if a == 0 && b == 0 {
        return 0;
    }
    match positive_arm_index(a as i128, b as i128) {
        Some(k) => k,
        None => {
            let k = positive_arm_index(-(a as i128), -(b as i128))
                .expect("every nonzero lattice point lies on exactly one spiral arm");
            -k
        }
    }
}

fn positive_arm_index(a: i128, b: i128) -> Option<i128> {
    // right run: y = -2m (m >= 0), x in [-2m+1, 2m+1]
    if b <= 0 && b % 2 == 0 {
        let m = -b / 2;
        let lo = if m == 0 { 1 } else { -2 * m + 1 };
        if a >= lo && a <= 2 * m + 1 {
            return Some(8 * m * m + a + 2 * m);
        }
    }
    // up run: x = 2m+1, y in [-2m+1, 2m+1]
    if a >= 1 && a % 2 == 1 {
        let m = (a - 1) / 2;
        if b > -2 * m && b <= 2 * m + 1 {
            return Some(8 * m * m + 6 * m + 1 + b);
        }
    }
    // left run: y = 2m+1, x in [-2m-2, 2m]
    if b >= 1 && b % 2 == 1 {
        let m = (b - 1) / 2;
        if a >= -2 * m - 2 && a <= 2 * m {
            return Some(8 * m * m + 10 * m + 3 - a);
        }
    }
    // down run: x = -2m-2, y in [-2m-2, 2m]
    if a <= -2 && a % 2 == 0 {
        let m = (-a - 2) / 2;
        if b >= -2 * m - 2 && b <= 2 * m {
            return Some(8 * m * m + 14 * m + 6 - b);
        }
    }
    None
}

/// Z <-> Z^3 via two applications of the planar bijection:
/// `k -> (u, c) -> ((a, b), c)`.
pub fn index3_to_point(k: i128) -> (i64, i64, i64) {
    let (u, c) = index_to_point(k);
    let (a, b) = index_to_point(u as i128);
    (a, b, c)
}

/// Inverse of [`index3_to_point`].
pub fn point3_to_index(a: i64, b: i64, c: i64) -> i128 {
    let u = point_to_index(a, b);
    debug_assert!(i64::try_from(u).is_ok(), "3D coordinates out of range");
    point_to_index(u as i64, c)
}
