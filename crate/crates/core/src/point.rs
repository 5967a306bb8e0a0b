//! Finitely representable points of the built-in systems.
//!
//! Odometer points are eventually periodic binary sequences, stored in a
//! canonical form so that two representations of the same sequence compare
//! equal: the period is the lexicographically least rotation of the
//! minimal period, and the prefix is the shortest one consistent with that
//! period. Bit strings are written most-significant-last (index 0 first).
//!
//! Literal syntax, used by the CLI, fixtures, and failure witnesses:
//!
//! ```text
//! lat:<label>:<a>,<b>          lat3:<label>:<a>,<b>,<c>
//! line:<label>:<n>             odo:<prefix>|<period>
//! podo:(<prefix>|<period>),(<prefix>|<period>)
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PointParseError {
    #[error("unknown point literal form: {0}")]
    UnknownForm(String),
    #[error("malformed point literal: {0}")]
    Malformed(String),
    #[error("bit strings may contain only 0 and 1")]
    BadBit,
    #[error("period must be nonempty")]
    EmptyPeriod,
    #[error("bit string exceeds the supported length")]
    TooLong,
    #[error("integer field out of range")]
    IntRange,
}

/// An eventually periodic binary sequence in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OdoPoint {
    prefix: Vec<u8>,
    period: Vec<u8>,
}

impl OdoPoint {
    /// Longest accepted prefix or period; rotation normalization is
    /// quadratic, so unbounded literals would be a denial of service.
    pub const MAX_BITS: usize = 4096;

    pub fn new(prefix: &[u8], period: &[u8]) -> Result<Self, PointParseError> {
        if period.is_empty() {
            return Err(PointParseError::EmptyPeriod);
        }
        if prefix.len() > Self::MAX_BITS || period.len() > Self::MAX_BITS {
            return Err(PointParseError::TooLong);
        }
        if prefix.iter().chain(period.iter()).any(|&b| b > 1) {
            return Err(PointParseError::BadBit);
        }
        let (prefix, period) = canonicalize(prefix.to_vec(), period.to_vec());
        Ok(OdoPoint { prefix, period })
    }

    /// The all-zeros sequence (the 2-adic integer 0).
    pub fn zero() -> Self {
        OdoPoint {
            prefix: vec![],
            period: vec![0],
        }
    }

    /// Sequence of an ordinary integer (nonnegative ends in zeros,
    /// negative in ones).
    pub fn from_int(value: &BigInt) -> Self {
        Self::from_rational_parts(value.clone(), BigInt::one())
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    pub fn bit(&self, n: usize) -> u8 {
        if n < self.prefix.len() {
            self.prefix[n]
        } else {
            self.period[(n - self.prefix.len()) % self.period.len()]
        }
    }

    /// True when the tail is constant (the sequence represents an ordinary
    /// integer).
    pub fn eventually_constant(&self) -> bool {
        self.period == [0] || self.period == [1]
    }

    /// Value as a rational with odd denominator:
    /// `P - 2^a * Q / (2^b - 1)` where `P`, `Q` read the prefix and period
    /// as little-endian binary integers.
    pub fn value(&self) -> BigRational {
        let a = self.prefix.len();
        let b = self.period.len();
        let p = bits_to_int(&self.prefix);
        let q = bits_to_int(&self.period);
        let den = (BigInt::one() << b) - BigInt::one();
        let num = &p * &den - (BigInt::one() << a) * q;
        BigRational::new(num, den)
    }

    /// Rebuild a sequence from a rational 2-adic integer (denominator must
    /// be odd). Bits come off one at a time; the residue states eventually
    /// cycle, which pins down the period.
    pub fn from_rational(r: &BigRational) -> Self {
        Self::from_rational_parts(r.numer().clone(), r.denom().clone())
    }

    fn from_rational_parts(mut u: BigInt, v: BigInt) -> Self {
        assert!(v.is_positive() && v.is_odd_int(), "denominator must be odd");
        let mut bits: Vec<u8> = Vec::new();
        let mut seen: HashMap<BigInt, usize> = HashMap::new();
        loop {
            if let Some(&start) = seen.get(&u) {
                let period = bits[start..].to_vec();
                let prefix = bits[..start].to_vec();
                let (prefix, period) = canonicalize(prefix, period);
                return OdoPoint { prefix, period };
            }
            seen.insert(u.clone(), bits.len());
            let bit = if (&u % 2u8).is_zero() { 0u8 } else { 1u8 };
            bits.push(bit);
            if bit == 1 {
                u -= &v;
            }
            u /= 2;
        }
    }

    /// 2-adic addition of an integer.
    pub fn add_int(&self, k: &BigInt) -> Self {
        let r = self.value() + BigRational::from_integer(k.clone());
        Self::from_rational(&r)
    }

    /// Interleave two sequences: even output bits from `self`, odd from
    /// `right`.
    pub fn interleave(&self, right: &OdoPoint) -> OdoPoint {
        let a = 2 * self.prefix.len().max(right.prefix.len());
        let b = 2 * lcm(self.period.len(), right.period.len());
        let mut prefix = Vec::with_capacity(a);
        for i in 0..a {
            prefix.push(self.half_bit(right, i));
        }
        let mut period = Vec::with_capacity(b);
        for i in a..a + b {
            period.push(self.half_bit(right, i));
        }
        let (prefix, period) = canonicalize(prefix, period);
        OdoPoint { prefix, period }
    }

    fn half_bit(&self, right: &OdoPoint, i: usize) -> u8 {
        if i.is_multiple_of(2) {
            self.bit(i / 2)
        } else {
            right.bit(i / 2)
        }
    }

    /// Inverse of [`Self::interleave`].
    pub fn deinterleave(&self) -> (OdoPoint, OdoPoint) {
        let a = self.prefix.len();
        let b = self.period.len();
        // Sub-sequences at even/odd positions: prefix of ceil(a/2) bits,
        // then a window of b bits is always a valid (possibly non-minimal)
        // period; canonicalization trims it.
        let split = |offset: usize| -> OdoPoint {
            let first = if offset == 0 { a.div_ceil(2) } else { a / 2 };
            let mut prefix = Vec::with_capacity(first);
            for n in 0..first {
                prefix.push(self.bit(2 * n + offset));
            }
            let mut period = Vec::with_capacity(b);
            for n in first..first + b {
                period.push(self.bit(2 * n + offset));
            }
            let (prefix, period) = canonicalize(prefix, period);
            OdoPoint { prefix, period }
        };
        (split(0), split(1))
    }
}

trait OddCheck {
    fn is_odd_int(&self) -> bool;
}

impl OddCheck for BigInt {
    fn is_odd_int(&self) -> bool {
        !(self % 2u8).is_zero()
    }
}

fn bits_to_int(bits: &[u8]) -> BigInt {
    let mut acc = BigInt::zero();
    for (i, &b) in bits.iter().enumerate() {
        if b == 1 {
            acc += BigInt::one() << i;
        }
    }
    acc
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Canonical form: minimal period, rotated to its lexicographically least
/// rotation, with the shortest prefix consistent with that rotation.
fn canonicalize(mut prefix: Vec<u8>, period: Vec<u8>) -> (Vec<u8>, Vec<u8>) {
    let d = minimal_period(&period);
    let w0 = &period[..d];
    let t = least_rotation(w0);
    prefix.extend_from_slice(&w0[..t]);
    let mut w = Vec::with_capacity(d);
    w.extend_from_slice(&w0[t..]);
    w.extend_from_slice(&w0[..t]);
    while prefix.len() >= w.len() && prefix[prefix.len() - w.len()..] == w[..] {
        prefix.truncate(prefix.len() - w.len());
    }
    (prefix, w)
}

/// Smallest `d` dividing `w.len()` with `w = (w[..d])^*`.
fn minimal_period(w: &[u8]) -> usize {
    let n = w.len();
    'outer: for d in 1..=n {
        if !n.is_multiple_of(d) {
            continue;
        }
        for i in d..n {
            if w[i] != w[i - d] {
                continue 'outer;
            }
        }
        return d;
    }
    n
}

/// Index of the lexicographically least rotation (leftmost on ties).
fn least_rotation(w: &[u8]) -> usize {
    let n = w.len();
    let mut best = 0;
    for cand in 1..n {
        for i in 0..n {
            let a = w[(cand + i) % n];
            let b = w[(best + i) % n];
            if a != b {
                if a < b {
                    best = cand;
                }
                break;
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Point {
    /// Labeled 2D lattice coordinate.
    Lattice { label: u32, a: i64, b: i64 },
    /// Labeled 3D lattice coordinate.
    Lattice3 { label: u32, a: i64, b: i64, c: i64 },
    /// Labeled integer.
    Line { label: u32, n: i64 },
    /// Dyadic odometer point.
    Odo(OdoPoint),
    /// Pair of odometer points.
    ProdOdo(OdoPoint, OdoPoint),
}

impl Point {
    pub fn lattice(label: u32, a: i64, b: i64) -> Self {
        Point::Lattice { label, a, b }
    }

    pub fn line(label: u32, n: i64) -> Self {
        Point::Line { label, n }
    }

    pub fn parse(text: &str) -> Result<Self, PointParseError> {
        let (head, rest) = text
            .split_once(':')
            .ok_or_else(|| PointParseError::UnknownForm(text.to_string()))?;
        match head {
            "lat" => {
                let (label, coords) = split_label(rest)?;
                let (a, b) = parse_pair(coords)?;
                Ok(Point::Lattice { label, a, b })
            }
            "lat3" => {
                let (label, coords) = split_label(rest)?;
                let parts: Vec<&str> = coords.split(',').collect();
                if parts.len() != 3 {
                    return Err(PointParseError::Malformed(text.to_string()));
                }
                Ok(Point::Lattice3 {
                    label,
                    a: parse_i64(parts[0])?,
                    b: parse_i64(parts[1])?,
                    c: parse_i64(parts[2])?,
                })
            }
            "line" => {
                let (label, num) = split_label(rest)?;
                Ok(Point::Line {
                    label,
                    n: parse_i64(num)?,
                })
            }
            "odo" => Ok(Point::Odo(parse_odo_body(rest)?)),
            "podo" => {
                let inner = rest.trim();
                let (first, second) = split_podo(inner)
                    .ok_or_else(|| PointParseError::Malformed(text.to_string()))?;
                Ok(Point::ProdOdo(
                    parse_odo_body(first)?,
                    parse_odo_body(second)?,
                ))
            }
            _ => Err(PointParseError::UnknownForm(text.to_string())),
        }
    }
}

fn split_label(rest: &str) -> Result<(u32, &str), PointParseError> {
    let (label, tail) = rest
        .split_once(':')
        .ok_or_else(|| PointParseError::Malformed(rest.to_string()))?;
    let label: u32 = label
        .parse()
        .map_err(|_| PointParseError::Malformed(rest.to_string()))?;
    Ok((label, tail))
}

fn parse_pair(text: &str) -> Result<(i64, i64), PointParseError> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| PointParseError::Malformed(text.to_string()))?;
    Ok((parse_i64(a)?, parse_i64(b)?))
}

fn parse_i64(text: &str) -> Result<i64, PointParseError> {
    text.trim().parse().map_err(|_| PointParseError::IntRange)
}

fn parse_odo_body(text: &str) -> Result<OdoPoint, PointParseError> {
    let (prefix, period) = text
        .split_once('|')
        .ok_or_else(|| PointParseError::Malformed(text.to_string()))?;
    OdoPoint::new(&parse_bits(prefix)?, &parse_bits(period)?)
}

fn parse_bits(text: &str) -> Result<Vec<u8>, PointParseError> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(PointParseError::BadBit),
        })
        .collect()
}

/// Split `"(a|b),(c|d)"` into the two parenthesized bodies.
fn split_podo(text: &str) -> Option<(&str, &str)> {
    let text = text.strip_prefix('(')?;
    let close = text.find(')')?;
    let first = &text[..close];
    let rest = text[close + 1..].strip_prefix(",(")?;
    let second = rest.strip_suffix(')')?;
    Some((first, second))
}

fn fmt_bits(f: &mut fmt::Formatter<'_>, bits: &[u8]) -> fmt::Result {
    for b in bits {
        write!(f, "{b}")?;
    }
    Ok(())
}

impl fmt::Display for OdoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_bits(f, &self.prefix)?;
        write!(f, "|")?;
        fmt_bits(f, &self.period)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Lattice { label, a, b } => write!(f, "lat:{label}:{a},{b}"),
            Point::Lattice3 { label, a, b, c } => write!(f, "lat3:{label}:{a},{b},{c}"),
            Point::Line { label, n } => write!(f, "line:{label}:{n}"),
            Point::Odo(o) => write!(f, "odo:{o}"),
            Point::ProdOdo(l, r) => write!(f, "podo:({l}),({r})"),
        }
    }
}
