//! Exact combinatorics of finite quotients of the Cantor space.
//!
//! Everything here is integer/rational arithmetic with zero tolerance: orbit
//! inventories on products of finite sets, the two regular measures that those
//! inventories admit, the matrix categories built from them, and the contracted
//! monoid algebras of semiring matrices that sit inside the endomorphism rings.
//!
//! Module map:
//! * [`finsets`] — finite sets, surjection tables, subsets of products, ample
//!   subsets and their counts.
//! * [`gsets`] — formal sums of transitive pieces, product decompositions,
//!   equivalence-relation families and their classification.
//! * [`measures`] — the two regular measures, the parameter solve that pins
//!   them down, and the invariant ring they land in.
//! * [`permcat`] — matrix categories over the measures: composition (three
//!   routes), tensor, duality, traces.
//! * [`linmon`] — semiring matrix monoids, their contracted algebras, trace
//!   forms, radicals, and the nilpotent-with-nonzero-trace witness search.
//! * [`selftest`] — replayable end-to-end claim checks used by the CLI.

pub mod error;
pub mod mask;

pub mod finsets;
pub mod gsets;
pub mod linalg;
pub mod linmon;
pub mod measures;
pub mod permcat;
pub mod selftest;

pub use error::{Error, Result};

/// Exact rational scalar used throughout.
pub type Rat = num_rational::BigRational;

/// Default number of points allowed in a product that gets enumerated
/// subset-by-subset (the enumeration space is `2^bits`).
pub const DEFAULT_ENUM_BUDGET_BITS: u32 = 24;

/// Environment variable the CLI honours to override enumeration budgets.
pub const BUDGET_ENV_VAR: &str = "CANTOR_PERM_BUDGET_BITS";

use std::sync::atomic::{AtomicU32, Ordering};

static ENUM_BUDGET_BITS: AtomicU32 = AtomicU32::new(DEFAULT_ENUM_BUDGET_BITS);

/// The enumeration budget currently in force.
pub fn enum_budget_bits() -> u32 {
    ENUM_BUDGET_BITS.load(Ordering::Relaxed)
}

/// Override the enumeration budget process-wide. The CLI wires this to
/// [`BUDGET_ENV_VAR`]; hard per-structure caps still apply above it.
pub fn set_enum_budget_bits(bits: u32) {
    ENUM_BUDGET_BITS.store(bits, Ordering::Relaxed);
}

use num_bigint::BigInt;

/// Convenience: rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Convenience: rational `p/q`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Render a rational as `p/q` in lowest terms with positive denominator.
/// Integers render with an explicit denominator (`4/1`), which keeps report
/// files trivially machine-splittable.
pub fn rat_string(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parse `p/q` (or a bare integer `p`) into a rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p, q),
        None => (s, "1"),
    };
    let p: BigInt = p
        .trim()
        .parse()
        .map_err(|_| Error::argument(format!("bad rational numerator in {s:?}")))?;
    let q: BigInt = q
        .trim()
        .parse()
        .map_err(|_| Error::argument(format!("bad rational denominator in {s:?}")))?;
    if q == BigInt::from(0) {
        return Err(Error::argument(format!("zero denominator in {s:?}")));
    }
    Ok(Rat::new(p, q))
}

/// `(-2)^k` / `(-1)^k` style exact integer powers.
pub fn rat_pow(base: i64, exp: u32) -> Rat {
    rat_int(base).pow(exp as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip() {
        let x = rat(-6, 4);
        assert_eq!(rat_string(&x), "-3/2");
        assert_eq!(parse_rat("-3/2").unwrap(), x);
        assert_eq!(parse_rat("7").unwrap(), rat_int(7));
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn powers() {
        assert_eq!(rat_pow(-2, 3), rat_int(-8));
        assert_eq!(rat_pow(-1, 0), rat_int(1));
    }
}
