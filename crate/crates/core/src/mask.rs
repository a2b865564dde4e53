//! Compact bitmasks over up to 128 points.
//!
//! Subsets of a product of finite sets are stored as bitmasks in mixed-radix
//! point order (last factor varies fastest). All enumeration budgets in this
//! crate are far below 128 bits, so a `u128` back end keeps the hot loops on
//! plain machine words; anything wider is reported as a capacity error at the
//! call site that would need it.

use crate::{Error, Result};

/// Maximum number of addressable points in one mask.
pub const MASK_CAPACITY_BITS: u32 = 128;

/// A subset of `{0, .., n-1}` for some ambient point count `n <= 128`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Mask(pub u128);

impl Mask {
    pub const EMPTY: Mask = Mask(0);

    /// Full subset on `bits` points.
    pub fn full(bits: u32) -> Mask {
        debug_assert!(bits <= MASK_CAPACITY_BITS);
        if bits == 128 {
            Mask(u128::MAX)
        } else {
            Mask((1u128 << bits) - 1)
        }
    }

    pub fn singleton(i: u32) -> Mask {
        Mask(1u128 << i)
    }

    pub fn contains(&self, i: u32) -> bool {
        (self.0 >> i) & 1 == 1
    }

    pub fn insert(&mut self, i: u32) {
        self.0 |= 1u128 << i;
    }

    pub fn len(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn union(&self, other: Mask) -> Mask {
        Mask(self.0 | other.0)
    }

    pub fn intersect(&self, other: Mask) -> Mask {
        Mask(self.0 & other.0)
    }

    pub fn is_subset_of(&self, other: Mask) -> bool {
        self.0 & !other.0 == 0
    }

    /// Indices of set bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = u32> + '_ {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros();
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// Lowercase hex, most significant nibble first, no leading zeros
    /// (the empty set renders as "0").
    pub fn to_hex(&self) -> String {
        format!("{:x}", self.0)
    }

    pub fn from_hex(s: &str) -> Result<Mask> {
        let t = s.trim();
        if t.is_empty() || t.len() > 32 {
            return Err(Error::argument(format!("bad mask_hex {s:?}")));
        }
        u128::from_str_radix(t, 16)
            .map(Mask)
            .map_err(|_| Error::argument(format!("bad mask_hex {s:?}")))
    }

    /// All submasks of `self`, descending numeric order, including `self`
    /// and the empty mask.
    pub fn submasks(&self) -> Submasks {
        Submasks {
            of: self.0,
            cur: self.0,
            done: false,
        }
    }
}

/// Iterator over submasks via the standard `(cur - 1) & of` walk.
pub struct Submasks {
    of: u128,
    cur: u128,
    done: bool,
}

impl Iterator for Submasks {
    type Item = Mask;

    fn next(&mut self) -> Option<Mask> {
        if self.done {
            return None;
        }
        let out = Mask(self.cur);
        if self.cur == 0 {
            self.done = true;
        } else {
            self.cur = (self.cur - 1) & self.of;
        }
        Some(out)
    }
}

/// Guard for `2^bits`-sized enumerations: errors when `bits` exceeds `budget`.
pub fn check_enum_budget(what: &str, bits: u32, budget: u32) -> Result<()> {
    if bits > budget {
        return Err(Error::capacity(what, bits, budget));
    }
    // An enumeration budget that nominally clears 2^64 iterations is a
    // configuration mistake, not something to attempt.
    if bits >= 48 {
        return Err(Error::capacity(what, bits, 47.min(budget)));
    }
    Ok(())
}
