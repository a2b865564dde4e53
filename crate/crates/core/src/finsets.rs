//! Finite sets, surjection tables, and subsets of finite products.
//!
//! A subset of `[n_1] x .. x [n_k]` is held as a bitmask in mixed-radix point
//! order (last coordinate varies fastest). The central predicate is
//! *ampleness*: a subset is ample when it is non-empty and surjects onto every
//! factor. Ample subsets label the transitive pieces of products elsewhere in
//! the crate, so the enumeration and counting here is the bedrock everything
//! else cross-checks against.

use crate::mask::{check_enum_budget, Mask, MASK_CAPACITY_BITS};
use crate::{enum_budget_bits, Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A finite set `{0, .., size-1}`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FinSet {
    pub size: usize,
}

impl FinSet {
    pub fn new(size: usize) -> FinSet {
        FinSet { size }
    }
}

/// A total map between finite sets, given by its value table.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SetMap {
    pub dom: usize,
    pub cod: usize,
    table: Vec<usize>,
}

impl SetMap {
    pub fn new(dom: usize, cod: usize, table: Vec<usize>) -> Result<SetMap> {
        if table.len() != dom {
            return Err(Error::argument(format!(
                "map table has {} entries for a domain of size {dom}",
                table.len()
            )));
        }
        if let Some(v) = table.iter().find(|v| **v >= cod) {
            return Err(Error::argument(format!(
                "map table value {v} outside codomain of size {cod}"
            )));
        }
        Ok(SetMap { dom, cod, table })
    }

    pub fn identity(n: usize) -> SetMap {
        SetMap {
            dom: n,
            cod: n,
            table: (0..n).collect(),
        }
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    /// Derived, never stored: does every codomain value get hit?
    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.cod];
        for &v in &self.table {
            hit[v] = true;
        }
        hit.into_iter().all(|h| h)
    }

    /// Post-composition `other . self` (apply `self` first).
    pub fn then(&self, other: &SetMap) -> Result<SetMap> {
        if self.cod != other.dom {
            return Err(Error::argument(format!(
                "cannot compose: codomain {} vs domain {}",
                self.cod, other.dom
            )));
        }
        SetMap::new(
            self.dom,
            other.cod,
            self.table.iter().map(|&x| other.apply(x)).collect(),
        )
    }
}

/// A subset of a product of finite sets, as factor sizes plus a point bitmask.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProductSubset {
    pub factor_sizes: Vec<usize>,
    pub mask: Mask,
}

/// Total number of points of the product, with a capacity check against the
/// 128-bit mask backing.
pub fn product_bits(factor_sizes: &[usize]) -> Result<u32> {
    let mut total: u128 = 1;
    for &n in factor_sizes {
        if n == 0 {
            return Err(Error::argument("zero-sized factor in a product"));
        }
        total = total.checked_mul(n as u128).ok_or_else(|| {
            Error::capacity("product point count", MASK_CAPACITY_BITS + 1, MASK_CAPACITY_BITS)
        })?;
        if total > MASK_CAPACITY_BITS as u128 {
            return Err(Error::capacity(
                "product point count",
                total.min(u32::MAX as u128) as u32,
                MASK_CAPACITY_BITS,
            ));
        }
    }
    Ok(total as u32)
}

impl ProductSubset {
    pub fn new(factor_sizes: Vec<usize>, mask: Mask) -> Result<ProductSubset> {
        let bits = product_bits(&factor_sizes)?;
        if !mask.is_subset_of(Mask::full(bits)) {
            return Err(Error::argument(format!(
                "mask {} has bits at or above the {} points of the product",
                mask.to_hex(),
                bits
            )));
        }
        Ok(ProductSubset { factor_sizes, mask })
    }

    pub fn empty(factor_sizes: Vec<usize>) -> Result<ProductSubset> {
        ProductSubset::new(factor_sizes, Mask::EMPTY)
    }

    pub fn bits(&self) -> u32 {
        self.factor_sizes.iter().product::<usize>() as u32
    }

    pub fn len(&self) -> u32 {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    /// Mixed-radix rank of a point (last coordinate varies fastest).
    pub fn rank_point(factor_sizes: &[usize], point: &[usize]) -> u32 {
        debug_assert_eq!(factor_sizes.len(), point.len());
        let mut idx: usize = 0;
        for (a, n) in point.iter().zip(factor_sizes) {
            debug_assert!(a < n);
            idx = idx * n + a;
        }
        idx as u32
    }

    /// Inverse of [`ProductSubset::rank_point`].
    pub fn unrank_point(factor_sizes: &[usize], mut idx: u32) -> Vec<usize> {
        let mut point = vec![0; factor_sizes.len()];
        for i in (0..factor_sizes.len()).rev() {
            point[i] = idx as usize % factor_sizes[i];
            idx /= factor_sizes[i] as u32;
        }
        point
    }

    pub fn contains_point(&self, point: &[usize]) -> bool {
        self.mask
            .contains(Self::rank_point(&self.factor_sizes, point))
    }

    pub fn points(&self) -> Vec<Vec<usize>> {
        self.mask
            .iter_ones()
            .map(|i| Self::unrank_point(&self.factor_sizes, i))
            .collect()
    }
}

impl Serialize for ProductSubset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            factor_sizes: &'a [usize],
            mask_hex: String,
        }
        Repr {
            factor_sizes: &self.factor_sizes,
            mask_hex: self.mask.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProductSubset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            factor_sizes: Vec<usize>,
            mask_hex: String,
        }
        let r = Repr::deserialize(d)?;
        let mask = Mask::from_hex(&r.mask_hex).map_err(D::Error::custom)?;
        ProductSubset::new(r.factor_sizes, mask).map_err(D::Error::custom)
    }
}

/// Positions of the product whose `axis`-th coordinate equals `value`.
pub fn value_positions(factor_sizes: &[usize], axis: usize, value: usize) -> Mask {
    let bits = factor_sizes.iter().product::<usize>() as u32;
    let mut m = Mask::EMPTY;
    for idx in 0..bits {
        if ProductSubset::unrank_point(factor_sizes, idx)[axis] == value {
            m.insert(idx);
        }
    }
    m
}

/// Per-point projected index table: maps each point of the full product to the
/// rank of its image under projection onto `axes` (in the given order).
pub fn projection_table(factor_sizes: &[usize], axes: &[usize]) -> (Vec<usize>, Vec<u32>) {
    let bits = factor_sizes.iter().product::<usize>() as u32;
    let proj_sizes: Vec<usize> = axes.iter().map(|&a| factor_sizes[a]).collect();
    let table = (0..bits)
        .map(|idx| {
            let p = ProductSubset::unrank_point(factor_sizes, idx);
            let q: Vec<usize> = axes.iter().map(|&a| p[a]).collect();
            ProductSubset::rank_point(&proj_sizes, &q)
        })
        .collect();
    (proj_sizes, table)
}

/// Project a subset of a product onto the listed coordinates.
pub fn project_subset(s: &ProductSubset, axes: &[usize]) -> Result<ProductSubset> {
    for &a in axes {
        if a >= s.factor_sizes.len() {
            return Err(Error::argument(format!(
                "projection axis {a} out of range for a {}-fold product",
                s.factor_sizes.len()
            )));
        }
    }
    let (proj_sizes, table) = projection_table(&s.factor_sizes, axes);
    let mut mask = Mask::EMPTY;
    for i in s.mask.iter_ones() {
        mask.insert(table[i as usize]);
    }
    ProductSubset::new(proj_sizes, mask)
}

/// Ample: non-empty and surjecting onto every factor.
pub fn is_ample(s: &ProductSubset) -> bool {
    if s.is_empty() {
        return false;
    }
    for (axis, &n) in s.factor_sizes.iter().enumerate() {
        for v in 0..n {
            if s.mask.intersect(value_positions(&s.factor_sizes, axis, v)).is_empty() {
                return false;
            }
        }
    }
    true
}

/// All ample subsets of the product, in increasing mask order.
pub fn enumerate_ample(factor_sizes: &[usize]) -> Result<Vec<ProductSubset>> {
    enumerate_ample_with_budget(factor_sizes, enum_budget_bits())
}

pub fn enumerate_ample_with_budget(
    factor_sizes: &[usize],
    budget_bits: u32,
) -> Result<Vec<ProductSubset>> {
    let bits = product_bits(factor_sizes)?;
    check_enum_budget("ample subset enumeration", bits, budget_bits)?;
    let coverage = coverage_masks(factor_sizes);
    let mut out = Vec::new();
    for raw in 1..(1u64 << bits) {
        let m = Mask(raw as u128);
        if coverage.iter().all(|c| !m.intersect(*c).is_empty()) {
            out.push(ProductSubset {
                factor_sizes: factor_sizes.to_vec(),
                mask: m,
            });
        }
    }
    Ok(out)
}

/// One mask per (axis, value) pair; a subset is ample iff it meets all of them
/// and is non-empty.
pub fn coverage_masks(factor_sizes: &[usize]) -> Vec<Mask> {
    let mut out = Vec::new();
    for (axis, &n) in factor_sizes.iter().enumerate() {
        for v in 0..n {
            out.push(value_positions(factor_sizes, axis, v));
        }
    }
    out
}

/// How to count ample subsets of `[2]^n`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CountMethod {
    /// Direct enumeration; needs `2^n <= 16` points.
    Enumerate,
    /// Signed sum over per-coordinate missed-value patterns; exact for all `n`.
    InclusionExclusion,
}

/// Number of ample subsets of the `n`-fold product `[2] x .. x [2]`.
pub fn count_ample_power2(n: u32, method: CountMethod) -> Result<BigInt> {
    match method {
        CountMethod::Enumerate => {
            let sizes = vec![2usize; n as usize];
            let bits = product_bits(&sizes)?;
            if bits > 16 {
                return Err(Error::capacity("ample count by enumeration", bits, 16));
            }
            Ok(BigInt::from(enumerate_ample_with_budget(&sizes, 16)?.len()))
        }
        CountMethod::InclusionExclusion => {
            // Sum over how many coordinates miss one value (sign -2 each) or
            // both values; subsets with all coordinates fully covered remain.
            // Collapsing the pattern sum: sum_a C(n,a) (-2)^(n-a) 2^(2^a),
            // minus (-1)^n to exclude the empty subset.
            let mut total = BigInt::zero();
            let mut binom = BigInt::one();
            for a in 0..=n {
                if a > 0 {
                    binom = &binom * BigInt::from(n - a + 1) / BigInt::from(a);
                }
                let sign = BigInt::from(-2).pow(n - a);
                let two_pow = BigInt::from(2).pow(2u32.pow(a));
                total += &binom * sign * two_pow;
            }
            total -= BigInt::from(-1i32).pow(n);
            if total.is_negative() {
                return Err(Error::integrity(format!(
                    "inclusion-exclusion produced a negative count for n={n}"
                )));
            }
            Ok(total)
        }
    }
}

/// What survives of each fiber when a subset is pushed through a map.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FiberMode {
    /// Keep codomain points with an odd fiber intersection.
    Odd,
    /// Keep codomain points with a non-empty fiber intersection (the image).
    NonEmpty,
}

/// Push a subset of the domain through `f`, keeping fibers per `mode`.
pub fn fiber_image(f: &SetMap, subset: Mask, mode: FiberMode) -> Result<Mask> {
    if !subset.is_subset_of(Mask::full(f.dom.min(128) as u32)) || f.dom > 128 {
        return Err(Error::argument("subset has bits outside the map domain"));
    }
    let mut counts = vec![0u32; f.cod];
    for i in subset.iter_ones() {
        counts[f.apply(i as usize)] += 1;
    }
    let mut out = Mask::EMPTY;
    for (v, &c) in counts.iter().enumerate() {
        let keep = match mode {
            FiberMode::Odd => c % 2 == 1,
            FiberMode::NonEmpty => c > 0,
        };
        if keep {
            out.insert(v as u32);
        }
    }
    Ok(out)
}

/// The equalizer subset `{(a, b) : f(a) = g(b)}` of `[dom f] x [dom g]`.
pub fn fiber_product_subset(f: &SetMap, g: &SetMap) -> Result<ProductSubset> {
    if f.cod != g.cod {
        return Err(Error::argument(format!(
            "fiber product needs a common codomain, got {} and {}",
            f.cod, g.cod
        )));
    }
    let sizes = vec![f.dom, g.dom];
    let bits = product_bits(&sizes)?;
    let mut mask = Mask::EMPTY;
    for idx in 0..bits {
        let p = ProductSubset::unrank_point(&sizes, idx);
        if f.apply(p[0]) == g.apply(p[1]) {
            mask.insert(idx);
        }
    }
    ProductSubset::new(sizes, mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent ampleness check that decodes every point from scratch.
    fn ample_oracle(s: &ProductSubset) -> bool {
        if s.is_empty() {
            return false;
        }
        for (axis, &n) in s.factor_sizes.iter().enumerate() {
            let seen: std::collections::BTreeSet<usize> = s
                .points()
                .into_iter()
                .map(|p| p[axis])
                .collect();
            if seen.len() != n {
                return false;
            }
        }
        true
    }

    fn subset(sizes: &[usize], pts: &[&[usize]]) -> ProductSubset {
        let mut mask = Mask::EMPTY;
        for p in pts {
            mask.insert(ProductSubset::rank_point(sizes, p));
        }
        ProductSubset::new(sizes.to_vec(), mask).unwrap()
    }

    #[test]
    fn rank_unrank_round_trip() {
        let sizes = [3usize, 2, 4];
        for idx in 0..24u32 {
            let p = ProductSubset::unrank_point(&sizes, idx);
            assert_eq!(ProductSubset::rank_point(&sizes, &p), idx);
        }
        // Last coordinate varies fastest.
        assert_eq!(ProductSubset::unrank_point(&sizes, 1), vec![0, 0, 1]);
        assert_eq!(ProductSubset::unrank_point(&sizes, 4), vec![0, 1, 0]);
    }

    #[test]
    fn projection_of_diagonal() {
        let diag = subset(&[2, 2], &[&[0, 0], &[1, 1]]);
        let p = project_subset(&diag, &[0]).unwrap();
        assert_eq!(p.factor_sizes, vec![2]);
        assert_eq!(p.mask, Mask(0b11));
    }

    #[test]
    fn ampleness_examples() {
        let diag = subset(&[2, 2], &[&[0, 0], &[1, 1]]);
        assert!(is_ample(&diag));
        let row = subset(&[2, 2], &[&[0, 0], &[0, 1]]);
        assert!(!is_ample(&row));
        let empty = ProductSubset::empty(vec![1, 1]).unwrap();
        assert!(!is_ample(&empty));
        // Single-point product: the one non-empty subset is ample.
        let pt = ProductSubset::new(vec![1, 1], Mask(1)).unwrap();
        assert!(is_ample(&pt));
    }

    #[test]
    fn enumeration_matches_oracle_and_order() {
        for sizes in [vec![1usize], vec![2], vec![2, 2], vec![3, 2], vec![2, 2, 2]] {
            let fast = enumerate_ample(&sizes).unwrap();
            let bits = sizes.iter().product::<usize>() as u32;
            let slow: Vec<Mask> = (1..(1u64 << bits))
                .map(|raw| Mask(raw as u128))
                .filter(|m| {
                    ample_oracle(&ProductSubset::new(sizes.clone(), *m).unwrap())
                })
                .collect();
            assert_eq!(
                fast.iter().map(|s| s.mask).collect::<Vec<_>>(),
                slow,
                "mismatch for {sizes:?}"
            );
            let mut sorted = fast.clone();
            sorted.sort_by_key(|s| s.mask);
            assert_eq!(
                fast.iter().map(|s| s.mask).collect::<Vec<_>>(),
                sorted.iter().map(|s| s.mask).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn square_ample_masks() {
        let masks: Vec<u128> = enumerate_ample(&[2, 2])
            .unwrap()
            .iter()
            .map(|s| s.mask.0)
            .collect();
        assert_eq!(masks, vec![0b0110, 0b0111, 0b1001, 0b1011, 0b1101, 0b1110, 0b1111]);
    }

    #[test]
    fn ample_counts() {
        for (n, expect) in [(0u32, 1i64), (1, 1), (2, 7), (3, 193), (4, 63775)] {
            let ie = count_ample_power2(n, CountMethod::InclusionExclusion).unwrap();
            assert_eq!(ie, BigInt::from(expect), "inclusion-exclusion at n={n}");
            let en = count_ample_power2(n, CountMethod::Enumerate).unwrap();
            assert_eq!(en, BigInt::from(expect), "enumeration at n={n}");
        }
        assert!(matches!(
            count_ample_power2(5, CountMethod::Enumerate),
            Err(Error::Capacity { .. })
        ));
        // The signed-sum route stays exact well past enumeration range.
        let f5 = count_ample_power2(5, CountMethod::InclusionExclusion).unwrap();
        assert!(f5 > BigInt::from(63775) * BigInt::from(63775) / BigInt::from(2));
    }

    #[test]
    fn fiber_images() {
        let collapse = SetMap::new(2, 1, vec![0, 0]).unwrap();
        let full = Mask(0b11);
        assert_eq!(fiber_image(&collapse, full, FiberMode::Odd).unwrap(), Mask::EMPTY);
        assert_eq!(
            fiber_image(&collapse, full, FiberMode::NonEmpty).unwrap(),
            Mask(0b1)
        );
        let f = SetMap::new(4, 2, vec![0, 0, 1, 1]).unwrap();
        let s = Mask(0b0111);
        assert_eq!(fiber_image(&f, s, FiberMode::Odd).unwrap(), Mask(0b10));
        assert_eq!(fiber_image(&f, s, FiberMode::NonEmpty).unwrap(), Mask(0b11));
    }

    #[test]
    fn odd_fibers_sit_inside_nonempty_fibers() {
        for table_code in 0..81u32 {
            // All maps [4] -> [3], dense code.
            let mut code = table_code;
            let mut table = Vec::new();
            for _ in 0..4 {
                table.push((code % 3) as usize);
                code /= 3;
            }
            let f = SetMap::new(4, 3, table).unwrap();
            for raw in 0..16u128 {
                let s = Mask(raw);
                let odd = fiber_image(&f, s, FiberMode::Odd).unwrap();
                let nonempty = fiber_image(&f, s, FiberMode::NonEmpty).unwrap();
                assert!(odd.is_subset_of(nonempty));
            }
        }
    }

    #[test]
    fn fiber_products() {
        let collapse = SetMap::new(2, 1, vec![0, 0]).unwrap();
        let fp = fiber_product_subset(&collapse, &collapse).unwrap();
        assert_eq!(fp.mask, Mask(0b1111));
        let id2 = SetMap::identity(2);
        let fp = fiber_product_subset(&id2, &id2).unwrap();
        assert_eq!(fp.mask, Mask(0b1001));
    }

    #[test]
    fn surjectivity_is_derived() {
        assert!(SetMap::new(3, 2, vec![0, 1, 0]).unwrap().is_surjective());
        assert!(!SetMap::new(3, 2, vec![0, 0, 0]).unwrap().is_surjective());
        assert!(SetMap::new(2, 3, vec![0, 4]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let s = subset(&[2, 2], &[&[0, 1], &[1, 0]]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"factor_sizes":[2,2],"mask_hex":"6"}"#);
        let back: ProductSubset = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        // Out-of-range masks are rejected on the way in.
        let bad = r#"{"factor_sizes":[2,2],"mask_hex":"10"}"#;
        assert!(serde_json::from_str::<ProductSubset>(bad).is_err());
    }

    #[test]
    fn budget_errors_name_the_budget() {
        let sizes = vec![2usize; 5]; // 32 points, over the 24-bit default
        match enumerate_ample(&sizes) {
            Err(Error::Capacity { required, budget, .. }) => {
                assert_eq!(required, 32);
                assert_eq!(budget, crate::DEFAULT_ENUM_BUDGET_BITS);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
        // Products beyond the mask backing are capacity errors regardless.
        assert!(matches!(
            ProductSubset::empty(vec![64, 64]),
            Err(Error::Capacity { .. })
        ));
    }
}
