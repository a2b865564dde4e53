//! Formal sums of transitive pieces and the combinatorics that produces them.
//!
//! A transitive piece is written `X(n)` and remembered only through the size
//! of its labelling set, optionally tagged with the subset of an ambient
//! product it arose from. Products of pieces decompose into ample subsets;
//! equivalence-relation families over a base set classify into permutation
//! quotients. Everything is finite and exhaustively checkable.

use crate::finsets::{
    coverage_masks, enumerate_ample_with_budget, fiber_product_subset, is_ample, product_bits,
    ProductSubset, SetMap,
};
use crate::mask::{check_enum_budget, Mask};
use crate::{enum_budget_bits, Error, Result};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};

/// One transitive piece `X(size)`, optionally tagged with the ambient subset
/// it labels.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct TransitivePiece {
    pub size: usize,
    pub ambient_tag: Option<Mask>,
}

impl TransitivePiece {
    pub fn plain(size: usize) -> TransitivePiece {
        TransitivePiece {
            size,
            ambient_tag: None,
        }
    }

    pub fn tagged(size: usize, tag: Mask) -> TransitivePiece {
        TransitivePiece {
            size,
            ambient_tag: Some(tag),
        }
    }
}

/// A formal non-negative-integer combination of transitive pieces.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct FormalGSet {
    pieces: BTreeMap<TransitivePiece, u64>,
}

impl FormalGSet {
    pub fn empty() -> FormalGSet {
        FormalGSet::default()
    }

    pub fn single(size: usize) -> FormalGSet {
        let mut s = FormalGSet::empty();
        s.add(TransitivePiece::plain(size), 1);
        s
    }

    pub fn add(&mut self, piece: TransitivePiece, multiplicity: u64) {
        if piece.size == 0 {
            // X(0) is the empty G-set; it contributes nothing.
            return;
        }
        if multiplicity > 0 {
            *self.pieces.entry(piece).or_insert(0) += multiplicity;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TransitivePiece, u64)> {
        self.pieces.iter().map(|(p, &m)| (p, m))
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Number of pieces counted with multiplicity.
    pub fn piece_count(&self) -> u64 {
        self.pieces.values().sum()
    }

    /// The underlying multiset of sizes, tags forgotten. Handy for comparing
    /// a decomposition against a stated shape like `X(4) + 4 X(3) + 2 X(2)`.
    pub fn forget_tags(&self) -> BTreeMap<usize, u64> {
        let mut out = BTreeMap::new();
        for (p, m) in self.iter() {
            *out.entry(p.size).or_insert(0) += m;
        }
        out
    }

    /// Build an untagged formal sum from `(size, multiplicity)` pairs.
    pub fn from_sizes(pairs: &[(usize, u64)]) -> FormalGSet {
        let mut s = FormalGSet::empty();
        for &(size, mult) in pairs {
            s.add(TransitivePiece::plain(size), mult);
        }
        s
    }
}

impl Serialize for FormalGSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            size: usize,
            multiplicity: u64,
            #[serde(skip_serializing_if = "Option::is_none")]
            ambient_tag: Option<String>,
        }
        let rows: Vec<Repr> = self
            .iter()
            .map(|(p, m)| Repr {
                size: p.size,
                multiplicity: m,
                ambient_tag: p.ambient_tag.map(|t| t.to_hex()),
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FormalGSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            size: usize,
            multiplicity: u64,
            #[serde(default)]
            ambient_tag: Option<String>,
        }
        let rows = Vec::<Repr>::deserialize(d)?;
        let mut out = FormalGSet::empty();
        for r in rows {
            if r.size == 0 {
                return Err(D::Error::custom("piece size must be positive"));
            }
            if r.multiplicity == 0 {
                return Err(D::Error::custom("piece multiplicity must be positive"));
            }
            let tag = match r.ambient_tag {
                Some(h) => Some(Mask::from_hex(&h).map_err(D::Error::custom)?),
                None => None,
            };
            out.add(
                TransitivePiece {
                    size: r.size,
                    ambient_tag: tag,
                },
                r.multiplicity,
            );
        }
        Ok(out)
    }
}

/// A map of transitive pieces `X(A) -> X(B)`, induced by a surjection `A -> B`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GMap {
    map: SetMap,
}

impl GMap {
    pub fn new(map: SetMap) -> Result<GMap> {
        if !map.is_surjective() {
            return Err(Error::argument(
                "maps of transitive pieces require a surjective table",
            ));
        }
        Ok(GMap { map })
    }

    pub fn from_table(dom: usize, cod: usize, table: Vec<usize>) -> Result<GMap> {
        GMap::new(SetMap::new(dom, cod, table)?)
    }

    pub fn identity(n: usize) -> GMap {
        GMap {
            map: SetMap::identity(n),
        }
    }

    pub fn set_map(&self) -> &SetMap {
        &self.map
    }

    pub fn dom(&self) -> usize {
        self.map.dom
    }

    pub fn cod(&self) -> usize {
        self.map.cod
    }
}

/// The surjection `[n] -> [n-1]` that merges `d` and `d+1` into `d`.
pub fn elementary_collapse(n: usize, d: usize) -> Result<GMap> {
    if n < 2 || d + 1 >= n {
        return Err(Error::argument(format!(
            "no elementary surjection [{n}] -> [{}] merging {d},{}",
            n.saturating_sub(1),
            d + 1
        )));
    }
    let table = (0..n).map(|i| if i <= d { i } else { i - 1 }).collect();
    GMap::from_table(n, n - 1, table)
}

/// Decompose `X(A) x_{X(C)} X(B)` into transitive pieces: one piece `X(|D|)`
/// per subset `D` of the equalizer `{(a,b) : f(a) = g(b)}` that is ample in
/// `A x B`, tagged with `D`.
pub fn x_product_decompose(f: &GMap, g: &GMap) -> Result<FormalGSet> {
    if f.cod() != g.cod() {
        return Err(Error::argument(
            "fiber square needs maps with a common codomain",
        ));
    }
    let eq = fiber_product_subset(f.set_map(), g.set_map())?;
    check_enum_budget(
        "fiber-square decomposition",
        eq.len(),
        enum_budget_bits(),
    )?;
    let coverage = coverage_masks(&eq.factor_sizes);
    let mut out = FormalGSet::empty();
    for d in eq.mask.submasks() {
        if !d.is_empty() && coverage.iter().all(|c| !d.intersect(*c).is_empty()) {
            out.add(TransitivePiece::tagged(d.len() as usize, d), 1);
        }
    }
    Ok(out)
}

/// Decompose a product `X(A_1) x .. x X(A_k)` into transitive pieces: one per
/// ample subset of the product of the labelling sets.
pub fn multiway_orbit_decompose(label_sizes: &[usize]) -> Result<FormalGSet> {
    multiway_orbit_decompose_with_budget(label_sizes, enum_budget_bits())
}

pub fn multiway_orbit_decompose_with_budget(
    label_sizes: &[usize],
    budget_bits: u32,
) -> Result<FormalGSet> {
    let mut out = FormalGSet::empty();
    for d in enumerate_ample_with_budget(label_sizes, budget_bits)? {
        out.add(TransitivePiece::tagged(d.len() as usize, d.mask), 1);
    }
    Ok(out)
}

/// Decompose `Y(n)`, the pieces being `X(C)` for every non-empty `C` of `[n]`,
/// tagged with `C`.
pub fn y_set_decompose(n: usize) -> Result<FormalGSet> {
    if n > 16 {
        return Err(Error::capacity("Y-set decomposition", n as u32, 16));
    }
    let mut out = FormalGSet::empty();
    for raw in 1u64..(1u64 << n) {
        let c = Mask(raw as u128);
        out.add(TransitivePiece::tagged(c.len() as usize, c), 1);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Equivalence-relation families.
// ---------------------------------------------------------------------------

/// A family of ample subsets of `A x A`, encoding a union of orbits of pairs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EqRelFamily {
    pub base: usize,
    members: BTreeSet<Mask>,
}

/// Bitmask of the diagonal of `[n] x [n]`.
pub fn diagonal_mask(n: usize) -> Mask {
    let mut m = Mask::EMPTY;
    for x in 0..n {
        m.insert((x * n + x) as u32);
    }
    m
}

/// Swap the two coordinates of a subset of `[n] x [n]`.
pub fn transpose_mask(n: usize, m: Mask) -> Mask {
    let mut out = Mask::EMPTY;
    for i in m.iter_ones() {
        let (x, y) = ((i as usize) / n, (i as usize) % n);
        out.insert((y * n + x) as u32);
    }
    out
}

impl EqRelFamily {
    pub fn new(base: usize, members: impl IntoIterator<Item = Mask>) -> Result<EqRelFamily> {
        let members: BTreeSet<Mask> = members.into_iter().collect();
        for &m in &members {
            let ps = ProductSubset::new(vec![base, base], m)?;
            if !is_ample(&ps) {
                return Err(Error::argument(format!(
                    "family member {} is not ample in [{base}] x [{base}]",
                    m.to_hex()
                )));
            }
        }
        Ok(EqRelFamily { base, members })
    }

    pub fn members(&self) -> impl Iterator<Item = Mask> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, m: Mask) -> bool {
        self.members.contains(&m)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl Serialize for EqRelFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            base_size: usize,
            members: Vec<String>,
        }
        Repr {
            base_size: self.base,
            members: self.members().map(|m| m.to_hex()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EqRelFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            base_size: usize,
            members: Vec<String>,
        }
        let r = Repr::deserialize(d)?;
        let mut members = Vec::new();
        for h in &r.members {
            members.push(Mask::from_hex(h).map_err(D::Error::custom)?);
        }
        EqRelFamily::new(r.base_size, members).map_err(D::Error::custom)
    }
}

/// Largest base size accepted by the transitivity check; the chain enumeration
/// is exponential in the base cubed.
pub const EQREL_VALIDATE_MAX_BASE: usize = 3;

/// Does the family encode an equivalence relation? Checks, exhaustively:
/// (a) the diagonal is a member, (b) members are closed under transposition,
/// (c) for every pair of members and every subset of their chain set whose
/// outer projections are exactly those members, the middle projection also
/// lands in the family.
pub fn eqrel_validate(family: &EqRelFamily) -> Result<bool> {
    let n = family.base;
    if n > EQREL_VALIDATE_MAX_BASE {
        return Err(Error::capacity(
            "equivalence-relation validation base",
            n as u32,
            EQREL_VALIDATE_MAX_BASE as u32,
        ));
    }
    if n == 0 {
        return Ok(false);
    }
    // (a) reflexivity.
    if !family.contains(diagonal_mask(n)) {
        return Ok(false);
    }
    // (b) symmetry.
    for e in family.members() {
        if !family.contains(transpose_mask(n, e)) {
            return Ok(false);
        }
    }
    // (c) transitivity over chain subsets.
    for e1 in family.members() {
        for e2 in family.members() {
            if !chain_condition(n, e1, e2, family)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The chain set of two subsets of `[n] x [n]`: triples `(x, y, z)` with
/// `(x, y)` in `e1` and `(y, z)` in `e2`.
fn chain_points(n: usize, e1: Mask, e2: Mask) -> Vec<(usize, usize, usize)> {
    let mut pts = Vec::new();
    for i in e1.iter_ones() {
        let (x, y) = ((i as usize) / n, (i as usize) % n);
        for j in e2.iter_ones() {
            let (y2, z) = ((j as usize) / n, (j as usize) % n);
            if y == y2 {
                pts.push((x, y, z));
            }
        }
    }
    pts
}

/// Check condition (c) for one ordered pair of members: every chain subset
/// with exact outer projections must project, on the outer coordinates, into
/// the family.
fn chain_condition(n: usize, e1: Mask, e2: Mask, family: &EqRelFamily) -> Result<bool> {
    let pts = chain_points(n, e1, e2);
    check_enum_budget("transitivity chain subsets", pts.len() as u32, 20)?;
    // Per chain point: its contribution to the three pair projections.
    let p12: Vec<u64> = pts.iter().map(|&(x, y, _)| 1u64 << (x * n + y)).collect();
    let p23: Vec<u64> = pts.iter().map(|&(_, y, z)| 1u64 << (y * n + z)).collect();
    let p13: Vec<u64> = pts.iter().map(|&(x, _, z)| 1u64 << (x * n + z)).collect();
    let want12 = e1.0 as u64;
    let want23 = e2.0 as u64;
    for sub in 0u64..(1u64 << pts.len()) {
        let (mut m12, mut m23, mut m13) = (0u64, 0u64, 0u64);
        let mut rest = sub;
        while rest != 0 {
            let t = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            m12 |= p12[t];
            m23 |= p23[t];
            m13 |= p13[t];
        }
        if m12 == want12 && m23 == want23 && !family.contains(Mask(m13 as u128)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Apply a permutation after another: `compose_perm(p, q)[x] = q[p[x]]`.
pub fn compose_perm(p: &[usize], q: &[usize]) -> Vec<usize> {
    p.iter().map(|&x| q[x]).collect()
}

fn is_permutation(n: usize, p: &[usize]) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &v in p {
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

/// Bitmask of the graph `{(x, p(x))}` of a permutation.
pub fn perm_graph_mask(p: &[usize]) -> Mask {
    let n = p.len();
    let mut m = Mask::EMPTY;
    for (x, &y) in p.iter().enumerate() {
        m.insert((x * n + y) as u32);
    }
    m
}

/// The family of permutation graphs of a group of permutations of `[n]`.
pub fn eqrel_from_group(n: usize, perms: &[Vec<usize>]) -> Result<EqRelFamily> {
    let group = check_group(n, perms)?;
    EqRelFamily::new(n, group.iter().map(|p| perm_graph_mask(p)))
}

/// Validate that a list of permutations of `[n]` forms a group (deduplicated,
/// closed under composition; identity and inverses follow from finiteness but
/// are checked anyway). Returns the sorted element list.
pub fn check_group(n: usize, perms: &[Vec<usize>]) -> Result<Vec<Vec<usize>>> {
    let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
    for p in perms {
        if !is_permutation(n, p) {
            return Err(Error::argument(format!(
                "{p:?} is not a permutation of [{n}]"
            )));
        }
        set.insert(p.clone());
    }
    if set.is_empty() {
        return Err(Error::argument("a permutation group cannot be empty"));
    }
    for p in &set {
        for q in &set {
            if !set.contains(&compose_perm(p, q)) {
                return Err(Error::argument(format!(
                    "permutation set is not closed: {p:?} then {q:?} escapes"
                )));
            }
        }
    }
    let id: Vec<usize> = (0..n).collect();
    if !set.contains(&id) {
        return Err(Error::argument("permutation set lacks the identity"));
    }
    Ok(set.into_iter().collect())
}

/// A transitive quotient `X(A) / Gamma`: the base set plus a permutation group
/// acting on it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QuotientDescription {
    pub base: usize,
    pub group: Vec<Vec<usize>>,
}

impl QuotientDescription {
    pub fn new(base: usize, group: Vec<Vec<usize>>) -> Result<QuotientDescription> {
        let group = check_group(base, &group)?;
        Ok(QuotientDescription { base, group })
    }

    pub fn group_order(&self) -> usize {
        self.group.len()
    }
}

impl Serialize for QuotientDescription {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            base_size: usize,
            group: &'a [Vec<usize>],
        }
        Repr {
            base_size: self.base,
            group: &self.group,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuotientDescription {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            base_size: usize,
            group: Vec<Vec<usize>>,
        }
        let r = Repr::deserialize(d)?;
        QuotientDescription::new(r.base_size, r.group).map_err(D::Error::custom)
    }
}

/// Is every member the graph of a permutation (both projections bijective)?
pub fn family_is_small(family: &EqRelFamily) -> bool {
    let n = family.base;
    family.members().all(|e| {
        if e.len() as usize != n {
            return false;
        }
        let mut rows = vec![false; n];
        let mut cols = vec![false; n];
        for i in e.iter_ones() {
            rows[(i as usize) / n] = true;
            cols[(i as usize) % n] = true;
        }
        rows.into_iter().all(|r| r) && cols.into_iter().all(|c| c)
    })
}

/// Push every member through `g x g` for a surjection `g` of base sets.
pub fn push_family(family: &EqRelFamily, g: &GMap) -> Result<EqRelFamily> {
    if g.dom() != family.base {
        return Err(Error::argument("collapse domain must match the family base"));
    }
    let n = family.base;
    let m = g.cod();
    let mut members = BTreeSet::new();
    for e in family.members() {
        let mut img = Mask::EMPTY;
        for i in e.iter_ones() {
            let (x, y) = ((i as usize) / n, (i as usize) % n);
            img.insert((g.set_map().apply(x) * m + g.set_map().apply(y)) as u32);
        }
        members.insert(img);
    }
    EqRelFamily::new(m, members)
}

/// Classify a valid family as a permutation quotient: read the group off
/// directly when every member is a permutation graph, otherwise collapse the
/// first witnessed pair of points related to a common one and recurse.
pub fn eqrel_classify(family: &EqRelFamily) -> Result<QuotientDescription> {
    if !eqrel_validate(family)? {
        return Err(Error::argument(
            "family is not an equivalence relation; nothing to classify",
        ));
    }
    classify_valid(family)
}

fn classify_valid(family: &EqRelFamily) -> Result<QuotientDescription> {
    let n = family.base;
    if family_is_small(family) {
        let mut group = Vec::new();
        for e in family.members() {
            let mut p = vec![0usize; n];
            for i in e.iter_ones() {
                p[(i as usize) / n] = (i as usize) % n;
            }
            group.push(p);
        }
        group.sort();
        return QuotientDescription::new(n, group).map_err(|e| {
            Error::integrity(format!("small valid family did not yield a group: {e}"))
        });
    }
    // First witness in canonical order: smallest member mask, then smallest
    // row with two partners, then its two smallest partners.
    let witness = family.members().find_map(|e| {
        (0..n).find_map(|a| {
            let partners: Vec<usize> = (0..n)
                .filter(|y| e.contains((a * n + y) as u32))
                .collect();
            if partners.len() >= 2 {
                Some((partners[0], partners[1]))
            } else {
                None
            }
        })
    });
    let (b, c) = witness.ok_or_else(|| {
        Error::integrity("non-small family with no multi-partner row; members cannot be ample")
    })?;
    // Collapse c onto b. The elementary collapse merges adjacent points, so
    // relabel through an explicit table instead.
    let mut table: Vec<usize> = Vec::with_capacity(n);
    for x in 0..n {
        let y = if x == c { b } else { x };
        table.push(if y > c { y - 1 } else { y });
    }
    let g = GMap::from_table(n, n - 1, table)?;
    let pushed = push_family(family, &g)?;
    if !eqrel_validate(&pushed)? {
        return Err(Error::integrity(
            "pushforward of a valid family failed validation",
        ));
    }
    classify_valid(&pushed)
}

/// All ample subsets of `[n] x [n]`, ascending: the candidate members.
pub fn ample_square_members(n: usize) -> Result<Vec<Mask>> {
    let _ = product_bits(&[n, n])?;
    Ok(enumerate_ample_with_budget(&[n, n], enum_budget_bits())?
        .into_iter()
        .map(|s| s.mask)
        .collect())
}
