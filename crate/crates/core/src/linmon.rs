//! Matrix monoids over the two-element semirings, their contracted algebras,
//! and the linearization into the matrix category.
//!
//! A matrix over F2 or over the Boolean semiring is just a support bitmask.
//! The non-zero matrices span a contracted monoid algebra with monomial
//! structure constants (`u_a u_b = u_{ab}`, with the zero matrix acting as
//! zero). The regular-representation trace form turns radical detection into
//! one exact symmetric kernel computation: full rank modulo a recorded prime
//! certifies semisimplicity, and an exact kernel vector that squares away to
//! zero certifies the opposite. The linearization `phi` sends a support to the
//! corresponding `Y`-basis indicator morphism, pairing F2 with `mu` and the
//! Boolean semiring with `nu`.

use crate::finsets::{product_bits, ProductSubset};
use crate::linalg::{exact_integer_kernel, next_prime, rank_mod_p};
use crate::mask::Mask;
use crate::measures::Measure;
use crate::permcat::{indicator_matrix, trace, IndicatorBasis, PermMatrix, PermObject, TraceMode};
use crate::{rat_string, Error, Rat, Result};
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

/// Which two-element semiring the matrix entries live in.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SemiringKind {
    F2,
    Bool,
}

impl SemiringKind {
    pub fn name(self) -> &'static str {
        match self {
            SemiringKind::F2 => "F2",
            SemiringKind::Bool => "Bool",
        }
    }

    pub fn from_name(s: &str) -> Result<SemiringKind> {
        match s {
            "F2" => Ok(SemiringKind::F2),
            "Bool" => Ok(SemiringKind::Bool),
            other => Err(Error::argument(format!(
                "unknown semiring {other:?}; expected \"F2\" or \"Bool\""
            ))),
        }
    }

    /// The measure whose composition rule matches this semiring's addition.
    pub fn measure(self) -> Measure {
        match self {
            SemiringKind::F2 => Measure::Mu,
            SemiringKind::Bool => Measure::Nu,
        }
    }
}

impl Serialize for SemiringKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for SemiringKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        SemiringKind::from_name(&s).map_err(serde::de::Error::custom)
    }
}

/// Largest `n` for which the full algebra structure (table, Gram form,
/// radical) is computed; the basis has `2^(n^2) - 1` elements.
pub const STRUCTURE_MAX_N: usize = 3;

/// Bit budget for plain matrix enumeration.
pub const ENUMERATE_MAX_BITS: u32 = 25;

/// Recorded prime for full-rank semisimplicity certificates; larger than any
/// algebra dimension in scope.
pub const CERTIFICATE_PRIME: u64 = 65537;

// ---------------------------------------------------------------------------
// Semiring matrices.
// ---------------------------------------------------------------------------

/// A matrix over a two-element semiring, stored as its support. Bit `(i, j)`
/// sits at position `i * cols + j`, matching the product-subset convention
/// for `[rows, cols]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct SRMatrix {
    pub kind: SemiringKind,
    pub rows: usize,
    pub cols: usize,
    pub support: Mask,
}

impl SRMatrix {
    pub fn new(kind: SemiringKind, rows: usize, cols: usize, support: Mask) -> Result<SRMatrix> {
        let bits = product_bits(&[rows, cols])?;
        if !support.is_subset_of(Mask::full(bits)) {
            return Err(Error::argument(format!(
                "support {} exceeds a {rows} x {cols} matrix",
                support.to_hex()
            )));
        }
        Ok(SRMatrix {
            kind,
            rows,
            cols,
            support,
        })
    }

    pub fn zero(kind: SemiringKind, rows: usize, cols: usize) -> Result<SRMatrix> {
        SRMatrix::new(kind, rows, cols, Mask::EMPTY)
    }

    pub fn identity(kind: SemiringKind, n: usize) -> Result<SRMatrix> {
        let mut m = Mask::EMPTY;
        for i in 0..n as u32 {
            m.insert(i * n as u32 + i);
        }
        SRMatrix::new(kind, n, n, m)
    }

    /// Build from 0/1 rows.
    pub fn from_rows(kind: SemiringKind, rows: &[Vec<u8>]) -> Result<SRMatrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Mask::EMPTY;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::argument("ragged rows"));
            }
            for (j, &x) in row.iter().enumerate() {
                if x != 0 {
                    m.insert((i * c + j) as u32);
                }
            }
        }
        SRMatrix::new(kind, r, c, m)
    }

    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.support.contains((i * self.cols + j) as u32)
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    /// The support as a subset of `[rows] x [cols]`.
    pub fn product_subset(&self) -> ProductSubset {
        ProductSubset::new(vec![self.rows, self.cols], self.support)
            .expect("validated at construction")
    }
}

/// Semiring matrix product: parity of the middle sum over F2, existence over
/// the Boolean semiring.
pub fn sr_multiply(a: &SRMatrix, b: &SRMatrix) -> Result<SRMatrix> {
    if a.kind != b.kind {
        return Err(Error::argument("semiring mismatch in multiplication"));
    }
    if a.cols != b.rows {
        return Err(Error::argument(format!(
            "inner dimensions differ: {} vs {}",
            a.cols, b.rows
        )));
    }
    let mut out = Mask::EMPTY;
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut count = 0u32;
            for k in 0..a.cols {
                if a.entry(i, k) && b.entry(k, j) {
                    count += 1;
                    if a.kind == SemiringKind::Bool {
                        break;
                    }
                }
            }
            let hit = match a.kind {
                SemiringKind::F2 => count % 2 == 1,
                SemiringKind::Bool => count > 0,
            };
            if hit {
                out.insert((i * b.cols + j) as u32);
            }
        }
    }
    SRMatrix::new(a.kind, a.rows, b.cols, out)
}

/// Kronecker product, rows and columns paired row-major.
pub fn sr_kron(a: &SRMatrix, b: &SRMatrix) -> Result<SRMatrix> {
    if a.kind != b.kind {
        return Err(Error::argument("semiring mismatch in Kronecker product"));
    }
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut m = Mask::EMPTY;
    for bit_a in a.support.iter_ones() {
        let (i1, j1) = (bit_a as usize / a.cols, bit_a as usize % a.cols);
        for bit_b in b.support.iter_ones() {
            let (i2, j2) = (bit_b as usize / b.cols, bit_b as usize % b.cols);
            m.insert(((i1 * b.rows + i2) * cols + (j1 * b.cols + j2)) as u32);
        }
    }
    SRMatrix::new(a.kind, rows, cols, m)
}

/// All non-zero `n x n` matrices, in mask order.
pub fn enumerate_nonzero(kind: SemiringKind, n: usize) -> Result<Vec<SRMatrix>> {
    let bits = product_bits(&[n, n])?;
    if bits > ENUMERATE_MAX_BITS {
        return Err(Error::capacity("matrix enumeration", bits, ENUMERATE_MAX_BITS));
    }
    (1u128..(1u128 << bits))
        .map(|raw| SRMatrix::new(kind, n, n, Mask(raw)))
        .collect()
}

// ---------------------------------------------------------------------------
// The contracted monoid algebra.
// ---------------------------------------------------------------------------

fn algebra_bits(n: usize) -> Result<u32> {
    if n == 0 || n > STRUCTURE_MAX_N {
        return Err(Error::capacity(
            "algebra structure analysis",
            (n * n) as u32,
            (STRUCTURE_MAX_N * STRUCTURE_MAX_N) as u32,
        ));
    }
    product_bits(&[n, n])
}

/// An element of the contracted algebra: a rational combination of the basis
/// `u_m`, one for each non-zero matrix `m`, with `u_a u_b = u_{ab}` and the
/// zero product acting as zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MonAlgElement {
    pub kind: SemiringKind,
    pub n: usize,
    terms: BTreeMap<Mask, Rat>,
}

impl MonAlgElement {
    pub fn zero(kind: SemiringKind, n: usize) -> MonAlgElement {
        MonAlgElement {
            kind,
            n,
            terms: BTreeMap::new(),
        }
    }

    /// The basis element of one non-zero matrix.
    pub fn basis(kind: SemiringKind, n: usize, mask: Mask) -> Result<MonAlgElement> {
        let bits = product_bits(&[n, n])?;
        if mask.is_empty() || !mask.is_subset_of(Mask::full(bits)) {
            return Err(Error::argument(
                "basis elements are indexed by non-zero matrices",
            ));
        }
        let mut terms = BTreeMap::new();
        terms.insert(mask, Rat::one());
        Ok(MonAlgElement { kind, n, terms })
    }

    pub fn from_terms(
        kind: SemiringKind,
        n: usize,
        entries: impl IntoIterator<Item = (Mask, Rat)>,
    ) -> Result<MonAlgElement> {
        let mut e = MonAlgElement::zero(kind, n);
        let bits = product_bits(&[n, n])?;
        for (m, c) in entries {
            if m.is_empty() || !m.is_subset_of(Mask::full(bits)) {
                return Err(Error::argument("term outside the non-zero matrix basis"));
            }
            e.accumulate(m, c);
        }
        Ok(e)
    }

    fn accumulate(&mut self, m: Mask, c: Rat) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mask, &Rat)> {
        self.terms.iter().map(|(&m, c)| (m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &MonAlgElement) -> Result<MonAlgElement> {
        if self.kind != other.kind || self.n != other.n {
            return Err(Error::argument("algebra mismatch in addition"));
        }
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.accumulate(m, c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, k: &Rat) -> MonAlgElement {
        let mut out = MonAlgElement::zero(self.kind, self.n);
        for (m, c) in self.terms() {
            out.accumulate(m, c * k);
        }
        out
    }

    pub fn mul(&self, other: &MonAlgElement) -> Result<MonAlgElement> {
        if self.kind != other.kind || self.n != other.n {
            return Err(Error::argument("algebra mismatch in multiplication"));
        }
        let mut out = MonAlgElement::zero(self.kind, self.n);
        for (ma, ca) in self.terms() {
            let a = SRMatrix::new(self.kind, self.n, self.n, ma)?;
            for (mb, cb) in other.terms() {
                let b = SRMatrix::new(self.kind, self.n, self.n, mb)?;
                let p = sr_multiply(&a, &b)?;
                if !p.is_zero() {
                    out.accumulate(p.support, ca * cb);
                }
            }
        }
        Ok(out)
    }

    /// Smallest `k >= 1` with `self^k = 0`, if one exists within the cap.
    pub fn nilpotency_exponent(&self, cap: usize) -> Result<Option<usize>> {
        let mut power = self.clone();
        for k in 1..=cap {
            if power.is_zero() {
                return Ok(Some(k));
            }
            power = power.mul(self)?;
        }
        Ok(None)
    }

    /// Whether repeated squaring reaches zero within `cap` squarings.
    pub fn squares_to_zero(&self, cap: usize) -> Result<bool> {
        let mut s = self.clone();
        for _ in 0..cap {
            if s.is_zero() {
                return Ok(true);
            }
            s = s.mul(&s)?;
        }
        Ok(s.is_zero())
    }
}

/// Precomputed structure of the contracted algebra: the full multiplication
/// table over basis masks and the fixed-point counts of left multiplication.
pub struct MonAlgebra {
    pub kind: SemiringKind,
    pub n: usize,
    pub dim: usize,
    table: Vec<u32>,
    fix: Vec<i64>,
}

impl MonAlgebra {
    pub fn new(kind: SemiringKind, n: usize) -> Result<MonAlgebra> {
        let bits = algebra_bits(n)?;
        let dim = (1usize << bits) - 1;
        let mut table = vec![0u32; dim * dim];
        for a in 1..=dim {
            let sa = SRMatrix::new(kind, n, n, Mask(a as u128))?;
            for b in 1..=dim {
                let sb = SRMatrix::new(kind, n, n, Mask(b as u128))?;
                table[(a - 1) * dim + (b - 1)] = sr_multiply(&sa, &sb)?.support.0 as u32;
            }
        }
        let mut fix = vec![0i64; dim];
        for m in 1..=dim {
            let mut count = 0i64;
            for c in 1..=dim {
                if table[(m - 1) * dim + (c - 1)] as usize == c {
                    count += 1;
                }
            }
            fix[m - 1] = count;
        }
        Ok(MonAlgebra {
            kind,
            n,
            dim,
            table,
            fix,
        })
    }

    /// Product of two basis masks (possibly zero).
    pub fn product_mask(&self, a: Mask, b: Mask) -> Mask {
        Mask(self.table[(a.0 as usize - 1) * self.dim + (b.0 as usize - 1)] as u128)
    }

    /// Number of non-zero `c` fixed by left multiplication with `m`.
    pub fn fixed_points(&self, m: Mask) -> i64 {
        self.fix[m.0 as usize - 1]
    }

    /// The regular-representation trace form: `Gram(a, b)` counts the
    /// non-zero matrices fixed by left multiplication with `a b`.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        let mut g = vec![vec![0i64; self.dim]; self.dim];
        for a in 1..=self.dim {
            for b in 1..=self.dim {
                let p = self.table[(a - 1) * self.dim + (b - 1)] as usize;
                g[a - 1][b - 1] = if p == 0 { 0 } else { self.fix[p - 1] };
            }
        }
        g
    }
}

/// The trace form of the contracted algebra.
pub fn gram_matrix(kind: SemiringKind, n: usize) -> Result<Vec<Vec<i64>>> {
    Ok(MonAlgebra::new(kind, n)?.gram())
}

// ---------------------------------------------------------------------------
// Linearization into the matrix category.
// ---------------------------------------------------------------------------

/// The indicator morphism of a matrix support, between the `Y` objects of its
/// column and row sets, under the measure paired with the semiring.
pub fn phi(a: &SRMatrix) -> Result<PermMatrix> {
    let measure = a.kind.measure();
    if a.is_zero() {
        return Ok(PermMatrix::zero(
            measure,
            PermObject::y_object(a.cols)?,
            PermObject::y_object(a.rows)?,
        ));
    }
    indicator_matrix(measure, a.cols, a.rows, &a.product_subset(), IndicatorBasis::Y)
}

/// Linear extension of `phi` to algebra elements.
pub fn phi_linear(e: &MonAlgElement) -> Result<PermMatrix> {
    let measure = e.kind.measure();
    let mut out = PermMatrix::zero(
        measure,
        PermObject::y_object(e.n)?,
        PermObject::y_object(e.n)?,
    );
    for (m, c) in e.terms() {
        let sr = SRMatrix::new(e.kind, e.n, e.n, m)?;
        out = out.add(&phi(&sr)?.scale(c))?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Radical and semisimplicity.
// ---------------------------------------------------------------------------

const SQUARING_CAP: usize = 12;

type RadicalStore = BTreeMap<(SemiringKind, usize), Vec<MonAlgElement>>;

/// The exact Gram kernel is expensive at dimension 511; memoize per process.
fn radical_cache() -> &'static Mutex<RadicalStore> {
    static CACHE: OnceLock<Mutex<RadicalStore>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// An exact basis of the kernel of the trace form, returned as verified
/// nilpotent algebra elements with primitive integer coefficients.
pub fn radical_basis(kind: SemiringKind, n: usize) -> Result<Vec<MonAlgElement>> {
    if let Some(hit) = radical_cache()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .get(&(kind, n))
    {
        return Ok(hit.clone());
    }
    let alg = MonAlgebra::new(kind, n)?;
    let gram = alg.gram();
    let kernel = exact_integer_kernel(&gram)?;
    let mut basis = Vec::with_capacity(kernel.len());
    for v in kernel {
        let mut e = MonAlgElement::zero(kind, n);
        for (i, x) in v.iter().enumerate() {
            if !x.is_zero() {
                e.accumulate(Mask((i + 1) as u128), Rat::from_integer(x.clone()));
            }
        }
        if e.is_zero() {
            return Err(Error::integrity("kernel produced a zero algebra element"));
        }
        if !e.squares_to_zero(SQUARING_CAP)? {
            return Err(Error::integrity(
                "trace-form kernel element is not nilpotent; the radical method is falsified",
            ));
        }
        basis.push(e);
    }
    radical_cache()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert((kind, n), basis.clone());
    Ok(basis)
}

/// A nilpotent algebra element whose image has non-zero categorical trace.
#[derive(Clone, Debug)]
pub struct TraceWitness {
    pub element: MonAlgElement,
    pub image: PermMatrix,
    pub trace: Rat,
    pub nilpotency_exponent: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct WitnessTerm {
    pub mask_hex: String,
    pub coeff: String,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct WitnessReport {
    pub terms: Vec<WitnessTerm>,
    pub nilpotency_exponent: usize,
    pub trace: String,
}

impl TraceWitness {
    pub fn report(&self) -> WitnessReport {
        WitnessReport {
            terms: self
                .element
                .terms()
                .map(|(m, c)| WitnessTerm {
                    mask_hex: m.to_hex(),
                    coeff: rat_string(c),
                })
                .collect(),
            nilpotency_exponent: self.nilpotency_exponent,
            trace: rat_string(&self.trace),
        }
    }
}

/// Scan the radical (basis elements first, then pairwise sums in basis order)
/// for an element whose linearization has non-zero categorical trace.
/// Returns `None` when the radical is trivial; an exhausted scan over a
/// non-trivial radical is an integrity error.
pub fn find_trace_witness(kind: SemiringKind, n: usize) -> Result<Option<TraceWitness>> {
    let radical = radical_basis(kind, n)?;
    if radical.is_empty() {
        return Ok(None);
    }
    let dim = (1usize << product_bits(&[n, n])?) - 1;
    let mut candidates: Vec<MonAlgElement> = radical.clone();
    for i in 0..radical.len() {
        for j in (i + 1)..radical.len() {
            candidates.push(radical[i].add(&radical[j])?);
        }
    }
    for r in candidates {
        let image = phi_linear(&r)?;
        let t = trace(&image, TraceMode::Categorical)?;
        if t.is_zero() {
            continue;
        }
        let exponent = r
            .nilpotency_exponent(dim + 1)?
            .ok_or_else(|| Error::integrity("radical element is not nilpotent"))?;
        return Ok(Some(TraceWitness {
            element: r,
            image,
            trace: t,
            nilpotency_exponent: exponent,
        }));
    }
    Err(Error::integrity(
        "non-trivial radical but no trace witness found",
    ))
}

/// Summary of one algebra's structure, with its certificate.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct AlgebraReport {
    pub kind: SemiringKind,
    pub n: usize,
    pub algebra_dim: usize,
    pub radical_dim: usize,
    pub semisimple: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_prime: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
}

fn report_cache() -> &'static Mutex<BTreeMap<(SemiringKind, usize), AlgebraReport>> {
    static CACHE: OnceLock<Mutex<BTreeMap<(SemiringKind, usize), AlgebraReport>>> =
        OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// Decide semisimplicity. A full Gram rank modulo the recorded prime is a
/// complete certificate; otherwise the exact radical is computed and its size
/// reported.
pub fn semisimplicity_report(kind: SemiringKind, n: usize) -> Result<AlgebraReport> {
    if let Some(hit) = report_cache()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .get(&(kind, n))
    {
        return Ok(hit.clone());
    }
    let report = compute_report(kind, n)?;
    report_cache()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert((kind, n), report.clone());
    Ok(report)
}

fn compute_report(kind: SemiringKind, n: usize) -> Result<AlgebraReport> {
    let alg = MonAlgebra::new(kind, n)?;
    let gram = alg.gram();
    let dim = alg.dim;
    let mut prime = CERTIFICATE_PRIME;
    if rank_mod_p(&gram, prime) == dim {
        return Ok(AlgebraReport {
            kind,
            n,
            algebra_dim: dim,
            radical_dim: 0,
            semisimple: true,
            certificate_prime: Some(prime),
            witness: None,
        });
    }
    let radical = radical_basis(kind, n)?;
    if radical.is_empty() {
        // The first prime was unlucky; find one that exhibits full rank.
        loop {
            prime = next_prime(prime + 1);
            if rank_mod_p(&gram, prime) == dim {
                break;
            }
        }
        return Ok(AlgebraReport {
            kind,
            n,
            algebra_dim: dim,
            radical_dim: 0,
            semisimple: true,
            certificate_prime: Some(prime),
            witness: None,
        });
    }
    Ok(AlgebraReport {
        kind,
        n,
        algebra_dim: dim,
        radical_dim: radical.len(),
        semisimple: false,
        certificate_prime: None,
        witness: None,
    })
}
