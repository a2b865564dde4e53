//! Exact integer linear algebra for kernel and rank computations.
//!
//! Ranks modulo a prime give one-sided certificates (a full modular rank
//! forces full rational rank). Exact kernels come from fraction-free
//! elimination at modest dimensions and from a multi-prime Chinese-remainder
//! reconstruction at larger ones; in both cases every returned vector is
//! re-verified against the original matrix with big-integer arithmetic, so the
//! modular path is only ever a guide, never a source of truth.

use crate::{Error, Rat, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Deterministic trial-division primality test; adequate for the fixed prime
/// ranges used here.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn next_prime(from: u64) -> u64 {
    let mut p = from.max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, p);
        }
        base = mulmod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn invmod(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

fn reduce_mod(x: i64, p: u64) -> u64 {
    let r = x % p as i64;
    if r < 0 {
        (r + p as i64) as u64
    } else {
        r as u64
    }
}

/// Reduced row echelon form modulo `p` with the smallest-pivot-row rule.
/// Returns the rank, the pivot columns, and the canonical kernel basis
/// (one vector per free column, unit at the free column).
#[allow(clippy::needless_range_loop)] // elimination indexes two rows at once
pub fn kernel_mod_p(mat: &[Vec<i64>], p: u64) -> (usize, Vec<usize>, Vec<Vec<u64>>) {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    let mut a: Vec<Vec<u64>> = mat
        .iter()
        .map(|r| r.iter().map(|&x| reduce_mod(x, p)).collect())
        .collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        let pivot = (r..rows).find(|&i| a[i][c] != 0);
        let Some(pr) = pivot else { continue };
        a.swap(r, pr);
        let inv = invmod(a[r][c], p);
        for x in a[r].iter_mut() {
            *x = mulmod(*x, inv, p);
        }
        for i in 0..rows {
            if i != r && a[i][c] != 0 {
                let f = a[i][c];
                for j in 0..cols {
                    let sub = mulmod(f, a[r][j], p);
                    a[i][j] = (a[i][j] + p - sub) % p;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let mut kernel = Vec::new();
    let pivot_set: Vec<Option<usize>> = {
        let mut v = vec![None; cols];
        for (row, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = Some(row);
        }
        v
    };
    for f in 0..cols {
        if pivot_set[f].is_some() {
            continue;
        }
        let mut v = vec![0u64; cols];
        v[f] = 1;
        for (row, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = (p - a[row][f]) % p;
        }
        kernel.push(v);
    }
    (pivot_cols.len(), pivot_cols, kernel)
}

pub fn rank_mod_p(mat: &[Vec<i64>], p: u64) -> usize {
    kernel_mod_p(mat, p).0
}

/// Divide a vector by the greatest common divisor of its entries and make the
/// first non-zero entry positive.
fn normalize_primitive(v: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for x in v.iter() {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return;
    }
    let flip = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    for x in v.iter_mut() {
        *x = &*x / &g;
        if flip {
            *x = -&*x;
        }
    }
}

/// Exact kernel by fraction-free (division-exact) forward elimination followed
/// by rational back-substitution; intended for modest dimensions.
pub fn bareiss_kernel(mat: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    let mut a: Vec<Vec<BigInt>> = mat
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut prev = BigInt::one();
    let mut pivot_cols = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        let pivot = (r..rows).find(|&i| !a[i][c].is_zero());
        let Some(pr) = pivot else { continue };
        a.swap(r, pr);
        for i in (r + 1)..rows {
            for j in (c + 1)..cols {
                let num = &a[i][j] * &a[r][c] - &a[i][c] * &a[r][j];
                a[i][j] = num / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivot_cols.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    // Back-substitute rationally inside the echelon form.
    let mut kernel = Vec::new();
    let pivot_of_col: Vec<Option<usize>> = {
        let mut v = vec![None; cols];
        for (row, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = Some(row);
        }
        v
    };
    for f in 0..cols {
        if pivot_of_col[f].is_some() {
            continue;
        }
        let mut v: Vec<Rat> = vec![Rat::zero(); cols];
        v[f] = Rat::one();
        for row in (0..pivot_cols.len()).rev() {
            let pc = pivot_cols[row];
            let mut acc = Rat::zero();
            for j in (pc + 1)..cols {
                if !v[j].is_zero() {
                    acc += Rat::from_integer(a[row][j].clone()) * &v[j];
                }
            }
            v[pc] = -acc / Rat::from_integer(a[row][pc].clone());
        }
        let mut lcm = BigInt::one();
        for x in &v {
            lcm = lcm.lcm(x.denom());
        }
        let mut iv: Vec<BigInt> = v
            .iter()
            .map(|x| x.numer() * (&lcm / x.denom()))
            .collect();
        normalize_primitive(&mut iv);
        kernel.push(iv);
    }
    kernel
}

/// Exact check that every vector lies in the kernel of the matrix.
pub fn kernel_verifies(mat: &[Vec<i64>], vecs: &[Vec<BigInt>]) -> bool {
    for v in vecs {
        for row in mat {
            let mut acc = BigInt::zero();
            for (c, x) in row.iter().enumerate() {
                if *x != 0 {
                    acc += BigInt::from(*x) * &v[c];
                }
            }
            if !acc.is_zero() {
                return false;
            }
        }
    }
    true
}

/// Combine residues by the Chinese remainder theorem; returns (value, modulus)
/// with `0 <= value < modulus`.
pub fn crt_combine(residues: &[u64], primes: &[u64]) -> (BigInt, BigInt) {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (&r, &p) in residues.iter().zip(primes) {
        let pb = BigInt::from(p);
        let diff = (BigInt::from(r) - &x).mod_floor(&pb);
        let m_inv = {
            let m_mod_p: BigInt = m.mod_floor(&pb);
            let m_u: u64 = m_mod_p.try_into().expect("reduced below a u64 prime");
            BigInt::from(invmod(m_u, p))
        };
        let k = (diff * m_inv).mod_floor(&pb);
        x += &m * k;
        m *= pb;
    }
    (x, m)
}

/// Recover `num/den` from `num * den^-1 mod m` when both are below
/// `sqrt(m/2)`; the classical half-extended-Euclid bound.
pub fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let bound = (m / BigInt::from(2)).sqrt();
    let mut r0 = m.clone();
    let mut r1 = a.mod_floor(m);
    let mut t0 = BigInt::zero();
    let mut t1 = BigInt::one();
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let (mut num, mut den) = (r1, t1);
    if den.is_negative() {
        num = -num;
        den = -den;
    }
    if num.gcd(&den) != BigInt::one() {
        return None;
    }
    Some((num, den))
}

/// Dimension threshold below which the fraction-free path is used directly.
pub const BAREISS_DIM_LIMIT: usize = 64;

/// First prime of the deterministic modulus sequence for reconstruction.
pub const RECONSTRUCTION_PRIME_BASE: u64 = 2_000_000_011;

const MAX_RECONSTRUCTION_PRIMES: usize = 16;

/// One modular snapshot: the prime, the rank it attained, its pivot columns,
/// and its canonical kernel basis.
type ModularKernel = (u64, usize, Vec<usize>, Vec<Vec<u64>>);

/// Exact integer kernel basis of a matrix, verified against the input.
///
/// At modest size this is fraction-free elimination. Beyond that the kernel is
/// assembled from reductions modulo a deterministic sequence of primes,
/// reconciled by Chinese remaindering and rational reconstruction, and then
/// verified exactly; primes whose reduction loses rank are discarded.
pub fn exact_integer_kernel(mat: &[Vec<i64>]) -> Result<Vec<Vec<BigInt>>> {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    if cols == 0 {
        return Ok(Vec::new());
    }
    if cols <= BAREISS_DIM_LIMIT {
        let basis = bareiss_kernel(mat);
        if !kernel_verifies(mat, &basis) {
            return Err(Error::integrity("fraction-free kernel failed verification"));
        }
        return Ok(basis);
    }
    let mut next = RECONSTRUCTION_PRIME_BASE;
    let mut results: Vec<ModularKernel> = Vec::new();
    let mut used = 0usize;
    while used < MAX_RECONSTRUCTION_PRIMES {
        let p = next_prime(next);
        next = p + 1;
        used += 1;
        let (rank, pivots, kernel) = kernel_mod_p(mat, p);
        // A full modular rank certifies a trivial rational kernel outright.
        if rank == cols {
            return Ok(Vec::new());
        }
        results.push((p, rank, pivots, kernel));
        // Keep only the primes attaining the best (largest) rank seen.
        let best = results.iter().map(|r| r.1).max().unwrap();
        results.retain(|r| r.1 == best);
        let pivots0 = results[0].2.clone();
        results.retain(|r| r.2 == pivots0);
        if results.len() < 3 {
            continue;
        }
        let primes: Vec<u64> = results.iter().map(|r| r.0).collect();
        let kdim = results[0].3.len();
        let mut basis = Vec::with_capacity(kdim);
        let mut ok = true;
        'vectors: for v in 0..kdim {
            let mut ivec = Vec::with_capacity(cols);
            for c in 0..cols {
                let residues: Vec<u64> = results.iter().map(|r| r.3[v][c]).collect();
                let (val, modulus) = crt_combine(&residues, &primes);
                match rational_reconstruct(&val, &modulus) {
                    Some((num, den)) => ivec.push(Rat::new(num, den)),
                    None => {
                        ok = false;
                        break 'vectors;
                    }
                }
            }
            let mut lcm = BigInt::one();
            for x in &ivec {
                lcm = lcm.lcm(x.denom());
            }
            let mut iv: Vec<BigInt> = ivec.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
            normalize_primitive(&mut iv);
            basis.push(iv);
        }
        if ok && kernel_verifies(mat, &basis) {
            return Ok(basis);
        }
    }
    Err(Error::integrity(
        "kernel reconstruction did not stabilize within the prime budget",
    ))
}

/// Exact membership of a vector in the rational row span; intended for small
/// spanning sets.
#[allow(clippy::needless_range_loop)] // elimination indexes two rows at once
pub fn in_rational_span(span: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    let cols = v.len();
    let mut rows: Vec<Vec<Rat>> = span
        .iter()
        .map(|r| r.iter().map(|x| Rat::from_integer(x.clone())).collect())
        .collect();
    let mut target: Vec<Rat> = v.iter().map(|x| Rat::from_integer(x.clone())).collect();
    let mut r = 0usize;
    for c in 0..cols {
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = rows[r][c].clone();
        for j in 0..cols {
            rows[r][j] = &rows[r][j] / &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..cols {
                    let sub = &f * &rows[r][j];
                    rows[i][j] = &rows[i][j] - sub;
                }
            }
        }
        if !target[c].is_zero() {
            let f = target[c].clone();
            for j in 0..cols {
                let sub = &f * &rows[r][j];
                target[j] = &target[j] - sub;
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    target.iter().all(|x| x.is_zero())
}
