//! The two regular measures on transitive pieces, and the invariant pair ring.
//!
//! A regular measure assigns `alpha^(n-1)` to `X(n)` and is multiplicative over
//! fiber squares. Solving the multiplicativity constraint over the elementary
//! squares — with the constraint generated from the decomposition engine, not
//! written down by hand — pins `alpha` to −2 or −1; those two solutions are
//! named `mu` and `nu`. The pair `(mu, nu)` embeds the full invariant ring, with
//! the first coordinate constrained to have odd denominator.

use crate::gsets::{
    elementary_collapse, x_product_decompose, y_set_decompose, FormalGSet, GMap,
    QuotientDescription,
};
use crate::{rat_int, Error, Rat, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeSet;

/// One of the two regular measures: `mu` at `alpha = -2`, `nu` at `alpha = -1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Measure {
    Mu,
    Nu,
}

impl Measure {
    pub fn alpha_int(self) -> i64 {
        match self {
            Measure::Mu => -2,
            Measure::Nu => -1,
        }
    }

    pub fn alpha(self) -> Rat {
        rat_int(self.alpha_int())
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::Mu => "mu",
            Measure::Nu => "nu",
        }
    }

    pub fn from_name(s: &str) -> Result<Measure> {
        match s {
            "mu" => Ok(Measure::Mu),
            "nu" => Ok(Measure::Nu),
            other => Err(Error::argument(format!(
                "unknown measure {other:?}; expected \"mu\" or \"nu\""
            ))),
        }
    }

    /// Value on a single transitive piece `X(n)`.
    pub fn on_piece(self, n: usize) -> Rat {
        debug_assert!(n >= 1);
        self.alpha().pow((n as i32) - 1)
    }
}

impl Serialize for Measure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Measure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Measure::from_name(&s).map_err(serde::de::Error::custom)
    }
}

/// Measure of a formal sum of pieces: additive with multiplicity.
pub fn eval_measure(m: Measure, g: &FormalGSet) -> Rat {
    let mut total = Rat::zero();
    for (piece, mult) in g.iter() {
        total += m.on_piece(piece.size) * rat_int(mult as i64);
    }
    total
}

/// Measure of the map `X(A) -> X(B)` induced by a surjection: `alpha^(|A|-|B|)`.
pub fn map_measure(m: Measure, f: &GMap) -> Rat {
    m.alpha().pow((f.dom() - f.cod()) as i32)
}

/// How to evaluate the measure of `Y(n)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum YMeasureMethod {
    ClosedForm,
    Decompose,
}

/// Measure of `Y(n)`, by the closed form or by summing its decomposition.
pub fn y_measure(m: Measure, n: usize, method: YMeasureMethod) -> Result<Rat> {
    match method {
        YMeasureMethod::ClosedForm => Ok(match m {
            Measure::Mu => {
                if n % 2 == 1 {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            }
            Measure::Nu => {
                if n >= 1 {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            }
        }),
        YMeasureMethod::Decompose => {
            if n > 8 {
                return Err(Error::capacity("Y-measure by decomposition", n as u32, 8));
            }
            Ok(eval_measure(m, &y_set_decompose(n)?))
        }
    }
}

/// Measure of the quotient `X(A)/Gamma`: the measure of `X(A)` divided by the
/// group order.
pub fn quotient_measure(m: Measure, q: &QuotientDescription) -> Rat {
    m.on_piece(q.base) / rat_int(q.group_order() as i64)
}

// ---------------------------------------------------------------------------
// Solving for the regular parameters.
// ---------------------------------------------------------------------------

/// Integer polynomial in `alpha`, coefficients ascending by degree.
pub type IntPoly = Vec<BigInt>;

fn poly_trim(p: &mut IntPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

pub fn poly_eval(p: &[BigInt], at: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in p.iter().rev() {
        acc = acc * at + Rat::from_integer(c.clone());
    }
    acc
}

/// The multiplicativity constraint of one elementary fiber square with
/// domain size `n`: measure of the decomposition minus measure of the
/// square, as a polynomial in `alpha`. `same_point` selects whether the two
/// collapses merge the same pair.
pub fn elementary_square_constraint(n: usize, same_point: bool) -> Result<IntPoly> {
    if n < 2 || (!same_point && n < 3) {
        return Err(Error::argument(format!(
            "no elementary square with domain size {n} and same_point={same_point}"
        )));
    }
    let f = elementary_collapse(n, 0)?;
    let g = if same_point {
        f.clone()
    } else {
        elementary_collapse(n, 1)?
    };
    let pieces = x_product_decompose(&f, &g)?;
    // Left side: sum of alpha^(size-1) over the pieces. Right side:
    // alpha^(n-1) * alpha^(n-1) / alpha^(n-2) = alpha^n.
    let mut poly: IntPoly = vec![BigInt::zero(); n + 3];
    for (piece, mult) in pieces.iter() {
        poly[piece.size - 1] += BigInt::from(mult);
    }
    poly[n] -= BigInt::one();
    poly_trim(&mut poly);
    Ok(poly)
}

/// Strip the common power of `alpha` (legitimate because a regular measure
/// has `alpha != 0`) and return the primitive constraint.
pub fn deflate_constraint(p: &[BigInt]) -> IntPoly {
    let first = p.iter().position(|c| !c.is_zero());
    match first {
        Some(k) => p[k..].to_vec(),
        None => Vec::new(),
    }
}

fn small_divisors(c: &BigInt) -> Result<Vec<i64>> {
    let c: i64 = c
        .abs()
        .try_into()
        .map_err(|_| Error::integrity("constraint coefficient unexpectedly large"))?;
    debug_assert!(c != 0);
    Ok((1..=c).filter(|d| c % d == 0).collect())
}

/// All rational roots of a non-zero integer polynomial, by the rational root
/// test with exact evaluation.
pub fn rational_roots(p: &[BigInt]) -> Result<BTreeSet<Rat>> {
    let p = deflate_constraint(p);
    let mut roots = BTreeSet::new();
    if p.len() <= 1 {
        return Ok(roots); // constants have no roots; callers skip zero polys
    }
    for num in small_divisors(&p[0])? {
        for den in small_divisors(p.last().unwrap())? {
            for sign in [1i64, -1] {
                let cand = Rat::new(BigInt::from(sign * num), BigInt::from(den));
                if poly_eval(&p, &cand).is_zero() {
                    roots.insert(cand);
                }
            }
        }
    }
    Ok(roots)
}

/// Solve for every `alpha` compatible with all elementary-square constraints
/// at domain sizes 2 through 5. The expected answer is `{-2, -1}`.
pub fn solve_regular_parameters() -> Result<Vec<Rat>> {
    let mut solution: Option<BTreeSet<Rat>> = None;
    for n in 2..=5usize {
        for same_point in [true, false] {
            if !same_point && n < 3 {
                continue;
            }
            let constraint = elementary_square_constraint(n, same_point)?;
            if constraint.is_empty() {
                continue; // identically satisfied; no information
            }
            let roots = rational_roots(&constraint)?;
            solution = Some(match solution {
                None => roots,
                Some(prev) => prev.intersection(&roots).cloned().collect(),
            });
        }
    }
    let solution = solution
        .ok_or_else(|| Error::integrity("no elementary square produced a constraint"))?;
    Ok(solution.into_iter().collect())
}

// ---------------------------------------------------------------------------
// The invariant pair ring.
// ---------------------------------------------------------------------------

/// An element of the invariant ring, stored as its pair of measure values.
/// The first coordinate must be a 2-adic integer (odd denominator).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ThetaElement {
    mu_coord: Rat,
    nu_coord: Rat,
}

impl ThetaElement {
    pub fn new(mu_coord: Rat, nu_coord: Rat) -> Result<ThetaElement> {
        if (mu_coord.denom() % BigInt::from(2)).is_zero() {
            return Err(Error::integrity(format!(
                "first coordinate {mu_coord} has even denominator; the pair is outside the invariant ring"
            )));
        }
        Ok(ThetaElement { mu_coord, nu_coord })
    }

    pub fn from_integer(n: i64) -> ThetaElement {
        ThetaElement {
            mu_coord: rat_int(n),
            nu_coord: rat_int(n),
        }
    }

    pub fn mu_coord(&self) -> &Rat {
        &self.mu_coord
    }

    pub fn nu_coord(&self) -> &Rat {
        &self.nu_coord
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ThetaOp {
    Add,
    Mul,
}

/// Coordinatewise ring arithmetic with membership re-validation.
pub fn theta_arith(a: &ThetaElement, b: &ThetaElement, op: ThetaOp) -> Result<ThetaElement> {
    let (m, n) = match op {
        ThetaOp::Add => (&a.mu_coord + &b.mu_coord, &a.nu_coord + &b.nu_coord),
        ThetaOp::Mul => (&a.mu_coord * &b.mu_coord, &a.nu_coord * &b.nu_coord),
    };
    ThetaElement::new(m, n)
}

/// The invariant pair of a formal sum of pieces.
pub fn theta_of_gset(g: &FormalGSet) -> Result<ThetaElement> {
    ThetaElement::new(eval_measure(Measure::Mu, g), eval_measure(Measure::Nu, g))
}

/// The invariant pair of a quotient `X(A)/Gamma`.
pub fn theta_of_quotient(q: &QuotientDescription) -> Result<ThetaElement> {
    ThetaElement::new(
        quotient_measure(Measure::Mu, q),
        quotient_measure(Measure::Nu, q),
    )
}
