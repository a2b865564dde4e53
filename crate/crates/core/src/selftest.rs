//! Replayable end-to-end checks over the whole library.
//!
//! Each claim re-derives one headline fact from scratch and reports pass or
//! fail with a one-line detail, so a corrupted build names the broken area
//! instead of failing obscurely downstream. The quick level covers everything
//! that finishes in seconds; the full level adds the two dimension-511
//! algebra analyses (the size-3 semisimplicity certificate and the size-3
//! Boolean radical with its trace witness).

use crate::finsets::{count_ample_power2, CountMethod, ProductSubset};
use crate::gsets::{
    ample_square_members, elementary_collapse, eqrel_classify, eqrel_from_group, eqrel_validate,
    x_product_decompose, EqRelFamily, FormalGSet,
};
use crate::linmon::{
    enumerate_nonzero, find_trace_witness, phi, semisimplicity_report, sr_kron, sr_multiply,
    SemiringKind,
};
use crate::mask::Mask;
use crate::measures::{
    eval_measure, solve_regular_parameters, theta_arith, theta_of_gset, y_measure, Measure,
    ThetaElement, ThetaOp, YMeasureMethod,
};
use crate::permcat::{
    compose, dimension, indicator_compose_chain, indicator_matrix, snake_identities_hold,
    tensor_matrix, tensor_matrix_oracle, tensor_object, trace, ComposeMode, IndicatorBasis,
    PermMatrix, PermObject, TraceMode,
};
use crate::{rat_int, rat_pow, Error, Rat, Result};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How much of the battery to run.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    pub fn from_name(s: &str) -> Result<Level> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(Error::argument(format!(
                "unknown level {other:?}; expected \"quick\" or \"full\""
            ))),
        }
    }
}

/// One replayed claim: a stable key, a human-readable detail, and the verdict.
#[derive(Clone, Debug)]
pub struct Claim {
    pub key: String,
    pub detail: String,
    pub pass: bool,
}

fn run_check(key: &str, f: impl FnOnce() -> Result<String>) -> Claim {
    match f() {
        Ok(detail) => Claim {
            key: key.to_string(),
            detail,
            pass: true,
        },
        Err(e) => Claim {
            key: key.to_string(),
            detail: e.to_string(),
            pass: false,
        },
    }
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::integrity(format!("{what}: got {got:?}, want {want:?}")))
    }
}

/// Run the battery and collect the verdicts.
pub fn run(level: Level) -> Vec<Claim> {
    let mut claims = vec![
        run_check("ample count", check_ample_counts),
        run_check("measure solve", check_measure_solve),
        run_check("elementary squares", check_elementary_squares),
        run_check("y-measure table", check_y_measure_table),
        run_check("theta ring", check_theta_ring),
        run_check("perm compose", check_compose_routes),
        run_check("perm tensor", check_tensor),
        run_check("perm snake", check_snakes),
        run_check("perm trace", check_traces),
        run_check("perm dimension", check_dimensions),
        run_check("classify", check_classification),
        run_check("alg functor", check_functor),
    ];
    if level == Level::Full {
        claims.push(run_check("alg report f2 n=3", check_f2_semisimple));
        claims.push(run_check("alg radical bool n=3", check_bool3_radical));
        claims.push(run_check("alg witness bool n=3", check_bool3_witness));
    }
    claims
}

/// Orbit counts on squares: enumeration and inclusion–exclusion must agree on
/// 1, 7, 193, 63775.
fn check_ample_counts() -> Result<String> {
    let want = [1u64, 7, 193, 63775];
    for (i, &w) in want.iter().enumerate() {
        let n = (i + 1) as u32;
        let by_enum = count_ample_power2(n, CountMethod::Enumerate)?;
        let by_ie = count_ample_power2(n, CountMethod::InclusionExclusion)?;
        expect(&format!("enumerated count at {n}"), by_enum.clone(), BigInt::from(w))?;
        expect(&format!("counting methods at {n}"), by_ie, by_enum)?;
    }
    Ok("counts 1, 7, 193, 63775 by both methods".into())
}

/// The square constraints pin the transitive-piece parameter to exactly -2, -1.
fn check_measure_solve() -> Result<String> {
    let roots = solve_regular_parameters()?;
    expect("parameter roots", roots, vec![rat_int(-2), rat_int(-1)])?;
    Ok("parameter set {-2, -1}".into())
}

/// Fiber squares of elementary collapses have the fixed shapes: merging the
/// same pair twice gives sizes {n+2, n+1, n} with multiplicities {1, 4, 2};
/// merging two different pairs gives the single piece of size n+1.
fn check_elementary_squares() -> Result<String> {
    for n in 2..=5usize {
        let f = elementary_collapse(n, 0)?;
        let same = x_product_decompose(&f, &f)?.forget_tags();
        let want: Vec<(usize, u64)> = vec![(n, 2), (n + 1, 4), (n + 2, 1)];
        expect(
            &format!("same-pair square at {n}"),
            same.into_iter().collect::<Vec<_>>(),
            want,
        )?;
        if n >= 3 {
            let g = elementary_collapse(n, 1)?;
            let distinct = x_product_decompose(&f, &g)?.forget_tags();
            expect(
                &format!("distinct-pair square at {n}"),
                distinct.into_iter().collect::<Vec<_>>(),
                vec![(n + 1, 1)],
            )?;
        }
    }
    Ok("same pair: {n+2, 4(n+1), 2n}; distinct pairs: {n+1}".into())
}

/// Stratified objects: the closed form equals the stratum-by-stratum sum, with
/// parity under one measure and the constant 1 under the other.
fn check_y_measure_table() -> Result<String> {
    for n in 0..=8usize {
        for m in [Measure::Mu, Measure::Nu] {
            let closed = y_measure(m, n, YMeasureMethod::ClosedForm)?;
            let summed = y_measure(m, n, YMeasureMethod::Decompose)?;
            expect(&format!("{} at {n}", m.name()), summed, closed.clone())?;
            let want = match m {
                Measure::Mu => rat_int((n % 2) as i64),
                Measure::Nu => rat_int(if n >= 1 { 1 } else { 0 }),
            };
            expect(&format!("{} closed form at {n}", m.name()), closed, want)?;
        }
    }
    Ok("closed form = stratum sum for n <= 8; parity and all-ones".into())
}

/// The invariant pair of a two-point transitive set satisfies x = 2 + 4x + x^2
/// coordinatewise, and the scaled power pairs stay inside the invariant ring.
fn check_theta_ring() -> Result<String> {
    let x1 = theta_of_gset(&FormalGSet::single(2))?;
    expect("pair of the two-point set", (x1.mu_coord().clone(), x1.nu_coord().clone()), (rat_int(-2), rat_int(-1)))?;
    let sq = theta_arith(&x1, &x1, ThetaOp::Mul)?;
    let four_x = theta_arith(&ThetaElement::from_integer(4), &x1, ThetaOp::Mul)?;
    let rhs = theta_arith(
        &theta_arith(&ThetaElement::from_integer(2), &four_x, ThetaOp::Add)?,
        &sq,
        ThetaOp::Add,
    )?;
    expect(
        "x = 2 + 4x + x^2",
        (x1.mu_coord().clone(), x1.nu_coord().clone()),
        (rhs.mu_coord().clone(), rhs.nu_coord().clone()),
    )?;
    let mut fact = BigInt::one();
    for n in 1..=6u32 {
        fact *= BigInt::from(n);
        let inv = Rat::new(BigInt::one(), fact.clone());
        ThetaElement::new(rat_pow(-2, n) * &inv, rat_pow(-1, n) * &inv)?;
    }
    Ok("x = 2 + 4x + x^2; scaled power pairs lie in the ring for n <= 6".into())
}

/// All three composition routes agree on every ordered pair of non-empty
/// supports in the 2 x 2 square, for both measures.
fn check_compose_routes() -> Result<String> {
    for measure in [Measure::Mu, Measure::Nu] {
        for e in 1..16u128 {
            let pe = ProductSubset::new(vec![2, 2], Mask(e))?;
            let me = indicator_matrix(measure, 2, 2, &pe, IndicatorBasis::Y)?;
            for d in 1..16u128 {
                let pd = ProductSubset::new(vec![2, 2], Mask(d))?;
                let md = indicator_matrix(measure, 2, 2, &pd, IndicatorBasis::Y)?;
                let fast = compose(&me, &md, ComposeMode::Fast)?;
                let oracle = compose(&me, &md, ComposeMode::Oracle)?;
                expect(&format!("oracle vs fast at ({e:x}, {d:x})"), oracle, fast.clone())?;
                let chain = indicator_compose_chain(measure, &pe, &pd)?;
                let via_chain = indicator_matrix(measure, 2, 2, &chain, IndicatorBasis::Y)?;
                expect(&format!("chain route at ({e:x}, {d:x})"), via_chain, fast)?;
            }
        }
    }
    Ok("oracle = chain = fast on all 225 pairs, both measures".into())
}

/// Tensor structure: the square of the two-point object has the seven expected
/// pieces, the two tensor routes agree, and tensoring with the unit changes
/// nothing.
fn check_tensor() -> Result<String> {
    let x2 = PermObject::x_object(2)?;
    let sq = tensor_object(&x2, &x2)?;
    expect("pieces of the tensor square", sq.piece_count(), 7)?;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for measure in [Measure::Mu, Measure::Nu] {
        for _ in 0..4 {
            let a = random_indicator(measure, &mut rng)?;
            let b = random_indicator(measure, &mut rng)?;
            let fast = tensor_matrix(&a, &b)?;
            let oracle = tensor_matrix_oracle(&a, &b)?;
            expect("tensor routes", oracle, fast)?;
            let unit = PermMatrix::identity(measure, &PermObject::unit());
            let padded = tensor_matrix(&a, &unit)?;
            let la: Vec<_> = a.entries().map(|(j, i, m, c)| (j, i, m, c.clone())).collect();
            let lp: Vec<_> = padded.entries().map(|(j, i, m, c)| (j, i, m, c.clone())).collect();
            expect("tensor with the unit", lp, la)?;
        }
    }
    Ok("7 pieces in the square; routes agree; unit is neutral".into())
}

fn random_indicator(measure: Measure, rng: &mut ChaCha8Rng) -> Result<PermMatrix> {
    let d = ProductSubset::new(vec![2, 2], Mask(rng.gen_range(1..16u128)))?;
    indicator_matrix(measure, 2, 2, &d, IndicatorBasis::Y)
}

/// Duality: both snake composites collapse to the identity on every object
/// with ground size at most 3, for both measures.
fn check_snakes() -> Result<String> {
    for measure in [Measure::Mu, Measure::Nu] {
        for n in 1..=3usize {
            for obj in [PermObject::x_object(n)?, PermObject::y_object(n)?] {
                if !snake_identities_hold(measure, &obj)? {
                    return Err(Error::integrity(format!(
                        "snake identity failed for {} on ground size {n}",
                        measure.name()
                    )));
                }
            }
        }
    }
    Ok("both snakes hold on full and stratified objects, ground size <= 3".into())
}

/// Traces: the loop composite agrees with the diagonal closed form, the trace
/// is cyclic, and the two pinned values come out right.
fn check_traces() -> Result<String> {
    let y3 = PermObject::y_object(3)?;
    let idy3 = PermMatrix::identity(Measure::Mu, &y3);
    expect("identity trace on three strata", trace(&idy3, TraceMode::Categorical)?, rat_int(1))?;
    let swap = ProductSubset::new(vec![2, 2], Mask(0b0110))?;
    let swap_m = indicator_matrix(Measure::Nu, 2, 2, &swap, IndicatorBasis::Y)?;
    expect("swap-stratum trace", trace(&swap_m, TraceMode::Categorical)?, rat_int(0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for measure in [Measure::Mu, Measure::Nu] {
        for _ in 0..4 {
            let a = random_indicator(measure, &mut rng)?;
            let b = random_indicator(measure, &mut rng)?;
            let ab = compose(&a, &b, ComposeMode::Fast)?;
            let ba = compose(&b, &a, ComposeMode::Fast)?;
            expect(
                "cyclicity",
                trace(&ab, TraceMode::Categorical)?,
                trace(&ba, TraceMode::Categorical)?,
            )?;
            expect(
                "trace modes",
                trace(&ab, TraceMode::Categorical)?,
                trace(&ab, TraceMode::ClosedForm)?,
            )?;
        }
    }
    Ok("loop composite = closed form; tr(AB) = tr(BA); pinned values 1 and 0".into())
}

/// Dimensions equal measures on every object in reach.
fn check_dimensions() -> Result<String> {
    for measure in [Measure::Mu, Measure::Nu] {
        for n in 1..=4usize {
            let x = PermObject::x_object(n)?;
            expect(
                &format!("full object size {n}, {}", measure.name()),
                dimension(measure, &x)?,
                eval_measure(measure, &x.underlying_gset()),
            )?;
        }
        for n in 1..=4usize {
            let y = PermObject::y_object(n)?;
            expect(
                &format!("stratified object size {n}, {}", measure.name()),
                dimension(measure, &y)?,
                y_measure(measure, n, YMeasureMethod::ClosedForm)?,
            )?;
        }
    }
    Ok("dimension = measure on full and stratified objects, sizes <= 4".into())
}

/// Relation families: all 128 candidate families on the two-point base are
/// decided, and group-generated families classify back to their groups.
fn check_classification() -> Result<String> {
    let members = ample_square_members(2)?;
    expect("candidate members", members.len(), 7)?;
    let mut valid = 0usize;
    for bits in 0u32..(1 << members.len()) {
        let chosen: Vec<Mask> = members
            .iter()
            .enumerate()
            .filter(|(i, _)| bits & (1 << i) != 0)
            .map(|(_, &m)| m)
            .collect();
        let family = EqRelFamily::new(2, chosen)?;
        if eqrel_validate(&family)? {
            valid += 1;
            eqrel_classify(&family)?;
        }
    }
    let subgroups: Vec<Vec<Vec<usize>>> = vec![
        vec![vec![0, 1, 2]],
        vec![vec![0, 1, 2], vec![1, 0, 2]],
        vec![vec![0, 1, 2], vec![2, 1, 0]],
        vec![vec![0, 1, 2], vec![0, 2, 1]],
        vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]],
        vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ],
    ];
    for group in &subgroups {
        let family = eqrel_from_group(3, group)?;
        let q = eqrel_classify(&family)?;
        expect("classified base", q.base, 3)?;
        let mut want = group.clone();
        want.sort();
        expect("classified group", q.group.clone(), want)?;
    }
    Ok(format!(
        "128 candidates decided ({valid} valid, all classified); 6 subgroup families round-trip"
    ))
}

/// The linearization is a functor and is monoidal, exhaustively at size 2.
fn check_functor() -> Result<String> {
    for kind in [SemiringKind::F2, SemiringKind::Bool] {
        let mats = enumerate_nonzero(kind, 2)?;
        for a in &mats {
            for b in &mats {
                let lhs = phi(&sr_multiply(a, b)?)?;
                let rhs = compose(&phi(a)?, &phi(b)?, ComposeMode::Fast)?;
                expect(
                    &format!("{} pair ({:x}, {:x})", kind.name(), a.support.0, b.support.0),
                    rhs,
                    lhs,
                )?;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let a = mats[rng.gen_range(0..mats.len())];
            let b = mats[rng.gen_range(0..mats.len())];
            let lhs = phi(&sr_kron(&a, &b)?)?;
            let rhs = tensor_matrix(&phi(&a)?, &phi(&b)?)?;
            let le: Vec<_> = lhs.entries().map(|(j, i, m, c)| (j, i, m, c.clone())).collect();
            let re: Vec<_> = rhs.entries().map(|(j, i, m, c)| (j, i, m, c.clone())).collect();
            expect("product compatibility", re, le)?;
        }
    }
    Ok("all 225 pairs compose through the functor, both kinds; products line up".into())
}

/// Size-3 matrices over the two-element field: trivial radical, with a
/// recorded full-rank certificate.
fn check_f2_semisimple() -> Result<String> {
    let report = semisimplicity_report(SemiringKind::F2, 3)?;
    expect("algebra dim", report.algebra_dim, 511)?;
    expect("radical dim", report.radical_dim, 0)?;
    expect("verdict", report.semisimple, true)?;
    let p = report
        .certificate_prime
        .ok_or_else(|| Error::integrity("semisimple verdict without a certificate prime"))?;
    Ok(format!("radical_dim = 0, certified by full rank mod {p}"))
}

/// Size-3 Boolean matrices: the radical is non-trivial.
fn check_bool3_radical() -> Result<String> {
    let report = semisimplicity_report(SemiringKind::Bool, 3)?;
    expect("verdict", report.semisimple, false)?;
    if report.radical_dim == 0 {
        return Err(Error::integrity("non-semisimple verdict with empty radical"));
    }
    Ok(format!("radical_dim = {} > 0", report.radical_dim))
}

/// The flagship reproduction: a nilpotent endomorphism with non-zero trace.
fn check_bool3_witness() -> Result<String> {
    let witness = find_trace_witness(SemiringKind::Bool, 3)?
        .ok_or_else(|| Error::integrity("no witness despite a non-trivial radical"))?;
    if witness.trace.is_zero() {
        return Err(Error::integrity("witness trace is zero"));
    }
    if witness.nilpotency_exponent > 511 {
        return Err(Error::integrity("nilpotency exponent exceeds the algebra dimension"));
    }
    expect(
        "trace closed form",
        trace(&witness.image, TraceMode::ClosedForm)?,
        witness.trace.clone(),
    )?;
    Ok(format!(
        "nilpotent of exponent {} with trace {}",
        witness.nilpotency_exponent,
        crate::rat_string(&witness.trace)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_battery_passes() {
        let claims = run(Level::Quick);
        assert_eq!(claims.len(), 12);
        for c in &claims {
            assert!(c.pass, "{}: {}", c.key, c.detail);
        }
    }

    #[test]
    fn level_names() {
        assert_eq!(Level::from_name("quick").unwrap(), Level::Quick);
        assert_eq!(Level::from_name("full").unwrap(), Level::Full);
        assert!(Level::from_name("medium").is_err());
    }
}
