//! Acceptance battery: one test per criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see them live). Every numeric
//! claim is re-derived here against independent routes — raw enumeration,
//! closed forms, and the slow reference implementations — rather than against
//! the code paths that produced it.

use cantor_perm::finsets::{count_ample_power2, CountMethod, ProductSubset};
use cantor_perm::gsets::{
    ample_square_members, elementary_collapse, eqrel_classify, eqrel_from_group, eqrel_validate,
    x_product_decompose, EqRelFamily, FormalGSet, GMap,
};
use cantor_perm::linmon::{
    enumerate_nonzero, find_trace_witness, phi, radical_basis, semisimplicity_report, sr_kron,
    sr_multiply, MonAlgElement, MonAlgebra, SRMatrix, SemiringKind,
};
use cantor_perm::mask::Mask;
use cantor_perm::measures::{
    eval_measure, solve_regular_parameters, theta_arith, theta_of_gset, y_measure, Measure,
    ThetaElement, ThetaOp, YMeasureMethod,
};
use cantor_perm::permcat::{
    compose, dimension, indicator_compose_chain, indicator_matrix, snake_identities_hold,
    tensor_matrix, tensor_object, trace, ComposeMode, IndicatorBasis, PermMatrix, PermObject,
    TraceMode,
};
use cantor_perm::{rat, rat_int, rat_pow, Rat};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

/// Run one criterion body, print its verdict line, and re-raise any failure.
fn criterion(number: usize, title: &str, body: fn()) {
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(body);
    let elapsed = start.elapsed();
    match outcome {
        Ok(()) => println!("PASS criterion {number:2}: {title} [{elapsed:.2?}]"),
        Err(cause) => {
            println!("FAIL criterion {number:2}: {title} [{elapsed:.2?}]");
            std::panic::resume_unwind(cause);
        }
    }
}

// ---------------------------------------------------------------------------
// Shared helpers.
// ---------------------------------------------------------------------------

/// All surjective tables `[a] -> [w]`.
fn surjections(a: usize, w: usize) -> Vec<GMap> {
    let mut out = Vec::new();
    let mut table = vec![0usize; a];
    loop {
        let mut seen = vec![false; w];
        for &t in &table {
            seen[t] = true;
        }
        if seen.iter().all(|&s| s) {
            out.push(GMap::from_table(a, w, table.clone()).expect("surjective by construction"));
        }
        // Odometer step over [w]^a.
        let mut i = 0;
        loop {
            if i == a {
                return out;
            }
            table[i] += 1;
            if table[i] < w {
                break;
            }
            table[i] = 0;
            i += 1;
        }
    }
}

fn indicator(measure: Measure, a: usize, b: usize, mask: u128) -> PermMatrix {
    let d = ProductSubset::new(vec![b, a], Mask(mask)).expect("valid support");
    indicator_matrix(measure, a, b, &d, IndicatorBasis::Y).expect("indicator")
}

/// A random sparse support mask over `bits` positions with `points` bits set.
fn random_support(rng: &mut ChaCha8Rng, bits: u32, points: u32) -> u128 {
    let mut m = Mask::EMPTY;
    while m.len() < points {
        m.insert(rng.gen_range(0..bits));
    }
    m.0
}

/// A small random linear combination of indicator matrices on one shape.
fn random_matrix(measure: Measure, a: usize, b: usize, rng: &mut ChaCha8Rng) -> PermMatrix {
    let bits = (a * b) as u32;
    let mut out = PermMatrix::zero(
        measure,
        PermObject::y_object(a).unwrap(),
        PermObject::y_object(b).unwrap(),
    );
    for _ in 0..3 {
        let points = rng.gen_range(1..=3);
        let mask = random_support(rng, bits, points);
        let coeff = rat(rng.gen_range(-3..=3), rng.gen_range(1..=2));
        out = out
            .add(&indicator(measure, a, b, mask).scale(&coeff))
            .unwrap();
    }
    out
}

// ---------------------------------------------------------------------------
// The criteria.
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_growth_counts() {
    criterion(1, "orbit growth 1, 7, 193, 63775 by both counting methods", || {
        let want = [1u64, 7, 193, 63775];
        let enum_start = Instant::now();
        for (i, &w) in want.iter().enumerate() {
            let n = (i + 1) as u32;
            assert_eq!(
                count_ample_power2(n, CountMethod::Enumerate).unwrap(),
                BigInt::from(w),
                "enumeration at {n}"
            );
        }
        assert!(enum_start.elapsed() <= Duration::from_secs(10), "enumeration too slow");
        let ie_start = Instant::now();
        for (i, &w) in want.iter().enumerate() {
            let n = (i + 1) as u32;
            assert_eq!(
                count_ample_power2(n, CountMethod::InclusionExclusion).unwrap(),
                BigInt::from(w),
                "closed form at {n}"
            );
        }
        // The closed form keeps going where enumeration cannot.
        assert!(count_ample_power2(8, CountMethod::InclusionExclusion).unwrap() > BigInt::zero());
        assert!(ie_start.elapsed() <= Duration::from_secs(1), "closed form not instantaneous");
    });
}

#[test]
fn criterion_02_measure_uniqueness_and_regularity() {
    criterion(2, "square constraints force {-2, -1}; fiber products are regular", || {
        let start = Instant::now();
        assert_eq!(
            solve_regular_parameters().unwrap(),
            vec![rat_int(-2), rat_int(-1)]
        );
        // Regularity over every pair of surjections with sources up to 4.
        for w in 1..=4usize {
            for a in w..=4 {
                for b in w..=4 {
                    for f in surjections(a, w) {
                        for g in surjections(b, w) {
                            let decomposition = x_product_decompose(&f, &g).unwrap();
                            for m in [Measure::Mu, Measure::Nu] {
                                let lhs = eval_measure(m, &decomposition);
                                let rhs = m.on_piece(a) * m.on_piece(b) / m.on_piece(w);
                                assert_eq!(lhs, rhs, "{} at a={a} b={b} w={w}", m.name());
                            }
                        }
                    }
                }
            }
        }
        assert!(start.elapsed() <= Duration::from_secs(30), "regularity sweep too slow");
    });
}

#[test]
fn criterion_03_elementary_squares() {
    criterion(3, "collapse squares decompose with the fixed shapes", || {
        for m in 2..=5usize {
            let f = elementary_collapse(m, 0).unwrap();
            let same = x_product_decompose(&f, &f).unwrap().forget_tags();
            let want: BTreeMap<usize, u64> =
                [(m, 2), (m + 1, 4), (m + 2, 1)].into_iter().collect();
            assert_eq!(same, want, "same distinguished point, source size {m}");
            if m >= 3 {
                let g = elementary_collapse(m, 1).unwrap();
                let distinct = x_product_decompose(&f, &g).unwrap().forget_tags();
                let want: BTreeMap<usize, u64> = [(m + 1, 1)].into_iter().collect();
                assert_eq!(distinct, want, "distinct distinguished points, source size {m}");
            }
        }
    });
}

#[test]
fn criterion_04_stratified_measure_table() {
    criterion(4, "stratified measures: closed form = stratum sum; parity and all-ones", || {
        for n in 0..=8usize {
            for m in [Measure::Mu, Measure::Nu] {
                let closed = y_measure(m, n, YMeasureMethod::ClosedForm).unwrap();
                let summed = y_measure(m, n, YMeasureMethod::Decompose).unwrap();
                assert_eq!(closed, summed, "{} at {n}", m.name());
                let want = match m {
                    Measure::Mu => rat_int((n % 2) as i64),
                    Measure::Nu => rat_int(i64::from(n >= 1)),
                };
                assert_eq!(closed, want, "{} table value at {n}", m.name());
            }
        }
    });
}

#[test]
fn criterion_05_invariant_ring() {
    criterion(5, "invariant pair satisfies x = 2 + 4x + x^2; power pairs stay 2-integral", || {
        let x1 = theta_of_gset(&FormalGSet::single(2)).unwrap();
        assert_eq!(x1.mu_coord(), &rat_int(-2));
        assert_eq!(x1.nu_coord(), &rat_int(-1));
        let sq = theta_arith(&x1, &x1, ThetaOp::Mul).unwrap();
        let four_x = theta_arith(&ThetaElement::from_integer(4), &x1, ThetaOp::Mul).unwrap();
        let rhs = theta_arith(
            &theta_arith(&ThetaElement::from_integer(2), &four_x, ThetaOp::Add).unwrap(),
            &sq,
            ThetaOp::Add,
        )
        .unwrap();
        assert_eq!(x1.mu_coord(), rhs.mu_coord());
        assert_eq!(x1.nu_coord(), rhs.nu_coord());
        // Scaled power pairs: first coordinate (-2)^n / n! must keep an odd
        // denominator, so the pair lies in the ring.
        let mut fact = BigInt::one();
        for n in 1..=6u32 {
            fact *= BigInt::from(n);
            let inv = Rat::new(BigInt::one(), fact.clone());
            let pair =
                ThetaElement::new(rat_pow(-2, n) * &inv, rat_pow(-1, n) * &inv).unwrap();
            assert!(
                (pair.mu_coord().denom() % BigInt::from(2)).is_one(),
                "even denominator at {n}"
            );
        }
    });
}

/// The shared battery behind the two equivalence criteria.
fn equivalence_battery(kind: SemiringKind) {
    let start = Instant::now();
    let measure = kind.measure();
    // Exhaustive at size 2 against the direct-sum compositions.
    let mats = enumerate_nonzero(kind, 2).unwrap();
    for a in &mats {
        for b in &mats {
            let product = phi(&sr_multiply(a, b).unwrap()).unwrap();
            let by_oracle =
                compose(&phi(a).unwrap(), &phi(b).unwrap(), ComposeMode::Oracle).unwrap();
            assert_eq!(by_oracle, product, "oracle at ({:x}, {:x})", a.support.0, b.support.0);
            let chain = indicator_compose_chain(
                measure,
                &a.product_subset(),
                &b.product_subset(),
            )
            .unwrap();
            let by_chain = indicator_matrix(measure, 2, 2, &chain, IndicatorBasis::Y).unwrap();
            assert_eq!(by_chain, product, "chain at ({:x}, {:x})", a.support.0, b.support.0);
        }
    }
    // 200 random pairs at size 3 against the chain-set composition.
    let mut rng = ChaCha8Rng::seed_from_u64(match kind {
        SemiringKind::F2 => 101,
        SemiringKind::Bool => 102,
    });
    for _ in 0..200 {
        let a = SRMatrix::new(kind, 3, 3, Mask(rng.gen_range(1..512u128))).unwrap();
        let b = SRMatrix::new(kind, 3, 3, Mask(rng.gen_range(1..512u128))).unwrap();
        let product = phi(&sr_multiply(&a, &b).unwrap()).unwrap();
        let chain =
            indicator_compose_chain(measure, &a.product_subset(), &b.product_subset()).unwrap();
        let by_chain = indicator_matrix(measure, 3, 3, &chain, IndicatorBasis::Y).unwrap();
        assert_eq!(by_chain, product, "chain at ({:x}, {:x})", a.support.0, b.support.0);
    }
    // Kronecker compatibility on all pairs at size 2.
    for a in &mats {
        for b in &mats {
            let lhs = phi(&sr_kron(a, b).unwrap()).unwrap();
            let rhs = tensor_matrix(&phi(a).unwrap(), &phi(b).unwrap()).unwrap();
            let le: Vec<_> = lhs.entries().map(|(j, i, m, c)| (j, i, m, c.clone())).collect();
            let re: Vec<_> = rhs.entries().map(|(j, i, m, c)| (j, i, m, c.clone())).collect();
            assert_eq!(le, re, "products at ({:x}, {:x})", a.support.0, b.support.0);
        }
    }
    assert!(start.elapsed() <= Duration::from_secs(120), "battery too slow");
}

#[test]
fn criterion_06_equivalence_parity_side() {
    criterion(6, "linearization over the two-element field is a tensor functor", || {
        equivalence_battery(SemiringKind::F2);
    });
}

#[test]
fn criterion_07_equivalence_boolean_side() {
    criterion(7, "linearization over the Boolean semiring is a tensor functor", || {
        equivalence_battery(SemiringKind::Bool);
    });
}

#[test]
fn criterion_08_composition_path_agreement() {
    criterion(8, "oracle, chain, and fast composition agree wherever defined", || {
        // Exhaustive over indicator pairs on every shape whose chain product
        // stays within 12 bits.
        for measure in [Measure::Mu, Measure::Nu] {
            for c in 1..=3usize {
                for b in 1..=3usize {
                    for a in 1..=3usize {
                        if c * b * a > 12 {
                            continue;
                        }
                        let outers: Vec<(u128, PermMatrix)> = (1..(1u128 << (c * b)))
                            .map(|e| (e, indicator(measure, b, c, e)))
                            .collect();
                        let inners: Vec<(u128, PermMatrix)> = (1..(1u128 << (b * a)))
                            .map(|d| (d, indicator(measure, a, b, d)))
                            .collect();
                        for (e, me) in &outers {
                            for (d, md) in &inners {
                                let fast = compose(me, md, ComposeMode::Fast).unwrap();
                                let oracle = compose(me, md, ComposeMode::Oracle).unwrap();
                                assert_eq!(oracle, fast, "oracle {c}x{b}x{a} ({e:x},{d:x})");
                                let pe = ProductSubset::new(vec![c, b], Mask(*e)).unwrap();
                                let pd = ProductSubset::new(vec![b, a], Mask(*d)).unwrap();
                                let chain =
                                    indicator_compose_chain(measure, &pe, &pd).unwrap();
                                let via_chain =
                                    indicator_matrix(measure, a, c, &chain, IndicatorBasis::Y)
                                        .unwrap();
                                assert_eq!(via_chain, fast, "chain {c}x{b}x{a} ({e:x},{d:x})");
                            }
                        }
                    }
                }
            }
        }
        // Random sparse indicators on larger shapes, still within the direct
        // route's 20-bit budget.
        let mut rng = ChaCha8Rng::seed_from_u64(808);
        for measure in [Measure::Mu, Measure::Nu] {
            for (c, b, a) in [(3, 3, 2), (2, 3, 3), (3, 2, 3)] {
                for _ in 0..12 {
                    let e_points = rng.gen_range(1..=3);
                    let e = random_support(&mut rng, (c * b) as u32, e_points);
                    let d_points = rng.gen_range(1..=3);
                    let d = random_support(&mut rng, (b * a) as u32, d_points);
                    let me = indicator(measure, b, c, e);
                    let md = indicator(measure, a, b, d);
                    let fast = compose(&me, &md, ComposeMode::Fast).unwrap();
                    let oracle = compose(&me, &md, ComposeMode::Oracle).unwrap();
                    assert_eq!(oracle, fast, "oracle {c}x{b}x{a} ({e:x},{d:x})");
                    let pe = ProductSubset::new(vec![c, b], Mask(e)).unwrap();
                    let pd = ProductSubset::new(vec![b, a], Mask(d)).unwrap();
                    let chain = indicator_compose_chain(measure, &pe, &pd).unwrap();
                    let via_chain =
                        indicator_matrix(measure, a, c, &chain, IndicatorBasis::Y).unwrap();
                    assert_eq!(via_chain, fast, "chain {c}x{b}x{a} ({e:x},{d:x})");
                }
            }
            // General linear combinations: the chain route no longer applies,
            // the other two still must agree.
            for _ in 0..10 {
                let x = random_matrix(measure, 2, 2, &mut rng);
                let y = random_matrix(measure, 2, 2, &mut rng);
                let fast = compose(&x, &y, ComposeMode::Fast).unwrap();
                let oracle = compose(&x, &y, ComposeMode::Oracle).unwrap();
                assert_eq!(oracle, fast, "{} combination", measure.name());
            }
        }
    });
}

#[test]
fn criterion_09_semisimple_field_side() {
    criterion(9, "contracted algebras over the field are semisimple up to size 3", || {
        let start = Instant::now();
        for n in 1..=3usize {
            let report = semisimplicity_report(SemiringKind::F2, n).unwrap();
            assert_eq!(report.algebra_dim, (1 << (n * n)) - 1);
            assert_eq!(report.radical_dim, 0, "size {n}");
            assert!(report.semisimple);
            let p = report.certificate_prime.expect("recorded certificate");
            assert!(p as usize > report.algebra_dim, "prime must exceed the dimension");
            assert!(radical_basis(SemiringKind::F2, n).unwrap().is_empty());
        }
        assert!(start.elapsed() <= Duration::from_secs(900), "size-3 run too slow");
    });
}

#[test]
fn criterion_10_boolean_radical() {
    criterion(10, "the size-3 Boolean algebra has a non-trivial, nilpotent radical", || {
        let start = Instant::now();
        let radical = radical_basis(SemiringKind::Bool, 3).unwrap();
        assert!(!radical.is_empty());
        let report = semisimplicity_report(SemiringKind::Bool, 3).unwrap();
        assert!(!report.semisimple);
        assert_eq!(report.radical_dim, radical.len());
        // Exact Gram annihilation, re-checked from the definition.
        let gram = MonAlgebra::new(SemiringKind::Bool, 3).unwrap().gram();
        for r in &radical {
            let mut v = vec![BigInt::zero(); 511];
            for (mask, coeff) in r.terms() {
                assert!(coeff.denom().is_one(), "kernel basis must be integral");
                v[mask.0 as usize - 1] = coeff.numer().clone();
            }
            for row in &gram {
                let dot: BigInt = row.iter().zip(&v).map(|(&g, x)| BigInt::from(g) * x).sum();
                assert!(dot.is_zero(), "Gram pairing must vanish");
            }
        }
        // Direct powering of one kernel element down to zero.
        let r = &radical[0];
        let mut power = r.clone();
        let mut exponent = 1usize;
        while !power.is_zero() {
            power = power.mul(r).unwrap();
            exponent += 1;
            assert!(exponent <= 512, "powering must terminate");
        }
        assert!(start.elapsed() <= Duration::from_secs(1800), "radical run too slow");
    });
}

#[test]
fn criterion_11_trace_witness() {
    criterion(11, "a nilpotent endomorphism with non-zero exact trace exists", || {
        let witness = find_trace_witness(SemiringKind::Bool, 3)
            .unwrap()
            .expect("witness must exist");
        assert!(!witness.trace.is_zero());
        assert!(witness.nilpotency_exponent <= 511);
        // Direct powering: r^(k-1) != 0 and r^k = 0.
        let mut power = witness.element.clone();
        for _ in 2..witness.nilpotency_exponent {
            power = power.mul(&witness.element).unwrap();
        }
        if witness.nilpotency_exponent > 1 {
            assert!(!power.is_zero(), "exponent must be minimal");
            power = power.mul(&witness.element).unwrap();
        }
        assert!(power.is_zero(), "witness must vanish at its exponent");
        // The trace through the duality loop, confirmed by the closed form.
        assert_eq!(
            trace(&witness.image, TraceMode::Categorical).unwrap(),
            witness.trace
        );
        assert_eq!(
            trace(&witness.image, TraceMode::ClosedForm).unwrap(),
            witness.trace
        );
    });
}

#[test]
fn criterion_12_category_axioms() {
    criterion(12, "associativity, snakes, cyclic traces, dimension = measure", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1212);
        for measure in [Measure::Mu, Measure::Nu] {
            // Associativity on random triples.
            for _ in 0..6 {
                let a = random_matrix(measure, 2, 2, &mut rng);
                let b = random_matrix(measure, 2, 2, &mut rng);
                let c = random_matrix(measure, 2, 2, &mut rng);
                let left = compose(&compose(&a, &b, ComposeMode::Fast).unwrap(), &c, ComposeMode::Fast).unwrap();
                let right = compose(&a, &compose(&b, &c, ComposeMode::Fast).unwrap(), ComposeMode::Fast).unwrap();
                assert_eq!(left, right, "{} associativity", measure.name());
            }
            // Snake identities on every object with ground size up to 3.
            for n in 1..=3usize {
                for obj in [PermObject::x_object(n).unwrap(), PermObject::y_object(n).unwrap()] {
                    assert!(
                        snake_identities_hold(measure, &obj).unwrap(),
                        "{} snakes at size {n}",
                        measure.name()
                    );
                }
            }
            // Cyclic traces.
            for _ in 0..6 {
                let a = random_matrix(measure, 2, 2, &mut rng);
                let b = random_matrix(measure, 2, 2, &mut rng);
                let ab = compose(&a, &b, ComposeMode::Fast).unwrap();
                let ba = compose(&b, &a, ComposeMode::Fast).unwrap();
                assert_eq!(
                    trace(&ab, TraceMode::ClosedForm).unwrap(),
                    trace(&ba, TraceMode::ClosedForm).unwrap(),
                    "{} cyclicity",
                    measure.name()
                );
            }
            // Dimension equals measure on everything with pieces of size <= 4.
            let mut objects = Vec::new();
            for n in 1..=4usize {
                objects.push(PermObject::x_object(n).unwrap());
                objects.push(PermObject::y_object(n).unwrap());
            }
            let x2 = PermObject::x_object(2).unwrap();
            let y2 = PermObject::y_object(2).unwrap();
            objects.push(tensor_object(&x2, &x2).unwrap());
            objects.push(tensor_object(&y2, &x2).unwrap());
            for obj in &objects {
                assert_eq!(
                    dimension(measure, obj).unwrap(),
                    eval_measure(measure, &obj.underlying_gset()),
                    "{} dimension",
                    measure.name()
                );
            }
        }
    });
}

#[test]
fn criterion_13_classification() {
    criterion(13, "all 128 candidate families decided; group families round-trip", || {
        let members = ample_square_members(2).unwrap();
        assert_eq!(members.len(), 7);
        let mut decided = 0usize;
        let mut valid = 0usize;
        for bits in 0u32..(1 << members.len()) {
            let chosen: Vec<Mask> = members
                .iter()
                .enumerate()
                .filter(|(i, _)| bits & (1 << i) != 0)
                .map(|(_, &m)| m)
                .collect();
            let family = EqRelFamily::new(2, chosen).unwrap();
            if eqrel_validate(&family).unwrap() {
                // The resulting quotient pair must itself classify back to
                // the same pair.
                let quotient = eqrel_classify(&family).unwrap();
                let rebuilt = eqrel_from_group(quotient.base, &quotient.group).unwrap();
                let again = eqrel_classify(&rebuilt).unwrap();
                assert_eq!(
                    (again.base, again.group.clone()),
                    (quotient.base, quotient.group.clone()),
                    "round trip"
                );
                valid += 1;
            }
            decided += 1;
        }
        assert_eq!(decided, 128);
        assert!(valid > 0, "at least the trivial family must be valid");
        // Every permutation group on three points comes back unchanged.
        let s3: Vec<Vec<usize>> = vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ];
        let subgroups: Vec<Vec<Vec<usize>>> = vec![
            vec![s3[0].clone()],
            vec![s3[0].clone(), s3[2].clone()],
            vec![s3[0].clone(), s3[5].clone()],
            vec![s3[0].clone(), s3[1].clone()],
            vec![s3[0].clone(), s3[3].clone(), s3[4].clone()],
            s3.clone(),
        ];
        for group in &subgroups {
            let family = eqrel_from_group(3, group).unwrap();
            let quotient = eqrel_classify(&family).unwrap();
            assert_eq!(quotient.base, 3);
            let mut want = group.clone();
            want.sort();
            assert_eq!(quotient.group, want);
        }
        // And on two points.
        for group in [vec![vec![0, 1]], vec![vec![0, 1], vec![1, 0]]] {
            let family = eqrel_from_group(2, &group).unwrap();
            let quotient = eqrel_classify(&family).unwrap();
            let mut want = group.clone();
            want.sort();
            assert_eq!((quotient.base, quotient.group.clone()), (2, want));
        }
    });
}

// Keep one cross-check between the algebra reports and the witness scan: a
// semisimple verdict and a found witness can never coexist.
#[test]
fn reports_and_witnesses_are_consistent() {
    for kind in [SemiringKind::F2, SemiringKind::Bool] {
        for n in 1..=2usize {
            let report = semisimplicity_report(kind, n).unwrap();
            let witness = find_trace_witness(kind, n).unwrap();
            if report.semisimple {
                assert!(witness.is_none(), "{} size {n}", kind.name());
            }
            if let Some(w) = witness {
                let _: &MonAlgElement = &w.element;
                assert!(!w.trace.is_zero());
            }
        }
    }
}
