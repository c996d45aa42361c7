//! Property tests for the exact arithmetic kernels and the serialization
//! layer.

use proptest::prelude::*;

use kuratlas::exactalg::{
    real_definiteness_f64, Definiteness, GaussianRational, Polynomial, RealMatrix,
};
use kuratlas::report::{emit_report, parse_report, CheckLine, Report, ReportFormat, StepReport};
use kuratlas::scenario::{parse_poly, TermSpec};

fn small_gr() -> impl Strategy<Value = GaussianRational> {
    (-6i64..=6, 1i64..=4, -6i64..=6, 1i64..=4)
        .prop_map(|(p, q, r, s)| GaussianRational::from_parts(p, q, r, s))
}

/// Random polynomial in `nvars` variables, degree ≤ 2 per variable.
fn small_poly(nvars: usize) -> impl Strategy<Value = Polynomial> {
    proptest::collection::vec(
        (proptest::collection::vec(0u32..=2, nvars), small_gr()),
        0..6,
    )
    .prop_map(move |terms| Polynomial::from_terms(nvars, terms).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polynomial_ring_laws(a in small_poly(2), b in small_poly(2), c in small_poly(2)) {
        // Associativity of multiplication and distributivity, exactly.
        let left = a.mul(&b).mul(&c);
        let right = a.mul(&b.mul(&c));
        prop_assert_eq!(left, right);
        let distributed = a.mul(&b.add(&c));
        let expanded = a.mul(&b).add(&a.mul(&c));
        prop_assert_eq!(distributed, expanded);
        // Addition is commutative with exact cancellation.
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn mixed_partials_commute(p in small_poly(3)) {
        let dxy = p.partial(0).unwrap().partial(1).unwrap();
        let dyx = p.partial(1).unwrap().partial(0).unwrap();
        prop_assert_eq!(dxy, dyx);
    }

    #[test]
    fn definiteness_negation(
        a in -4.0f64..4.0,
        b in -4.0f64..4.0,
        c in -4.0f64..4.0,
    ) {
        let s = RealMatrix::from_rows(vec![vec![a, b], vec![b, c]]);
        let rep = real_definiteness_f64(&s, 1e-9).unwrap();
        prop_assume!(rep.class != Definiteness::Degenerate);
        let neg = RealMatrix::from_rows(vec![vec![-a, -b], vec![-b, -c]]);
        let rep_neg = real_definiteness_f64(&neg, 1e-9).unwrap();
        prop_assert_eq!(rep_neg.class, rep.class.negated());
    }

    #[test]
    fn real_rank_row_operations_invariance(
        rows in proptest::collection::vec(
            proptest::collection::vec(-5i64..=5, 3), 2..=4),
        scale in 1i64..=7,
    ) {
        // Exact rank over the realification is invariant under row
        // permutation and nonzero row scaling.
        use kuratlas::exactalg::ComplexMatrix;
        let exact: Vec<Vec<GaussianRational>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| GaussianRational::from_int(v)).collect())
            .collect();
        let m = ComplexMatrix::from_rows_exact(exact.clone());
        let base = m.real_rank();
        // Reverse the rows.
        let mut reversed = exact.clone();
        reversed.reverse();
        prop_assert_eq!(ComplexMatrix::from_rows_exact(reversed).real_rank(), base);
        // Scale the first row by a nonzero rational.
        let mut scaled = exact;
        for x in scaled[0].iter_mut() {
            *x = &*x * &GaussianRational::from_parts(scale, 3, 0, 1);
        }
        prop_assert_eq!(ComplexMatrix::from_rows_exact(scaled).real_rank(), base);
    }

    #[test]
    fn polynomial_serialization_round_trip(p in small_poly(2)) {
        // Emit the scenario term format and parse it back.
        let terms: Vec<TermSpec> = p
            .terms()
            .map(|(e, c)| TermSpec {
                exponents: e.clone(),
                re: c.re().to_string(),
                im: c.im().to_string(),
            })
            .collect();
        let back = parse_poly(&terms, 2).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn report_round_trip(
        names in proptest::collection::vec("[a-z]{1,12}", 0..5),
        passes in proptest::collection::vec(any::<bool>(), 0..5),
    ) {
        let mut report = Report::default();
        for (name, pass) in names.iter().zip(&passes) {
            report.push(StepReport::from_checks(
                name,
                vec![CheckLine::new(name, *pass).with_margin(0.5)],
            ));
        }
        let emitted = emit_report(&report, ReportFormat::Json);
        let parsed = parse_report(&emitted).unwrap();
        prop_assert_eq!(parsed, report);
    }
}
