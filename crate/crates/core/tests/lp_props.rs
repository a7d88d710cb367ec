use fc_core::ratlp::{int, lp_solve, LinearProgram, LpOutcome, Rational, Sense};
use num::Zero;
use proptest::prelude::*;

type Row = (Vec<i64>, i64);

/// Maximum of `c·x` over `{x >= 0 : rows}` by enumerating pairwise line
/// intersections in the plane.
fn vertex_max(rows: &[Row], c: &[i64]) -> Rational {
    let mut lines: Vec<(Rational, Rational, Rational)> = rows
        .iter()
        .map(|(a, b)| (int(a[0]), int(a[1]), int(*b)))
        .collect();
    lines.push((int(1), int(0), int(0)));
    lines.push((int(0), int(1), int(0)));
    let feasible = |x: &Rational, y: &Rational| {
        !(x < &Rational::zero() || y < &Rational::zero())
            && rows
                .iter()
                .all(|(a, b)| int(a[0]) * x + int(a[1]) * y <= int(*b))
    };
    let mut best: Option<Rational> = None;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a1, b1, c1) = &lines[i];
            let (a2, b2, c2) = &lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.is_zero() {
                continue;
            }
            let x = (c1 * b2 - c2 * b1) / &det;
            let y = (a1 * c2 - a2 * c1) / &det;
            if feasible(&x, &y) {
                let v = int(c[0]) * &x + int(c[1]) * &y;
                if best.as_ref().is_none_or(|b| v > *b) {
                    best = Some(v);
                }
            }
        }
    }
    best.expect("origin is a feasible vertex")
}

fn rows_strategy() -> impl Strategy<Value = Vec<Row>> {
    prop::collection::vec((prop::collection::vec(0i64..6, 2), 0i64..20), 0..5).prop_map(|mut v| {
        v.push((vec![1, 1], 25));
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn planar_optimum_matches_vertex_enumeration(
        rows in rows_strategy(),
        c in prop::collection::vec(-3i64..6, 2),
    ) {
        let mut lp = LinearProgram::new(2)
            .with_objective(c.iter().map(|&v| int(v)).collect(), Sense::Maximize);
        for (a, b) in &rows {
            lp = lp.le(a.iter().map(|&v| int(v)).collect(), int(*b));
        }
        match lp_solve(&lp).unwrap() {
            LpOutcome::Optimal { point, value, .. } => {
                prop_assert!(lp.is_feasible_point(&point));
                prop_assert_eq!(value, vertex_max(&rows, &c));
            }
            other => prop_assert!(false, "unexpected outcome {:?}", other),
        }
    }

    #[test]
    fn infeasible_systems_carry_valid_farkas_certificates(
        a in prop::collection::vec(1i64..6, 2),
        lo in 5i64..20,
        gap in 1i64..5,
    ) {
        let lp = LinearProgram::new(2)
            .ge(a.iter().map(|&v| int(v)).collect(), int(lo))
            .le(a.iter().map(|&v| int(v)).collect(), int(lo - gap));
        match lp_solve(&lp).unwrap() {
            LpOutcome::Infeasible(cert) => prop_assert!(cert.verify(&lp)),
            other => prop_assert!(false, "unexpected outcome {:?}", other),
        }
    }
}
