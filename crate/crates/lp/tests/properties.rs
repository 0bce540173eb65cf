use d2dlb_lp::lpformat::{parse_lp, write_lp};
use d2dlb_lp::{solve, LpProblem, Relation, SolveOptions, Status, VarId};
use proptest::prelude::*;

fn relation() -> impl Strategy<Value = Relation> {
    prop_oneof![Just(Relation::Le), Just(Relation::Ge), Just(Relation::Eq)]
}

/// Box-bounded problem built around a feasible point `x0`.
fn boxed_problem() -> impl Strategy<Value = (LpProblem, Vec<f64>)> {
    (1usize..12, 1usize..10).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec((0.0f64..5.0, 0.0f64..1.0), n),
            prop::collection::vec(
                (
                    prop::collection::vec((0..n, -6i32..=6), 1..=n.min(5)),
                    relation(),
                    0.0f64..2.0,
                ),
                m,
            ),
            prop::collection::vec(-5i32..=5, n),
        )
            .prop_map(move |(bounds, rows, cost)| {
                let mut lp = LpProblem::new("prop");
                let mut x0 = Vec::new();
                for (j, &(hi, frac)) in bounds.iter().enumerate() {
                    lp.add_var(format!("x{j}"), 0.0, hi);
                    x0.push(hi * frac);
                }
                for (i, (terms, rel, gap)) in rows.into_iter().enumerate() {
                    let mut dedup: Vec<(VarId, f64)> = Vec::new();
                    for (v, a) in terms {
                        if a != 0 && !dedup.iter().any(|t| t.0 .0 == v) {
                            dedup.push((VarId(v), a as f64));
                        }
                    }
                    let act: f64 = dedup.iter().map(|&(v, a)| a * x0[v.0]).sum();
                    let rhs = match rel {
                        Relation::Eq => act,
                        Relation::Le => act + gap,
                        Relation::Ge => act - gap,
                    };
                    lp.add_constraint(format!("r{i}"), dedup, rel, rhs);
                }
                lp.set_objective(
                    cost.iter()
                        .enumerate()
                        .map(|(j, &c)| (VarId(j), c as f64))
                        .collect(),
                    0.0,
                );
                (lp, x0)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn boxed_problems_solve_and_beat_known_point((lp, x0) in boxed_problem()) {
        let s = solve(&lp, &SolveOptions::default()).unwrap();
        prop_assert_eq!(s.status, Status::Optimal);
        prop_assert!(s.max_primal_residual <= 1e-7);
        prop_assert!(s.objective <= lp.evaluate_objective(&x0) + 1e-7);
    }

    #[test]
    fn lp_text_round_trip((lp, _) in boxed_problem(), constant in -10.0f64..10.0) {
        let mut lp = lp;
        let obj = lp.objective_terms().to_vec();
        lp.set_objective(obj, constant);
        let back = parse_lp(&write_lp(&lp)).unwrap();
        prop_assert_eq!(back.objective_constant(), lp.objective_constant());
        prop_assert_eq!(back.vars(), lp.vars());
        let strip = |p: &LpProblem| p.objective_terms().iter().copied().filter(|t| t.1 != 0.0).collect::<Vec<_>>();
        prop_assert_eq!(strip(&back), strip(&lp));
        prop_assert_eq!(back.constraints(), lp.constraints());
    }

    #[test]
    fn scaling_objective_scales_optimum((lp, _) in boxed_problem(), k in 0.5f64..4.0) {
        let base = solve(&lp, &SolveOptions::default()).unwrap();
        let mut scaled = lp.clone();
        let terms = lp.objective_terms().iter().map(|&(v, a)| (v, a * k)).collect();
        scaled.set_objective(terms, 0.0);
        let s = solve(&scaled, &SolveOptions::default()).unwrap();
        prop_assert!((s.objective - k * base.objective).abs() <= 1e-6 * (1.0 + s.objective.abs()));
    }
}
