use malab::obstacle::{build_problem, solve, verify, ScenarioKind, ScenarioSpec, SolveOptions, SolverMode};
use proptest::prelude::*;

fn coarse(kind: ScenarioKind, n: usize, eps: f64, alpha: f64) -> ScenarioSpec {
    let mut spec = ScenarioSpec::preset(kind, n);
    spec.eps = eps;
    spec.alpha = alpha;
    spec.h0 = 0.2;
    spec.h_min = 0.1;
    spec
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn newton_lifting_stays_monotone_feasible_and_subsolution(
        cross in any::<bool>(),
        eps in 0.15f64..0.3,
        alpha in 0.3f64..0.7,
    ) {
        let kind = if cross { ScenarioKind::Cross } else { ScenarioKind::Segment };
        let problem = build_problem(&coarse(kind, 2, eps, alpha)).unwrap();
        let s = solve(&problem, &SolveOptions::default()).unwrap();
        prop_assert!(s.history.iter().all(|h| h.monotone && h.feasible));
        for i in 0..problem.len() {
            prop_assert!(s.values[i] <= problem.obstacle[i]);
            if problem.cloud.tag(i).is_boundary() {
                prop_assert_eq!(s.values[i], problem.boundary_values[i]);
            } else {
                prop_assert!(s.atoms.atoms[i] >= problem.mu[i] * (1.0 - 1e-9));
            }
        }
        let report = verify(&problem, &s).unwrap();
        for name in ["sandwich_lower", "sandwich_upper", "obstacle_feasible", "monotone_lifting"] {
            prop_assert!(report.check(name).unwrap().pass, "{name}");
        }
    }
}

#[test]
fn sweeps_approach_the_newton_solution_from_below() {
    let problem = build_problem(&coarse(ScenarioKind::Segment, 2, 0.2, 0.5)).unwrap();
    let newton = solve(&problem, &SolveOptions::default()).unwrap();
    for mode in [SolverMode::GaussSeidel, SolverMode::Jacobi] {
        let options = SolveOptions { mode, tol: 5e-2, max_iter: 5000 };
        let s = solve(&problem, &options).unwrap();
        assert!(s.history.iter().all(|h| h.monotone && h.feasible));
        for i in 0..problem.len() {
            assert!(s.values[i] <= newton.values[i] + 1e-9, "{} node {i}", mode.as_str());
        }
    }
}

#[test]
fn solves_are_bitwise_reproducible() {
    let problem = build_problem(&coarse(ScenarioKind::Cross, 2, 0.2, 0.5)).unwrap();
    let a = solve(&problem, &SolveOptions::default()).unwrap();
    let b = solve(&problem, &SolveOptions::default()).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(a.atoms.atoms, b.atoms.atoms);
}

#[test]
fn cross_solution_is_symmetric_with_an_origin_atom() {
    let problem = build_problem(&coarse(ScenarioKind::Cross, 2, 0.2, 0.5)).unwrap();
    let s = solve(&problem, &SolveOptions::default()).unwrap();
    let report = verify(&problem, &s).unwrap();
    assert!(report.check("symmetry").unwrap().pass);
    assert!(report.density.junctions.iter().any(|j| j.excess > 0.0));
}

#[test]
fn three_dimensional_segment_solves() {
    let mut spec = coarse(ScenarioKind::Segment, 3, 0.2, 0.5);
    spec.h0 = 0.25;
    spec.h_min = 0.125;
    let problem = build_problem(&spec).unwrap();
    let s = solve(&problem, &SolveOptions::default()).unwrap();
    let report = verify(&problem, &s).unwrap();
    for name in ["sandwich_lower", "sandwich_upper", "obstacle_feasible", "monotone_lifting", "mass_balance"] {
        assert!(report.check(name).unwrap().pass, "{name}");
    }
}
