use rayon::prelude::*;

use ttp_core::instances::{gen_circ, gen_con, FamilyKind};
use ttp_core::lp::{relative_gap, solve_problem, solve_simplex, LpProblem, LpStatus, SimplexOptions, SolveMode};
use ttp_core::tables::{enumeration_optimum, relaxed_model, Column};

const REL_TOL: f64 = 1e-6;

fn float() -> SolveMode {
    SolveMode::default()
}

#[test]
fn float_and_exact_agree_on_all_four_team_models() {
    let jobs: Vec<(FamilyKind, Column, bool)> = FamilyKind::ALL
        .iter()
        .flat_map(|&f| Column::ALL.iter().flat_map(move |&c| [false, true].map(|m| (f, c, m))))
        .collect();
    assert_eq!(jobs.len(), 72);
    let failures: Vec<String> = jobs
        .par_iter()
        .filter_map(|&(family, column, mirrored)| {
            let model = relaxed_model(&family.generate(4).unwrap(), column, mirrored).unwrap();
            let a = solve_simplex(&model, float()).unwrap();
            let b = solve_simplex(&model, SolveMode::Exact).unwrap();
            assert_eq!(a.status, LpStatus::Optimal);
            assert_eq!(b.status, LpStatus::Optimal);
            let exact = b.exact_primal.as_ref().unwrap();
            assert!(LpProblem::from_model(&model).is_feasible_exact(exact));
            let gap = relative_gap(a.objective, b.objective);
            (gap > REL_TOL).then(|| format!("{family} {} m={mirrored}: {} vs {}", column.label(), a.objective, b.objective))
        })
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn float_and_exact_agree_on_six_team_base_model() {
    let model = relaxed_model(&gen_con(6).unwrap(), Column::Base, false).unwrap();
    let a = solve_simplex(&model, float()).unwrap();
    let b = solve_simplex(&model, SolveMode::Exact).unwrap();
    assert!(a.is_optimal() && b.is_optimal());
    assert!(relative_gap(a.objective, b.objective) <= REL_TOL, "{} vs {}", a.objective, b.objective);
    assert!(LpProblem::from_model(&model).max_violation(&a.primal) < 1e-6);
}

#[test]
fn rational_tableau_from_scratch_matches_certified_basis() {
    let model = relaxed_model(&gen_circ(4).unwrap(), Column::Base, false).unwrap();
    let p = LpProblem::from_model(&model);
    let scratch = solve_problem(&p, &SimplexOptions { exact_from_scratch: true, ..SimplexOptions::new(SolveMode::Exact) })
        .unwrap();
    let certified = solve_problem(&p, &SimplexOptions::new(SolveMode::Exact)).unwrap();
    assert!(!scratch.certified_basis);
    assert!(certified.certified_basis);
    assert_eq!(scratch.exact_objective, certified.exact_objective);
}

#[test]
fn lp_bounds_never_exceed_enumerated_optimum() {
    for family in FamilyKind::ALL {
        let inst = family.generate(4).unwrap();
        for mirrored in [false, true] {
            for column in Column::ALL {
                let opts = column.options(mirrored);
                let best = enumeration_optimum(&inst, &opts).unwrap().value;
                let r = solve_simplex(&relaxed_model(&inst, column, mirrored).unwrap(), SolveMode::Exact).unwrap();
                assert!(r.exact_objective.unwrap() <= best, "{family} {}", column.label());
            }
        }
    }
}

#[test]
fn adding_rows_never_lowers_the_bound() {
    let inst = gen_circ(4).unwrap();
    let value = |c: Column| {
        solve_simplex(&relaxed_model(&inst, c, false).unwrap(), SolveMode::Exact).unwrap().exact_objective.unwrap()
    };
    let base = value(Column::Base);
    for c in [Column::AddFlow, Column::AddHomeFlowEquations, Column::AddHsrtFlow] {
        assert!(value(c) >= base, "{}", c.label());
    }
    let full = value(Column::Full);
    for c in [Column::FullWithoutHomeFlowEquations, Column::FullWithoutHsrtFlow] {
        assert!(full >= value(c), "{}", c.label());
    }
}

#[test]
fn float_solves_are_deterministic() {
    let model = relaxed_model(&gen_circ(4).unwrap(), Column::Full, true).unwrap();
    let a = solve_simplex(&model, float()).unwrap();
    let b = solve_simplex(&model, float()).unwrap();
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.primal, b.primal);
}
