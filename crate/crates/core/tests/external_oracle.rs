//! Compares the simplex with an external LP solver. Skipped unless the solver
//! command is configured, e.g.
//! `TTP_EXT_SOLVER='python3 scripts/highs_lp.py {lp} {sol}'`.

use ttp_core::instances::FamilyKind;
use ttp_core::lp::{external_command_from_env, relative_gap, solve_external, solve_simplex, SolveMode};
use ttp_core::tables::{relaxed_model, Column};

#[test]
fn external_solver_agrees_on_base_and_full_models() {
    let Some(cmd) = external_command_from_env() else {
        eprintln!("external solver not configured; skipping");
        return;
    };
    let mut cases = vec![(FamilyKind::Con, 6, Column::Base, false), (FamilyKind::Circ, 6, Column::Base, false)];
    for family in FamilyKind::ALL {
        for column in [Column::Base, Column::Full] {
            for mirrored in [false, true] {
                cases.push((family, 4, column, mirrored));
            }
        }
    }
    for (family, n, column, mirrored) in cases {
        let model = relaxed_model(&family.generate(n).unwrap(), column, mirrored).unwrap();
        let ours = solve_simplex(&model, SolveMode::Exact).unwrap();
        let theirs = solve_external(&model, &cmd).unwrap();
        assert!(theirs.is_optimal());
        let gap = relative_gap(ours.objective, theirs.objective);
        assert!(gap <= 1e-6, "{family}{n} {} m={mirrored}: {} vs {}", column.label(), ours.objective, theirs.objective);
    }
}
