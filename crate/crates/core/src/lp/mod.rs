//! LP relaxations: an in-repo simplex (floating point or exact rational) and a
//! bridge to an external solver used for cross-checks.

mod certify;
mod external;
mod scalar;
mod simplex;

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{Model, Sense};
use crate::Rational;

pub use external::{external_command_from_env, solve_external, ExternalError, EXTERNAL_SOLVER_ENV};
use simplex::{KernelOptions, Pricing};

pub const DEFAULT_TOL: f64 = 1e-7;
const PERTURBATION_SEED: u64 = 0x5eed;
pub const DEFAULT_MAX_ITERATIONS: usize = 200_000;
/// Largest numerator+denominator size, in bits, allowed in an exact tableau cell.
pub const DEFAULT_MAX_BITS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveMode {
    Float { tol: f64 },
    Exact,
}

impl Default for SolveMode {
    fn default() -> Self {
        SolveMode::Float { tol: DEFAULT_TOL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub mode: SolveMode,
    pub max_iterations: usize,
    pub max_bits: u64,
    /// Exact mode only: skip the floating-point basis and pivot in rational
    /// arithmetic from the start.
    pub exact_from_scratch: bool,
}

impl SimplexOptions {
    pub fn new(mode: SolveMode) -> Self {
        SimplexOptions {
            mode,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            max_bits: DEFAULT_MAX_BITS,
            exact_from_scratch: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl std::fmt::Display for LpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::IterationLimit => "iteration limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("the model is integral; relax it before solving the LP")]
    IntegralModel,
    #[error("lower bound of column {0} is not finite or exceeds its upper bound")]
    BadBounds(usize),
    #[error("column index {col} out of range ({cols} columns)")]
    BadColumn { col: usize, cols: usize },
    #[error("exact tableau entry of {bits} bits exceeds the {limit}-bit guard")]
    CellSizeExceeded { bits: u64, limit: u64 },
    #[error("iteration limit reached")]
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpRow {
    pub terms: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

/// `min c x  s.t. rows, lower <= x <= upper` (upper `None` = +inf).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpProblem {
    pub objective: Vec<Rational>,
    pub rows: Vec<LpRow>,
    pub lower: Vec<Rational>,
    pub upper: Vec<Option<Rational>>,
}

impl LpProblem {
    pub fn new(objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LpProblem { objective, rows: Vec::new(), lower: vec![Rational::zero(); n], upper: vec![None; n] }
    }

    pub fn num_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, terms: Vec<(usize, Rational)>, sense: Sense, rhs: Rational) {
        self.rows.push(LpRow { terms, sense, rhs });
    }

    pub fn from_model(model: &Model) -> Self {
        let n = model.num_vars();
        LpProblem {
            objective: model.objective().to_vec(),
            rows: model
                .constraints()
                .iter()
                .map(|c| LpRow { terms: c.terms().to_vec(), sense: c.sense, rhs: c.rhs.clone() })
                .collect(),
            lower: vec![Rational::zero(); n],
            upper: vec![Some(num_traits::One::one()); n],
        }
    }

    fn check(&self) -> Result<(), LpError> {
        let cols = self.num_cols();
        for (c, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if u.as_ref().is_some_and(|u| u < l) {
                return Err(LpError::BadBounds(c));
            }
        }
        if self.lower.len() != cols || self.upper.len() != cols {
            return Err(LpError::BadBounds(cols));
        }
        for r in &self.rows {
            if let Some((col, _)) = r.terms.iter().find(|(c, _)| *c >= cols) {
                return Err(LpError::BadColumn { col: *col, cols });
            }
        }
        Ok(())
    }

    /// Largest row or bound violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for r in &self.rows {
            let lhs: f64 = r.terms.iter().map(|(c, a)| a.to_f64().unwrap_or(f64::NAN) * x[*c]).sum();
            let rhs = r.rhs.to_f64().unwrap_or(f64::NAN);
            let v = match r.sense {
                Sense::Le => lhs - rhs,
                Sense::Ge => rhs - lhs,
                Sense::Eq => (lhs - rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (c, v) in x.iter().enumerate() {
            worst = worst.max(self.lower[c].to_f64().unwrap_or(0.0) - v);
            if let Some(u) = &self.upper[c] {
                worst = worst.max(v - u.to_f64().unwrap_or(0.0));
            }
        }
        worst
    }

    /// Exact feasibility check of a rational point.
    pub fn is_feasible_exact(&self, x: &[Rational]) -> bool {
        let rows_ok = self.rows.iter().all(|r| {
            let lhs: Rational = r.terms.iter().map(|(c, a)| a * &x[*c]).sum();
            match r.sense {
                Sense::Le => lhs <= r.rhs,
                Sense::Ge => lhs >= r.rhs,
                Sense::Eq => lhs == r.rhs,
            }
        });
        rows_ok
            && x.iter().enumerate().all(|(c, v)| *v >= self.lower[c] && self.upper[c].as_ref().is_none_or(|u| v <= u))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    /// Set in exact mode.
    pub exact_objective: Option<Rational>,
    /// One value per model column (see [`Model::var_key`]).
    pub primal: Vec<f64>,
    pub exact_primal: Option<Vec<Rational>>,
    pub iterations: usize,
    /// Improving direction of an unbounded LP.
    pub ray: Option<Vec<f64>>,
    /// Sum of artificials at the end of phase 1.
    pub infeasibility: f64,
    /// Exact mode: optimality was proven on the floating-point basis.
    pub certified_basis: bool,
    basis: Option<simplex::FinalBasis>,
}

impl LpResult {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

pub fn solve_problem(p: &LpProblem, opts: &SimplexOptions) -> Result<LpResult, LpError> {
    p.check()?;
    match opts.mode {
        SolveMode::Float { tol } => {
            let k = simplex::solve::<f64>(
                p,
                KernelOptions {
                    tol,
                    pivot_tol: 1e-7,
                    tie_tol: 1e-12,
                    perturb: Some(PERTURBATION_SEED),
                    pricing: Pricing::DantzigThenBland,
                    max_iterations: opts.max_iterations,
                    max_bits: 0,
                },
            )?;
            let objective = p.objective.iter().zip(&k.primal).map(|(c, v)| c.to_f64().unwrap_or(0.0) * v).sum();
            Ok(LpResult {
                status: k.status,
                objective,
                exact_objective: None,
                primal: k.primal,
                exact_primal: None,
                iterations: k.iterations,
                ray: k.ray,
                infeasibility: k.phase1,
                certified_basis: false,
                basis: k.basis,
            })
        }
        SolveMode::Exact => {
            if !opts.exact_from_scratch {
                let float = solve_problem(p, &SimplexOptions { mode: SolveMode::default(), ..*opts })?;
                if let Some(x) = float.basis.as_ref().and_then(|b| certify::certify(p, b).ok()) {
                    let objective: Rational = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                    return Ok(LpResult {
                        status: LpStatus::Optimal,
                        objective: objective.to_f64().unwrap_or(f64::NAN),
                        exact_objective: Some(objective),
                        primal: x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
                        exact_primal: Some(x),
                        iterations: float.iterations,
                        ray: None,
                        infeasibility: 0.0,
                        certified_basis: true,
                        basis: None,
                    });
                }
            }
            let k = simplex::solve::<Rational>(
                p,
                KernelOptions {
                    tol: Rational::zero(),
                    pivot_tol: Rational::zero(),
                    tie_tol: Rational::zero(),
                    perturb: None,
                    pricing: Pricing::Dantzig,
                    max_iterations: opts.max_iterations,
                    max_bits: opts.max_bits,
                },
            )?;
            let objective: Rational = p.objective.iter().zip(&k.primal).map(|(c, v)| c * v).sum();
            Ok(LpResult {
                status: k.status,
                objective: objective.to_f64().unwrap_or(f64::NAN),
                exact_objective: Some(objective),
                primal: k.primal.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
                exact_primal: Some(k.primal),
                iterations: k.iterations,
                ray: k.ray.map(|r| r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()),
                infeasibility: k.phase1.to_f64().unwrap_or(f64::NAN),
                certified_basis: false,
                basis: None,
            })
        }
    }
}

/// Solves the LP `model` (which must already be relaxed).
pub fn solve_simplex(model: &Model, mode: SolveMode) -> Result<LpResult, LpError> {
    if model.is_integral() {
        return Err(LpError::IntegralModel);
    }
    solve_problem(&LpProblem::from_model(model), &SimplexOptions::new(mode))
}

/// Relative difference used for objective comparisons.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::int;

    fn modes() -> [SolveMode; 2] {
        [SolveMode::default(), SolveMode::Exact]
    }

    #[test]
    fn trivial() {
        // min y : y >= 1, 0 <= y <= 1
        let mut p = LpProblem::new(vec![int(1)]);
        p.upper[0] = Some(int(1));
        p.add_row(vec![(0, int(1))], Sense::Ge, int(1));
        for mode in modes() {
            let r = solve_problem(&p, &SimplexOptions::new(mode)).unwrap();
            assert_eq!(r.status, LpStatus::Optimal);
            assert!((r.objective - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn small_textbook() {
        // min -x - y : x + 2y <= 4, 3x + y <= 6 ; optimum at (8/5, 6/5), value -14/5
        let mut p = LpProblem::new(vec![int(-1), int(-1)]);
        p.add_row(vec![(0, int(1)), (1, int(2))], Sense::Le, int(4));
        p.add_row(vec![(0, int(3)), (1, int(1))], Sense::Le, int(6));
        let r = solve_problem(&p, &SimplexOptions::new(SolveMode::Exact)).unwrap();
        assert_eq!(r.exact_objective, Some(Rational::new((-14).into(), 5.into())));
        assert!(p.is_feasible_exact(r.exact_primal.as_ref().unwrap()));
        let f = solve_problem(&p, &SimplexOptions::new(SolveMode::default())).unwrap();
        assert!((f.objective + 2.8).abs() < 1e-9);
    }

    #[test]
    fn equality_and_bounds() {
        // min x0 - x1 : x0 + x1 = 3, 1 <= x0 <= 2, x1 <= 1.5
        let mut p = LpProblem::new(vec![int(1), int(-1)]);
        p.lower[0] = int(1);
        p.upper[0] = Some(int(2));
        p.upper[1] = Some(Rational::new(3.into(), 2.into()));
        p.add_row(vec![(0, int(1)), (1, int(1))], Sense::Eq, int(3));
        for mode in modes() {
            let r = solve_problem(&p, &SimplexOptions::new(mode)).unwrap();
            assert_eq!(r.status, LpStatus::Optimal);
            assert!((r.objective - 0.0).abs() < 1e-9, "{r:?}");
            assert!(p.max_violation(&r.primal) < 1e-9);
        }
    }

    #[test]
    fn infeasible() {
        let mut p = LpProblem::new(vec![int(1)]);
        p.upper[0] = Some(int(1));
        p.add_row(vec![(0, int(1))], Sense::Ge, int(2));
        for mode in modes() {
            let r = solve_problem(&p, &SimplexOptions::new(mode)).unwrap();
            assert_eq!(r.status, LpStatus::Infeasible);
            assert!(r.infeasibility > 0.5);
        }
    }

    #[test]
    fn unbounded_with_ray() {
        // min -x0 : x0 - x1 <= 1, x >= 0
        let mut p = LpProblem::new(vec![int(-1), int(0)]);
        p.add_row(vec![(0, int(1)), (1, int(-1))], Sense::Le, int(1));
        for mode in modes() {
            let r = solve_problem(&p, &SimplexOptions::new(mode)).unwrap();
            assert_eq!(r.status, LpStatus::Unbounded);
            let ray = r.ray.unwrap();
            assert!(-ray[0] < 0.0, "ray must improve the objective");
            assert!(ray[0] - ray[1] <= 1e-12 && ray.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under Dantzig pricing without an anti-cycling rule.
        let q = |a: i64, b: i64| Rational::new(a.into(), b.into());
        let mut p = LpProblem::new(vec![q(-3, 4), int(150), q(-1, 50), int(6)]);
        p.add_row(vec![(0, q(1, 4)), (1, int(-60)), (2, q(-1, 25)), (3, int(9))], Sense::Le, int(0));
        p.add_row(vec![(0, q(1, 2)), (1, int(-90)), (2, q(-1, 50)), (3, int(3))], Sense::Le, int(0));
        p.add_row(vec![(2, int(1))], Sense::Le, int(1));
        let opts = SimplexOptions { exact_from_scratch: true, ..SimplexOptions::new(SolveMode::Exact) };
        let r = solve_problem(&p, &opts).unwrap();
        assert_eq!(r.exact_objective, Some(q(-1, 20)));
        let f = solve_problem(&p, &SimplexOptions::new(SolveMode::default())).unwrap();
        assert!((f.objective + 0.05).abs() < 1e-9);
    }

    #[test]
    fn iteration_limit() {
        let mut p = LpProblem::new(vec![int(-1), int(-1)]);
        p.add_row(vec![(0, int(1)), (1, int(2))], Sense::Le, int(4));
        p.add_row(vec![(0, int(3)), (1, int(1))], Sense::Le, int(6));
        let opts = SimplexOptions { max_iterations: 1, exact_from_scratch: true, ..SimplexOptions::new(SolveMode::Exact) };
        assert_eq!(solve_problem(&p, &opts).unwrap().status, LpStatus::IterationLimit);
    }

    #[test]
    fn bad_input() {
        let mut p = LpProblem::new(vec![int(1)]);
        p.add_row(vec![(3, int(1))], Sense::Le, int(1));
        assert!(matches!(solve_problem(&p, &SimplexOptions::new(SolveMode::Exact)), Err(LpError::BadColumn { .. })));
    }
}
