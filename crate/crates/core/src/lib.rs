//! Cubic integer programming formulation of the unconstrained traveling
//! tournament problem.
//!
//! The crate covers the whole pipeline from tournaments to polyhedral claims:
//!
//! * [`schedule`]: matches, tournaments, play and travel vectors;
//! * [`construct`]: canonical factorization, local transformations and
//!   exhaustive enumeration for four teams;
//! * [`instances`]: synthetic distance families and the RobinX subset;
//! * [`model`]: the formulation, its variants and strengthening inequalities,
//!   LP/MPS export;
//! * [`lp`]: bounded two-phase simplex (floating point and exact rational)
//!   and an external-solver bridge;
//! * [`polyhedra`]: exact rank computations and the verification suite;
//! * [`tables`]: reproduction of the model-size and LP-bound tables.

pub mod construct;
pub mod instances;
pub mod lp;
pub mod model;
pub mod polyhedra;
pub mod schedule;
pub mod tables;

/// Exact rational number used for distances, coefficients and objective values.
pub type Rational = num_rational::BigRational;

pub use schedule::{Instance, MatchKey, SolutionPoint, TeamId, Tournament};
