//! In-memory IP/LP model over play variables `x_{k,i,j}` and travel variables
//! `y_{t,i,j}`.

mod build;
pub mod export;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schedule::{ArcKey, Layout, MatchKey, TeamId};
use crate::Rational;

pub use build::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("home-stand/road-trip flow inequalities require the parameter U")]
    HsrtFlowWithoutU,
    #[error("U = {u} is not in 1..{limit} (the constraint would be vacuous or infeasible)")]
    BadU { u: usize, limit: usize },
    #[error("model for n = {model} does not match instance with n = {instance}")]
    SizeMismatch { model: usize, instance: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKey {
    Play(MatchKey),
    Travel { team: TeamId, arc: ArcKey },
}

impl VarKey {
    /// Name used in exported files: `x_k_i_j` or `y_t_i_j`.
    pub fn name(&self) -> String {
        match self {
            VarKey::Play(m) => format!("x_{}_{}_{}", m.slot, m.home, m.away),
            VarKey::Travel { team, arc } => format!("y_{}_{}_{}", team, arc.from, arc.to),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

/// Constraint families of the formulation, its variants and cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// `x_{k,i,j} >= 0`; never added by the builder, used for face checks.
    NonNegative,
    /// Each team plays once per slot (slots 2..2n-2).
    TeamPlays,
    /// Each ordered pair meets once.
    PairPlays,
    AwayAway,
    HomeAway,
    AwayHome,
    /// `x_{1,j,t} <= y_{t,t,j}`.
    FirstSlot,
    /// `x_{2n-2,i,t} <= y_{t,i,t}`.
    LastSlot,
    Mirrored,
    NoRepeater,
    HomeStand,
    RoadTrip,
    LiftedAwayAwayFirst,
    LiftedAwayAwaySecond,
    LiftedHomeAway,
    LiftedAwayHome,
    /// Team `t` leaves venue `i != t` at least once.
    FlowOut,
    /// Team `t` enters venue `i != t` at least once.
    FlowIn,
    FlowOutHome,
    FlowInHome,
    HomeFlowOutHome,
    HomeFlowOutAway,
    HomeFlowInHome,
    HomeFlowInAway,
    FlowEqOut,
    FlowEqIn,
    HomeStandFlow,
    RoadTripFlow,
    /// Slot-1 team equations, only used for redundancy checks.
    TeamPlaysFirstSlot,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::NonNegative => "nonneg",
            Family::TeamPlays => "team_plays",
            Family::PairPlays => "pair_plays",
            Family::AwayAway => "away_away",
            Family::HomeAway => "home_away",
            Family::AwayHome => "away_home",
            Family::FirstSlot => "first_slot",
            Family::LastSlot => "last_slot",
            Family::Mirrored => "mirrored",
            Family::NoRepeater => "no_repeater",
            Family::HomeStand => "home_stand",
            Family::RoadTrip => "road_trip",
            Family::LiftedAwayAwayFirst => "lifted_away_away_a",
            Family::LiftedAwayAwaySecond => "lifted_away_away_b",
            Family::LiftedHomeAway => "lifted_home_away",
            Family::LiftedAwayHome => "lifted_away_home",
            Family::FlowOut => "flow_out",
            Family::FlowIn => "flow_in",
            Family::FlowOutHome => "flow_out_home",
            Family::FlowInHome => "flow_in_home",
            Family::HomeFlowOutHome => "home_flow_out_home",
            Family::HomeFlowOutAway => "home_flow_out_away",
            Family::HomeFlowInHome => "home_flow_in_home",
            Family::HomeFlowInAway => "home_flow_in_away",
            Family::FlowEqOut => "flow_eq_out",
            Family::FlowEqIn => "flow_eq_in",
            Family::HomeStandFlow => "home_stand_flow",
            Family::RoadTripFlow => "road_trip_flow",
            Family::TeamPlaysFirstSlot => "team_plays_first",
        }
    }
}

/// One row `sum a_v v (<=|=|>=) rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    terms: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
    pub family: Family,
    /// `family[indices]`, unique within a model.
    pub tag: String,
}

impl LinearConstraint {
    /// Merges duplicate columns and drops zero coefficients.
    pub fn new(
        family: Family,
        indices: &[usize],
        terms: impl IntoIterator<Item = (usize, Rational)>,
        sense: Sense,
        rhs: Rational,
    ) -> Self {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (col, c) in terms {
            *acc.entry(col).or_insert_with(Rational::zero) += c;
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let idx: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
        LinearConstraint { terms, sense, rhs, family, tag: format!("{}[{}]", family.name(), idx.join(",")) }
    }

    /// Sorted `(column, coefficient)` pairs, all coefficients nonzero.
    pub fn terms(&self) -> &[(usize, Rational)] {
        &self.terms
    }

    pub fn coefficient(&self, col: usize) -> Rational {
        match self.terms.binary_search_by_key(&col, |(c, _)| *c) {
            Ok(pos) => self.terms[pos].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn lhs(&self, point: &[u8]) -> Rational {
        let mut s = Rational::zero();
        for (col, c) in &self.terms {
            if point[*col] != 0 {
                s += c * Rational::from_integer(point[*col].into());
            }
        }
        s
    }

    pub fn is_satisfied(&self, point: &[u8]) -> bool {
        let lhs = self.lhs(point);
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Eq => lhs == self.rhs,
            Sense::Ge => lhs >= self.rhs,
        }
    }

    /// Integer copy of the row, if all data are integral and fit in `i64`.
    pub fn to_int_row(&self) -> Option<IntRow> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (col, c) in &self.terms {
            if !c.is_integer() {
                return None;
            }
            terms.push((*col as u32, c.to_integer().to_i64()?));
        }
        if !self.rhs.is_integer() {
            return None;
        }
        Some(IntRow { terms, sense: self.sense, rhs: self.rhs.to_integer().to_i64()? })
    }

    /// The same row written as `>=` (for `<=` rows both sides are negated).
    pub fn as_ge(&self) -> LinearConstraint {
        match self.sense {
            Sense::Le => LinearConstraint {
                terms: self.terms.iter().map(|(c, a)| (*c, -a)).collect(),
                sense: Sense::Ge,
                rhs: -&self.rhs,
                family: self.family,
                tag: self.tag.clone(),
            },
            _ => self.clone(),
        }
    }
}

/// Compact integer row for fast evaluation on 0/1 points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntRow {
    pub terms: Vec<(u32, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl IntRow {
    pub fn lhs(&self, point: &[u8]) -> i64 {
        self.terms.iter().map(|&(c, a)| a * point[c as usize] as i64).sum()
    }

    pub fn is_satisfied(&self, point: &[u8]) -> bool {
        let lhs = self.lhs(point);
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Eq => lhs == self.rhs,
            Sense::Ge => lhs >= self.rhs,
        }
    }

    /// `rhs - lhs` for `<=`, `lhs - rhs` otherwise; zero means tight.
    pub fn slack(&self, point: &[u8]) -> i64 {
        let lhs = self.lhs(point);
        match self.sense {
            Sense::Le => self.rhs - lhs,
            _ => lhs - self.rhs,
        }
    }

    pub fn coefficient(&self, col: usize) -> i64 {
        match self.terms.binary_search_by_key(&(col as u32), |&(c, _)| c) {
            Ok(p) => self.terms[p].1,
            Err(_) => 0,
        }
    }
}

/// The IP (or, after [`Model::relax`], its LP relaxation).
///
/// Variables follow the global [`Layout`]; every variable has bounds `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub name: String,
    n: usize,
    objective: Vec<Rational>,
    constraints: Vec<LinearConstraint>,
    integral: bool,
}

impl Model {
    /// Empty model: objective only, no rows.
    pub fn new(name: impl Into<String>, n: usize, objective: Vec<Rational>) -> Self {
        assert_eq!(objective.len(), Layout::new(n).num_vars());
        Model { name: name.into(), n, objective, constraints: Vec::new(), integral: true }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.n)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn var_key(&self, col: usize) -> VarKey {
        let l = self.layout();
        if col < l.num_play() {
            VarKey::Play(l.match_key(col))
        } else {
            let (team, arc) = l.travel_key(col - l.num_play());
            VarKey::Travel { team, arc }
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = VarKey> + '_ {
        (0..self.num_vars()).map(|c| self.var_key(c))
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.terms.len()).sum()
    }

    pub fn is_integral(&self) -> bool {
        self.integral
    }

    pub fn push(&mut self, c: LinearConstraint) {
        self.constraints.push(c);
    }

    pub fn count_family(&self, family: Family) -> usize {
        self.constraints.iter().filter(|c| c.family == family).count()
    }

    pub fn rows_of(&self, family: Family) -> impl Iterator<Item = &LinearConstraint> {
        self.constraints.iter().filter(move |c| c.family == family)
    }

    pub fn find(&self, tag: &str) -> Option<&LinearConstraint> {
        self.constraints.iter().find(|c| c.tag == tag)
    }

    /// Drops integrality; bounds stay `[0, 1]`.
    pub fn relax(&self) -> Model {
        let mut m = self.clone();
        m.integral = false;
        m
    }

    pub fn objective_value(&self, point: &[u8]) -> Rational {
        let mut s = Rational::zero();
        for (c, &v) in self.objective.iter().zip(point) {
            if v != 0 {
                s += c;
            }
        }
        s
    }

    pub fn int_rows(&self) -> Vec<IntRow> {
        self.constraints.iter().map(|c| c.to_int_row().expect("integral row data")).collect()
    }

    /// First violated row at `point`, if any.
    pub fn first_violation(&self, point: &[u8]) -> Option<&LinearConstraint> {
        self.constraints.iter().find(|c| !c.is_satisfied(point))
    }
}

pub(crate) fn one() -> Rational {
    Rational::one()
}

pub(crate) fn int(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

pub(crate) fn is_nonneg(r: &Rational) -> bool {
    !r.is_negative()
}
