use serde::{Deserialize, Serialize};

use super::{int, is_nonneg, one, Family, LinearConstraint, Model, ModelError, Sense};
use crate::schedule::{Instance, Layout};
use crate::Rational;

/// Which variants and inequality families to put into a model.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub mirrored: bool,
    pub no_repeaters: bool,
    /// Cap on home stands and road trips; adds the capacity rows when set.
    pub u: Option<usize>,
    /// Lifted away-away rows (both versions), replacing the unlifted ones.
    pub lifted_away_away: bool,
    /// Lifted home-away and away-home rows, replacing the unlifted ones.
    pub lifted_home_away: bool,
    /// Keep unlifted rows alongside their lifted replacements.
    pub keep_unlifted: bool,
    /// Flow inequalities for venues other than the team's own.
    pub flow: bool,
    /// Flow inequalities at the team's own venue.
    pub flow_home_venue: bool,
    pub home_flow: bool,
    pub flow_equations: bool,
    /// Home-stand/road-trip flow inequalities (needs `u`).
    pub hsrt_flow: bool,
}

impl BuildOptions {
    /// Formulation without any variant rows.
    pub fn plain() -> Self {
        Self::default()
    }

    /// No-repeaters plus home stands and road trips of length at most 3.
    pub fn base() -> Self {
        BuildOptions { no_repeaters: true, u: Some(3), ..Self::default() }
    }

    pub fn with_mirrored(mut self, mirrored: bool) -> Self {
        self.mirrored = mirrored;
        self
    }

    pub fn with_lifted(mut self, on: bool) -> Self {
        self.lifted_away_away = on;
        self.lifted_home_away = on;
        self
    }

    /// Flow inequalities at every venue.
    pub fn with_flow(mut self, on: bool) -> Self {
        self.flow = on;
        self.flow_home_venue = on;
        self
    }

    pub fn with_home_flow_and_equations(mut self, on: bool) -> Self {
        self.home_flow = on;
        self.flow_equations = on;
        self
    }

    pub fn with_hsrt_flow(mut self, on: bool) -> Self {
        self.hsrt_flow = on;
        self
    }

    pub fn validate(&self, n: usize) -> Result<(), ModelError> {
        if let Some(u) = self.u {
            check_u(n, u)?;
        }
        if self.hsrt_flow && self.u.is_none() {
            return Err(ModelError::HsrtFlowWithoutU);
        }
        Ok(())
    }
}

fn check_u(n: usize, u: usize) -> Result<(), ModelError> {
    let limit = 2 * n - 2;
    if u == 0 || u >= limit {
        return Err(ModelError::BadU { u, limit });
    }
    Ok(())
}

struct Rows {
    l: Layout,
}

type Terms = Vec<(usize, Rational)>;

impl Rows {
    fn n(&self) -> usize {
        self.l.n()
    }
    fn last(&self) -> usize {
        self.l.num_slots()
    }
    fn x(&self, k: usize, i: usize, j: usize) -> (usize, Rational) {
        (self.l.x(k, i, j), one())
    }
    fn y(&self, t: usize, i: usize, j: usize, c: i64) -> (usize, Rational) {
        (self.l.y(t, i, j), int(c))
    }
    fn arcs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n();
        (1..=n).flat_map(move |i| (1..=n).filter(move |&j| j != i).map(move |j| (i, j)))
    }
    /// `sum_{j != t} x_{k,t,j}`: team `t` plays at home in slot `k`.
    fn home(&self, k: usize, t: usize) -> Terms {
        (1..=self.n()).filter(|&j| j != t).map(|j| self.x(k, t, j)).collect()
    }
    /// `sum_{i != t} x_{k,i,t}`: team `t` plays away in slot `k`.
    fn away(&self, k: usize, t: usize) -> Terms {
        (1..=self.n()).filter(|&i| i != t).map(|i| self.x(k, i, t)).collect()
    }
    fn leave(&self, t: usize, i: usize) -> Terms {
        (1..=self.n()).filter(|&j| j != i).map(|j| self.y(t, i, j, 1)).collect()
    }
    fn enter(&self, t: usize, i: usize) -> Terms {
        (1..=self.n()).filter(|&j| j != i).map(|j| self.y(t, j, i, 1)).collect()
    }
}

fn rows(m: &Model) -> Rows {
    Rows { l: m.layout() }
}

fn row(family: Family, idx: &[usize], terms: Terms, sense: Sense, rhs: i64) -> LinearConstraint {
    LinearConstraint::new(family, idx, terms, sense, int(rhs))
}

/// Objective `sum d_{i,j} y_{t,i,j}` and no rows.
pub fn empty_model(inst: &Instance) -> Model {
    let l = Layout::new(inst.n());
    let mut obj = vec![int(0); l.num_vars()];
    for t in 1..=inst.n() {
        for i in 1..=inst.n() {
            for j in 1..=inst.n() {
                if i != j {
                    obj[l.y(t, i, j)] = inst.distance(i, j).clone();
                }
            }
        }
    }
    debug_assert!(obj.iter().all(is_nonneg));
    Model::new(inst.name().to_string(), inst.n(), obj)
}

/// Builds the formulation with the requested variants and families.
pub fn build(inst: &Instance, opts: &BuildOptions) -> Result<Model, ModelError> {
    opts.validate(inst.n())?;
    let mut m = empty_model(inst);
    let slots = m.layout().num_slots();
    add_team_plays(&mut m, 2..=slots);
    add_pair_plays(&mut m);
    if !opts.lifted_away_away || opts.keep_unlifted {
        add_away_away(&mut m);
    }
    if !opts.lifted_home_away || opts.keep_unlifted {
        add_home_away(&mut m);
        add_away_home(&mut m);
    }
    add_first_last(&mut m);
    if opts.mirrored {
        add_mirrored(&mut m);
    }
    if opts.no_repeaters {
        add_no_repeaters(&mut m);
    }
    if let Some(u) = opts.u {
        add_hsrt(&mut m, u)?;
    }
    if opts.lifted_away_away {
        add_lifted_away_away(&mut m);
    }
    if opts.lifted_home_away {
        add_lifted_home_away(&mut m);
        add_lifted_away_home(&mut m);
    }
    if opts.flow || opts.flow_home_venue {
        add_flow_rows(&mut m, opts.flow, opts.flow_home_venue);
    }
    if opts.home_flow {
        add_home_flow(&mut m);
    }
    if opts.flow_equations {
        add_flow_equations(&mut m);
    }
    if opts.hsrt_flow {
        add_hsrt_flow(&mut m, opts.u.ok_or(ModelError::HsrtFlowWithoutU)?)?;
    }
    Ok(m)
}

/// Team-plays equations for the given slots.
pub fn add_team_plays(m: &mut Model, slots: impl IntoIterator<Item = usize>) {
    let r = rows(m);
    for k in slots {
        for i in 1..=r.n() {
            let mut terms = r.home(k, i);
            terms.extend(r.away(k, i));
            let family = if k == 1 { Family::TeamPlaysFirstSlot } else { Family::TeamPlays };
            m.push(row(family, &[k, i], terms, Sense::Eq, 1));
        }
    }
}

pub fn add_pair_plays(m: &mut Model) {
    let r = rows(m);
    for (i, j) in r.arcs() {
        let terms = (1..=r.last()).map(|k| r.x(k, i, j)).collect();
        m.push(row(Family::PairPlays, &[i, j], terms, Sense::Eq, 1));
    }
}

/// `x_{k,i,t} + x_{k+1,j,t} - y_{t,i,j} <= 1`.
pub fn add_away_away(m: &mut Model) {
    let r = rows(m);
    for k in 1..r.last() {
        for (i, j) in r.arcs() {
            for t in (1..=r.n()).filter(|&t| t != i && t != j) {
                let terms = vec![r.x(k, i, t), r.x(k + 1, j, t), r.y(t, i, j, -1)];
                m.push(row(Family::AwayAway, &[k, i, j, t], terms, Sense::Le, 1));
            }
        }
    }
}

/// `sum_i x_{k,t,i} + x_{k+1,j,t} - y_{t,t,j} <= 1`.
pub fn add_home_away(m: &mut Model) {
    let r = rows(m);
    for k in 1..r.last() {
        for (t, j) in r.arcs() {
            let mut terms = r.home(k, t);
            terms.push(r.x(k + 1, j, t));
            terms.push(r.y(t, t, j, -1));
            m.push(row(Family::HomeAway, &[k, t, j], terms, Sense::Le, 1));
        }
    }
}

/// `x_{k-1,i,t} + sum_j x_{k,t,j} - y_{t,i,t} <= 1`.
pub fn add_away_home(m: &mut Model) {
    let r = rows(m);
    for k in 2..=r.last() {
        for (i, t) in r.arcs() {
            let mut terms = vec![r.x(k - 1, i, t)];
            terms.extend(r.home(k, t));
            terms.push(r.y(t, i, t, -1));
            m.push(row(Family::AwayHome, &[k, i, t], terms, Sense::Le, 1));
        }
    }
}

/// First- and last-slot links `x_{1,j,t} <= y_{t,t,j}`, `x_{2n-2,i,t} <= y_{t,i,t}`.
pub fn add_first_last(m: &mut Model) {
    let r = rows(m);
    for (t, j) in r.arcs() {
        let terms = vec![r.x(1, j, t), r.y(t, t, j, -1)];
        m.push(row(Family::FirstSlot, &[t, j], terms, Sense::Le, 0));
    }
    for (i, t) in r.arcs() {
        let terms = vec![r.x(r.last(), i, t), r.y(t, i, t, -1)];
        m.push(row(Family::LastSlot, &[i, t], terms, Sense::Le, 0));
    }
}

/// `x_{k,i,j} = x_{k+n-1,j,i}` for `k < n`.
pub fn add_mirrored(m: &mut Model) {
    let r = rows(m);
    let n = r.n();
    for k in 1..n {
        assert!(k + n - 1 <= r.last());
        for (i, j) in r.arcs() {
            let terms = vec![r.x(k, i, j), (r.l.x(k + n - 1, j, i), int(-1))];
            m.push(row(Family::Mirrored, &[k, i, j], terms, Sense::Eq, 0));
        }
    }
}

/// `x_{k,i,j} + x_{k+1,j,i} <= 1`.
pub fn add_no_repeaters(m: &mut Model) {
    let r = rows(m);
    for k in 1..r.last() {
        for (i, j) in r.arcs() {
            let terms = vec![r.x(k, i, j), r.x(k + 1, j, i)];
            m.push(row(Family::NoRepeater, &[k, i, j], terms, Sense::Le, 1));
        }
    }
}

/// At most `u` consecutive home (resp. away) matches.
pub fn add_hsrt(m: &mut Model, u: usize) -> Result<(), ModelError> {
    check_u(m.n(), u)?;
    let r = rows(m);
    let u_i = u as i64;
    for k in 1..=r.last() - u {
        for t in 1..=r.n() {
            let terms = (0..=u).flat_map(|l| r.home(k + l, t)).collect();
            m.push(row(Family::HomeStand, &[k, t], terms, Sense::Le, u_i));
        }
    }
    for k in 1..=r.last() - u {
        for t in 1..=r.n() {
            let terms = (0..=u).flat_map(|l| r.away(k + l, t)).collect();
            m.push(row(Family::RoadTrip, &[k, t], terms, Sense::Le, u_i));
        }
    }
    Ok(())
}

/// Both lifted versions of the away-away rows.
pub fn add_lifted_away_away(m: &mut Model) {
    let r = rows(m);
    for (family, second) in [(Family::LiftedAwayAwayFirst, false), (Family::LiftedAwayAwaySecond, true)] {
        for k in 1..r.last() {
            for (i, j) in r.arcs() {
                for t in (1..=r.n()).filter(|&t| t != i && t != j) {
                    let extra = if second { r.x(k + 1, i, t) } else { r.x(k, j, t) };
                    let terms = vec![extra, r.x(k, i, t), r.x(k + 1, j, t), r.y(t, i, j, -1)];
                    m.push(row(family, &[k, i, j, t], terms, Sense::Le, 1));
                }
            }
        }
    }
}

/// `x_{1,j,t} + x_{k,j,t} + sum_i x_{k,t,i} + x_{k+1,j,t} - y_{t,t,j} <= 1`.
pub fn add_lifted_home_away(m: &mut Model) {
    let r = rows(m);
    for k in 1..r.last() {
        for (t, j) in r.arcs() {
            let mut terms = vec![r.x(1, j, t), r.x(k, j, t)];
            terms.extend(r.home(k, t));
            terms.push(r.x(k + 1, j, t));
            terms.push(r.y(t, t, j, -1));
            m.push(row(Family::LiftedHomeAway, &[k, t, j], terms, Sense::Le, 1));
        }
    }
}

/// `x_{2n-2,i,t} + x_{k,i,t} + sum_j x_{k,t,j} + x_{k-1,i,t} - y_{t,i,t} <= 1`.
pub fn add_lifted_away_home(m: &mut Model) {
    let r = rows(m);
    let last = r.last();
    for k in 2..=last {
        for (i, t) in r.arcs() {
            let mut terms = vec![r.x(last, i, t), r.x(k, i, t)];
            terms.extend(r.home(k, t));
            terms.push(r.x(k - 1, i, t));
            terms.push(r.y(t, i, t, -1));
            m.push(row(Family::LiftedAwayHome, &[k, i, t], terms, Sense::Le, 1));
        }
    }
}

/// Flow inequalities for `i != t`, optionally also for the home venue `i = t`.
pub fn add_flow(m: &mut Model, include_home_venue: bool) {
    add_flow_rows(m, true, include_home_venue);
}

fn add_flow_rows(m: &mut Model, distinct: bool, home_venue: bool) {
    let r = rows(m);
    if distinct {
        for (t, i) in r.arcs() {
            m.push(row(Family::FlowOut, &[t, i], r.leave(t, i), Sense::Ge, 1));
        }
        for (t, i) in r.arcs() {
            m.push(row(Family::FlowIn, &[t, i], r.enter(t, i), Sense::Ge, 1));
        }
    }
    if home_venue {
        for t in 1..=r.n() {
            m.push(row(Family::FlowOutHome, &[t], r.leave(t, t), Sense::Ge, 1));
        }
        for t in 1..=r.n() {
            m.push(row(Family::FlowInHome, &[t], r.enter(t, t), Sense::Ge, 1));
        }
    }
}

/// The four home-flow families for `k < n`.
pub fn add_home_flow(m: &mut Model) {
    let r = rows(m);
    let n = r.n();
    for family in [Family::HomeFlowOutHome, Family::HomeFlowOutAway, Family::HomeFlowInHome, Family::HomeFlowInAway] {
        for k in 1..n {
            for t in 1..=n {
                let k2 = k + n - 1;
                assert!(k2 <= r.last());
                let (mut terms, plays) = match family {
                    Family::HomeFlowOutHome => (r.leave(t, t), [r.home(k, t), r.home(k2, t)]),
                    Family::HomeFlowOutAway => (r.leave(t, t), [r.away(k, t), r.away(k2, t)]),
                    Family::HomeFlowInHome => (r.enter(t, t), [r.home(k, t), r.home(k2, t)]),
                    _ => (r.enter(t, t), [r.away(k, t), r.away(k2, t)]),
                };
                terms.extend(plays.into_iter().flatten());
                m.push(row(family, &[k, t], terms, Sense::Ge, 2));
            }
        }
    }
}

/// Each team leaves and enters every other venue exactly once.
pub fn add_flow_equations(m: &mut Model) {
    let r = rows(m);
    for (t, i) in r.arcs() {
        m.push(row(Family::FlowEqOut, &[t, i], r.leave(t, i), Sense::Eq, 1));
    }
    for (t, j) in r.arcs() {
        m.push(row(Family::FlowEqIn, &[t, j], r.enter(t, j), Sense::Eq, 1));
    }
}

/// Leaves (enters) home at least `ceil((n-1)/u)` times.
pub fn add_hsrt_flow(m: &mut Model, u: usize) -> Result<(), ModelError> {
    if u == 0 {
        return Err(ModelError::BadU { u, limit: 2 * m.n() - 2 });
    }
    let r = rows(m);
    let rhs = hsrt_flow_rhs(r.n(), u) as i64;
    for t in 1..=r.n() {
        m.push(row(Family::HomeStandFlow, &[t], r.leave(t, t), Sense::Ge, rhs));
    }
    for t in 1..=r.n() {
        m.push(row(Family::RoadTripFlow, &[t], r.enter(t, t), Sense::Ge, rhs));
    }
    Ok(())
}

pub fn hsrt_flow_rhs(n: usize, u: usize) -> usize {
    (n - 1).div_ceil(u)
}
