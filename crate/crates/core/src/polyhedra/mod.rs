//! Exact verification of structural facts about the polytope of
//! (play, travel) vectors: equation rank, dimension, face dimensions.
//!
//! Points are tournaments `(x, y)` with `y` the actual travel vector, plus
//! every point obtained by switching on one unused travel variable. Each
//! face check streams these points, keeps those where the inequality is
//! tight and measures their affine dimension.

mod linalg;

use std::fmt::Write as _;
use std::ops::ControlFlow;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::construct::{enumerate_tournaments, ConstructError};
use crate::model::{self, Family, LinearConstraint, Model, Sense};
use crate::schedule::{check_team_count, Layout, ScheduleError};
use crate::Rational;

pub use linalg::{affine_rank, rank, AffineRank, RationalMatrix};

#[derive(Debug, Error)]
pub enum PolyhedraError {
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("point enumeration is only implemented for n = 4, not n = {0}")]
    Unsupported(usize),
    #[error("{tag} is not valid: violated by point {point}")]
    NotValid { tag: String, point: usize },
    #[error("{0} has non-integral data")]
    NonIntegral(String),
}

/// An inequality assumed to be valid for the polytope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceSpec {
    pub inequality: LinearConstraint,
}

impl FaceSpec {
    pub fn new(inequality: LinearConstraint) -> Self {
        FaceSpec { inequality }
    }

    pub fn tag(&self) -> &str {
        &self.inequality.tag
    }
}

/// `3n^3 - 8n^2 + 6n`.
pub fn polytope_dimension_formula(n: usize) -> usize {
    3 * n * n * n + 6 * n - 8 * n * n
}

/// `3n^2 - 4n`, the number of equations and the size of a column basis.
pub fn equation_count(n: usize) -> usize {
    3 * n * n - 4 * n
}

fn zero_model(n: usize) -> Model {
    Model::new(format!("zero{n}"), n, vec![Rational::default(); Layout::new(n).num_vars()])
}

/// Team-plays equations for slots `2..` and pair-plays equations.
pub fn equation_rows(n: usize) -> Result<Vec<LinearConstraint>, ScheduleError> {
    check_team_count(n)?;
    let mut m = zero_model(n);
    let slots = m.layout().num_slots();
    model::add_team_plays(&mut m, 2..=slots);
    model::add_pair_plays(&mut m);
    Ok(m.constraints().to_vec())
}

/// Coefficient matrix of [`equation_rows`] over the play variables.
pub fn equation_matrix(n: usize) -> Result<RationalMatrix, ScheduleError> {
    let rows = equation_rows(n)?;
    Ok(RationalMatrix::from_constraints(Layout::new(n).num_play(), &rows))
}

pub fn equation_rank(n: usize) -> Result<usize, ScheduleError> {
    Ok(equation_matrix(n)?.rank())
}

/// Play columns `(k,i,j)` with `k = k_bar`, `i = 1` or `(i,j) = (2,3)`.
pub fn basis_columns(n: usize, k_bar: usize) -> Vec<usize> {
    let l = Layout::new(n);
    let mut cols = Vec::new();
    for k in 1..=l.num_slots() {
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                if k == k_bar || i == 1 || (i, j) == (2, 3) {
                    cols.push(l.x(k, i, j));
                }
            }
        }
    }
    cols
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisCheck {
    pub n: usize,
    pub slot: usize,
    pub size: usize,
    pub expected_size: usize,
    pub nonsingular: bool,
}

impl BasisCheck {
    pub fn passes(&self) -> bool {
        self.size == self.expected_size && self.nonsingular
    }
}

/// Restricts the equation matrix to `cols` and tests it for exact nonsingularity.
pub fn check_columns(n: usize, slot: usize, cols: &[usize]) -> Result<BasisCheck, ScheduleError> {
    let sub = equation_matrix(n)?.select_columns(cols);
    let nonsingular = sub.determinant().is_some_and(|d| d != Rational::default());
    Ok(BasisCheck { n, slot, size: cols.len(), expected_size: equation_count(n), nonsingular })
}

pub fn check_basis_submatrix(n: usize, k_bar: usize) -> Result<BasisCheck, ScheduleError> {
    check_columns(n, k_bar, &basis_columns(n, k_bar))
}

pub fn basis_submatrix_invertible(n: usize, k_bar: usize) -> bool {
    check_basis_submatrix(n, k_bar).is_ok_and(|c| c.passes())
}

/// Slot-1 team-plays rows.
pub fn slot1_rows(n: usize) -> Vec<LinearConstraint> {
    let mut m = zero_model(n);
    model::add_team_plays(&mut m, [1]);
    m.constraints().to_vec()
}

/// Rank of the equation matrix with and without `extra` rows appended.
pub fn rank_with(n: usize, extra: &[Vec<Rational>]) -> Result<(usize, usize), ScheduleError> {
    let mut m = equation_matrix(n)?;
    let before = m.rank();
    for r in extra {
        m.push_row(r.clone());
    }
    Ok((before, m.rank()))
}

/// True iff the slot-1 team equations lie in the span of the others
/// (right-hand sides included).
pub fn verify_slot1_redundant(n: usize) -> bool {
    let Ok(rows) = equation_rows(n) else { return false };
    let cols = Layout::new(n).num_play();
    let augmented = |cons: &[LinearConstraint]| {
        let mut m = RationalMatrix::new(cols + 1);
        for c in cons {
            let mut row = vec![Rational::default(); cols + 1];
            for (j, a) in c.terms() {
                row[*j] = a.clone();
            }
            row[cols] = c.rhs.clone();
            m.push_row(row);
        }
        m
    };
    let base = augmented(&rows);
    let mut all = rows.clone();
    all.extend(slot1_rows(n));
    base.rank() == augmented(&all).rank()
}

/// All tournament points for `n = 4` together with their one-step travel
/// augmentations.
pub struct PointCloud {
    n: usize,
    num_play: usize,
    points: Vec<Vec<u8>>,
    dimension: OnceLock<usize>,
}

impl PointCloud {
    pub fn new(n: usize) -> Result<Self, PolyhedraError> {
        check_team_count(n)?;
        if n != 4 {
            return Err(PolyhedraError::Unsupported(n));
        }
        let mut points = Vec::new();
        enumerate_tournaments(n, |t| points.push(t.as_point().to_vec()))?;
        Ok(PointCloud { n, num_play: Layout::new(n).num_play(), points, dimension: OnceLock::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        Layout::new(self.n).num_vars()
    }

    pub fn num_tournaments(&self) -> usize {
        self.points.len()
    }

    /// `(x, y)` vectors of all tournaments, in enumeration order.
    pub fn tournament_points(&self) -> &[Vec<u8>] {
        &self.points
    }

    pub fn num_points(&self) -> usize {
        self.points.iter().map(|p| 1 + p[self.num_play..].iter().filter(|&&v| v == 0).count()).sum()
    }

    /// Visits every point; the second argument is the switched-on travel
    /// column for augmented points.
    pub fn visit(&self, mut f: impl FnMut(&[u8], Option<usize>) -> ControlFlow<()>) {
        let mut buf = Vec::with_capacity(self.ambient_dim());
        for p in &self.points {
            if f(p, None).is_break() {
                return;
            }
            buf.clear();
            buf.extend_from_slice(p);
            for col in self.num_play..p.len() {
                if p[col] == 0 {
                    buf[col] = 1;
                    let flow = f(&buf, Some(col));
                    buf[col] = 0;
                    if flow.is_break() {
                        return;
                    }
                }
            }
        }
    }

    /// Exact affine dimension of the point set. All points satisfy the
    /// equation system, which caps the dimension and allows an early stop.
    pub fn dimension(&self) -> usize {
        *self.dimension.get_or_init(|| {
            let cap = self.ambient_dim() - equation_rank(self.n).expect("n checked");
            let mut acc = AffineRank::new(self.ambient_dim()).with_bound(cap);
            self.visit(|p, _| {
                acc.insert(p);
                if acc.saturated() {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            });
            acc.rank()
        })
    }
}

pub fn dimension_of_polytope(n: usize) -> Result<usize, PolyhedraError> {
    Ok(PointCloud::new(n)?.dimension())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaceResult {
    pub tag: String,
    pub dimension: usize,
    pub tight: usize,
    pub total: usize,
}

/// Affine dimension of the points where `f` is tight. Every point is
/// checked for validity.
pub fn face_dimension(cloud: &PointCloud, f: &FaceSpec) -> Result<FaceResult, PolyhedraError> {
    let row = f.inequality.to_int_row().ok_or_else(|| PolyhedraError::NonIntegral(f.tag().to_string()))?;
    let full = cloud.dimension();
    let mut bound = full;
    let mut acc = AffineRank::new(cloud.ambient_dim());
    let (mut tight, mut total) = (0, 0);
    let mut violated = None;
    cloud.visit(|p, _| {
        total += 1;
        let s = row.slack(p);
        if s < 0 {
            violated = Some(total - 1);
            return ControlFlow::Break(());
        }
        if s > 0 {
            // a proper face loses at least one dimension
            bound = full - 1;
        } else {
            tight += 1;
            if acc.rank() < bound {
                acc.insert(p);
            }
        }
        ControlFlow::Continue(())
    });
    if let Some(point) = violated {
        return Err(PolyhedraError::NotValid { tag: f.tag().to_string(), point });
    }
    Ok(FaceResult { tag: f.tag().to_string(), dimension: acc.rank(), tight, total })
}

/// Rows of one family over an empty model for `n` teams.
pub fn family_rows(n: usize, family: Family) -> Vec<LinearConstraint> {
    let mut m = zero_model(n);
    let l = m.layout();
    match family {
        Family::NonNegative => {
            for col in 0..l.num_play() {
                let k = l.match_key(col);
                let idx = [k.slot.get(), k.home.get(), k.away.get()];
                let one = Rational::from_integer(1.into());
                m.push(LinearConstraint::new(family, &idx, [(col, one)], Sense::Ge, Rational::default()));
            }
        }
        Family::AwayAway => model::add_away_away(&mut m),
        Family::HomeAway => model::add_home_away(&mut m),
        Family::AwayHome => model::add_away_home(&mut m),
        Family::FirstSlot | Family::LastSlot => model::add_first_last(&mut m),
        Family::LiftedAwayAwayFirst | Family::LiftedAwayAwaySecond => model::add_lifted_away_away(&mut m),
        Family::LiftedHomeAway => model::add_lifted_home_away(&mut m),
        Family::LiftedAwayHome => model::add_lifted_away_home(&mut m),
        Family::FlowOut | Family::FlowIn | Family::FlowOutHome | Family::FlowInHome => model::add_flow(&mut m, true),
        Family::HomeFlowOutHome | Family::HomeFlowOutAway | Family::HomeFlowInHome | Family::HomeFlowInAway => {
            model::add_home_flow(&mut m)
        }
        Family::FlowEqOut | Family::FlowEqIn => model::add_flow_equations(&mut m),
        Family::NoRepeater => model::add_no_repeaters(&mut m),
        Family::Mirrored => model::add_mirrored(&mut m),
        Family::HomeStand | Family::RoadTrip => {
            let _ = model::add_hsrt(&mut m, 3);
        }
        Family::HomeStandFlow | Family::RoadTripFlow => {
            let _ = model::add_hsrt_flow(&mut m, 3);
        }
        Family::TeamPlays => model::add_team_plays(&mut m, 2..=l.num_slots()),
        Family::TeamPlaysFirstSlot => model::add_team_plays(&mut m, [1]),
        Family::PairPlays => model::add_pair_plays(&mut m),
    }
    m.rows_of(family).cloned().collect()
}

/// A family whose faces should have dimension `dim(P) - codim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceClass {
    pub family: Family,
    pub codim: usize,
}

/// Families claimed to be facet-defining, followed by the unlifted
/// away-away rows whose faces are one dimension short of a facet.
pub const FACE_CLASSES: [FaceClass; 14] = [
    FaceClass { family: Family::NonNegative, codim: 1 },
    FaceClass { family: Family::LiftedAwayAwayFirst, codim: 1 },
    FaceClass { family: Family::LiftedAwayAwaySecond, codim: 1 },
    FaceClass { family: Family::LiftedHomeAway, codim: 1 },
    FaceClass { family: Family::LiftedAwayHome, codim: 1 },
    FaceClass { family: Family::FirstSlot, codim: 1 },
    FaceClass { family: Family::LastSlot, codim: 1 },
    FaceClass { family: Family::FlowOut, codim: 1 },
    FaceClass { family: Family::FlowIn, codim: 1 },
    FaceClass { family: Family::HomeFlowOutHome, codim: 1 },
    FaceClass { family: Family::HomeFlowOutAway, codim: 1 },
    FaceClass { family: Family::HomeFlowInHome, codim: 1 },
    FaceClass { family: Family::HomeFlowInAway, codim: 1 },
    FaceClass { family: Family::AwayAway, codim: 2 },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sample {
    /// Up to this many rows per family, spread evenly over the row list.
    Spread(usize),
    All,
}

pub fn sample_rows(rows: Vec<LinearConstraint>, sample: Sample) -> Vec<LinearConstraint> {
    match sample {
        Sample::All => rows,
        Sample::Spread(k) if k == 0 || rows.is_empty() => Vec::new(),
        Sample::Spread(k) if k >= rows.len() => rows,
        Sample::Spread(1) => rows.into_iter().take(1).collect(),
        Sample::Spread(k) => {
            let last = rows.len() - 1;
            let mut idx: Vec<usize> = (0..k).map(|s| s * last / (k - 1)).collect();
            idx.dedup();
            idx.into_iter().map(|i| rows[i].clone()).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimRecord {
    pub claim: String,
    pub expected: Value,
    pub computed: Value,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl ClaimRecord {
    pub fn compare(claim: impl Into<String>, expected: Value, computed: Value) -> Self {
        let status = if expected == computed { Status::Pass } else { Status::Fail };
        ClaimRecord { claim: claim.into(), expected, computed, status, detail: None }
    }

    pub fn failed(claim: impl Into<String>, expected: Value, detail: String) -> Self {
        ClaimRecord { claim: claim.into(), expected, computed: Value::Null, status: Status::Fail, detail: Some(detail) }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub records: Vec<ClaimRecord>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(ClaimRecord::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClaimRecord> {
        self.records.iter().filter(|r| !r.passed())
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let status = if r.passed() { "PASS" } else { "FAIL" };
            let _ = write!(out, "{status} {}: expected {}, computed {}", r.claim, r.expected, r.computed);
            if let Some(d) = &r.detail {
                let _ = write!(out, " ({d})");
            }
            out.push('\n');
        }
        let failed = self.failures().count();
        let _ = writeln!(out, "{} claims, {} passed, {failed} failed", self.records.len(), self.records.len() - failed);
        out
    }

    pub fn json(&self) -> String {
        let summary = json!({
            "claims": self.records,
            "passed": self.records.len() - self.failures().count(),
            "failed": self.failures().count(),
            "all_pass": self.all_pass(),
        });
        serde_json::to_string_pretty(&summary).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Dimension,
    Basis,
    Redundancy,
    Facets,
    FlowFace,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteOptions {
    pub sample: Sample,
    /// Team counts for the equation-system checks.
    pub equation_sizes: Vec<usize>,
    /// Adds a face check on an invalid inequality; used to exercise the
    /// failure path.
    pub corrupt: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { sample: Sample::Spread(3), equation_sizes: vec![4, 6], corrupt: false }
    }
}

pub fn dimension_claims(cloud: &PointCloud) -> Result<Vec<ClaimRecord>, PolyhedraError> {
    let n = cloud.n();
    Ok(vec![
        ClaimRecord::compare(format!("equation rank n={n}"), json!(equation_count(n)), json!(equation_rank(n)?)),
        ClaimRecord::compare(format!("polytope dimension n={n}"), json!(polytope_dimension_formula(n)), json!(cloud.dimension())),
    ])
}

pub fn basis_claims(sizes: &[usize]) -> Result<Vec<ClaimRecord>, PolyhedraError> {
    let mut out = Vec::new();
    for &n in sizes {
        out.push(ClaimRecord::compare(format!("equation rank n={n}"), json!(equation_count(n)), json!(equation_rank(n)?)));
        let slots: Vec<usize> = (1..=Layout::new(n).num_slots()).collect();
        let checks: Result<Vec<BasisCheck>, ScheduleError> =
            slots.par_iter().map(|&k| check_basis_submatrix(n, k)).collect();
        for c in checks? {
            out.push(ClaimRecord::compare(
                format!("column basis n={n} slot {}", c.slot),
                json!({"size": c.expected_size, "nonsingular": true}),
                json!({"size": c.size, "nonsingular": c.nonsingular}),
            ));
        }
    }
    Ok(out)
}

pub fn redundancy_claims(sizes: &[usize]) -> Vec<ClaimRecord> {
    sizes
        .iter()
        .map(|&n| ClaimRecord::compare(format!("slot-1 team equations redundant n={n}"), json!(true), json!(verify_slot1_redundant(n))))
        .collect()
}

fn face_claim(cloud: &PointCloud, f: &FaceSpec, codim: usize) -> ClaimRecord {
    let expected = json!(cloud.dimension() - codim);
    let claim = format!("face dimension {}", f.tag());
    match face_dimension(cloud, f) {
        Ok(r) => ClaimRecord::compare(claim, expected, json!(r.dimension)),
        Err(e) => ClaimRecord::failed(claim, expected, e.to_string()),
    }
}

/// The flow-out row for team 1 at venue 2 with its right-hand side raised
/// to 2, which every tournament violates.
pub fn corrupted_face(n: usize) -> FaceSpec {
    let mut row = family_rows(n, Family::FlowOut).remove(0);
    row.rhs = Rational::from_integer(2.into());
    row.tag = format!("corrupted {}", row.tag);
    FaceSpec::new(row)
}

pub fn facet_claims(cloud: &PointCloud, sample: Sample, corrupt: bool) -> Vec<ClaimRecord> {
    let mut jobs: Vec<(FaceSpec, usize)> = Vec::new();
    for class in FACE_CLASSES {
        for row in sample_rows(family_rows(cloud.n(), class.family), sample) {
            jobs.push((FaceSpec::new(row), class.codim));
        }
    }
    if corrupt {
        jobs.push((corrupted_face(cloud.n()), 1));
    }
    cloud.dimension();
    jobs.par_iter().map(|(f, codim)| face_claim(cloud, f, *codim)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlowFaceResult {
    pub tournaments: usize,
    /// Tournament points satisfying every flow equation.
    pub tournaments_on_face: usize,
    /// Augmented points satisfying every flow equation.
    pub augmented_on_face: usize,
}

impl FlowFaceResult {
    pub fn passes(&self) -> bool {
        self.tournaments_on_face == self.tournaments && self.augmented_on_face == 0
    }
}

/// Points of the cloud on the face cut out by the flow equations.
pub fn flow_equation_face(cloud: &PointCloud) -> FlowFaceResult {
    let mut rows = family_rows(cloud.n(), Family::FlowEqOut);
    rows.extend(family_rows(cloud.n(), Family::FlowEqIn));
    let rows: Vec<_> = rows.iter().map(|r| r.to_int_row().expect("integral")).collect();
    let mut res = FlowFaceResult { tournaments: cloud.num_tournaments(), tournaments_on_face: 0, augmented_on_face: 0 };
    cloud.visit(|p, aug| {
        if rows.iter().all(|r| r.is_satisfied(p)) {
            match aug {
                None => res.tournaments_on_face += 1,
                Some(_) => res.augmented_on_face += 1,
            }
        }
        ControlFlow::Continue(())
    });
    res
}

/// True iff the flow-equation face contains exactly the tournament points.
pub fn verify_flow_equation_face(n: usize) -> Result<bool, PolyhedraError> {
    Ok(flow_equation_face(&PointCloud::new(n)?).passes())
}

pub fn flow_face_claims(cloud: &PointCloud) -> Vec<ClaimRecord> {
    let r = flow_equation_face(cloud);
    vec![
        ClaimRecord::compare("flow-equation face: travel equals actual travel", json!(true), json!(r.augmented_on_face == 0)),
        ClaimRecord::compare("flow-equation face: tournament points on face", json!(r.tournaments), json!(r.tournaments_on_face)),
    ]
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<Report, PolyhedraError> {
    let needs_cloud = matches!(suite, Suite::Dimension | Suite::Facets | Suite::FlowFace | Suite::All);
    let cloud = if needs_cloud { Some(PointCloud::new(4)?) } else { None };
    let mut records = Vec::new();
    let wants = |s: Suite| suite == s || suite == Suite::All;
    if wants(Suite::Dimension) {
        records.extend(dimension_claims(cloud.as_ref().expect("cloud"))?);
    }
    if wants(Suite::Basis) {
        records.extend(basis_claims(&opts.equation_sizes)?);
    }
    if wants(Suite::Redundancy) {
        records.extend(redundancy_claims(&opts.equation_sizes));
    }
    if wants(Suite::Facets) {
        records.extend(facet_claims(cloud.as_ref().expect("cloud"), opts.sample, opts.corrupt));
    }
    if wants(Suite::FlowFace) {
        records.extend(flow_face_claims(cloud.as_ref().expect("cloud")));
    }
    Ok(Report { records })
}
