//! Model-size and LP-bound tables, computed side by side with the published
//! values.

use std::fmt::Write as _;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::construct::{enumerate_tournaments, ConstructError};
use crate::lp::{solve_simplex, LpError, LpStatus, SolveMode};
use crate::model::{build, BuildOptions, Model, ModelError};
use crate::schedule::{Instance, Tournament};
use crate::Rational;

/// Percentages match when they differ by at most this many points
/// (half a unit of the printed last digit).
pub const PERCENT_TOL: f64 = 0.05;

#[derive(Debug, Error)]
pub enum TableError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error("LP for column {column} ended with status {status}")]
    Status { column: &'static str, status: LpStatus },
    #[error("no tournament satisfies the variant constraints")]
    NoFeasibleTournament,
}

/// Published variable counts of the plain model.
pub const PUBLISHED_VARIABLES: [(usize, usize); 3] = [(4, 120), (6, 480), (8, 1232)];
/// Published counts of added flow rows (venues other than the team's own).
pub const PUBLISHED_FLOW_ROWS: [(usize, usize); 3] = [(4, 24), (6, 60), (8, 112)];
/// Published counts of added home-stand/road-trip flow rows.
pub const PUBLISHED_HSRT_FLOW_ROWS: [(usize, usize); 3] = [(4, 8), (6, 12), (8, 16)];

fn lookup(table: &[(usize, usize)], n: usize) -> Option<usize> {
    table.iter().find(|(m, _)| *m == n).map(|(_, v)| *v)
}

#[derive(Debug, Clone, Serialize)]
pub struct Table2Line {
    pub n: usize,
    pub variables: usize,
    pub base_rows: usize,
    pub base_nonzeros: usize,
    /// Net change: lifted rows replace the unlifted ones.
    pub lifted_rows: i64,
    pub flow_rows: usize,
    pub hsrt_flow_rows: usize,
    pub published_variables: Option<usize>,
    pub published_flow_rows: Option<usize>,
    pub published_hsrt_flow_rows: Option<usize>,
}

impl Table2Line {
    /// Every published count present for this `n` is reproduced.
    pub fn passes(&self) -> bool {
        [
            (self.published_variables, self.variables),
            (self.published_flow_rows, self.flow_rows),
            (self.published_hsrt_flow_rows, self.hsrt_flow_rows),
        ]
        .iter()
        .all(|(p, c)| p.is_none_or(|p| p == *c))
    }
}

pub fn table2_line(n: usize) -> Result<Table2Line, TableError> {
    let inst = crate::instances::gen_con(n)?;
    let base = BuildOptions::base();
    let m0 = build(&inst, &base)?;
    let delta = |o: BuildOptions| -> Result<i64, TableError> {
        Ok(build(&inst, &o)?.num_constraints() as i64 - m0.num_constraints() as i64)
    };
    let extra = |o: BuildOptions| -> Result<usize, TableError> { Ok(delta(o)?.max(0) as usize) };
    Ok(Table2Line {
        n,
        variables: build(&inst, &BuildOptions::plain())?.num_vars(),
        base_rows: m0.num_constraints(),
        base_nonzeros: m0.num_nonzeros(),
        lifted_rows: delta(base.clone().with_lifted(true))?,
        flow_rows: extra(BuildOptions { flow: true, ..base.clone() })?,
        hsrt_flow_rows: extra(base.clone().with_hsrt_flow(true))?,
        published_variables: lookup(&PUBLISHED_VARIABLES, n),
        published_flow_rows: lookup(&PUBLISHED_FLOW_ROWS, n),
        published_hsrt_flow_rows: lookup(&PUBLISHED_HSRT_FLOW_ROWS, n),
    })
}

impl From<crate::schedule::ScheduleError> for TableError {
    fn from(e: crate::schedule::ScheduleError) -> Self {
        TableError::Construct(ConstructError::Schedule(e))
    }
}

fn mark(p: Option<usize>, c: usize) -> String {
    match p {
        Some(p) if p == c => format!("{c} (published {p}, PASS)"),
        Some(p) => format!("{c} (published {p}, FAIL)"),
        None => c.to_string(),
    }
}

pub fn format_table2(lines: &[Table2Line]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<3}{:<30}{:<11}{:<15}{:<9}{:<28}+hsrt-flow",
        "n", "variables", "base rows", "base nonzeros", "lifted", "+flow"
    );
    for l in lines {
        let _ = writeln!(
            out,
            "{:<3}{:<30}{:<11}{:<15}{:<9}{:<28}{}",
            l.n,
            mark(l.published_variables, l.variables),
            l.base_rows,
            l.base_nonzeros,
            format!("{:+}", l.lifted_rows),
            mark(l.published_flow_rows, l.flow_rows),
            mark(l.published_hsrt_flow_rows, l.hsrt_flow_rows),
        );
    }
    out
}

/// Columns of the LP-bound table: additions to the base model, then the full
/// model and removals from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Column {
    Base,
    AddLifted,
    AddFlow,
    AddHomeFlowEquations,
    AddHsrtFlow,
    Full,
    FullWithoutLifted,
    FullWithoutHomeFlowEquations,
    FullWithoutHsrtFlow,
}

impl Column {
    pub const ALL: [Column; 9] = [
        Column::Base,
        Column::AddLifted,
        Column::AddFlow,
        Column::AddHomeFlowEquations,
        Column::AddHsrtFlow,
        Column::Full,
        Column::FullWithoutLifted,
        Column::FullWithoutHomeFlowEquations,
        Column::FullWithoutHsrtFlow,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Column::Base => "base",
            Column::AddLifted => "+lifted",
            Column::AddFlow => "+flow",
            Column::AddHomeFlowEquations => "+home-flow,eq",
            Column::AddHsrtFlow => "+hsrt-flow",
            Column::Full => "full",
            Column::FullWithoutLifted => "full-lifted",
            Column::FullWithoutHomeFlowEquations => "full-home-flow,eq",
            Column::FullWithoutHsrtFlow => "full-hsrt-flow",
        }
    }

    pub fn index(self) -> usize {
        Column::ALL.iter().position(|c| *c == self).unwrap()
    }

    pub fn options(self, mirrored: bool) -> BuildOptions {
        let base = BuildOptions::base().with_mirrored(mirrored);
        let full = |lifted, eq, hsrt| base.clone().with_lifted(lifted).with_home_flow_and_equations(eq).with_hsrt_flow(hsrt);
        match self {
            Column::Base => base,
            Column::AddLifted => base.with_lifted(true),
            Column::AddFlow => base.with_flow(true),
            Column::AddHomeFlowEquations => base.with_home_flow_and_equations(true),
            Column::AddHsrtFlow => base.with_hsrt_flow(true),
            Column::Full => full(true, true, true),
            Column::FullWithoutLifted => full(false, true, true),
            Column::FullWithoutHomeFlowEquations => full(true, false, true),
            Column::FullWithoutHsrtFlow => full(true, true, false),
        }
    }
}

/// One published row of the LP-bound table (percentages, column order of [`Column::ALL`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedRow {
    pub class: &'static str,
    pub n: usize,
    pub mirrored: bool,
    pub cells: [f64; 9],
}

const fn published_row(class: &'static str, n: usize, mirrored: bool, cells: [f64; 9]) -> PublishedRow {
    PublishedRow { class, n, mirrored, cells }
}

pub const PUBLISHED_TABLE3: &[PublishedRow] = &[
    published_row("NL", 4, true, [24.3, 24.3, 97.0, 97.0, 30.8, 97.0, 97.0, 34.6, 97.0]),
    published_row("SUP", 4, true, [24.9, 24.9, 41.0, 41.0, 28.3, 41.0, 41.0, 28.3, 41.0]),
    published_row("GAL", 4, true, [24.8, 24.8, 94.1, 94.1, 35.4, 94.1, 94.1, 38.3, 94.1]),
    published_row("INCR", 4, true, [25.0, 25.0, 77.1, 77.1, 35.4, 77.1, 77.1, 37.5, 77.1]),
    published_row("LINE", 4, true, [25.0, 25.0, 77.8, 77.8, 41.7, 77.8, 77.8, 41.7, 77.8]),
    published_row("CIRC", 4, true, [20.0, 20.0, 80.0, 80.0, 40.0, 80.0, 80.0, 40.0, 80.0]),
    published_row("CON", 4, true, [23.5, 23.5, 94.1, 94.1, 47.1, 94.1, 94.1, 47.1, 94.1]),
    published_row("NL", 4, false, [24.2, 24.2, 96.9, 96.9, 30.4, 96.9, 96.9, 32.6, 96.9]),
    published_row("SUP", 4, false, [5.2, 5.2, 20.9, 20.9, 10.4, 20.9, 20.9, 10.4, 20.9]),
    published_row("GAL", 4, false, [22.6, 22.6, 90.4, 90.4, 35.0, 90.4, 90.4, 36.7, 90.4]),
    published_row("INCR", 4, false, [16.7, 16.7, 66.7, 66.7, 31.3, 66.7, 66.7, 31.3, 66.7]),
    published_row("LINE", 4, false, [16.7, 16.7, 66.7, 66.7, 33.3, 66.7, 66.7, 33.3, 66.7]),
    published_row("CIRC", 4, false, [20.0, 20.0, 80.0, 80.0, 40.0, 80.0, 80.0, 40.0, 80.0]),
    published_row("CON", 4, false, [23.5, 23.5, 94.1, 94.1, 47.1, 94.1, 94.1, 47.1, 94.1]),
    published_row("NL", 6, true, [11.0, 11.0, 53.2, 53.2, 30.1, 65.5, 65.5, 30.7, 53.2]),
    published_row("SUP", 6, true, [10.8, 10.8, 14.1, 14.1, 12.6, 29.1, 29.1, 12.6, 14.1]),
    published_row("GAL", 6, true, [11.3, 11.3, 65.1, 65.1, 35.6, 77.2, 77.2, 36.1, 65.1]),
    published_row("INCR", 6, true, [9.0, 9.0, 44.2, 44.2, 26.0, 56.7, 56.7, 26.7, 45.0]),
    published_row("LINE", 6, true, [8.9, 8.9, 44.6, 44.6, 28.9, 57.8, 57.8, 28.9, 45.2]),
    published_row("CIRC", 6, true, [8.3, 8.3, 50.0, 50.0, 33.3, 66.7, 66.7, 33.3, 50.0]),
    published_row("CON", 6, true, [12.5, 12.5, 75.0, 75.0, 50.0, 87.5, 87.5, 50.0, 75.0]),
    published_row("NL", 6, false, [9.1, 9.1, 54.8, 54.8, 32.1, 72.8, 72.8, 32.1, 54.8]),
    published_row("SUP", 6, false, [0.7, 0.7, 4.2, 4.2, 2.8, 32.9, 32.9, 2.8, 4.2]),
    published_row("GAL", 6, false, [12.0, 12.0, 72.1, 72.1, 39.8, 87.3, 87.3, 39.8, 72.1]),
    published_row("INCR", 6, false, [7.9, 7.9, 47.4, 47.4, 28.9, 66.7, 66.7, 28.9, 47.4]),
    published_row("LINE", 6, false, [7.9, 7.9, 47.4, 47.4, 31.6, 68.4, 68.4, 31.6, 47.4]),
    published_row("CIRC", 6, false, [9.4, 9.4, 56.3, 56.3, 37.5, 75.0, 75.0, 37.5, 56.3]),
    published_row("CON", 6, false, [14.0, 14.0, 83.7, 83.7, 55.8, 97.7, 97.7, 55.8, 83.7]),
    published_row("NL", 8, true, [8.2, 8.2, 53.8, 53.8, 33.3, 76.1, 76.1, 33.8, 53.8]),
    published_row("SUP", 8, true, [1.7, 1.7, 7.2, 7.2, 4.1, 32.1, 32.1, 4.1, 7.2]),
    published_row("GAL", 8, true, [7.9, 7.9, 49.6, 49.6, 31.4, 71.9, 71.9, 31.5, 49.6]),
    published_row("INCR", 8, true, [6.0, 6.0, 37.2, 37.2, 25.0, 56.4, 56.4, 25.3, 37.3]),
    published_row("LINE", 8, true, [6.0, 6.0, 37.7, 37.7, 27.7, 56.5, 56.5, 27.7, 37.7]),
    published_row("CIRC", 8, true, [5.7, 5.7, 45.7, 45.7, 34.3, 68.6, 68.6, 34.3, 45.7]),
    published_row("CON", 8, true, [10.0, 10.0, 80.0, 80.0, 60.0, 100.0, 100.0, 60.0, 80.0]),
    published_row("NL", 8, false, [6.8, 6.8, 54.1, 54.1, 34.4, 80.4, 80.4, 34.4, 54.1]),
    published_row("SUP", 8, false, [1.0, 1.0, 7.7, 7.7, 3.9, 39.8, 39.8, 3.9, 7.7]),
    published_row("GAL", 8, false, [6.5, 6.5, 52.3, 52.3, 32.5, 78.8, 78.8, 32.5, 52.3]),
    published_row("INCR", 8, false, [5.1, 5.1, 41.0, 41.0, 28.4, 66.7, 66.7, 28.4, 41.0]),
    published_row("LINE", 8, false, [4.9, 4.9, 39.5, 39.5, 29.6, 64.2, 64.2, 29.6, 39.5]),
    published_row("CIRC", 8, false, [6.1, 6.1, 48.5, 48.5, 36.4, 72.7, 72.7, 36.4, 48.5]),
    published_row("CON", 8, false, [10.0, 10.0, 80.0, 80.0, 60.0, 100.0, 100.0, 60.0, 80.0]),];

pub fn published_row_for(class: &str, n: usize, mirrored: bool) -> Option<&'static PublishedRow> {
    PUBLISHED_TABLE3.iter().find(|r| r.class.eq_ignore_ascii_case(class) && r.n == n && r.mirrored == mirrored)
}

/// Whether `t` satisfies the variant constraints selected in `opts`.
pub fn satisfies_variants(t: &Tournament, opts: &BuildOptions) -> bool {
    (!opts.no_repeaters || t.has_no_repeaters())
        && opts.u.is_none_or(|u| t.max_stand() <= u)
        && (!opts.mirrored || t.is_mirrored())
}

#[derive(Debug, Clone)]
pub struct BestKnown {
    pub value: Rational,
    pub tournament: Tournament,
    /// Tournaments satisfying the variant constraints.
    pub feasible: u64,
}

/// Exact optimum over all tournaments of `inst` (four teams) that satisfy the
/// variant constraints in `opts`; ties go to the first in enumeration order.
pub fn enumeration_optimum(inst: &Instance, opts: &BuildOptions) -> Result<BestKnown, TableError> {
    let mut best: Option<(Rational, Tournament)> = None;
    let mut feasible = 0;
    let mut err = None;
    enumerate_tournaments(inst.n(), |t| {
        if !satisfies_variants(t, opts) {
            return;
        }
        feasible += 1;
        match t.total_distance(inst) {
            Ok(v) => {
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, t.clone()));
                }
            }
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e.into());
    }
    let (value, tournament) = best.ok_or(TableError::NoFeasibleTournament)?;
    Ok(BestKnown { value, tournament, feasible })
}

pub fn percent(lp: f64, best: &Rational) -> f64 {
    100.0 * lp / best.to_f64().unwrap_or(f64::NAN)
}

pub fn matches_published(computed: f64, expected: f64) -> bool {
    (computed - expected).abs() <= PERCENT_TOL + 1e-9
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub column: Column,
    pub lp: f64,
    /// `None` without a best-known value.
    pub percent: Option<f64>,
    pub expected: Option<f64>,
    pub iterations: usize,
}

impl Cell {
    pub fn pass(&self) -> Option<bool> {
        Some(matches_published(self.percent?, self.expected?))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table3Line {
    pub instance: String,
    pub mirrored: bool,
    pub best: Option<f64>,
    pub cells: Vec<Cell>,
}

impl Table3Line {
    pub fn cell(&self, c: Column) -> &Cell {
        &self.cells[c.index()]
    }

    /// `None` when there is no published row to compare with.
    pub fn passes(&self) -> Option<bool> {
        let checks: Vec<bool> = self.cells.iter().filter_map(Cell::pass).collect();
        (!checks.is_empty()).then(|| checks.iter().all(|p| *p))
    }
}

pub fn relaxed_model(inst: &Instance, column: Column, mirrored: bool) -> Result<Model, TableError> {
    Ok(build(inst, &column.options(mirrored))?.relax())
}

/// LP bound of every column for `inst`, as a percentage of `best` when given.
/// `class` selects the published row for comparison.
pub fn table3_line(
    inst: &Instance,
    class: Option<&str>,
    mirrored: bool,
    best: Option<&Rational>,
    mode: SolveMode,
) -> Result<Table3Line, TableError> {
    let published = class.and_then(|c| published_row_for(c, inst.n(), mirrored));
    let cells: Result<Vec<Cell>, TableError> = Column::ALL
        .par_iter()
        .map(|&column| {
            let r = solve_simplex(&relaxed_model(inst, column, mirrored)?, mode)?;
            if r.status != LpStatus::Optimal {
                return Err(TableError::Status { column: column.label(), status: r.status });
            }
            Ok(Cell {
                column,
                lp: r.objective,
                percent: best.map(|b| percent(r.objective, b)),
                expected: published.map(|p| p.cells[column.index()]),
                iterations: r.iterations,
            })
        })
        .collect();
    Ok(Table3Line { instance: inst.name().to_string(), mirrored, best: best.and_then(|b| b.to_f64()), cells: cells? })
}

pub fn format_table3(lines: &[Table3Line]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<12} {:>6}", "instance", "best");
    for c in Column::ALL {
        let _ = write!(out, " {:>18}", c.label());
    }
    out.push('\n');
    for l in lines {
        let name = if l.mirrored { format!("{} (M)", l.instance) } else { l.instance.clone() };
        let best = l.best.map_or("-".to_string(), |b| b.to_string());
        let _ = write!(out, "{name:<12} {best:>6}");
        for c in &l.cells {
            let cell = match (c.percent, c.expected) {
                (Some(p), Some(e)) if matches_published(p, e) => format!("{p:.1}/{e:.1} ok"),
                (Some(p), Some(e)) => format!("{p:.1}/{e:.1} FAIL"),
                (Some(p), None) => format!("{p:.1}"),
                (None, _) => format!("lp {:.3}", c.lp),
            };
            let _ = write!(out, " {cell:>18}");
        }
        out.push('\n');
    }
    out
}
