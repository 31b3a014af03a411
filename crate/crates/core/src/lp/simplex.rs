//! Bounded-variable two-phase primal simplex on a row-sparse tableau.
//!
//! Every row gets a slack (`+s` for `<=` and `=`, `-s` for `>=`, with
//! `s` fixed to 0 on equations). Rows whose slack cannot start feasible get
//! an artificial; phase 1 minimizes their sum, after which they are fixed to 0.

use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scalar::Scalar;
use super::{LpError, LpProblem, LpStatus};
use crate::model::Sense;

/// Consecutive degenerate pivots (step at most the tolerance) before Dantzig
/// pricing falls back to Bland.
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Pricing {
    /// Dantzig; Bland during degenerate stalls, back to Dantzig after progress.
    Dantzig,
    /// Dantzig until the first stall, Bland from then on.
    DantzigThenBland,
}

#[derive(Debug, Clone)]
pub(crate) struct KernelOptions<T> {
    pub tol: T,
    pub pivot_tol: T,
    /// Ratio-test limits this close count as ties (broken by pivot size).
    pub tie_tol: T,
    /// Seed for relaxing inequality right-hand sides by about `1e-6` against
    /// degenerate stalling; the original data are restored before returning.
    pub perturb: Option<u64>,
    pub pricing: Pricing,
    pub max_iterations: usize,
    pub max_bits: u64,
}

#[derive(Debug, Clone)]
pub(crate) struct KernelResult<T> {
    pub status: LpStatus,
    pub primal: Vec<T>,
    pub ray: Option<Vec<T>>,
    pub phase1: T,
    pub iterations: usize,
    /// Final basis when optimal.
    pub basis: Option<FinalBasis>,
}

/// Basis over structural and slack columns (an artificial still basic at
/// zero is reported as its row's slack, which has the same column up to sign).
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct FinalBasis {
    pub basic: Vec<usize>,
    pub at_upper: Vec<bool>,
}

type Row<T> = Vec<(u32, T)>;

struct Tableau<T: Scalar> {
    rows: Vec<Row<T>>,
    beta: Vec<T>,
    basis: Vec<usize>,
    in_basis: Vec<Option<usize>>,
    at_upper: Vec<bool>,
    lower: Vec<T>,
    upper: Vec<Option<T>>,
    d: Vec<T>,
    n_struct: usize,
    art_row: Vec<usize>,
    /// Column that formed the initial identity basis in each row.
    init_col: Vec<usize>,
    /// Unperturbed right-hand side of the scaled rows.
    rhs: Vec<T>,
    opts: KernelOptions<T>,
    iterations: usize,
}

enum Step<T> {
    Optimal,
    Unbounded(Vec<T>),
    Moved,
}

fn lookup<T: Scalar>(row: &Row<T>, col: usize) -> Option<&T> {
    row.binary_search_by_key(&(col as u32), |(c, _)| *c).ok().map(|p| &row[p].1)
}

/// `a - f * b` for sorted sparse rows.
pub(crate) fn axpy<T: Scalar>(a: &Row<T>, f: &T, b: &Row<T>) -> Row<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map_or(u32::MAX, |e| e.0);
        let cb = b.get(j).map_or(u32::MAX, |e| e.0);
        let (col, v) = if ca < cb {
            i += 1;
            (ca, a[i - 1].1.clone())
        } else if cb < ca {
            j += 1;
            (cb, f.mul(&b[j - 1].1).neg())
        } else {
            i += 1;
            j += 1;
            (ca, a[i - 1].1.sub(&f.mul(&b[j - 1].1)))
        };
        if !v.negligible() {
            out.push((col, v));
        }
    }
    out
}

impl<T: Scalar> Tableau<T> {
    fn new(p: &LpProblem, opts: KernelOptions<T>) -> Self {
        let n_struct = p.num_cols();
        let m = p.rows.len();
        let mut lower: Vec<T> = p.lower.iter().map(T::from_rational).collect();
        let mut upper: Vec<Option<T>> = p.upper.iter().map(|u| u.as_ref().map(T::from_rational)).collect();
        let mut rows = Vec::with_capacity(m);
        let mut beta = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut art_rows = Vec::new();
        let mut rhs = Vec::with_capacity(m);
        let mut rng = opts.perturb.map(ChaCha8Rng::seed_from_u64);
        for (i, r) in p.rows.iter().enumerate() {
            let b = T::from_rational(&r.rhs);
            let mut resid = b.clone();
            if let (Some(rng), false) = (rng.as_mut(), r.sense == Sense::Eq) {
                let mag = T::from_f64(1e-6 * (1.0 + rng.gen::<f64>()) * Signed::abs(&r.rhs).to_f64().unwrap_or(1.0).max(1.0));
                resid = if r.sense == Sense::Le { resid.add(&mag) } else { resid.sub(&mag) };
            }
            let mut terms: Row<T> = Vec::with_capacity(r.terms.len() + 2);
            for (c, a) in &r.terms {
                let a = T::from_rational(a);
                resid = resid.sub(&a.mul(&lower[*c]));
                terms.push((*c as u32, a));
            }
            let slack_sign = if r.sense == Sense::Ge { T::one().neg() } else { T::one() };
            terms.push(((n_struct + i) as u32, slack_sign.clone()));
            let slack_value = resid.mul(&slack_sign);
            let feasible = match r.sense {
                Sense::Eq => slack_value.negligible(),
                _ => slack_value >= opts.tol.neg(),
            };
            if feasible {
                let terms: Row<T> = terms.into_iter().map(|(c, a)| (c, a.mul(&slack_sign))).collect();
                rows.push(terms);
                rhs.push(b.mul(&slack_sign));
                beta.push(slack_value);
                basis.push(n_struct + i);
            } else {
                art_rows.push(i);
                let sigma = if resid < T::zero() { T::one().neg() } else { T::one() };
                rows.push(terms.into_iter().map(|(c, a)| (c, a.mul(&sigma))).collect());
                rhs.push(b.mul(&sigma));
                beta.push(resid.mul(&sigma));
                basis.push(usize::MAX);
            }
            lower.push(T::zero());
            upper.push(if r.sense == Sense::Eq { Some(T::zero()) } else { None });
        }
        let n_art = art_rows.len();
        for (a, &i) in art_rows.iter().enumerate() {
            let col = n_struct + m + a;
            rows[i].push((col as u32, T::one()));
            basis[i] = col;
            lower.push(T::zero());
            upper.push(None);
        }
        let n_total = n_struct + m + n_art;
        let mut in_basis = vec![None; n_total];
        for (r, &b) in basis.iter().enumerate() {
            in_basis[b] = Some(r);
        }
        Tableau {
            rows,
            beta,
            basis: basis.clone(),
            in_basis,
            at_upper: vec![false; n_total],
            lower,
            upper,
            d: vec![T::zero(); n_total],
            n_struct,
            art_row: art_rows,
            init_col: basis,
            rhs,
            opts,
            iterations: 0,
        }
    }

    fn n_total(&self) -> usize {
        self.lower.len()
    }

    fn n_art_start(&self) -> usize {
        self.n_struct + self.rows.len()
    }

    fn value(&self, col: usize) -> T {
        match self.in_basis[col] {
            Some(r) => self.beta[r].clone(),
            None if self.at_upper[col] => self.upper[col].clone().expect("finite upper bound"),
            None => self.lower[col].clone(),
        }
    }

    /// Recomputes basic values from the unperturbed right-hand side. The
    /// columns of the initial identity basis hold the current basis inverse.
    fn restore_rhs(&mut self) {
        let mut init_row = vec![None; self.n_total()];
        for (i, &c) in self.init_col.iter().enumerate() {
            init_row[c] = Some(i);
        }
        for r in 0..self.rows.len() {
            let mut v = T::zero();
            for (c, a) in &self.rows[r] {
                let c = *c as usize;
                if let Some(i) = init_row[c] {
                    v = v.add(&a.mul(&self.rhs[i]));
                }
                if self.in_basis[c].is_none() {
                    let x = self.value(c);
                    if !x.negligible() {
                        v = v.sub(&a.mul(&x));
                    }
                }
            }
            self.beta[r] = v;
        }
    }

    fn primal_feasible(&self) -> bool {
        self.basis.iter().zip(&self.beta).all(|(&b, v)| {
            *v >= self.lower[b].sub(&self.opts.tol) && self.upper[b].as_ref().is_none_or(|u| *v <= u.add(&self.opts.tol))
        })
    }

    fn set_costs(&mut self, cost: &[T]) {
        let mut d: Vec<T> = cost.to_vec();
        for (r, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[r]];
            if cb.negligible() {
                continue;
            }
            for (c, a) in row {
                d[*c as usize] = d[*c as usize].sub(&cb.mul(a));
            }
        }
        for &b in &self.basis {
            d[b] = T::zero();
        }
        self.d = d;
    }

    fn fixed(&self, col: usize) -> bool {
        matches!(&self.upper[col], Some(u) if *u <= self.lower[col])
    }

    fn eligible(&self, col: usize) -> Option<bool> {
        if self.in_basis[col].is_some() || self.fixed(col) {
            return None;
        }
        let d = &self.d[col];
        if !self.at_upper[col] && *d < self.opts.tol.neg() {
            Some(true)
        } else if self.at_upper[col] && *d > self.opts.tol {
            Some(false)
        } else {
            None
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, bool)> {
        let mut best: Option<(usize, bool, T)> = None;
        for col in 0..self.n_total() {
            if let Some(inc) = self.eligible(col) {
                if bland {
                    return Some((col, inc));
                }
                let mag = self.d[col].abs();
                if best.as_ref().is_none_or(|b| mag > b.2) {
                    best = Some((col, inc, mag));
                }
            }
        }
        best.map(|(c, i, _)| (c, i))
    }

    fn step(&mut self, bland: bool) -> Result<(Step<T>, bool), LpError> {
        let Some((q, increasing)) = self.choose_entering(bland) else {
            return Ok((Step::Optimal, false));
        };
        let alpha: Vec<(usize, T)> = self
            .rows
            .iter()
            .enumerate()
            .filter_map(|(r, row)| lookup(row, q).filter(|a| a.abs() > self.opts.pivot_tol).map(|a| (r, a.clone())))
            .collect();
        // Basic value in row r moves at rate -alpha_r * dir.
        let mut best: Option<(T, usize, bool, T)> = None; // (limit, row, to_upper, |alpha|)
        for (r, a) in &alpha {
            let rate = if increasing { a.neg() } else { a.clone() };
            let b = self.basis[*r];
            let (limit, to_upper) = if rate < T::zero() {
                (self.beta[*r].sub(&self.lower[b]).div(&rate.neg()), false)
            } else if let Some(u) = &self.upper[b] {
                (u.sub(&self.beta[*r]).div(&rate), true)
            } else {
                continue;
            };
            let limit = if limit < T::zero() { T::zero() } else { limit };
            let better = match &best {
                None => true,
                Some((bl, br, _, ba)) => {
                    if bland {
                        limit < *bl || (limit == *bl && b < self.basis[*br])
                    } else {
                        let slack = &self.opts.tie_tol;
                        limit < bl.sub(slack) || (limit <= bl.add(slack) && a.abs() > *ba)
                    }
                }
            };
            if better {
                best = Some((limit, *r, to_upper, a.abs()));
            }
        }
        let own = self.upper[q].as_ref().map(|u| u.sub(&self.lower[q]));
        let flip = match (&own, &best) {
            (Some(o), Some((l, ..))) => *o <= *l,
            (Some(_), None) => true,
            (None, None) => {
                let mut ray = vec![T::zero(); self.n_struct];
                let dir = if increasing { T::one() } else { T::one().neg() };
                if q < self.n_struct {
                    ray[q] = dir.clone();
                }
                for (r, a) in &alpha {
                    let b = self.basis[*r];
                    if b < self.n_struct {
                        ray[b] = a.mul(&dir).neg();
                    }
                }
                return Ok((Step::Unbounded(ray), false));
            }
            (None, Some(_)) => false,
        };
        self.iterations += 1;
        let t = if flip { own.clone().unwrap() } else { best.as_ref().unwrap().0.clone() };
        let degenerate = t <= self.opts.tol;
        let signed_t = if increasing { t.clone() } else { t.neg() };
        for (r, a) in &alpha {
            self.beta[*r] = self.beta[*r].sub(&a.mul(&signed_t));
        }
        if flip {
            self.at_upper[q] = !self.at_upper[q];
            return Ok((Step::Moved, degenerate));
        }
        let (_, p, to_upper, _) = best.unwrap();
        let entering_value = self.value(q).add(&signed_t);
        let leaving = self.basis[p];
        let pivot = lookup(&self.rows[p], q).unwrap().clone();
        let prow: Row<T> = self.rows[p].iter().map(|(c, v)| (*c, v.div(&pivot))).collect();
        for (r, a) in &alpha {
            if *r != p {
                let row = axpy(&self.rows[*r], a, &prow);
                if self.opts.max_bits > 0 {
                    if let Some(b) = row.iter().map(|(_, v)| v.bits()).max().filter(|b| *b > self.opts.max_bits) {
                        return Err(LpError::CellSizeExceeded { bits: b, limit: self.opts.max_bits });
                    }
                }
                self.rows[*r] = row;
            }
        }
        let dq = self.d[q].clone();
        if !dq.negligible() {
            for (c, v) in &prow {
                let c = *c as usize;
                self.d[c] = self.d[c].sub(&dq.mul(v));
            }
        }
        self.d[q] = T::zero();
        self.rows[p] = prow;
        self.beta[p] = entering_value;
        self.basis[p] = q;
        self.in_basis[q] = Some(p);
        self.in_basis[leaving] = None;
        self.at_upper[leaving] = to_upper;
        Ok((Step::Moved, degenerate))
    }

    fn run(&mut self) -> Result<Step<T>, LpError> {
        let mut run = 0;
        let mut stalled = false;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(LpError::IterationLimit);
            }
            stalled = match self.opts.pricing {
                Pricing::Dantzig => run >= DEGENERATE_RUN,
                Pricing::DantzigThenBland => stalled || run >= DEGENERATE_RUN,
            };
            match self.step(stalled)? {
                (Step::Moved, degenerate) => run = if degenerate { run + 1 } else { 0 },
                (other, _) => return Ok(other),
            }
        }
    }
}

pub(crate) fn solve<T: Scalar>(p: &LpProblem, opts: KernelOptions<T>) -> Result<KernelResult<T>, LpError> {
    let mut tab = Tableau::new(p, opts);
    let art = tab.n_art_start();
    let n_total = tab.n_total();
    let mut phase1 = T::zero();
    if art < n_total {
        let cost: Vec<T> = (0..n_total).map(|c| if c >= art { T::one() } else { T::zero() }).collect();
        tab.set_costs(&cost);
        match tab.run() {
            Err(LpError::IterationLimit) => return Ok(limit_result(&tab, phase1)),
            Err(e) => return Err(e),
            Ok(_) => {}
        }
        for c in art..n_total {
            phase1 = phase1.add(&tab.value(c));
        }
        if phase1 > tab.opts.tol {
            return Ok(KernelResult {
                status: LpStatus::Infeasible,
                primal: primal(&tab),
                ray: None,
                phase1,
                iterations: tab.iterations,
                basis: None,
            });
        }
        for c in art..n_total {
            tab.upper[c] = Some(T::zero());
            tab.at_upper[c] = false;
        }
    }
    let mut cost: Vec<T> = p.objective.iter().map(T::from_rational).collect();
    cost.resize(n_total, T::zero());
    tab.set_costs(&cost);
    let mut step = match tab.run() {
        Err(LpError::IterationLimit) => return Ok(limit_result(&tab, phase1)),
        other => other?,
    };
    if tab.opts.perturb.is_some() && matches!(step, Step::Optimal) {
        tab.restore_rhs();
        if !tab.primal_feasible() {
            // the optimal basis of the perturbed LP is not feasible for the original
            return solve(p, KernelOptions { perturb: None, ..tab.opts.clone() });
        }
        step = match tab.run() {
            Err(LpError::IterationLimit) => return Ok(limit_result(&tab, phase1)),
            other => other?,
        };
    }
    Ok(match step {
        Step::Unbounded(ray) => KernelResult {
            status: LpStatus::Unbounded,
            primal: primal(&tab),
            ray: Some(ray),
            phase1,
            iterations: tab.iterations,
            basis: None,
        },
        _ => KernelResult {
            status: LpStatus::Optimal,
            primal: primal(&tab),
            ray: None,
            phase1,
            iterations: tab.iterations,
            basis: Some(final_basis(&tab)),
        },
    })
}

fn final_basis<T: Scalar>(tab: &Tableau<T>) -> FinalBasis {
    let art = tab.n_art_start();
    let basic = tab.basis.iter().map(|&b| if b >= art { tab.n_struct + tab.art_row[b - art] } else { b }).collect();
    FinalBasis { basic, at_upper: tab.at_upper[..art].to_vec() }
}

fn primal<T: Scalar>(tab: &Tableau<T>) -> Vec<T> {
    (0..tab.n_struct).map(|c| tab.value(c)).collect()
}

fn limit_result<T: Scalar>(tab: &Tableau<T>, phase1: T) -> KernelResult<T> {
    KernelResult {
        status: LpStatus::IterationLimit,
        primal: primal(tab),
        ray: None,
        phase1,
        iterations: tab.iterations,
        basis: None,
    }
}
