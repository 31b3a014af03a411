//! Exact check of a basis found in floating point: the basic solution is
//! recomputed over the rationals and accepted only if it is primal feasible
//! and all reduced costs have the optimal sign.

use num_traits::Zero;

use super::simplex::{axpy, FinalBasis};
use super::LpProblem;
use crate::model::Sense;
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Rejection {
    SingularBasis,
    PrimalInfeasible,
    DualInfeasible,
}

type Row = Vec<(u32, Rational)>;

/// Solves the square system `rows * x = rhs` by sparse elimination
/// (shortest row first, then its sparsest column). `None` if singular.
pub(crate) fn solve_square(mut rows: Vec<Row>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let k = rows.len();
    let mut col_count = vec![0usize; k];
    for row in &rows {
        for (c, _) in row {
            *col_count.get_mut(*c as usize)? += 1;
        }
    }
    let mut active = vec![true; k];
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let r = (0..k).filter(|&i| active[i]).min_by_key(|&i| rows[i].len())?;
        let (c, piv) = rows[r].iter().min_by_key(|(c, _)| col_count[*c as usize]).cloned()?;
        active[r] = false;
        for (j, _) in &rows[r] {
            col_count[*j as usize] -= 1;
        }
        for i in 0..k {
            if !active[i] {
                continue;
            }
            let Ok(pos) = rows[i].binary_search_by_key(&c, |(j, _)| *j) else { continue };
            let f = &rows[i][pos].1 / &piv;
            for (j, _) in &rows[i] {
                col_count[*j as usize] -= 1;
            }
            let new_row = axpy(&rows[i], &f, &rows[r]);
            for (j, _) in &new_row {
                col_count[*j as usize] += 1;
            }
            rows[i] = new_row;
            rhs[i] = &rhs[i] - &f * &rhs[r];
        }
        order.push((r, c, piv));
    }
    let mut x: Vec<Option<Rational>> = vec![None; k];
    for (r, c, piv) in order.into_iter().rev() {
        let mut acc = rhs[r].clone();
        for (j, a) in &rows[r] {
            if *j != c {
                acc -= a * x[*j as usize].as_ref()?;
            }
        }
        x[c as usize] = Some(acc / piv);
    }
    x.into_iter().collect()
}

/// Exact optimal primal solution for `basis`, or why the basis is rejected.
pub(crate) fn certify(p: &LpProblem, basis: &FinalBasis) -> Result<Vec<Rational>, Rejection> {
    let n = p.num_cols();
    let m = p.rows.len();
    let mut slack_basic = vec![false; m];
    let mut kernel_col = vec![None; n];
    let mut basic_struct = Vec::new();
    for &b in &basis.basic {
        if b < n {
            kernel_col[b] = Some(basic_struct.len());
            basic_struct.push(b);
        } else if std::mem::replace(&mut slack_basic[b - n], true) {
            return Err(Rejection::SingularBasis);
        }
    }
    let tight: Vec<usize> = (0..m).filter(|&r| !slack_basic[r]).collect();
    if tight.len() != basic_struct.len() {
        return Err(Rejection::SingularBasis);
    }
    let mut x: Vec<Rational> = (0..n)
        .map(|j| match (&p.upper[j], basis.at_upper[j]) {
            (Some(u), true) => u.clone(),
            _ => p.lower[j].clone(),
        })
        .collect();

    let mut k_rows = Vec::with_capacity(tight.len());
    let mut k_rhs = Vec::with_capacity(tight.len());
    let mut t_rows: Vec<Row> = vec![Vec::new(); basic_struct.len()];
    for (kr, &r) in tight.iter().enumerate() {
        let row = &p.rows[r];
        let mut g = row.rhs.clone();
        let mut terms: Row = Vec::new();
        for (c, a) in &row.terms {
            match kernel_col[*c] {
                Some(kc) => {
                    terms.push((kc as u32, a.clone()));
                    t_rows[kc].push((kr as u32, a.clone()));
                }
                None => g -= a * &x[*c],
            }
        }
        terms.sort_by_key(|(c, _)| *c);
        k_rows.push(terms);
        k_rhs.push(g);
    }
    let xs = solve_square(k_rows, k_rhs).ok_or(Rejection::SingularBasis)?;
    for (kc, &j) in basic_struct.iter().enumerate() {
        x[j] = xs[kc].clone();
    }
    if !p.is_feasible_exact(&x) {
        return Err(Rejection::PrimalInfeasible);
    }

    let c_basic: Vec<Rational> = basic_struct.iter().map(|&j| p.objective[j].clone()).collect();
    let y = solve_square(t_rows, c_basic).ok_or(Rejection::SingularBasis)?;
    let mut reduced = p.objective.clone();
    for (kr, &r) in tight.iter().enumerate() {
        if y[kr].is_zero() {
            continue;
        }
        for (c, a) in &p.rows[r].terms {
            reduced[*c] -= &y[kr] * a;
        }
        // slack columns: +e_r on <= and =, -e_r on >=, cost 0
        let ok = match p.rows[r].sense {
            Sense::Le => y[kr] <= Rational::zero(),
            Sense::Ge => y[kr] >= Rational::zero(),
            Sense::Eq => true,
        };
        if !ok {
            return Err(Rejection::DualInfeasible);
        }
    }
    for j in 0..n {
        if kernel_col[j].is_some() || p.upper[j].as_ref() == Some(&p.lower[j]) {
            continue;
        }
        let ok = if basis.at_upper[j] { reduced[j] <= Rational::zero() } else { reduced[j] >= Rational::zero() };
        if !ok {
            return Err(Rejection::DualInfeasible);
        }
    }
    Ok(x)
}
