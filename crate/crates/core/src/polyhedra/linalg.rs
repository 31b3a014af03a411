use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::model::LinearConstraint;
use crate::Rational;

/// Dense rectangular matrix of rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    cols: usize,
    rows: Vec<Vec<Rational>>,
}

impl RationalMatrix {
    pub fn new(cols: usize) -> Self {
        RationalMatrix { cols, rows: Vec::new() }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix { cols, rows: vec![vec![Rational::zero(); cols]; rows] }
    }

    /// Panics if the rows have different lengths.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Rational>>) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "rows must have {cols} entries");
        RationalMatrix { cols, rows }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let rows = rows.iter().map(|r| r.iter().map(|&v| Rational::from_integer(v.into())).collect()).collect();
        Self::from_rows(cols, rows)
    }

    /// Left-hand sides of `cons` over `cols` columns.
    pub fn from_constraints<'a>(cols: usize, cons: impl IntoIterator<Item = &'a LinearConstraint>) -> Self {
        let mut m = Self::new(cols);
        for c in cons {
            let mut row = vec![Rational::zero(); cols];
            for (j, a) in c.terms() {
                row[*j] = a.clone();
            }
            m.push_row(row);
        }
        m
    }

    pub fn push_row(&mut self, row: Vec<Rational>) {
        assert_eq!(row.len(), self.cols);
        self.rows.push(row);
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn select_columns(&self, cols: &[usize]) -> RationalMatrix {
        let rows = self.rows.iter().map(|r| cols.iter().map(|&j| r[j].clone()).collect()).collect();
        RationalMatrix { cols: cols.len(), rows }
    }

    pub fn transpose(&self) -> RationalMatrix {
        let rows = (0..self.cols).map(|j| self.rows.iter().map(|r| r[j].clone()).collect()).collect();
        RationalMatrix { cols: self.rows.len(), rows }
    }

    /// Rows scaled to integers, with the scale factors.
    fn integer_rows(&self) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
        let mut out = Vec::with_capacity(self.rows.len());
        let mut scales = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            let l = r.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            out.push(r.iter().map(|v| v.numer() * (&l / v.denom())).collect());
            scales.push(l);
        }
        (out, scales)
    }

    pub fn rank(&self) -> usize {
        let (mut a, _) = self.integer_rows();
        bareiss(&mut a, self.cols).rank
    }

    /// `None` unless square.
    pub fn determinant(&self) -> Option<Rational> {
        if self.rows.len() != self.cols {
            return None;
        }
        if self.cols == 0 {
            return Some(Rational::one());
        }
        let (mut a, scales) = self.integer_rows();
        let e = bareiss(&mut a, self.cols);
        if e.rank < self.cols {
            return Some(Rational::zero());
        }
        let det = e.last_pivot * BigInt::from(e.sign);
        let scale = scales.iter().fold(BigInt::one(), |acc, s| acc * s);
        Some(Rational::new(det, scale))
    }
}

struct Elimination {
    rank: usize,
    sign: i8,
    last_pivot: BigInt,
}

/// Fraction-free elimination in place; every division is exact.
fn bareiss(a: &mut [Vec<BigInt>], cols: usize) -> Elimination {
    let m = a.len();
    let mut r = 0;
    let mut sign = 1i8;
    let mut prev = BigInt::one();
    for c in 0..cols {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else { continue };
        if p != r {
            a.swap(p, r);
            sign = -sign;
        }
        let (top, rest) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest.iter_mut() {
            let f = std::mem::take(&mut row[c]);
            for j in c + 1..cols {
                let v = &pivot_row[c] * &row[j] - &f * &pivot_row[j];
                row[j] = if prev.is_one() { v } else { v / &prev };
            }
        }
        prev = pivot_row[c].clone();
        r += 1;
    }
    Elimination { rank: r, sign, last_pivot: prev }
}

pub fn rank(m: &RationalMatrix) -> usize {
    m.rank()
}

#[derive(Debug, Clone)]
struct NullVector {
    big: Vec<BigInt>,
    small: Option<Vec<i64>>,
}

impl NullVector {
    fn unit(dim: usize, j: usize) -> Self {
        let mut big = vec![BigInt::zero(); dim];
        big[j] = BigInt::one();
        let mut small = vec![0; dim];
        small[j] = 1;
        NullVector { big, small: Some(small) }
    }

    fn from_big(mut big: Vec<BigInt>) -> Self {
        let g = big.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        if !g.is_zero() && !g.is_one() {
            for v in &mut big {
                *v /= &g;
            }
        }
        let small = big.iter().map(|v| v.to_i64()).collect();
        NullVector { big, small }
    }

    fn dot(&self, diff: &[(usize, i64)]) -> BigInt {
        match &self.small {
            Some(s) => BigInt::from(diff.iter().map(|&(j, d)| s[j] as i128 * d as i128).sum::<i128>()),
            None => diff.iter().map(|&(j, d)| &self.big[j] * d).sum(),
        }
    }
}

/// Affine dimension of a growing point set.
///
/// Keeps an integral basis of the vectors orthogonal to all differences
/// `p - p0`; a new point raises the dimension iff some basis vector is not
/// orthogonal to its difference. All arithmetic is exact.
#[derive(Debug, Clone)]
pub struct AffineRank {
    dim: usize,
    origin: Option<Vec<i64>>,
    null: Vec<NullVector>,
    rank: usize,
    bound: Option<usize>,
    witnesses: Vec<Vec<i64>>,
}

impl AffineRank {
    pub fn new(dim: usize) -> Self {
        AffineRank {
            dim,
            origin: None,
            null: (0..dim).map(|j| NullVector::unit(dim, j)).collect(),
            rank: 0,
            bound: None,
            witnesses: Vec::new(),
        }
    }

    /// Stop accepting points once the dimension reaches `bound`.
    pub fn with_bound(mut self, bound: usize) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_empty(&self) -> bool {
        self.origin.is_none()
    }

    pub fn saturated(&self) -> bool {
        self.rank == self.dim || self.bound.is_some_and(|b| self.rank >= b)
    }

    /// First point followed by one point per dimension step.
    pub fn witnesses(&self) -> &[Vec<i64>] {
        &self.witnesses
    }

    /// Returns true if the point raised the dimension.
    pub fn insert<T: Copy + Into<i64>>(&mut self, point: &[T]) -> bool {
        assert_eq!(point.len(), self.dim);
        let Some(origin) = &self.origin else {
            let p: Vec<i64> = point.iter().map(|&v| v.into()).collect();
            self.origin = Some(p.clone());
            self.witnesses.push(p);
            return false;
        };
        if self.saturated() {
            return false;
        }
        let diff: Vec<(usize, i64)> = point
            .iter()
            .zip(origin)
            .enumerate()
            .filter_map(|(j, (&v, &o))| {
                let d = v.into() - o;
                (d != 0).then_some((j, d))
            })
            .collect();
        if diff.is_empty() {
            return false;
        }
        let dots: Vec<BigInt> = self.null.iter().map(|v| v.dot(&diff)).collect();
        let Some(pivot) = (0..dots.len()).filter(|&i| !dots[i].is_zero()).min_by_key(|&i| dots[i].abs()) else {
            return false;
        };
        let pv = self.null.swap_remove(pivot);
        let dp = dots[pivot].clone();
        let mut dots = dots;
        dots.swap_remove(pivot);
        for (v, d) in self.null.iter_mut().zip(&dots) {
            if d.is_zero() {
                continue;
            }
            let big = v.big.iter().zip(&pv.big).map(|(a, b)| &dp * a - d * b).collect();
            *v = NullVector::from_big(big);
        }
        self.rank += 1;
        self.witnesses.push(point.iter().map(|&v| v.into()).collect());
        true
    }
}

/// Affine dimension of `points` (`None` for an empty stream), stopping
/// early once `bound` is reached.
pub fn affine_rank<P, T>(points: impl IntoIterator<Item = P>, bound: Option<usize>) -> Option<usize>
where
    P: AsRef<[T]>,
    T: Copy + Into<i64>,
{
    let mut acc: Option<AffineRank> = None;
    for p in points {
        let p = p.as_ref();
        let a = acc.get_or_insert_with(|| {
            let a = AffineRank::new(p.len());
            match bound {
                Some(b) => a.with_bound(b),
                None => a,
            }
        });
        a.insert(p);
        if a.saturated() {
            break;
        }
    }
    acc.map(|a| a.rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rank_mod(rows: &[Vec<i64>], p: i64) -> usize {
        let mut a: Vec<Vec<i64>> = rows.iter().map(|r| r.iter().map(|v| v.rem_euclid(p)).collect()).collect();
        let cols = a.first().map_or(0, Vec::len);
        let mut r = 0;
        for c in 0..cols {
            let Some(piv) = (r..a.len()).find(|&i| a[i][c] != 0) else { continue };
            a.swap(piv, r);
            let inv = pow_mod(a[r][c], p - 2, p);
            for i in 0..a.len() {
                if i != r && a[i][c] != 0 {
                    let f = (a[i][c] as i128 * inv as i128 % p as i128) as i64;
                    for j in c..cols {
                        let v = (a[i][j] as i128 - f as i128 * a[r][j] as i128).rem_euclid(p as i128);
                        a[i][j] = v as i64;
                    }
                }
            }
            r += 1;
        }
        r
    }

    fn pow_mod(b: i64, mut e: i64, p: i64) -> i64 {
        let p = p as i128;
        let (mut b, mut acc) = (b as i128 % p, 1i128);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc as i64
    }

    #[test]
    fn trivial_ranks() {
        let id: Vec<Vec<i64>> = (0..5).map(|i| (0..5).map(|j| (i == j) as i64).collect()).collect();
        assert_eq!(RationalMatrix::from_i64(&id).rank(), 5);
        assert_eq!(RationalMatrix::zeros(3, 4).rank(), 0);
        assert_eq!(RationalMatrix::new(7).rank(), 0);
    }

    #[test]
    fn rank_matches_modular_ranks() {
        let primes = [1_000_000_007i64, 998_244_353, 2_147_483_647];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let (m, n) = (rng.gen_range(1..14), rng.gen_range(1..14));
            let rows: Vec<Vec<i64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect()).collect();
            let exact = RationalMatrix::from_i64(&rows).rank();
            for p in primes {
                assert_eq!(exact, rank_mod(&rows, p));
            }
        }
    }

    #[test]
    fn determinants() {
        let m = RationalMatrix::from_i64(&[vec![2, 1], vec![1, 3]]);
        assert_eq!(m.determinant(), Some(Rational::from_integer(5.into())));
        let half = Rational::new(1.into(), 2.into());
        let m = RationalMatrix::from_rows(2, vec![vec![half.clone(), Rational::zero()], vec![Rational::zero(), half]]);
        assert_eq!(m.determinant(), Some(Rational::new(1.into(), 4.into())));
        let swap = RationalMatrix::from_i64(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(swap.determinant(), Some(Rational::from_integer((-1).into())));
        assert_eq!(RationalMatrix::from_i64(&[vec![1, 2], vec![2, 4]]).determinant(), Some(Rational::zero()));
        assert_eq!(RationalMatrix::zeros(2, 3).determinant(), None);
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        fn cofactor(m: &[Vec<i64>]) -> i64 {
            if m.len() == 1 {
                return m[0][0];
            }
            (0..m.len())
                .map(|j| {
                    let minor: Vec<Vec<i64>> =
                        m[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect()).collect();
                    let s = if j % 2 == 0 { 1 } else { -1 };
                    s * m[0][j] * cofactor(&minor)
                })
                .sum()
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let n = rng.gen_range(1..6);
            let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-3..4)).collect()).collect();
            let d = RationalMatrix::from_i64(&rows).determinant().unwrap();
            assert_eq!(d, Rational::from_integer(cofactor(&rows).into()));
        }
    }

    #[test]
    fn affine_rank_small_cases() {
        assert_eq!(affine_rank(vec![vec![1u8, 0, 1]], None), Some(0));
        assert_eq!(affine_rank(vec![vec![1u8, 0], vec![0, 1]], None), Some(1));
        for k in 1..7 {
            let simplex: Vec<Vec<u8>> = (0..k).map(|i| (0..k).map(|j| (i == j) as u8).collect()).collect();
            assert_eq!(affine_rank(&simplex, None), Some(k - 1));
        }
        let empty: Vec<Vec<u8>> = Vec::new();
        assert_eq!(affine_rank(&empty, None), None);
        let cube: Vec<Vec<u8>> = (0..8u8).map(|b| (0..3).map(|j| (b >> j) & 1).collect()).collect();
        assert_eq!(affine_rank(&cube, None), Some(3));
        assert_eq!(affine_rank(&cube, Some(2)), Some(2));
    }

    #[test]
    fn affine_rank_matches_bareiss_on_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let (m, n) = (rng.gen_range(1..16), rng.gen_range(1..12));
            let pts: Vec<Vec<u8>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect()).collect();
            let diffs: Vec<Vec<i64>> =
                pts[1..].iter().map(|p| p.iter().zip(&pts[0]).map(|(&a, &b)| a as i64 - b as i64).collect()).collect();
            let expected = if diffs.is_empty() { 0 } else { RationalMatrix::from_i64(&diffs).rank() };
            let mut acc = AffineRank::new(n);
            for p in &pts {
                acc.insert(p);
            }
            assert_eq!(acc.rank(), expected);
            assert_eq!(acc.witnesses().len(), expected + 1);
        }
    }

    proptest! {
        #[test]
        fn rank_invariant_under_permutation_and_scaling(
            rows in proptest::collection::vec(proptest::collection::vec(-2i64..3, 6), 1..7),
            seed in any::<u64>(),
        ) {
            let base = RationalMatrix::from_i64(&rows).rank();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut perm_rows = rows.clone();
            for i in (1..perm_rows.len()).rev() {
                perm_rows.swap(i, rng.gen_range(0..=i));
            }
            let mut cols: Vec<usize> = (0..6).collect();
            for i in (1..6).rev() {
                cols.swap(i, rng.gen_range(0..=i));
            }
            let scaled: Vec<Vec<i64>> = perm_rows
                .iter()
                .map(|r| {
                    let s = rng.gen_range(1..5) * if rng.gen_bool(0.5) { -1 } else { 1 };
                    cols.iter().map(|&j| r[j] * s).collect()
                })
                .collect();
            prop_assert_eq!(RationalMatrix::from_i64(&scaled).rank(), base);
            prop_assert_eq!(RationalMatrix::from_i64(&rows).transpose().rank(), base);
        }
    }
}
