//! Exact rational elimination: rank, inverse, reflexive generalized inverse and
//! a positive-semidefiniteness test.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::matrix::Matrix;

pub type Rational = BigRational;

pub fn rational(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Pivot positions found by full-pivoting elimination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankFactorization {
    pub rank: usize,
    /// Pivot rows, in the order they were chosen.
    pub pivot_rows: Vec<usize>,
    /// Pivot columns, paired with `pivot_rows`.
    pub pivot_cols: Vec<usize>,
}

/// Gaussian elimination with full pivoting. The pivot at each step is the
/// first entry of maximal absolute value in row-major order over the
/// remaining rows and columns (original indices).
pub fn rank_factorization(m: &Matrix<Rational>) -> RankFactorization {
    let mut a = m.clone();
    let mut rows: Vec<usize> = (0..m.rows()).collect();
    let mut cols: Vec<usize> = (0..m.cols()).collect();
    let mut pivot_rows = Vec::new();
    let mut pivot_cols = Vec::new();
    loop {
        let mut best: Option<(usize, usize)> = None;
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in cols.iter().enumerate() {
                let v = a.get(r, c);
                if v.is_zero() {
                    continue;
                }
                match best {
                    Some((br, bc)) if a.get(rows[br], cols[bc]).abs() >= v.abs() => {}
                    _ => best = Some((ri, ci)),
                }
            }
        }
        let Some((ri, ci)) = best else { break };
        let (pr, pc) = (rows[ri], cols[ci]);
        let pivot = a.get(pr, pc).clone();
        for &r in &rows {
            if r == pr {
                continue;
            }
            let factor = a.get(r, pc) / &pivot;
            if factor.is_zero() {
                continue;
            }
            for &c in &cols {
                let delta = &factor * a.get(pr, c);
                let cell = a.get_mut(r, c);
                *cell = &*cell - delta;
            }
        }
        rows.remove(ri);
        cols.remove(ci);
        pivot_rows.push(pr);
        pivot_cols.push(pc);
    }
    RankFactorization {
        rank: pivot_rows.len(),
        pivot_rows,
        pivot_cols,
    }
}

pub fn rank(m: &Matrix<Rational>) -> usize {
    rank_factorization(m).rank
}

/// Gauss-Jordan inverse; `None` when singular or not square.
pub fn inverse(m: &Matrix<Rational>) -> Option<Matrix<Rational>> {
    if !m.is_square() {
        return None;
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut inv: Matrix<Rational> = Matrix::identity(n);
    for col in 0..n {
        let pr = (col..n).find(|&r| !a.get(r, col).is_zero())?;
        if pr != col {
            for c in 0..n {
                let (x, y) = (a.get(pr, c).clone(), a.get(col, c).clone());
                a.set(pr, c, y);
                a.set(col, c, x);
                let (x, y) = (inv.get(pr, c).clone(), inv.get(col, c).clone());
                inv.set(pr, c, y);
                inv.set(col, c, x);
            }
        }
        let pivot = a.get(col, col).clone();
        for c in 0..n {
            let v = a.get(col, c) / &pivot;
            a.set(col, c, v);
            let v = inv.get(col, c) / &pivot;
            inv.set(col, c, v);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a.get(r, col).clone();
            if factor.is_zero() {
                continue;
            }
            for c in 0..n {
                let v = a.get(r, c) - &factor * a.get(col, c);
                a.set(r, c, v);
                let v = inv.get(r, c) - &factor * inv.get(col, c);
                inv.set(r, c, v);
            }
        }
    }
    Some(inv)
}

/// A matrix `W` with `G W G = G` and `W G W = W`, built from a maximal
/// nonsingular pivot block `G[R, C]`: `W[C, R] = G[R, C]⁻¹`, zero elsewhere.
/// Equals `G⁻¹` when `G` is invertible.
pub fn reflexive_generalized_inverse(g: &Matrix<Rational>) -> Matrix<Rational> {
    let f = rank_factorization(g);
    let mut w: Matrix<Rational> = Matrix::zeros(g.cols(), g.rows());
    if f.rank == 0 {
        return w;
    }
    let block = g.select(&f.pivot_rows, &f.pivot_cols);
    let block_inv = inverse(&block).expect("pivot block is nonsingular");
    for (a, &c) in f.pivot_cols.iter().enumerate() {
        for (b, &r) in f.pivot_rows.iter().enumerate() {
            w.set(c, r, block_inv.get(a, b).clone());
        }
    }
    w
}

/// Symmetric positive-semidefiniteness via diagonal-pivoted elimination:
/// every pivot must be nonnegative and a zero diagonal forces a zero row.
pub fn is_positive_semidefinite(g: &Matrix<Rational>) -> bool {
    if !g.is_square() || *g != g.transpose() {
        return false;
    }
    let mut a = g.clone();
    let mut remaining: Vec<usize> = (0..g.rows()).collect();
    while !remaining.is_empty() {
        if remaining.iter().any(|&i| a.get(i, i).is_negative()) {
            return false;
        }
        let (pos, &p) = remaining
            .iter()
            .enumerate()
            .max_by(|(_, &x), (_, &y)| a.get(x, x).cmp(a.get(y, y)).then(y.cmp(&x)))
            .expect("nonempty");
        let pivot = a.get(p, p).clone();
        if pivot.is_zero() {
            return remaining
                .iter()
                .all(|&r| remaining.iter().all(|&c| a.get(r, c).is_zero()));
        }
        remaining.remove(pos);
        for &r in &remaining {
            let factor = a.get(r, p) / &pivot;
            for &c in &remaining {
                let v = a.get(r, c) - &factor * a.get(p, c);
                a.set(r, c, v);
            }
        }
    }
    true
}
