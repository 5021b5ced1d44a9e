//! Dense exact linear algebra over the rationals.
//!
//! Sizes here are small (tens of rows), so plain Gaussian elimination with
//! exact arithmetic is both fast enough and free of conditioning questions.

use crate::scalar::Rational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("rank deficient system: rank {rank} < {cols} unknowns")]
    RankDeficient { rank: usize, cols: usize },
    #[error("inconsistent system: residual in equation {row}")]
    Inconsistent { row: usize },
    #[error("singular square system")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// Row-major dense rational matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rational>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn at(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for (j, xj) in x.iter().enumerate() {
                    if !self.at(i, j).is_zero() && !xj.is_zero() {
                        acc += self.at(i, j) * xj;
                    }
                }
                acc
            })
            .collect()
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut Mat) -> Vec<usize> {
    let cols = m.cols;
    rref_limited(m, cols)
}

/// Row reduction that only pivots on the first `limit` columns, so an
/// augmented right-hand side column can never be chosen as a pivot.
fn rref_limited(m: &mut Mat, limit: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for j in 0..limit {
        if r == m.rows {
            break;
        }
        let Some(p) = (r..m.rows).find(|&i| !m.at(i, j).is_zero()) else {
            continue;
        };
        m.swap_rows(r, p);
        let inv = m.at(r, j).recip();
        for k in j..m.cols {
            let v = m.at(r, k) * &inv;
            m.set(r, k, v);
        }
        for i in 0..m.rows {
            if i != r && !m.at(i, j).is_zero() {
                let f = m.at(i, j).clone();
                for k in j..m.cols {
                    let v = m.at(i, k) - &f * m.at(r, k);
                    m.set(i, k, v);
                }
            }
        }
        pivots.push(j);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Mat) -> usize {
    let mut work = m.clone();
    rref(&mut work).len()
}

/// Basis of the right nullspace.
pub fn nullspace(m: &Mat) -> Vec<Vec<Rational>> {
    let mut work = m.clone();
    let pivots = rref(&mut work);
    let free: Vec<usize> = (0..m.cols).filter(|j| !pivots.contains(j)).collect();
    free.iter()
        .map(|&fj| {
            let mut v = vec![Rational::zero(); m.cols];
            v[fj] = Rational::one();
            for (pi, &pj) in pivots.iter().enumerate() {
                v[pj] = -work.at(pi, fj).clone();
            }
            v
        })
        .collect()
}

/// Solves a (possibly overdetermined) system with a unique solution.
///
/// `tolerance = None` demands exact consistency; `Some(t)` accepts residuals
/// with absolute value at most `t` in the redundant equations, which serves
/// rationalized floating-point data.
pub fn solve_unique(
    a: &Mat,
    b: &[Rational],
    tolerance: Option<&Rational>,
) -> Result<Vec<Rational>, LinalgError> {
    if b.len() != a.rows {
        return Err(LinalgError::Shape(format!(
            "matrix has {} rows but right-hand side has {}",
            a.rows,
            b.len()
        )));
    }
    let mut aug = Mat::zeros(a.rows, a.cols + 1);
    for i in 0..a.rows {
        for j in 0..a.cols {
            aug.set(i, j, a.at(i, j).clone());
        }
        aug.set(i, a.cols, b[i].clone());
    }
    let pivots = rref_limited(&mut aug, a.cols);
    let essential = pivots;
    if essential.len() < a.cols {
        return Err(LinalgError::RankDeficient { rank: essential.len(), cols: a.cols });
    }
    let mut x = vec![Rational::zero(); a.cols];
    for (pi, &pj) in essential.iter().enumerate() {
        x[pj] = aug.at(pi, a.cols).clone();
    }
    // Redundant equations must be satisfied: after reduction they read 0 = c.
    for i in essential.len()..a.rows {
        let residual = aug.at(i, a.cols);
        let ok = match tolerance {
            None => residual.is_zero(),
            Some(t) => residual.abs() <= *t,
        };
        if !ok {
            return Err(LinalgError::Inconsistent { row: i });
        }
    }
    Ok(x)
}

/// LU factorization of a square exact matrix, reusable across right-hand
/// sides.
#[derive(Debug, Clone)]
pub struct ExactLu {
    n: usize,
    /// Unit lower factor below the diagonal, upper factor on and above.
    lu: Mat,
    perm: Vec<usize>,
}

impl ExactLu {
    pub fn new(a: &Mat) -> Result<Self, LinalgError> {
        if a.rows != a.cols {
            return Err(LinalgError::Shape(format!("{}x{} is not square", a.rows, a.cols)));
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for j in 0..n {
            let Some(p) = (j..n).find(|&i| !lu.at(i, j).is_zero()) else {
                return Err(LinalgError::Singular);
            };
            lu.swap_rows(j, p);
            perm.swap(j, p);
            let inv = lu.at(j, j).recip();
            for i in j + 1..n {
                if lu.at(i, j).is_zero() {
                    continue;
                }
                let f = lu.at(i, j) * &inv;
                for k in j + 1..n {
                    if !lu.at(j, k).is_zero() {
                        let v = lu.at(i, k) - &f * lu.at(j, k);
                        lu.set(i, k, v);
                    }
                }
                lu.set(i, j, f);
            }
        }
        Ok(ExactLu { n, lu, perm })
    }

    pub fn solve(&self, b: &[Rational]) -> Vec<Rational> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<Rational> = self.perm.iter().map(|&i| b[i].clone()).collect();
        for i in 1..self.n {
            for j in 0..i {
                if !self.lu.at(i, j).is_zero() && !y[j].is_zero() {
                    let v = &y[i] - self.lu.at(i, j) * &y[j];
                    y[i] = v;
                }
            }
        }
        for i in (0..self.n).rev() {
            for j in i + 1..self.n {
                if !self.lu.at(i, j).is_zero() && !y[j].is_zero() {
                    let v = &y[i] - self.lu.at(i, j) * &y[j];
                    y[i] = v;
                }
            }
            let v = &y[i] / self.lu.at(i, i);
            y[i] = v;
        }
        y
    }
}

pub fn determinant(a: &Mat) -> Result<Rational, LinalgError> {
    if a.rows != a.cols {
        return Err(LinalgError::Shape(format!("{}x{} is not square", a.rows, a.cols)));
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut det = Rational::one();
    for j in 0..n {
        let Some(p) = (j..n).find(|&i| !m.at(i, j).is_zero()) else {
            return Ok(Rational::zero());
        };
        if p != j {
            m.swap_rows(j, p);
            det = -det;
        }
        det *= m.at(j, j);
        let inv = m.at(j, j).recip();
        for i in j + 1..n {
            if m.at(i, j).is_zero() {
                continue;
            }
            let f = m.at(i, j) * &inv;
            for k in j..n {
                let v = m.at(i, k) - &f * m.at(j, k);
                m.set(i, k, v);
            }
        }
    }
    Ok(det)
}

/// Positive semidefiniteness of a symmetric matrix: every principal minor is
/// nonnegative. Exponential in the size, which is fine for the handful of
/// horizontal directions this crate sees.
pub fn is_positive_semidefinite(a: &Mat) -> Result<bool, LinalgError> {
    if a.rows != a.cols {
        return Err(LinalgError::Shape(format!("{}x{} is not square", a.rows, a.cols)));
    }
    let n = a.rows;
    assert!(n <= 16, "principal-minor test is for small matrices");
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut sub = Mat::zeros(idx.len(), idx.len());
        for (i, &ri) in idx.iter().enumerate() {
            for (j, &cj) in idx.iter().enumerate() {
                sub.set(i, j, a.at(ri, cj).clone());
            }
        }
        if determinant(&sub)?.is_negative() {
            return Ok(false);
        }
    }
    Ok(true)
}
