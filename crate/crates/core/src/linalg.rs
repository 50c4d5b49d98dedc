//! Dense row-major matrices over a [`Scalar`] backend, with Gaussian
//! elimination for inverses and consistent linear systems.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds from nested rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch { expected: c, found: bad.len() });
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(T::to_f64)
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: rhs.rows });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: v.len() });
        }
        let mut out = vec![T::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let a = &self[(i, j)];
                if !a.is_zero() {
                    *o = o.clone() + vi.clone() * a.clone();
                }
            }
        }
        Ok(out)
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(&T, &T) -> T) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: rhs.rows * rhs.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, mut k: u64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64())
            .fold(0.0, f64::max)
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = T::one();
        }
        let pivots = reduce(&mut aug, n);
        if pivots.len() < n {
            return Err(Error::SingularMatrix);
        }
        Ok(Self::from_fn(n, n, |i, j| aug[(i, n + j)].clone()))
    }

    /// Solves `A x = b` for a possibly overdetermined but consistent system
    /// with a unique solution. `None` when the solution is not unique,
    /// `Err(SingularMatrix)` when the system is inconsistent.
    pub fn solve_unique(&self, b: &[T]) -> Result<Option<Vec<T>>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: b.len() });
        }
        let (m, n) = (self.rows, self.cols);
        let mut aug = Self::zeros(m, n + 1);
        for i in 0..m {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n)] = b[i].clone();
        }
        let pivots = reduce(&mut aug, n);
        // Rows below the pivots must have a vanishing right-hand side.
        for i in pivots.len()..m {
            let residual = aug[(i, n)].abs();
            let inconsistent = if T::is_exact() {
                !residual.is_zero()
            } else {
                residual.to_f64() > 1e-8
            };
            if inconsistent {
                return Err(Error::SingularMatrix);
            }
        }
        if pivots.len() < n {
            return Ok(None);
        }
        Ok(Some((0..n).map(|i| aug[(i, n)].clone()).collect()))
    }
}

/// Reduced row echelon form on the first `ncols` columns. Returns the pivot
/// column of each pivot row, in row order.
fn reduce<T: Scalar>(a: &mut Matrix<T>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == a.rows {
            break;
        }
        let best = (row..a.rows)
            .filter(|&r| !a[(r, col)].is_negligible())
            .max_by(|&x, &y| {
                a[(x, col)]
                    .pivot_weight()
                    .partial_cmp(&a[(y, col)].pivot_weight())
                    .unwrap_or(std::cmp::Ordering::Equal)
                    // Prefer the earliest row among equals.
                    .then(y.cmp(&x))
            });
        let Some(p) = best else { continue };
        a.swap_rows(row, p);
        let inv = T::one() / a[(row, col)].clone();
        for j in 0..a.cols {
            a[(row, j)] = a[(row, j)].clone() * inv.clone();
        }
        for r in 0..a.rows {
            if r == row || a[(r, col)].is_zero() {
                continue;
            }
            let factor = a[(r, col)].clone();
            for j in col..a.cols {
                let delta = factor.clone() * a[(row, j)].clone();
                if !delta.is_zero() {
                    a[(r, j)] = a[(r, j)].clone() - delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

impl<T> Matrix<T> {
    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn exact_inverse_round_trips() {
        let a = Matrix::from_rows(vec![
            vec![q(1, 2), q(-1, 2), q(0, 1)],
            vec![q(0, 1), q(1, 1), q(-1, 2)],
            vec![q(-1, 2), q(-1, 2), q(1, 1)],
        ])
        .unwrap();
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(3));
        assert_eq!(inv.mul(&a).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = Matrix::from_rows(vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]]).unwrap();
        assert_eq!(a.inverse(), Err(Error::SingularMatrix));
    }

    #[test]
    fn overdetermined_consistent_system() {
        // x + y = 3, x - y = 1, 2x = 4
        let a = Matrix::from_rows(vec![
            vec![q(1, 1), q(1, 1)],
            vec![q(1, 1), q(-1, 1)],
            vec![q(2, 1), q(0, 1)],
        ])
        .unwrap();
        let x = a.solve_unique(&[q(3, 1), q(1, 1), q(4, 1)]).unwrap().unwrap();
        assert_eq!(x, vec![q(2, 1), q(1, 1)]);
        assert_eq!(a.solve_unique(&[q(3, 1), q(1, 1), q(5, 1)]), Err(Error::SingularMatrix));
    }

    #[test]
    fn underdetermined_system_is_not_unique() {
        let a = Matrix::from_rows(vec![vec![1.0, 1.0]]).unwrap();
        assert_eq!(a.solve_unique(&[1.0]).unwrap(), None);
    }

    #[test]
    fn power_matches_repeated_product() {
        let a = Matrix::from_rows(vec![vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
        let mut acc = Matrix::identity(2);
        for _ in 0..7 {
            acc = acc.mul(&a).unwrap();
        }
        assert!(a.pow(7).unwrap().max_abs_diff(&acc) < 1e-15);
        assert_eq!(a.pow(0).unwrap(), Matrix::identity(2));
    }
}
