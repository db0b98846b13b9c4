//! Small dense row-major matrix used for the structure matrices.

use std::ops::{Index, IndexMut};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows(rows: &[&[T]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &Mat<T>) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        })
    }

    pub fn add(&self, other: &Mat<T>) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Mat<T>) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    /// Largest absolute entry; zero for an empty matrix.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(
            T::zero(),
            |acc, &a| if a.abs() > acc { a.abs() } else { acc },
        )
    }

    fn zip_with(&self, other: &Mat<T>, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "matrix shape mismatch"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Smallest eigenvalue of the symmetric part `(M + Mᵀ)/2`.
    pub fn min_symmetric_eigenvalue(&self) -> T {
        assert_eq!(self.rows, self.cols, "eigenvalues need a square matrix");
        if self.rows == 0 {
            return T::zero();
        }
        let sym = nalgebra::DMatrix::<f64>::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)].as_f64() + self[(j, i)].as_f64())
        });
        let eig = sym.symmetric_eigenvalues();
        T::lit(eig.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Block-diagonal assembly of two square blocks.
pub fn block_diag<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let n = a.rows() + b.rows();
    let m = a.cols() + b.cols();
    let mut out = Mat::zeros(n, m);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out[(i, j)] = a[(i, j)];
        }
    }
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            out[(a.rows() + i, a.cols() + j)] = b[(i, j)];
        }
    }
    out
}

pub fn max_abs<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(
        T::zero(),
        |acc, &a| if a.abs() > acc { a.abs() } else { acc },
    )
}

pub fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&a| a * a).sum::<T>().sqrt()
}
