//! Driftless chained-form plants `ẋ = S(x)·u`.
//!
//! The family covers the nonholonomic integrator (`n = 3`) and chained
//! systems of arbitrary order, all with two inputs:
//!
//! ```text
//! ẋ₁ = u₁,  ẋ₂ = u₂,  ẋₖ = xₖ₋₁·u₁   (k = 3..n)
//! ```
//!
//! State indices are 1-based in all user-facing text (docs, CSV headers,
//! partition listings) and 0-based in storage.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;

/// Number of inputs of every system in the family.
pub const INPUT_DIM: usize = 2;

/// State of a chained-form system. All entries are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T>(Vec<T>);

impl<T: Scalar> StateVector<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if let Some(index) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(entries))
    }

    pub fn from_f64(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&v| T::lit(v)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![T::zero(); n])
    }

    /// 1-based accessor, `x.at(3)` is `x₃`.
    pub fn at(&self, index: usize) -> T {
        self.0[index - 1]
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> Deref for StateVector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> AsRef<[T]> for StateVector<T> {
    fn as_ref(&self) -> &[T] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    /// Brockett's nonholonomic integrator in chained coordinates.
    Integrator,
    /// Chained form with the given state dimension.
    Chained(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SystemModel {
    kind: SystemKind,
}

impl SystemModel {
    pub fn integrator() -> Self {
        Self {
            kind: SystemKind::Integrator,
        }
    }

    pub fn chained(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "chained form needs n >= 3, got {n}"
            )));
        }
        Ok(Self {
            kind: SystemKind::Chained(n),
        })
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        match self.kind {
            SystemKind::Integrator => 3,
            SystemKind::Chained(n) => n,
        }
    }

    pub fn m(&self) -> usize {
        INPUT_DIM
    }

    fn check_dim(&self, context: &'static str, got: usize) -> Result<()> {
        if got != self.n() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.n(),
                got,
            });
        }
        Ok(())
    }

    /// Input matrix `S(x)`, `n × 2`.
    ///
    /// Column one is `(1, 0, x₂, …, xₙ₋₁)ᵀ`, column two is `e₂`.
    pub fn s_matrix<T: Scalar>(&self, x: &[T]) -> Result<Mat<T>> {
        self.check_dim("s_matrix", x.len())?;
        let n = self.n();
        let mut s = Mat::zeros(n, INPUT_DIM);
        s[(0, 0)] = T::one();
        s[(1, 1)] = T::one();
        for k in 2..n {
            s[(k, 0)] = x[k - 1];
        }
        Ok(s)
    }

    /// `S(x)·u`, evaluated without materialising `S`.
    pub fn vector_field<T: Scalar>(&self, x: &[T], u: [T; 2]) -> Result<Vec<T>> {
        self.check_dim("vector_field", x.len())?;
        Ok(chained_field(x, u))
    }

    /// Left annihilator `A(x)`, `n × (n−2)`, with `A(x)ᵀ S(x) = 0`.
    ///
    /// Column `k−3` encodes the constraint `xₖ₋₁·ẋ₁ − ẋₖ = 0`. For the
    /// integrator this is `(x₂, 0, −1)ᵀ`.
    pub fn annihilator<T: Scalar>(&self, x: &[T]) -> Result<Mat<T>> {
        self.check_dim("annihilator", x.len())?;
        let n = self.n();
        let mut a = Mat::zeros(n, n - INPUT_DIM);
        for k in 2..n {
            a[(0, k - 2)] = x[k - 1];
            a[(k, k - 2)] = -T::one();
        }
        Ok(a)
    }

    /// `A(x)ᵀ·ẋ`; vanishes whenever `ẋ = S(x)u`.
    pub fn constraint_residual<T: Scalar>(&self, x: &[T], xdot: &[T]) -> Result<Vec<T>> {
        self.check_dim("constraint_residual", x.len())?;
        self.check_dim("constraint_residual (xdot)", xdot.len())?;
        Ok((2..self.n())
            .map(|k| x[k - 1] * xdot[0] - xdot[k])
            .collect())
    }

    /// `x_ℓ = (x₁, x₂, x₄, …, xₙ)`, `x₀ = x₃`.
    pub fn partition_default(&self) -> PartitionMap {
        let n = self.n();
        let mut ell = vec![0, 1];
        ell.extend(3..n);
        PartitionMap { ell, zero: vec![2] }
    }
}

/// Chained vector field on a raw slice; `x.len() >= 2`.
pub(crate) fn chained_field<T: Scalar>(x: &[T], u: [T; 2]) -> Vec<T> {
    let mut dx = Vec::with_capacity(x.len());
    dx.push(u[0]);
    dx.push(u[1]);
    dx.extend(x[1..x.len() - 1].iter().map(|&xk| xk * u[0]));
    dx
}

/// Split of the state into the energy-regulated block `x_ℓ` and the
/// remainder `x₀`. Together the two index lists form a permutation of the
/// state indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionMap {
    ell: Vec<usize>,
    zero: Vec<usize>,
}

impl PartitionMap {
    /// Builds a partition from 1-based index lists.
    pub fn from_one_based(ell: &[usize], zero: &[usize]) -> Result<Self> {
        let n = ell.len() + zero.len();
        let mut seen = vec![false; n];
        for &i in ell.iter().chain(zero) {
            if i == 0 || i > n {
                return Err(Error::Partition(format!("index {i} outside 1..={n}")));
            }
            if std::mem::replace(&mut seen[i - 1], true) {
                return Err(Error::Partition(format!("index {i} listed twice")));
            }
        }
        Ok(Self {
            ell: ell.iter().map(|i| i - 1).collect(),
            zero: zero.iter().map(|i| i - 1).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.ell.len() + self.zero.len()
    }

    pub fn n_ell(&self) -> usize {
        self.ell.len()
    }

    pub fn n_zero(&self) -> usize {
        self.zero.len()
    }

    pub fn ell_one_based(&self) -> Vec<usize> {
        self.ell.iter().map(|i| i + 1).collect()
    }

    pub fn zero_one_based(&self) -> Vec<usize> {
        self.zero.iter().map(|i| i + 1).collect()
    }

    pub(crate) fn ell_indices(&self) -> &[usize] {
        &self.ell
    }

    pub(crate) fn zero_indices(&self) -> &[usize] {
        &self.zero
    }

    pub fn x_ell<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        self.ell.iter().map(|&i| x[i]).collect()
    }

    pub fn x_zero<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        self.zero.iter().map(|&i| x[i]).collect()
    }

    /// Reassembles natural ordering from `col(v_ℓ, v₀)`, i.e. applies the
    /// permutation matrix `𝓟`.
    pub fn merge<T: Scalar>(&self, v_ell: &[T], v_zero: &[T]) -> Vec<T> {
        assert_eq!(v_ell.len(), self.ell.len());
        assert_eq!(v_zero.len(), self.zero.len());
        let mut out = vec![T::zero(); self.n()];
        for (&i, &v) in self.ell.iter().zip(v_ell) {
            out[i] = v;
        }
        for (&i, &v) in self.zero.iter().zip(v_zero) {
            out[i] = v;
        }
        out
    }

    /// Permutation matrix `𝓟` with `x = 𝓟·col(x_ℓ, x₀)`.
    pub fn permutation_matrix<T: Scalar>(&self) -> Mat<T> {
        let n = self.n();
        let mut p = Mat::zeros(n, n);
        for (col, &row) in self.ell.iter().chain(&self.zero).enumerate() {
            p[(row, col)] = T::one();
        }
        p
    }
}
