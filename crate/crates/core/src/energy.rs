//! Quadratic Hamiltonian split, shifted energy, Lyapunov function and
//! dissipation.
//!
//! With `H_ℓ = ½|x_ℓ|²`, `H₀ = ½|x₀|²` and `H^s_ℓ = H_ℓ − β_ℓ`:
//!
//! ```text
//! V = ½ (H^s_ℓ)² + H₀
//! Q = x₂² (x₃² + γ (H^s_ℓ)²)      so that  V̇ = −Q ≤ 0
//! ```
//!
//! `Q` is the nonnegative dissipation `‖∇H₀‖²_{R₀} + ½ H^s_ℓ ‖∇H_ℓ‖²_{R_ℓ+R_ℓᵀ}`
//! evaluated for the EPD structure matrices. Some printed closed forms of it
//! carry a leading minus sign; that sign is inconsistent with `V̇ = −Q ≤ 0`
//! and is not reproduced here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::systems::PartitionMap;

/// Pumping-and-damping gain `γ` and target partial-energy level `β_ℓ`.
///
/// `β_ℓ = 0` selects state regulation, which is only supported with `γ = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams<T> {
    gamma: T,
    beta_ell: T,
}

impl<T: Scalar> EnergyParams<T> {
    pub fn new(gamma: T, beta_ell: T) -> Result<Self> {
        if !(gamma.is_finite() && gamma > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        if !(beta_ell.is_finite() && beta_ell >= T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "beta_ell must be nonnegative and finite, got {beta_ell}"
            )));
        }
        if beta_ell == T::zero() && gamma != T::one() {
            return Err(Error::InvalidParameter(format!(
                "state regulation (beta_ell = 0) requires gamma = 1, got {gamma}"
            )));
        }
        Ok(Self { gamma, beta_ell })
    }

    /// State-regulation parameters `γ = 1, β_ℓ = 0`.
    pub fn state_regulation() -> Self {
        Self {
            gamma: T::one(),
            beta_ell: T::zero(),
        }
    }

    /// Skips validation; used to build deliberately broken structures in
    /// negative-control checks.
    pub fn new_unchecked(gamma: T, beta_ell: T) -> Self {
        Self { gamma, beta_ell }
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn beta_ell(&self) -> T {
        self.beta_ell
    }

    pub fn is_state_regulation(&self) -> bool {
        self.beta_ell == T::zero()
    }
}

/// All energy-like diagnostics at one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergySnapshot<T> {
    pub h_ell: T,
    pub h_zero: T,
    pub h_total: T,
    pub h_shift: T,
    pub v: T,
    pub q: T,
}

fn half_sq_sum<T: Scalar>(x: &[T], idx: &[usize]) -> T {
    T::half() * idx.iter().map(|&i| x[i] * x[i]).sum::<T>()
}

pub fn h_ell<T: Scalar>(x: &[T], p: &PartitionMap) -> T {
    half_sq_sum(x, p.ell_indices())
}

pub fn h_zero<T: Scalar>(x: &[T], p: &PartitionMap) -> T {
    half_sq_sum(x, p.zero_indices())
}

pub fn h_total<T: Scalar>(x: &[T], p: &PartitionMap) -> T {
    h_ell(x, p) + h_zero(x, p)
}

/// `H^s_ℓ = H_ℓ − β_ℓ`.
pub fn h_shift<T: Scalar>(x: &[T], params: &EnergyParams<T>, p: &PartitionMap) -> T {
    h_ell(x, p) - params.beta_ell
}

pub fn lyapunov_v<T: Scalar>(x: &[T], params: &EnergyParams<T>, p: &PartitionMap) -> T {
    let hs = h_shift(x, params, p);
    T::half() * hs * hs + h_zero(x, p)
}

/// Dissipation `Q(x) = x₂²(x₃² + γ(H^s_ℓ)²) ≥ 0`.
pub fn q_function<T: Scalar>(x: &[T], params: &EnergyParams<T>, p: &PartitionMap) -> T {
    let hs = h_shift(x, params, p);
    let x2 = x[1];
    let x0_sq: T = p.zero_indices().iter().map(|&i| x[i] * x[i]).sum();
    x2 * x2 * (x0_sq + params.gamma * hs * hs)
}

/// `∇H(x)`. Both blocks are quadratic with identity Hessian, so the
/// gradient is the state itself in natural ordering.
pub fn grad_h<T: Scalar>(x: &[T], p: &PartitionMap) -> Vec<T> {
    debug_assert_eq!(x.len(), p.n());
    x.to_vec()
}

pub fn grad_h_ell<T: Scalar>(x: &[T], p: &PartitionMap) -> Vec<T> {
    p.x_ell(x)
}

pub fn grad_h_zero<T: Scalar>(x: &[T], p: &PartitionMap) -> Vec<T> {
    p.x_zero(x)
}

pub fn snapshot<T: Scalar>(
    x: &[T],
    params: &EnergyParams<T>,
    p: &PartitionMap,
) -> EnergySnapshot<T> {
    let h_ell = h_ell(x, p);
    let h_zero = h_zero(x, p);
    let h_shift = h_ell - params.beta_ell;
    EnergySnapshot {
        h_ell,
        h_zero,
        h_total: h_ell + h_zero,
        h_shift,
        v: T::half() * h_shift * h_shift + h_zero,
        q: q_function(x, params, p),
    }
}
