//! Energy pumping-and-damping IDA-PBC laws.
//!
//! The closed loop is assigned the port-Hamiltonian form
//!
//! ```text
//! ẋ = 𝓟 · blockdiag(J_ℓ − R_ℓ, J₀ − R₀) · col(∇H_ℓ, ∇H₀)
//! ```
//!
//! with `J₀ = 0`, `R₀ = x₂²`, `R_ℓ = diag(0, γH^s_ℓ, 0, …)` and a skew `J_ℓ`
//! coupling `x₁, x₂` through `x₃` and `x₂` to the tail `x₄…xₙ`. The closed
//! forms below are what the least-squares assembly
//! `u = (SᵀS)⁻¹Sᵀ·[target field]` reduces to for these matrices.

use crate::energy::{grad_h_ell, grad_h_zero, h_ell, EnergyParams};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::systems::{PartitionMap, SystemModel};

/// Integrator law, `n = 3`:
///
/// ```text
/// u₁ = −x₂x₃
/// u₂ = x₁x₃ − γ(H_ℓ − β_ℓ)x₂
/// ```
pub fn epd_control_integrator<T: Scalar>(x: &[T], params: &EnergyParams<T>) -> Result<[T; 2]> {
    if x.len() != 3 {
        return Err(Error::DimensionMismatch {
            context: "epd_control_integrator",
            expected: 3,
            got: x.len(),
        });
    }
    Ok(chained_law(x, params))
}

/// Chained-form law, any `n ≥ 3`:
///
/// ```text
/// u₁ = −x₂x₃
/// u₂ = x₁x₃ + x₃(x₃x₄ + … + xₙ₋₁xₙ) − γ(H_ℓ − β_ℓ)x₂,   H_ℓ = ½|(x₁, x₂, x₄, …, xₙ)|²
/// ```
pub fn epd_control_chained<T: Scalar>(x: &[T], params: &EnergyParams<T>) -> Result<[T; 2]> {
    if x.len() < 3 {
        return Err(Error::DimensionMismatch {
            context: "epd_control_chained",
            expected: 3,
            got: x.len(),
        });
    }
    Ok(chained_law(x, params))
}

fn chained_law<T: Scalar>(x: &[T], params: &EnergyParams<T>) -> [T; 2] {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    let tail_sq: T = x[3..].iter().map(|&v| v * v).sum();
    let h_shift = T::half() * (x1 * x1 + x2 * x2 + tail_sq) - params.beta_ell();
    // x₃x₄ + … + xₙ₋₁xₙ; empty for n = 3
    let coupling: T = x[2..].windows(2).map(|w| w[0] * w[1]).sum();
    [
        -x2 * x3,
        x1 * x3 + x3 * coupling - params.gamma() * h_shift * x2,
    ]
}

/// Interconnection and damping matrices as functions of the full state.
pub trait StructureMatrices<T: Scalar> {
    fn j_ell(&self, x: &[T]) -> Mat<T>;
    fn r_ell(&self, x: &[T]) -> Mat<T>;
    fn j_zero(&self, x: &[T]) -> Mat<T>;
    fn r_zero(&self, x: &[T]) -> Mat<T>;
}

/// EPD matrices for the default partition of a chained system. For `n = 3`
/// they are the integrator matrices.
#[derive(Clone, Copy, Debug)]
pub struct EpdStructure<T> {
    n: usize,
    params: EnergyParams<T>,
}

impl<T: Scalar> EpdStructure<T> {
    pub fn new(model: &SystemModel, params: EnergyParams<T>) -> Self {
        Self {
            n: model.n(),
            params,
        }
    }

    pub fn params(&self) -> EnergyParams<T> {
        self.params
    }
}

impl<T: Scalar> StructureMatrices<T> for EpdStructure<T> {
    fn j_ell(&self, x: &[T]) -> Mat<T> {
        let n_ell = self.n - 1;
        let x3 = x[2];
        let mut j = Mat::zeros(n_ell, n_ell);
        j[(0, 1)] = -x3;
        j[(1, 0)] = x3;
        // x_k (k ≥ 4) sits at position k−2 of x_ℓ, i.e. 0-based k−1 → k−2
        for k in 3..self.n {
            let c = x3 * x[k - 1];
            j[(1, k - 1)] = c;
            j[(k - 1, 1)] = -c;
        }
        j
    }

    fn r_ell(&self, x: &[T]) -> Mat<T> {
        let n_ell = self.n - 1;
        let mut r = Mat::zeros(n_ell, n_ell);
        let tail_sq: T = x[3..].iter().map(|&v| v * v).sum();
        let h_shift = T::half() * (x[0] * x[0] + x[1] * x[1] + tail_sq) - self.params.beta_ell();
        r[(1, 1)] = self.params.gamma() * h_shift;
        r
    }

    fn j_zero(&self, _x: &[T]) -> Mat<T> {
        Mat::zeros(1, 1)
    }

    fn r_zero(&self, x: &[T]) -> Mat<T> {
        Mat::from_rows(&[&[x[1] * x[1]]])
    }
}

type MatFn<T> = Box<dyn Fn(&[T]) -> Mat<T> + Send + Sync>;

/// Structure matrices given by arbitrary closures.
pub struct CustomStructure<T> {
    pub j_ell: MatFn<T>,
    pub r_ell: MatFn<T>,
    pub j_zero: MatFn<T>,
    pub r_zero: MatFn<T>,
}

impl<T: Scalar> CustomStructure<T> {
    /// Copies another structure into closures so individual blocks can be
    /// replaced.
    pub fn from_structure<S>(base: S) -> Self
    where
        S: StructureMatrices<T> + Clone + Send + Sync + 'static,
    {
        let (b1, b2, b3, b4) = (base.clone(), base.clone(), base.clone(), base);
        Self {
            j_ell: Box::new(move |x| b1.j_ell(x)),
            r_ell: Box::new(move |x| b2.r_ell(x)),
            j_zero: Box::new(move |x| b3.j_zero(x)),
            r_zero: Box::new(move |x| b4.r_zero(x)),
        }
    }
}

impl<T: Scalar> StructureMatrices<T> for CustomStructure<T> {
    fn j_ell(&self, x: &[T]) -> Mat<T> {
        (self.j_ell)(x)
    }
    fn r_ell(&self, x: &[T]) -> Mat<T> {
        (self.r_ell)(x)
    }
    fn j_zero(&self, x: &[T]) -> Mat<T> {
        (self.j_zero)(x)
    }
    fn r_zero(&self, x: &[T]) -> Mat<T> {
        (self.r_zero)(x)
    }
}

/// Target port-Hamiltonian field in natural state ordering:
/// `𝓟·col((J_ℓ − R_ℓ)∇H_ℓ, (J₀ − R₀)∇H₀)`.
pub fn ph_field<T: Scalar, S: StructureMatrices<T> + ?Sized>(
    mats: &S,
    p: &PartitionMap,
    x: &[T],
) -> Vec<T> {
    let f_ell = mats.j_ell(x).sub(&mats.r_ell(x)).mul_vec(&grad_h_ell(x, p));
    let f_zero = mats
        .j_zero(x)
        .sub(&mats.r_zero(x))
        .mul_vec(&grad_h_zero(x, p));
    p.merge(&f_ell, &f_zero)
}

/// Least-squares assembly `u = (SᵀS)⁻¹Sᵀ·ph_field(x)`.
pub fn epd_control_generic<T: Scalar, S: StructureMatrices<T> + ?Sized>(
    model: &SystemModel,
    x: &[T],
    mats: &S,
    p: &PartitionMap,
) -> Result<[T; 2]> {
    let s = model.s_matrix(x)?;
    let target = ph_field(mats, p, x);
    let st = s.transpose();
    let gram = st.mul(&s);
    let rhs = st.mul_vec(&target);
    solve_2x2(&gram, [rhs[0], rhs[1]])
}

/// Gaussian elimination with partial pivoting on a 2×2 system.
fn solve_2x2<T: Scalar>(m: &Mat<T>, rhs: [T; 2]) -> Result<[T; 2]> {
    let (mut a, mut b, mut c, mut d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let (mut r0, mut r1) = (rhs[0], rhs[1]);
    if c.abs() > a.abs() {
        std::mem::swap(&mut a, &mut c);
        std::mem::swap(&mut b, &mut d);
        std::mem::swap(&mut r0, &mut r1);
    }
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if !(a.abs() > T::epsilon() * scale) {
        return Err(Error::Singular("SᵀS"));
    }
    let l = c / a;
    let d2 = d - l * b;
    if !(d2.abs() > T::epsilon() * scale) {
        return Err(Error::Singular("SᵀS"));
    }
    let u2 = (r1 - l * r0) / d2;
    let u1 = (r0 - b * u2) / a;
    Ok([u1, u2])
}

/// `h(x) = (x₁² + x₂²)·x₃²`; the inadmissible set is its zero set.
///
/// Only characterises inadmissible initial conditions for the integrator.
/// For `n > 3` the same expression on `(x₁, x₂, x₃)` is returned as a
/// heuristic; use [`in_local_ball`] for the chained-form initial-condition
/// requirement.
pub fn inadmissible_indicator<T: Scalar>(x: &[T], _model: &SystemModel) -> T {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    (x1 * x1 + x2 * x2) * x3 * x3
}

/// Chained-form initial-condition set `(H^s_ℓ)² + x₃² ≤ δ`.
pub fn in_local_ball<T: Scalar>(
    x: &[T],
    params: &EnergyParams<T>,
    p: &PartitionMap,
    delta: T,
) -> bool {
    let hs = h_ell(x, p) - params.beta_ell();
    let x0_sq: T = p.x_zero(x).iter().map(|&v| v * v).sum();
    hs * hs + x0_sq <= delta
}
