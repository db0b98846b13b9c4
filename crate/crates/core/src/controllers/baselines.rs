//! Comparison laws for the integrator: Pomet's time-varying feedback and
//! Astolfi's discontinuous feedback.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_integrator(context: &'static str, got: usize) -> Result<()> {
    if got != 3 {
        return Err(Error::DimensionMismatch {
            context,
            expected: 3,
            got,
        });
    }
    Ok(())
}

/// Time-varying law
///
/// ```text
/// u₁ = −(x₂ + x₃ cos t)·x₂ cos t − (x₂x₃ + x₁)
/// u₂ = x₃ sin t − (x₂ + x₁ cos t)
/// ```
pub fn pomet_control<T: Scalar>(x: &[T], t: T) -> Result<[T; 2]> {
    check_integrator("pomet_control", x.len())?;
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    let (s, c) = t.sin_cos();
    Ok([
        -(x2 + x3 * c) * x2 * c - (x2 * x3 + x1),
        x3 * s - (x2 + x1 * c),
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AstolfiParams<T> {
    pub k: T,
    pub p2: T,
    pub p3: T,
}

impl<T: Scalar> AstolfiParams<T> {
    pub fn new(k: T, p2: T, p3: T) -> Result<Self> {
        if !(k.is_finite() && k > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "k must be positive, got {k}"
            )));
        }
        if !(p2.is_finite() && p3.is_finite()) {
            return Err(Error::InvalidParameter("p2 and p3 must be finite".into()));
        }
        Ok(Self { k, p2, p3 })
    }
}

impl<T: Scalar> Default for AstolfiParams<T> {
    /// `k = 1, p₂ = −5, p₃ = 9`.
    fn default() -> Self {
        Self {
            k: T::one(),
            p2: T::lit(-5.0),
            p3: T::lit(9.0),
        }
    }
}

/// Discontinuous law `u₁ = −k x₁`, `u₂ = p₂x₂ + p₃x₃/x₁`.
///
/// Undefined on `x₁ = 0`; that case is reported as
/// [`Error::ControllerSingularity`] rather than clamped.
pub fn astolfi_control<T: Scalar>(x: &[T], params: &AstolfiParams<T>) -> Result<[T; 2]> {
    check_integrator("astolfi_control", x.len())?;
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    if x1 == T::zero() {
        return Err(Error::ControllerSingularity(
            "Astolfi law evaluated at x1 = 0".into(),
        ));
    }
    Ok([-params.k * x1, params.p2 * x2 + params.p3 * x3 / x1])
}
