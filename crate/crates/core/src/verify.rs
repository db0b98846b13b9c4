//! Pointwise checks of the EPD IDA-PBC structure at sampled states.
//!
//! Each check reduces over the samples with `max` (residuals) or `min`
//! (the EPD quadratic), so reports from disjoint sample sets combine
//! associatively.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::controllers::{ph_field, ControllerSpec, EpdStructure, StructureMatrices};
use crate::energy::{h_ell, EnergyParams};
use crate::error::{Error, Result};
use crate::linalg::max_abs;
use crate::scalar::Scalar;
use crate::systems::{PartitionMap, SystemModel};

/// Residual bound for identities that hold exactly in real arithmetic.
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Tolerance used when classifying late-time states against the limit sets.
pub const SET_TOL: f64 = 1e-3;

/// `max_x |A_ℓᵀ(J_ℓ − R_ℓ)∇H_ℓ + A₀ᵀ(J₀ − R₀)∇H₀|`.
pub fn check_matching_pde<T, S>(
    model: &SystemModel,
    mats: &S,
    p: &PartitionMap,
    samples: &[Vec<T>],
) -> Result<T>
where
    T: Scalar,
    S: StructureMatrices<T> + Sync + ?Sized,
{
    samples
        .par_iter()
        .map(|x| {
            let field = ph_field(mats, p, x);
            Ok(max_abs(&model.constraint_residual(x, &field)?))
        })
        .try_reduce(T::zero, |a, b| Ok(a.max(b)))
}

/// Returns `(max |J + Jᵀ| entry over J_ℓ and J₀, min eigenvalue of
/// (R_ℓ + R_ℓᵀ)·H^s_ℓ)` over the samples.
pub fn check_skew_and_epd<T, S>(
    mats: &S,
    p: &PartitionMap,
    params: &EnergyParams<T>,
    samples: &[Vec<T>],
) -> (T, T)
where
    T: Scalar,
    S: StructureMatrices<T> + Sync + ?Sized,
{
    samples
        .par_iter()
        .map(|x| {
            let j_ell = mats.j_ell(x);
            let j_zero = mats.j_zero(x);
            let skew = j_ell
                .add(&j_ell.transpose())
                .max_abs()
                .max(j_zero.add(&j_zero.transpose()).max_abs());
            let r = mats.r_ell(x);
            let hs = h_ell(x, p) - params.beta_ell();
            let epd = r.add(&r.transpose()).scale(hs).min_symmetric_eigenvalue();
            (skew, epd)
        })
        .reduce(
            || (T::zero(), T::infinity()),
            |a, b| (a.0.max(b.0), a.1.min(b.1)),
        )
}

/// `max_x |S(x)u(x) − 𝓟·blockdiag(J_ℓ − R_ℓ, J₀ − R₀)∇H(x)|`.
pub fn check_closed_loop_equivalence<T, S>(
    model: &SystemModel,
    controller: &ControllerSpec<T>,
    mats: &S,
    p: &PartitionMap,
    samples: &[Vec<T>],
) -> Result<T>
where
    T: Scalar,
    S: StructureMatrices<T> + Sync + ?Sized,
{
    samples
        .par_iter()
        .map(|x| {
            let u = controller.control(model, x, T::zero())?;
            let lhs = model.vector_field(x, u)?;
            let rhs = ph_field(mats, p, x);
            Ok(lhs
                .iter()
                .zip(&rhs)
                .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs())))
        })
        .try_reduce(T::zero, |a, b| Ok(a.max(b)))
}

/// Limit sets of the chained-form closed loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResidualSet {
    /// `H^s_ℓ = 0, x₃ = 0`.
    TargetSet,
    /// `x₂ = 0, x₁ + x₃x₄ + … + xₙ₋₁xₙ = 0` with `x₃ ≠ 0, H^s_ℓ ≠ 0`.
    UndesiredSet,
    Neither,
}

impl fmt::Display for ResidualSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TargetSet => "target",
            Self::UndesiredSet => "undesired",
            Self::Neither => "neither",
        })
    }
}

/// Classifies `x` against the limit sets at tolerance [`SET_TOL`]. The
/// undesired set is only reported for `n ≥ 4`.
pub fn check_residual_set_membership<T: Scalar>(x: &[T], params: &EnergyParams<T>) -> ResidualSet {
    classify_with_tol(x, params, T::lit(SET_TOL))
}

pub fn classify_with_tol<T: Scalar>(x: &[T], params: &EnergyParams<T>, tol: T) -> ResidualSet {
    let n = x.len();
    let tail_sq: T = x[3..].iter().map(|&v| v * v).sum();
    let hs = T::half() * (x[0] * x[0] + x[1] * x[1] + tail_sq) - params.beta_ell();
    let x3 = x[2];
    if hs.abs() < tol && x3.abs() < tol {
        return ResidualSet::TargetSet;
    }
    if n >= 4 {
        let coupling: T = x[2..].windows(2).map(|w| w[0] * w[1]).sum();
        if x[1].abs() < tol && (x[0] + coupling).abs() < tol && x3.abs() >= tol && hs.abs() >= tol {
            return ResidualSet::UndesiredSet;
        }
    }
    ResidualSet::Neither
}

/// Uniform samples from the box `[−half_width, half_width]ⁿ`.
pub fn sample_box<T: Scalar>(n: usize, count: usize, half_width: f64, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| T::lit(rng.random_range(-half_width..=half_width)))
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub n: usize,
    pub gamma: f64,
    pub beta_ell: f64,
    pub max_matching_residual: f64,
    pub max_ph_equiv_residual: f64,
    pub max_skew_residual: f64,
    pub min_epd_quadratic: f64,
    /// `max |u_generic − u_closed_form|`.
    pub max_generic_law_residual: f64,
    pub sample_count: usize,
    pub pass: bool,
}

impl VerificationReport {
    /// Writes the report as `key = value` lines.
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "gamma = {}", self.gamma)?;
        writeln!(f, "beta_ell = {}", self.beta_ell)?;
        writeln!(f, "sample_count = {}", self.sample_count)?;
        writeln!(
            f,
            "max_matching_residual = {:e}",
            self.max_matching_residual
        )?;
        writeln!(
            f,
            "max_ph_equiv_residual = {:e}",
            self.max_ph_equiv_residual
        )?;
        writeln!(f, "max_skew_residual = {:e}", self.max_skew_residual)?;
        writeln!(f, "min_epd_quadratic = {:e}", self.min_epd_quadratic)?;
        writeln!(
            f,
            "max_generic_law_residual = {:e}",
            self.max_generic_law_residual
        )?;
        writeln!(f, "pass = {}", self.pass)
    }
}

/// Runs every structural check for the chained system of order `n` over
/// `count` samples from `[−10, 10]ⁿ`.
pub fn run_verification(
    n: usize,
    params: EnergyParams<f64>,
    count: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let model = if n == 3 {
        SystemModel::integrator()
    } else {
        SystemModel::chained(n)?
    };
    let p = model.partition_default();
    let mats = EpdStructure::new(&model, params);
    let samples: Vec<Vec<f64>> = sample_box(n, count, 10.0, seed);
    let closed_form = if n == 3 {
        ControllerSpec::EpdIntegrator(params)
    } else {
        ControllerSpec::EpdChained(params)
    };

    let max_matching_residual = check_matching_pde(&model, &mats, &p, &samples)?;
    let (max_skew_residual, min_epd_quadratic) = check_skew_and_epd(&mats, &p, &params, &samples);
    let max_ph_equiv_residual =
        check_closed_loop_equivalence(&model, &closed_form, &mats, &p, &samples)?;
    let max_generic_law_residual = samples
        .par_iter()
        .map(|x| {
            let a = closed_form.control(&model, x, 0.0)?;
            let b = ControllerSpec::EpdGeneric(params).control(&model, x, 0.0)?;
            Ok((a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
        })
        .try_reduce(|| 0.0, |a: f64, b| Ok(a.max(b)))?;

    let pass = max_matching_residual <= STRUCTURAL_TOL
        && max_ph_equiv_residual <= STRUCTURAL_TOL
        && max_skew_residual <= STRUCTURAL_TOL
        && max_generic_law_residual <= STRUCTURAL_TOL
        && min_epd_quadratic >= -STRUCTURAL_TOL;
    Ok(VerificationReport {
        n,
        gamma: params.gamma(),
        beta_ell: params.beta_ell(),
        max_matching_residual,
        max_ph_equiv_residual,
        max_skew_residual,
        min_epd_quadratic,
        max_generic_law_residual,
        sample_count: count,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::CustomStructure;
    use crate::linalg::Mat;

    fn params(g: f64, b: f64) -> EnergyParams<f64> {
        EnergyParams::new(g, b).unwrap()
    }

    #[test]
    fn matching_pde_holds_for_integrator_and_chained() {
        for n in [3, 4] {
            let model = SystemModel::chained(n).unwrap();
            let mats = EpdStructure::new(&model, params(5.0, 0.5));
            let samples = sample_box(n, 1000, 5.0, 1);
            let r =
                check_matching_pde(&model, &mats, &model.partition_default(), &samples).unwrap();
            assert!(r <= STRUCTURAL_TOL, "n={n}: {r}");
        }
    }

    #[test]
    fn matching_pde_detects_perturbed_damping() {
        // R_ℓ only acts on the x₂ row, which the annihilator ignores, so the
        // perturbation goes into R₀.
        let model = SystemModel::integrator();
        let base = EpdStructure::new(&model, params(5.0, 0.5));
        let mut mats = CustomStructure::from_structure(base);
        mats.r_zero = Box::new(|x: &[f64]| Mat::from_rows(&[&[x[1] * x[1] + 1.0]]));
        let samples = sample_box(3, 100, 5.0, 2);
        let r = check_matching_pde(&model, &mats, &model.partition_default(), &samples).unwrap();
        assert!(r > 1e-3, "{r}");
    }

    #[test]
    fn skew_and_epd_exact_for_integrator() {
        let model = SystemModel::integrator();
        let e = params(5.0, 0.5);
        let mats = EpdStructure::new(&model, e);
        let samples = sample_box(3, 500, 5.0, 3);
        let (skew, epd) = check_skew_and_epd(&mats, &model.partition_default(), &e, &samples);
        assert_eq!(skew, 0.0);
        assert!(epd.abs() <= 1e-15, "{epd}");
    }

    #[test]
    fn skew_and_epd_for_n5() {
        let model = SystemModel::chained(5).unwrap();
        let e = params(0.7, 1.3);
        let mats = EpdStructure::new(&model, e);
        let samples = sample_box(5, 500, 10.0, 4);
        let (skew, epd) = check_skew_and_epd(&mats, &model.partition_default(), &e, &samples);
        assert!(skew <= 1e-15);
        assert!(epd >= 0.0, "{epd}");
    }

    #[test]
    fn sign_flipped_damping_is_flagged() {
        let model = SystemModel::integrator();
        let e = params(5.0, 0.5);
        let base = EpdStructure::new(&model, e);
        let mut mats = CustomStructure::from_structure(base);
        mats.r_ell = Box::new(move |x: &[f64]| base.r_ell(x).scale(-1.0));
        let samples = sample_box(3, 100, 5.0, 5);
        let (_, epd) = check_skew_and_epd(&mats, &model.partition_default(), &e, &samples);
        assert!(epd < -1e-3, "{epd}");
    }

    #[test]
    fn closed_loop_equivalence() {
        let m3 = SystemModel::integrator();
        let e = params(5.0, 0.5);
        let mats = EpdStructure::new(&m3, e);
        let samples = sample_box(3, 1000, 10.0, 6);
        let r = check_closed_loop_equivalence(
            &m3,
            &ControllerSpec::EpdIntegrator(e),
            &mats,
            &m3.partition_default(),
            &samples,
        )
        .unwrap();
        assert!(r <= STRUCTURAL_TOL, "{r}");

        let m6 = SystemModel::chained(6).unwrap();
        let e = params(0.5, 0.5);
        let mats6 = EpdStructure::new(&m6, e);
        let samples6 = sample_box(6, 1000, 10.0, 7);
        let r = check_closed_loop_equivalence(
            &m6,
            &ControllerSpec::EpdChained(e),
            &mats6,
            &m6.partition_default(),
            &samples6,
        )
        .unwrap();
        assert!(r <= STRUCTURAL_TOL, "{r}");

        // Pomet's law is not the EPD closed loop
        let e = params(5.0, 0.5);
        let mats = EpdStructure::new(&m3, e);
        let r = check_closed_loop_equivalence(
            &m3,
            &ControllerSpec::Pomet,
            &mats,
            &m3.partition_default(),
            &samples,
        )
        .unwrap();
        assert!(r > 1.0, "{r}");
    }

    #[test]
    fn mismatched_gain_breaks_equivalence() {
        let m = SystemModel::integrator();
        let mats = EpdStructure::new(&m, params(6.0, 0.5));
        let samples = sample_box(3, 100, 5.0, 8);
        let r = check_closed_loop_equivalence(
            &m,
            &ControllerSpec::EpdIntegrator(params(5.0, 0.5)),
            &mats,
            &m.partition_default(),
            &samples,
        )
        .unwrap();
        assert!(r > 1e-3, "{r}");
    }

    #[test]
    fn residual_set_examples() {
        let beta = 0.5f64;
        let e = params(0.5, beta);
        assert_eq!(
            check_residual_set_membership(&[(2.0 * beta).sqrt(), 0.0, 0.0, 0.0], &e),
            ResidualSet::TargetSet
        );
        let (x3, x4) = (0.3, 2.0);
        let x = [-x3 * x4, 0.0, x3, x4];
        assert_eq!(
            check_residual_set_membership(&x, &e),
            ResidualSet::UndesiredSet
        );
        assert_eq!(
            check_residual_set_membership(&[1.0, 1.0, 1.0, 1.0], &e),
            ResidualSet::Neither
        );
        // n = 3 never reports the undesired set
        assert_eq!(
            check_residual_set_membership(&[0.0, 0.0, 0.3], &e),
            ResidualSet::Neither
        );
    }

    #[test]
    fn full_report_passes() {
        let rep = run_verification(4, params(0.5, 0.5), 2000, 9).unwrap();
        assert!(rep.pass, "{rep}");
        let text = rep.to_string();
        assert!(text.contains("pass = true"));
        assert!(text.lines().all(|l| l.contains(" = ")));
    }
}
