//! Critical `x₄(0)` search for the order-4 chained system.

use rayon::join;

use crate::error::{Error, Result};
use crate::sim::{integrate, SolverSettings, Stepper, DEFAULT_STEP};
use crate::verify::{check_residual_set_membership, ResidualSet};

use super::presets::{chained, CHAINED_HORIZON};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BisectionOptions {
    /// Simulated time before the final state is classified.
    pub horizon: f64,
    pub step: f64,
    pub method: Stepper<f64>,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        Self {
            horizon: CHAINED_HORIZON,
            step: DEFAULT_STEP,
            method: Stepper::Rk4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bisection {
    pub critical: f64,
    /// Final bracket.
    pub lo: f64,
    pub hi: f64,
    pub lo_class: ResidualSet,
    pub hi_class: ResidualSet,
    /// Every `(x₄(0), class)` evaluated, in order.
    pub evaluations: Vec<(f64, ResidualSet)>,
}

/// Limit-set class of the final state from `(base, x₄)`.
pub fn classify_x4(
    gamma: f64,
    beta_ell: f64,
    base: [f64; 3],
    x4: f64,
    opts: &BisectionOptions,
) -> Result<ResidualSet> {
    let mut cfg = chained("bisect", gamma, beta_ell, x4);
    let mut x0 = base.to_vec();
    x0.push(x4);
    cfg.scenario.x0 = crate::systems::StateVector::new(x0)?;
    let record_every = (opts.horizon / opts.step).round().max(1.0) as usize;
    cfg.scenario.solver = SolverSettings {
        step: opts.step,
        t_final: opts.horizon,
        method: opts.method,
        record_every,
        ..cfg.scenario.solver
    };
    let traj = integrate(&cfg.scenario)?;
    let params = cfg.scenario.controller.energy_params();
    Ok(match traj.last_state() {
        Some(x) if traj.termination.is_completed() => check_residual_set_membership(x, &params),
        _ => ResidualSet::Neither,
    })
}

/// Bisects on `x₄(0)` between initial states whose final classes differ.
/// A midpoint with the same class as `lo` replaces `lo`, any other class
/// replaces `hi`; the search stops once `hi − lo < tol`.
pub fn find_critical_x4_with(
    gamma: f64,
    beta_ell: f64,
    base: [f64; 3],
    lo: f64,
    hi: f64,
    tol: f64,
    opts: &BisectionOptions,
) -> Result<Bisection> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Config(format!(
            "bracket requires lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be > 0, got {tol}")));
    }
    let classify = |x4| classify_x4(gamma, beta_ell, base, x4, opts);
    let (lo_class, hi_class) = join(|| classify(lo), || classify(hi));
    let (lo_class, hi_class) = (lo_class?, hi_class?);
    if lo_class == hi_class {
        return Err(Error::Bracket {
            lo,
            hi,
            class: lo_class.to_string(),
        });
    }
    let mut evaluations = vec![(lo, lo_class), (hi, hi_class)];
    let (mut lo, mut hi, mut hi_class) = (lo, hi, hi_class);
    while hi - lo >= tol {
        let mid = 0.5 * (lo + hi);
        let class = classify(mid)?;
        evaluations.push((mid, class));
        if class == lo_class {
            lo = mid;
        } else {
            hi = mid;
            hi_class = class;
        }
    }
    Ok(Bisection {
        critical: 0.5 * (lo + hi),
        lo,
        hi,
        lo_class,
        hi_class,
        evaluations,
    })
}

/// [`find_critical_x4_with`] under the default options.
pub fn find_critical_x4(
    gamma: f64,
    beta_ell: f64,
    base: [f64; 3],
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    find_critical_x4_with(
        gamma,
        beta_ell,
        base,
        lo,
        hi,
        tol,
        &BisectionOptions::default(),
    )
    .map(|b| b.critical)
}
