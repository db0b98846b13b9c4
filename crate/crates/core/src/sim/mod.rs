//! Closed-loop simulation with optional measurement noise.
//!
//! The plant is integrated on the true state; the controller sees
//! `x̂ = x + n(t)` where `n` is zero-order-hold noise.

mod noise;
mod ode;

pub use noise::{sample_noise, NoiseSettings};
pub use ode::{dopri5_step, drive, rk4_step, DriveStop, Stepper};

use crate::controllers::ControllerSpec;
use crate::energy::{snapshot, EnergyParams, EnergySnapshot};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::systems::{chained_field, PartitionMap, StateVector, SystemModel};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_DIVERGENCE_BOUND: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings<T> {
    pub step: T,
    pub t_final: T,
    pub method: Stepper<T>,
    pub record_every: usize,
    pub divergence_bound: T,
}

impl<T: Scalar> SolverSettings<T> {
    /// RK4 at the default step, recording every step.
    pub fn rk4(t_final: T) -> Self {
        Self {
            step: T::lit(DEFAULT_STEP),
            t_final,
            method: Stepper::Rk4,
            record_every: 1,
            divergence_bound: T::lit(DEFAULT_DIVERGENCE_BOUND),
        }
    }

    pub fn rk45(t_final: T) -> Self {
        Self {
            method: Stepper::Rk45 {
                abs_tol: T::lit(DEFAULT_TOL),
                rel_tol: T::lit(DEFAULT_TOL),
            },
            ..Self::rk4(t_final)
        }
    }

    pub fn with_record_every(mut self, record_every: usize) -> Self {
        self.record_every = record_every;
        self
    }

    pub fn with_step(mut self, step: T) -> Self {
        self.step = step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > T::zero()) {
            return Err(Error::Config(format!(
                "step must be > 0, got {}",
                self.step
            )));
        }
        if !(self.t_final.is_finite() && self.t_final > T::zero()) {
            return Err(Error::Config(format!(
                "t_final must be > 0, got {}",
                self.t_final
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be >= 1".into()));
        }
        if self.step * T::lit(self.record_every as f64) > self.t_final {
            return Err(Error::Config(format!(
                "step * record_every ({} * {}) exceeds t_final ({})",
                self.step, self.record_every, self.t_final
            )));
        }
        if !(self.divergence_bound > T::zero()) {
            return Err(Error::Config("divergence bound must be > 0".into()));
        }
        if let Stepper::Rk45 { abs_tol, rel_tol } = self.method {
            if !(abs_tol > T::zero() && rel_tol > T::zero()) {
                return Err(Error::Config("RK45 tolerances must be > 0".into()));
            }
        }
        Ok(())
    }

    /// Number of samples a completed run records.
    pub fn expected_samples(&self) -> usize {
        let interval = (self.step * T::lit(self.record_every as f64)).as_f64();
        (self.t_final.as_f64() / interval + 1e-9).floor() as usize + 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario<T> {
    pub model: SystemModel,
    pub controller: ControllerSpec<T>,
    pub x0: StateVector<T>,
    pub solver: SolverSettings<T>,
    pub noise: NoiseSettings,
}

impl<T: Scalar> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        if self.x0.len() != self.model.n() {
            return Err(Error::Config(format!(
                "initial state has {} entries but the system has n = {}",
                self.x0.len(),
                self.model.n()
            )));
        }
        if self.controller.integrator_only() && self.model.n() != 3 {
            return Err(Error::Config(format!(
                "controller `{}` only applies to the n = 3 integrator",
                self.controller.name()
            )));
        }
        self.solver.validate()?;
        self.noise.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination<T> {
    Completed,
    /// `|x|` exceeded the bound or became non-finite at `t`.
    Diverged {
        t: T,
        norm: T,
    },
    /// The controller was evaluated where it is undefined.
    ControllerSingularity {
        t: T,
    },
}

impl<T> Termination<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::Diverged { .. } => "diverged",
            Self::ControllerSingularity { .. } => "controller_singularity",
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self, Self::Completed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<StateVector<T>>,
    pub inputs: Vec<[T; 2]>,
    pub diagnostics: Vec<EnergySnapshot<T>>,
    pub termination: Termination<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn empty() -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            inputs: Vec::new(),
            diagnostics: Vec::new(),
            termination: Termination::Completed,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&StateVector<T>> {
        self.states.last()
    }

    /// State dimension, or 0 for an empty trajectory.
    pub fn n(&self) -> usize {
        self.states.first().map_or(0, |s| s.len())
    }

    /// Component `index` (1-based) over time.
    pub fn component(&self, index: usize) -> Vec<T> {
        self.states.iter().map(|s| s.at(index)).collect()
    }
}

/// Measured state `x̂ = x + n(t)`.
fn measure<T: Scalar>(noise: &NoiseSettings, x: &[T], t: T) -> Vec<T> {
    if !noise.enabled {
        return x.to_vec();
    }
    x.iter()
        .enumerate()
        .map(|(i, &xi)| xi + sample_noise(noise, t, i))
        .collect()
}

/// Closed-loop right-hand side `S(x)·u(x̂, t)` of a scenario.
pub fn closed_loop_field<T: Scalar>(scenario: &Scenario<T>, t: T, x: &[T]) -> Result<Vec<T>> {
    let xm = measure(&scenario.noise, x, t);
    let u = scenario.controller.control(&scenario.model, &xm, t)?;
    Ok(chained_field(x, u))
}

/// Simulates a scenario and records decimated samples with diagnostics.
///
/// Early stops (divergence, controller singularity) are reported through
/// [`Trajectory::termination`], not as errors; errors are reserved for
/// invalid configurations.
pub fn integrate<T: Scalar>(scenario: &Scenario<T>) -> Result<Trajectory<T>> {
    scenario.validate()?;
    let params: EnergyParams<T> = scenario.controller.energy_params();
    let partition: PartitionMap = scenario.model.partition_default();
    let settings = &scenario.solver;
    let mut traj = Trajectory::empty();

    let record = |traj: &mut Trajectory<T>, t: T, x: &[T]| -> Result<()> {
        let xm = measure(&scenario.noise, x, t);
        let u = scenario.controller.control(&scenario.model, &xm, t)?;
        traj.times.push(t);
        traj.states.push(StateVector::new(x.to_vec())?);
        traj.inputs.push(u);
        traj.diagnostics.push(snapshot(x, &params, &partition));
        Ok(())
    };

    let outcome = drive(
        |t, x: &[T]| closed_loop_field(scenario, t, x),
        &scenario.x0,
        settings.method,
        settings.step,
        settings.t_final,
        settings.record_every,
        settings.divergence_bound,
        |t, x| record(&mut traj, t, x),
    );

    match outcome {
        Ok(_) => {}
        Err(DriveStop::Failed { t, x, error }) => match error {
            Error::ControllerSingularity(_) => {
                traj.termination = Termination::ControllerSingularity { t };
                let _ = append_tail(&mut traj, t, &x, |traj, t, x| record(traj, t, x));
            }
            Error::NonFinite { .. } => {
                let norm = crate::linalg::norm(&x);
                traj.termination = Termination::Diverged { t, norm };
            }
            other => return Err(other),
        },
        Err(DriveStop::Diverged { t, norm, .. }) => {
            traj.termination = Termination::Diverged { t, norm };
        }
    }
    Ok(traj)
}

/// Records the last finite state of an aborted run when it is newer than
/// the last sample and its input is computable.
fn append_tail<T: Scalar>(
    traj: &mut Trajectory<T>,
    t: T,
    x: &[T],
    record: impl FnOnce(&mut Trajectory<T>, T, &[T]) -> Result<()>,
) -> Result<()> {
    if traj.times.last().is_some_and(|&last| t <= last) {
        return Ok(());
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Ok(());
    }
    let mut scratch = Trajectory::empty();
    record(&mut scratch, t, x)?;
    traj.times.extend(scratch.times);
    traj.states.extend(scratch.states);
    traj.inputs.extend(scratch.inputs);
    traj.diagnostics.extend(scratch.diagnostics);
    Ok(())
}

/// Integrates an arbitrary autonomous field, recording every
/// `record_every` steps. Used to compare the plant-plus-controller loop
/// against the port-Hamiltonian right-hand side directly.
pub fn solve_autonomous<T, F>(
    mut f: F,
    x0: &[T],
    settings: &SolverSettings<T>,
) -> Result<(Vec<T>, Vec<Vec<T>>)>
where
    T: Scalar,
    F: FnMut(&[T]) -> Vec<T>,
{
    settings.validate()?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let out = drive(
        |_, x: &[T]| Ok::<_, Error>(f(x)),
        x0,
        settings.method,
        settings.step,
        settings.t_final,
        settings.record_every,
        settings.divergence_bound,
        |t, x| {
            times.push(t);
            states.push(x.to_vec());
            Ok(())
        },
    );
    match out {
        Ok(_) => Ok((times, states)),
        Err(DriveStop::Failed { error, .. }) => Err(error),
        Err(DriveStop::Diverged { t, norm, .. }) => Err(Error::Config(format!(
            "autonomous field diverged at t = {t} (|x| = {norm})"
        ))),
    }
}
