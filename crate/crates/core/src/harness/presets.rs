//! Compiled-in experiment scenarios.

use std::fmt;
use std::str::FromStr;

use crate::controllers::{AstolfiParams, ControllerSpec};
use crate::energy::EnergyParams;
use crate::error::{Error, Result};
use crate::sim::{NoiseSettings, Scenario, SolverSettings};
use crate::systems::{StateVector, SystemModel};

use super::config::ScenarioConfig;

/// Horizon of the integrator experiments.
pub const INTEGRATOR_HORIZON: f64 = 20.0;
/// Horizon of the chained-form experiments. Runs near the critical
/// `x₄(0)` need thousands of seconds to settle into a limit set.
pub const CHAINED_HORIZON: f64 = 3000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    E1,
    E2,
    E2Pomet,
    E3,
    E3Astolfi,
    E4a,
    E4b,
    E4c,
    E4d,
}

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::E1,
        Preset::E2,
        Preset::E2Pomet,
        Preset::E3,
        Preset::E3Astolfi,
        Preset::E4a,
        Preset::E4b,
        Preset::E4c,
        Preset::E4d,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::E1 => "E1",
            Self::E2 => "E2",
            Self::E2Pomet => "E2-pomet",
            Self::E3 => "E3",
            Self::E3Astolfi => "E3-astolfi",
            Self::E4a => "E4a",
            Self::E4b => "E4b",
            Self::E4c => "E4c",
            Self::E4d => "E4d",
        }
    }

    /// Scenario configurations of the preset; `E1` has one per `β_ℓ`.
    pub fn configs(&self) -> Vec<ScenarioConfig> {
        let x0 = [3.0, 2.0, 2.0];
        match self {
            Self::E1 => [(0.5, "E1-beta0.5"), (2.0, "E1-beta2")]
                .into_iter()
                .map(|(beta, name)| integrator(name, epd(5.0, beta), x0, false))
                .collect(),
            Self::E2 => vec![integrator("E2", epd(1.0, 0.0), x0, false)],
            Self::E2Pomet => vec![integrator("E2-pomet", ControllerSpec::Pomet, x0, false)],
            Self::E3 => vec![integrator("E3", epd(1.0, 0.0), x0, true)],
            Self::E3Astolfi => vec![integrator(
                "E3-astolfi",
                ControllerSpec::Astolfi(AstolfiParams::default()),
                x0,
                true,
            )],
            Self::E4a => vec![chained("E4a", 0.5, 0.5, 0.5)],
            Self::E4b => vec![chained("E4b", 0.5, 0.5, 2.0)],
            Self::E4c => vec![chained("E4c", 5.0, 0.5, 1.0)],
            Self::E4d => vec![chained("E4d", 50.0, 0.5, 1.0)],
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

fn epd(gamma: f64, beta: f64) -> ControllerSpec<f64> {
    let params = EnergyParams::new(gamma, beta).expect("preset parameters are valid");
    ControllerSpec::EpdIntegrator(params)
}

fn integrator(
    name: &str,
    controller: ControllerSpec<f64>,
    x0: [f64; 3],
    noisy: bool,
) -> ScenarioConfig {
    ScenarioConfig::new(
        name,
        Scenario {
            model: SystemModel::integrator(),
            controller,
            x0: StateVector::from_f64(&x0).expect("finite"),
            solver: SolverSettings::rk4(INTEGRATOR_HORIZON).with_record_every(10),
            noise: NoiseSettings {
                enabled: noisy,
                ..NoiseSettings::default()
            },
        },
    )
}

/// Chained system of order 4 from `(0.5, 1, 0.1, x₄(0))`.
pub fn chained(name: &str, gamma: f64, beta: f64, x4: f64) -> ScenarioConfig {
    let params = EnergyParams::new(gamma, beta).expect("preset parameters are valid");
    ScenarioConfig::new(
        name,
        Scenario {
            model: SystemModel::chained(4).expect("n = 4"),
            controller: ControllerSpec::EpdChained(params),
            x0: StateVector::from_f64(&[0.5, 1.0, 0.1, x4]).expect("finite"),
            solver: SolverSettings::rk4(CHAINED_HORIZON).with_record_every(100),
            noise: NoiseSettings::default(),
        },
    )
}
