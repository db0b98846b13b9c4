//! Flat TOML scenario files.
//!
//! ```toml
//! name = "E1-beta0.5"
//! system = "integrator"        # or "chained" together with n
//! controller = "epd"           # epd | epd_generic | pomet | astolfi | zero
//! gamma = 5.0
//! beta_ell = 0.5
//! x0 = [3.0, 2.0, 2.0]
//! t_final = 20.0
//! ```
//!
//! Every other key is optional; see [`ConfigFile`] for the full list and
//! defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controllers::{in_local_ball, inadmissible_indicator, AstolfiParams, ControllerSpec};
use crate::energy::EnergyParams;
use crate::error::{Error, Result};
use crate::sim::{
    NoiseSettings, Scenario, SolverSettings, Stepper, DEFAULT_DIVERGENCE_BOUND, DEFAULT_STEP,
    DEFAULT_TOL,
};
use crate::systems::{StateVector, SystemKind, SystemModel};

use super::plot::PlotKind;

fn default_step() -> f64 {
    DEFAULT_STEP
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_method() -> String {
    "rk4".into()
}
fn default_record_every() -> usize {
    1
}
fn default_divergence_bound() -> f64 {
    DEFAULT_DIVERGENCE_BOUND
}
fn default_amplitude() -> f64 {
    NoiseSettings::default().amplitude
}
fn default_sample_time() -> f64 {
    NoiseSettings::default().sample_time
}
fn default_true() -> bool {
    true
}
fn default_plots() -> Vec<String> {
    PlotKind::ALL.iter().map(|k| k.name().to_string()).collect()
}

/// On-disk representation of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub name: String,
    /// `integrator` or `chained`.
    pub system: String,
    /// State dimension for `chained`; must be 3 (or absent) for `integrator`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// `epd`, `epd_generic`, `pomet`, `astolfi` or `zero`.
    pub controller: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_ell: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p3: Option<f64>,
    pub x0: Vec<f64>,
    #[serde(default = "default_step")]
    pub step: f64,
    pub t_final: f64,
    /// `rk4` or `rk45`.
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_divergence_bound")]
    pub divergence_bound: f64,
    #[serde(default)]
    pub noise: bool,
    #[serde(default = "default_amplitude")]
    pub noise_amplitude: f64,
    #[serde(default = "default_sample_time")]
    pub noise_sample_time: f64,
    #[serde(default)]
    pub seed: u64,
    /// Warn when the chained-form initial state lies outside
    /// `(H^s_ℓ)² + x₃² ≤ ball_delta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball_delta: Option<f64>,
    #[serde(default = "default_true")]
    pub csv: bool,
    #[serde(default = "default_plots")]
    pub plots: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputOptions {
    pub csv: bool,
    pub plots: Vec<PlotKind>,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            csv: true,
            plots: PlotKind::ALL.to_vec(),
        }
    }
}

/// A named scenario plus export options.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub scenario: Scenario<f64>,
    pub outputs: OutputOptions,
    pub ball_delta: Option<f64>,
}

fn required(value: Option<f64>, key: &str, controller: &str) -> Result<f64> {
    value.ok_or_else(|| Error::Config(format!("controller `{controller}` requires `{key}`")))
}

impl ScenarioConfig {
    pub fn new(name: impl Into<String>, scenario: Scenario<f64>) -> Self {
        Self {
            name: name.into(),
            scenario,
            outputs: OutputOptions::default(),
            ball_delta: None,
        }
    }

    pub fn from_file_repr(file: ConfigFile) -> Result<Self> {
        let model = match (file.system.as_str(), file.n) {
            ("integrator", None | Some(3)) => SystemModel::integrator(),
            ("integrator", Some(n)) => {
                return Err(Error::Config(format!(
                    "system `integrator` has n = 3, got n = {n}"
                )))
            }
            ("chained", Some(n)) => SystemModel::chained(n)
                .map_err(|e| Error::Config(format!("invalid chained system: {e}")))?,
            ("chained", None) => return Err(Error::Config("system `chained` requires `n`".into())),
            (other, _) => {
                return Err(Error::Config(format!(
                    "unknown system `{other}` (expected integrator or chained)"
                )))
            }
        };

        let epd_params = |ctl: &str| -> Result<EnergyParams<f64>> {
            let gamma = required(file.gamma, "gamma", ctl)?;
            let beta = required(file.beta_ell, "beta_ell", ctl)?;
            EnergyParams::new(gamma, beta).map_err(|e| Error::Config(e.to_string()))
        };
        let controller = match file.controller.as_str() {
            "epd" if model.kind() == SystemKind::Integrator => {
                ControllerSpec::EpdIntegrator(epd_params("epd")?)
            }
            "epd" => ControllerSpec::EpdChained(epd_params("epd")?),
            "epd_generic" => ControllerSpec::EpdGeneric(epd_params("epd_generic")?),
            "pomet" => ControllerSpec::Pomet,
            "astolfi" => {
                let d = AstolfiParams::<f64>::default();
                ControllerSpec::Astolfi(
                    AstolfiParams::new(
                        file.k.unwrap_or(d.k),
                        file.p2.unwrap_or(d.p2),
                        file.p3.unwrap_or(d.p3),
                    )
                    .map_err(|e| Error::Config(e.to_string()))?,
                )
            }
            "zero" => ControllerSpec::Zero,
            other => {
                return Err(Error::Config(format!(
                "unknown controller `{other}` (expected epd, epd_generic, pomet, astolfi or zero)"
            )))
            }
        };

        let method = match file.method.as_str() {
            "rk4" => Stepper::Rk4,
            "rk45" => Stepper::Rk45 {
                abs_tol: file.abs_tol,
                rel_tol: file.rel_tol,
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown method `{other}` (expected rk4 or rk45)"
                )))
            }
        };

        let x0 =
            StateVector::new(file.x0.clone()).map_err(|e| Error::Config(format!("x0: {e}")))?;
        let plots = file
            .plots
            .iter()
            .map(|s| s.parse::<PlotKind>())
            .collect::<Result<Vec<_>>>()?;

        let cfg = Self {
            name: file.name,
            scenario: Scenario {
                model,
                controller,
                x0,
                solver: SolverSettings {
                    step: file.step,
                    t_final: file.t_final,
                    method,
                    record_every: file.record_every,
                    divergence_bound: file.divergence_bound,
                },
                noise: NoiseSettings {
                    enabled: file.noise,
                    amplitude: file.noise_amplitude,
                    sample_time: file.noise_sample_time,
                    seed: file.seed,
                },
            },
            outputs: OutputOptions {
                csv: file.csv,
                plots,
            },
            ball_delta: file.ball_delta,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_file_repr(&self) -> ConfigFile {
        let s = &self.scenario;
        let (controller, params, astolfi) = match s.controller {
            ControllerSpec::Zero => ("zero", None, None),
            ControllerSpec::EpdIntegrator(p) | ControllerSpec::EpdChained(p) => {
                ("epd", Some(p), None)
            }
            ControllerSpec::EpdGeneric(p) => ("epd_generic", Some(p), None),
            ControllerSpec::Pomet => ("pomet", None, None),
            ControllerSpec::Astolfi(a) => ("astolfi", None, Some(a)),
        };
        let (method, abs_tol, rel_tol) = match s.solver.method {
            Stepper::Rk4 => ("rk4", DEFAULT_TOL, DEFAULT_TOL),
            Stepper::Rk45 { abs_tol, rel_tol } => ("rk45", abs_tol, rel_tol),
        };
        let chained = s.model.kind() != SystemKind::Integrator;
        ConfigFile {
            name: self.name.clone(),
            system: if chained { "chained" } else { "integrator" }.into(),
            n: chained.then(|| s.model.n()),
            controller: controller.into(),
            gamma: params.map(|p| p.gamma()),
            beta_ell: params.map(|p| p.beta_ell()),
            k: astolfi.map(|a| a.k),
            p2: astolfi.map(|a| a.p2),
            p3: astolfi.map(|a| a.p3),
            x0: s.x0.to_vec(),
            step: s.solver.step,
            t_final: s.solver.t_final,
            method: method.into(),
            abs_tol,
            rel_tol,
            record_every: s.solver.record_every,
            divergence_bound: s.solver.divergence_bound,
            noise: s.noise.enabled,
            noise_amplitude: s.noise.amplitude,
            noise_sample_time: s.noise.sample_time,
            seed: s.noise.seed,
            ball_delta: self.ball_delta,
            csv: self.outputs.csv,
            plots: self
                .outputs
                .plots
                .iter()
                .map(|k| k.name().to_string())
                .collect(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_file_repr(file)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_file_repr()).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ConfigFile = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_file_repr(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }

    /// Checks the configuration and returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let s = &self.scenario;
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config(format!(
                "name `{}` must be non-empty and contain no path separators",
                self.name
            )));
        }
        s.validate()?;
        let mut warnings = Vec::new();
        if s.controller.is_epd() {
            let params = s.controller.energy_params();
            let x0: &[f64] = &s.x0;
            if s.model.n() == 3 {
                if inadmissible_indicator(x0, &s.model) == 0.0 {
                    warnings.push(format!(
                        "{}: x0 = {:?} lies in the inadmissible set ((x1² + x2²)·x3² = 0); \
                         the closed loop will not leave it",
                        self.name, x0
                    ));
                }
            } else if let Some(delta) = self.ball_delta {
                if !in_local_ball(x0, &params, &s.model.partition_default(), delta) {
                    warnings.push(format!(
                        "{}: x0 lies outside (H^s_ell)² + x3² <= {delta}; convergence is only local",
                        self.name
                    ));
                }
            }
        }
        Ok(warnings)
    }
}
