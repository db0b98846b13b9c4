//! Experiment runner: presets, scenario files, batch runs, the critical
//! `x₄(0)` search and CSV/SVG export.

mod bisect;
mod config;
mod export;
mod plot;
mod presets;

pub use bisect::{
    classify_x4, find_critical_x4, find_critical_x4_with, Bisection, BisectionOptions,
};
pub use config::{ConfigFile, OutputOptions, ScenarioConfig};
pub use export::{csv_header, export_csv, read_csv, write_csv};
pub use plot::{export_plot, render_plot, PlotKind};
pub use presets::{chained, Preset, CHAINED_HORIZON, INTEGRATOR_HORIZON};

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sim::{integrate, Trajectory};
use crate::verify::{check_residual_set_membership, ResidualSet};

/// Command-line overrides applied on top of a preset or config file.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub t_final: Option<f64>,
    pub step: Option<f64>,
    /// Forces measurement noise on.
    pub noise: bool,
    pub no_plots: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        let s = &mut cfg.scenario;
        if let Some(seed) = self.seed {
            s.noise.seed = seed;
        }
        if let Some(t) = self.t_final {
            s.solver.t_final = t;
        }
        if let Some(h) = self.step {
            s.solver.step = h;
        }
        if self.noise {
            s.noise.enabled = true;
        }
        if self.no_plots {
            cfg.outputs.plots.clear();
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub name: String,
    pub trajectory: Trajectory<f64>,
    /// Limit-set class of the last state, for EPD runs.
    pub class: Option<ResidualSet>,
    pub files: Vec<PathBuf>,
}

impl RunOutput {
    /// One-line human-readable summary.
    pub fn summary(&self) -> String {
        let traj = &self.trajectory;
        let mut s = format!("{}: {}", self.name, traj.termination.label());
        if let (Some(&t), Some(x)) = (traj.times.last(), traj.last_state()) {
            let d = traj.diagnostics.last().expect("one snapshot per sample");
            s += &format!(
                " t={t:.3} |x|={:.3e} x3={:.3e} H_ell={:.6} V={:.3e}",
                crate::linalg::norm(x),
                x.at(3),
                d.h_ell,
                d.v
            );
        }
        if let Some(c) = self.class {
            s += &format!(" class={c}");
        }
        s
    }
}

/// Runs one scenario and writes its requested exports into `out_dir`.
pub fn run_config(cfg: &ScenarioConfig, out_dir: Option<&Path>) -> Result<RunOutput> {
    cfg.validate()?;
    let trajectory = integrate(&cfg.scenario)?;
    let class = cfg.scenario.controller.is_epd().then(|| {
        let params = cfg.scenario.controller.energy_params();
        trajectory.last_state().map_or(ResidualSet::Neither, |x| {
            check_residual_set_membership(x, &params)
        })
    });
    let mut files = Vec::new();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        if cfg.outputs.csv {
            let path = dir.join(format!("{}.csv", cfg.name));
            export_csv(&trajectory, &path)?;
            files.push(path);
        }
        for kind in &cfg.outputs.plots {
            let path = dir.join(format!("{}_{}.svg", cfg.name, kind.name()));
            export_plot(&trajectory, *kind, &cfg.name, &path)?;
            files.push(path);
        }
    }
    Ok(RunOutput {
        name: cfg.name.clone(),
        trajectory,
        class,
        files,
    })
}

/// Runs independent scenarios in parallel; results keep the input order.
pub fn run_batch(cfgs: &[ScenarioConfig], out_dir: Option<&Path>) -> Result<Vec<RunOutput>> {
    cfgs.par_iter().map(|c| run_config(c, out_dir)).collect()
}

pub fn run_preset(
    preset: Preset,
    overrides: &Overrides,
    out_dir: Option<&Path>,
) -> Result<Vec<RunOutput>> {
    let cfgs: Vec<ScenarioConfig> = preset
        .configs()
        .into_iter()
        .map(|mut c| {
            overrides.apply(&mut c);
            c
        })
        .collect();
    run_batch(&cfgs, out_dir)
}
