use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use epd_core::energy::EnergyParams;
use epd_core::harness::{
    find_critical_x4_with, run_batch, BisectionOptions, Overrides, Preset, ScenarioConfig,
    CHAINED_HORIZON,
};
use epd_core::sim::DEFAULT_STEP;
use epd_core::verify::run_verification;
use epd_core::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "epd",
    version,
    about = "Energy pumping-and-damping control experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a preset (E1, E2, E2-pomet, E3, E3-astolfi, E4a..E4d) or a scenario file.
    Run {
        target: String,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Enable measurement noise.
        #[arg(long)]
        noise: bool,
        #[arg(long)]
        no_plots: bool,
    },
    /// Check the structural identities on random states (all n in 3..=6 by default).
    Verify {
        n: Option<usize>,
        /// With --beta-ell, replaces the default parameter sets (0.5, 0.5) and (1, 0).
        #[arg(long, requires = "beta_ell")]
        gamma: Option<f64>,
        #[arg(long, requires = "gamma")]
        beta_ell: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Bisect for the critical x4(0) of the order-4 chained system.
    #[command(name = "bisect-x4")]
    BisectX4 {
        gamma: f64,
        beta_ell: f64,
        lo: f64,
        hi: f64,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        /// First three entries of x(0).
        #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.5, 1.0, 0.1])]
        base: Vec<f64>,
        /// Simulated horizon before classification.
        #[arg(long, default_value_t = CHAINED_HORIZON)]
        t_final: f64,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
    },
    /// Write a preset's scenario files (one per run) into --out-dir.
    DumpPreset {
        name: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn fail(code: u8, err: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(code)
}

fn load_target(target: &str) -> Result<Vec<ScenarioConfig>, Error> {
    match target.parse::<Preset>() {
        Ok(p) => Ok(p.configs()),
        Err(_) if Path::new(target).exists() => Ok(vec![ScenarioConfig::load(Path::new(target))?]),
        Err(e) => Err(Error::Config(format!(
            "{e}; `{target}` is neither a preset nor an existing scenario file"
        ))),
    }
}

fn run(target: &str, out_dir: &Path, overrides: Overrides) -> ExitCode {
    let mut cfgs = match load_target(target) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    for cfg in &mut cfgs {
        overrides.apply(cfg);
        match cfg.validate() {
            Ok(warnings) => warnings.iter().for_each(|w| eprintln!("warning: {w}")),
            Err(e) => return fail(EXIT_CONFIG, e),
        }
    }
    let outputs = match run_batch(&cfgs, Some(out_dir)) {
        Ok(o) => o,
        Err(e @ Error::Io { .. }) => return fail(EXIT_RUNTIME, e),
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let mut code = ExitCode::SUCCESS;
    for out in &outputs {
        println!("{}", out.summary());
        for f in &out.files {
            println!("  wrote {}", f.display());
        }
        if !out.trajectory.termination.is_completed() {
            code = ExitCode::from(EXIT_RUNTIME);
        }
    }
    code
}

fn verify(
    n: Option<usize>,
    params: Option<(f64, f64)>,
    samples: usize,
    seed: u64,
    out_dir: &Path,
) -> ExitCode {
    let dims: Vec<usize> = n.map_or_else(|| (3..=6).collect(), |n| vec![n]);
    let sets: Vec<(f64, f64)> = params.map_or_else(|| vec![(0.5, 0.5), (1.0, 0.0)], |p| vec![p]);
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return fail(
            EXIT_CONFIG,
            Error::Io {
                path: out_dir.into(),
                source: e,
            },
        );
    }
    let mut all_pass = true;
    for &(gamma, beta) in &sets {
        let params = match EnergyParams::new(gamma, beta) {
            Ok(p) => p,
            Err(e) => return fail(EXIT_CONFIG, e),
        };
        for &n in &dims {
            let report = match run_verification(n, params, samples, seed) {
                Ok(r) => r,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            let path = out_dir.join(format!("verify_n{n}_gamma{gamma}_beta{beta}.txt"));
            if let Err(e) = report.write(&path) {
                return fail(EXIT_CONFIG, e);
            }
            println!(
                "n={n} gamma={gamma} beta_ell={beta}: {} (matching {:.2e}, ph {:.2e}, skew {:.2e}, epd_min {:.2e}, generic {:.2e}) -> {}",
                if report.pass { "pass" } else { "FAIL" },
                report.max_matching_residual,
                report.max_ph_equiv_residual,
                report.max_skew_residual,
                report.min_epd_quadratic,
                report.max_generic_law_residual,
                path.display()
            );
            all_pass &= report.pass;
        }
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    }
}

#[allow(clippy::too_many_arguments)]
fn bisect(
    gamma: f64,
    beta: f64,
    lo: f64,
    hi: f64,
    tol: f64,
    base: &[f64],
    t_final: f64,
    step: f64,
) -> ExitCode {
    let opts = BisectionOptions {
        horizon: t_final,
        step,
        ..BisectionOptions::default()
    };
    if !(t_final > 0.0 && step > 0.0 && step <= t_final) {
        return fail(EXIT_CONFIG, "require 0 < step <= t-final");
    }
    let base = [base[0], base[1], base[2]];
    match find_critical_x4_with(gamma, beta, base, lo, hi, tol, &opts) {
        Ok(b) => {
            for (x4, class) in &b.evaluations {
                println!("x4(0)={x4:.6} -> {class}");
            }
            println!(
                "critical x4(0) = {:.6} (bracket [{:.6}, {:.6}], {} / {})",
                b.critical, b.lo, b.hi, b.lo_class, b.hi_class
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_CONFIG, e),
    }
}

fn dump(name: &str, out_dir: &Path) -> ExitCode {
    let preset = match name.parse::<Preset>() {
        Ok(p) => p,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return fail(
            EXIT_CONFIG,
            Error::Io {
                path: out_dir.into(),
                source: e,
            },
        );
    }
    for cfg in preset.configs() {
        let path = out_dir.join(format!("{}.toml", cfg.name));
        if let Err(e) = cfg.save(&path) {
            return fail(EXIT_CONFIG, e);
        }
        println!("{}", path.display());
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            target,
            out_dir,
            seed,
            t_final,
            step,
            noise,
            no_plots,
        } => run(
            &target,
            &out_dir,
            Overrides {
                seed,
                t_final,
                step,
                noise,
                no_plots,
            },
        ),
        Command::Verify {
            n,
            gamma,
            beta_ell,
            samples,
            seed,
            out_dir,
        } => verify(n, gamma.zip(beta_ell), samples, seed, &out_dir),
        Command::BisectX4 {
            gamma,
            beta_ell,
            lo,
            hi,
            tol,
            base,
            t_final,
            step,
        } => bisect(gamma, beta_ell, lo, hi, tol, &base, t_final, step),
        Command::DumpPreset { name, out_dir } => dump(&name, &out_dir),
    }
}
