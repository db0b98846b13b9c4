//! Minimal self-contained SVG line plots.
//!
//! Output depends only on the trajectory values: coordinates are printed
//! with fixed precision and no timestamps or random ids are emitted.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sim::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlotKind {
    StatesVsTime,
    EnergyVsTime,
    /// `(x₁, x₂, x₃)` under a fixed oblique projection.
    Phase3dProjection,
}

impl PlotKind {
    pub const ALL: [PlotKind; 3] = [
        PlotKind::StatesVsTime,
        PlotKind::EnergyVsTime,
        PlotKind::Phase3dProjection,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::StatesVsTime => "states-vs-time",
            Self::EnergyVsTime => "energy-vs-time",
            Self::Phase3dProjection => "phase3d-projection",
        }
    }
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownPlotKind(s.to_string()))
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const MAX_POINTS: usize = 2000;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

/// Range padded so constant data still gets a visible band.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn decimate(points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points;
    }
    let stride = points.len().div_ceil(MAX_POINTS);
    let last = *points.last().unwrap();
    let mut out: Vec<_> = points.into_iter().step_by(stride).collect();
    if out.last() != Some(&last) {
        out.push(last);
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn render(title: &str, x_label: &str, series: Vec<Series>, show_axes_ticks: bool) -> String {
    let series: Vec<Series> = series
        .into_iter()
        .map(|s| Series {
            label: s.label,
            points: decimate(s.points),
        })
        .collect();
    let (x_lo, x_hi) = padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y_lo, y_hi) = padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>"##
    );
    if show_axes_ticks {
        for i in 0..=5 {
            let fx = x_lo + (x_hi - x_lo) * i as f64 / 5.0;
            let fy = y_lo + (y_hi - y_lo) * i as f64 / 5.0;
            let (px, py) = (sx(fx), sy(fy));
            let _ = writeln!(
                svg,
                r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#333"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                TOP + plot_h,
                TOP + plot_h + 5.0,
                TOP + plot_h + 18.0,
                tick_label(fx)
            );
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                LEFT - 5.0,
                LEFT - 8.0,
                py + 4.0,
                tick_label(fy)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(x_label)
        );
    }

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        let mut pen_down = false;
        for &(x, y) in &s.points {
            if !(x.is_finite() && y.is_finite()) {
                pen_down = false;
                continue;
            }
            let cmd = if pen_down { 'L' } else { 'M' };
            let _ = write!(path, "{cmd}{:.2},{:.2} ", sx(x), sy(y));
            pen_down = true;
        }
        let _ = writeln!(
            svg,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.trim_end()
        );
        let ly = TOP + 15.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick_label(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    } else {
        format!("{v:.2e}")
    }
}

/// Renders `traj` as an SVG document.
pub fn render_plot(traj: &Trajectory<f64>, kind: PlotKind, title: &str) -> String {
    let times = &traj.times;
    match kind {
        PlotKind::StatesVsTime => {
            let series = (1..=traj.n())
                .map(|i| Series {
                    label: format!("x{i}"),
                    points: times.iter().copied().zip(traj.component(i)).collect(),
                })
                .collect();
            render(&format!("{title}: states"), "t [s]", series, true)
        }
        PlotKind::EnergyVsTime => {
            let pick = |label: &str, f: fn(&crate::energy::EnergySnapshot<f64>) -> f64| Series {
                label: label.into(),
                points: times
                    .iter()
                    .copied()
                    .zip(traj.diagnostics.iter().map(f))
                    .collect(),
            };
            let series = vec![
                pick("H_ell", |d| d.h_ell),
                pick("H_zero", |d| d.h_zero),
                pick("V", |d| d.v),
            ];
            render(&format!("{title}: energy"), "t [s]", series, true)
        }
        PlotKind::Phase3dProjection => {
            // oblique projection: x₁ to the right, x₂ receding at 30°, x₃ up
            let (c, s) = (0.5 * 3f64.sqrt() / 2.0, 0.25);
            let project = |x: &[f64]| (x[0] + c * x[1], x[2] + s * x[1]);
            let points: Vec<(f64, f64)> = traj
                .states
                .iter()
                .filter(|x| x.len() >= 3)
                .map(|x| project(x))
                .collect();
            let mut series = vec![Series {
                label: "(x1, x2, x3)".into(),
                points,
            }];
            if traj.states.first().is_some_and(|x| x.len() >= 3) {
                let extent = traj
                    .states
                    .iter()
                    .flat_map(|x| x[..3].iter().map(|v| v.abs()))
                    .filter(|v| v.is_finite())
                    .fold(0.0f64, f64::max)
                    .max(1e-9);
                let axes = [
                    ("x1 axis", [1.0, 0.0, 0.0]),
                    ("x2 axis", [0.0, 1.0, 0.0]),
                    ("x3 axis", [0.0, 0.0, 1.0]),
                ];
                for (label, axis) in axes {
                    let tip: Vec<f64> = axis.iter().map(|a| a * extent).collect();
                    series.push(Series {
                        label: label.into(),
                        points: vec![project(&[0.0, 0.0, 0.0]), project(&tip)],
                    });
                }
            }
            render(&format!("{title}: phase (x1, x2, x3)"), "", series, false)
        }
    }
}

pub fn export_plot(traj: &Trajectory<f64>, kind: PlotKind, title: &str, path: &Path) -> Result<()> {
    std::fs::write(path, render_plot(traj, kind, title)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergySnapshot;
    use crate::sim::Termination;
    use crate::systems::StateVector;

    fn constant(n: usize, len: usize) -> Trajectory<f64> {
        let x = StateVector::from_f64(&vec![1.5; n]).unwrap();
        let snap = EnergySnapshot {
            h_ell: 1.0,
            h_zero: 0.5,
            h_total: 1.5,
            h_shift: 0.5,
            v: 0.625,
            q: 0.0,
        };
        Trajectory {
            times: (0..len).map(|i| i as f64 * 0.1).collect(),
            states: vec![x; len],
            inputs: vec![[0.0, 0.0]; len],
            diagnostics: vec![snap; len],
            termination: Termination::Completed,
        }
    }

    fn path_ys(svg: &str) -> Vec<Vec<String>> {
        svg.lines()
            .filter(|l| l.starts_with("<path"))
            .map(|l| {
                let d = l.split('"').nth(1).unwrap();
                d.split(' ')
                    .map(|p| p[1..].split(',').nth(1).unwrap().to_string())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn constant_trajectory_gives_horizontal_lines() {
        let svg = render_plot(&constant(3, 50), PlotKind::StatesVsTime, "c");
        let paths = path_ys(&svg);
        assert_eq!(paths.len(), 3);
        for ys in paths {
            assert!(ys.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn deterministic_and_well_formed() {
        let t = constant(4, 5000);
        for kind in PlotKind::ALL {
            let a = render_plot(&t, kind, "d");
            assert_eq!(a, render_plot(&t, kind, "d"));
            assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
            assert!(!a.contains("NaN") && !a.contains("inf"));
        }
    }

    #[test]
    fn empty_trajectory_renders() {
        let svg = render_plot(&Trajectory::empty(), PlotKind::EnergyVsTime, "e");
        assert!(svg.contains("</svg>"));
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in PlotKind::ALL {
            assert_eq!(kind.name().parse::<PlotKind>().unwrap(), kind);
        }
        assert!(matches!(
            "bode".parse::<PlotKind>(),
            Err(Error::UnknownPlotKind(_))
        ));
    }
}
