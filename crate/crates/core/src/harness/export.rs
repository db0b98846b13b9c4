//! Trajectory CSV files.
//!
//! Columns are `t,x1,…,xn,u1,u2,H_ell,H_shift,H_zero,V,Q,termination`.
//! Numbers use 17 significant digits so parsing them back gives the
//! recorded `f64` values exactly. The `termination` column is empty except
//! on the last row, which carries the run's termination label.

use std::path::Path;

use crate::energy::EnergySnapshot;
use crate::error::{Error, Result};
use crate::sim::{Termination, Trajectory};
use crate::systems::StateVector;

pub fn csv_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("x{i}")));
    h.extend(
        [
            "u1",
            "u2",
            "H_ell",
            "H_shift",
            "H_zero",
            "V",
            "Q",
            "termination",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    h
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `traj` to any writer in the CSV layout above.
pub fn write_csv<W: std::io::Write>(traj: &Trajectory<f64>, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(traj.n()))?;
    let last = traj.len().saturating_sub(1);
    for i in 0..traj.len() {
        let d = &traj.diagnostics[i];
        let mut row = vec![num(traj.times[i])];
        row.extend(traj.states[i].iter().map(|&v| num(v)));
        row.extend(traj.inputs[i].iter().map(|&v| num(v)));
        row.extend([d.h_ell, d.h_shift, d.h_zero, d.v, d.q].map(num));
        row.push(if i == last {
            traj.termination.label().to_string()
        } else {
            String::new()
        });
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_csv(traj: &Trajectory<f64>, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(traj, std::io::BufWriter::new(file)).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    })
}

/// Parses a file written by [`export_csv`].
///
/// `H_total` is not stored and is rebuilt as `H_ell + H_zero`. The
/// termination time and norm are not stored either; a non-completed run
/// comes back with the time of its last row and a NaN norm.
pub fn read_csv(path: &Path) -> Result<Trajectory<f64>> {
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| parse_err(e.to_string()))?;
    let header = r.headers().map_err(|e| parse_err(e.to_string()))?.clone();
    let cols = header.len();
    if cols < 9 {
        return Err(parse_err(format!(
            "expected at least 9 columns, found {cols}"
        )));
    }
    let n = cols - 9;
    let expected = csv_header(n);
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(parse_err(format!(
            "header mismatch: expected `{}`",
            expected.join(",")
        )));
    }
    let mut traj = Trajectory::empty();
    let mut label = String::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(e.to_string()))?;
        let v = (0..cols - 1)
            .map(|j| {
                rec[j]
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("row {}, column {}: {e}", line + 1, &header[j])))
            })
            .collect::<Result<Vec<_>>>()?;
        traj.times.push(v[0]);
        traj.states.push(StateVector::new(v[1..=n].to_vec())?);
        traj.inputs.push([v[n + 1], v[n + 2]]);
        let (h_ell, h_shift, h_zero, v_, q) = (v[n + 3], v[n + 4], v[n + 5], v[n + 6], v[n + 7]);
        traj.diagnostics.push(EnergySnapshot {
            h_ell,
            h_zero,
            h_total: h_ell + h_zero,
            h_shift,
            v: v_,
            q,
        });
        label = rec[cols - 1].to_string();
    }
    let t_last = traj.times.last().copied().unwrap_or(0.0);
    traj.termination = match label.as_str() {
        "" | "completed" => Termination::Completed,
        "diverged" => Termination::Diverged {
            t: t_last,
            norm: f64::NAN,
        },
        "controller_singularity" => Termination::ControllerSingularity { t: t_last },
        other => return Err(parse_err(format!("unknown termination label `{other}`"))),
    };
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::ControllerSpec;
    use crate::energy::EnergyParams;
    use crate::sim::{integrate, NoiseSettings, Scenario, SolverSettings};
    use crate::systems::SystemModel;

    fn short_run() -> Trajectory<f64> {
        let scenario = Scenario {
            model: SystemModel::integrator(),
            controller: ControllerSpec::EpdIntegrator(EnergyParams::new(5.0, 0.5).unwrap()),
            x0: StateVector::from_f64(&[3.0, 2.0, 2.0]).unwrap(),
            solver: SolverSettings::rk4(0.5).with_record_every(10),
            noise: NoiseSettings::default(),
        };
        integrate(&scenario).unwrap()
    }

    #[test]
    fn header_layout() {
        assert_eq!(
            csv_header(3).join(","),
            "t,x1,x2,x3,u1,u2,H_ell,H_shift,H_zero,V,Q,termination"
        );
    }

    #[test]
    fn empty_trajectory_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&Trajectory::empty(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn round_trip_is_exact() {
        let traj = short_run();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.csv");
        export_csv(&traj, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back.times, traj.times);
        assert_eq!(back.states, traj.states);
        assert_eq!(back.inputs, traj.inputs);
        for (a, b) in back.diagnostics.iter().zip(&traj.diagnostics) {
            assert_eq!(
                (a.h_ell, a.h_shift, a.h_zero, a.v, a.q),
                (b.h_ell, b.h_shift, b.h_zero, b.v, b.q)
            );
        }
        assert_eq!(back.termination, Termination::Completed);

        let text = std::fs::read_to_string(&path).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 1 + 51);
        assert!(rows[1].ends_with(','));
        assert!(rows.last().unwrap().ends_with(",completed"));
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err =
            export_csv(&Trajectory::empty(), Path::new("/nonexistent/dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
    }
}
