//! Explicit Runge–Kutta steppers and a recording driver.

use crate::scalar::Scalar;

/// Classical fourth-order Runge–Kutta step of `ẋ = f(t, x)`.
///
/// Errors raised by `f` at any stage abort the step and are returned as is.
pub fn rk4_step<T, E, F>(mut f: F, x: &[T], t: T, h: T) -> Result<Vec<T>, E>
where
    T: Scalar,
    F: FnMut(T, &[T]) -> Result<Vec<T>, E>,
{
    let half = h * T::half();
    let k1 = f(t, x)?;
    let k2 = f(t + half, &axpy(x, half, &k1))?;
    let k3 = f(t + half, &axpy(x, half, &k2))?;
    let k4 = f(t + h, &axpy(x, h, &k3))?;
    let sixth = h / T::lit(6.0);
    Ok(x.iter()
        .enumerate()
        .map(|(i, &xi)| xi + sixth * (k1[i] + T::two() * (k2[i] + k3[i]) + k4[i]))
        .collect())
}

fn axpy<T: Scalar>(x: &[T], a: T, y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&xi, &yi)| xi + a * yi).collect()
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step. Returns the fifth-order solution and the
/// embedded error estimate.
pub fn dopri5_step<T, E, F>(mut f: F, x: &[T], t: T, h: T) -> Result<(Vec<T>, Vec<T>), E>
where
    T: Scalar,
    F: FnMut(T, &[T]) -> Result<Vec<T>, E>,
{
    let n = x.len();
    let mut k: Vec<Vec<T>> = Vec::with_capacity(7);
    for stage in 0..7 {
        let mut xs = x.to_vec();
        for (j, kj) in k.iter().enumerate() {
            let a = T::lit(A[stage][j]) * h;
            if a != T::zero() {
                for i in 0..n {
                    xs[i] += a * kj[i];
                }
            }
        }
        k.push(f(t + T::lit(C[stage]) * h, &xs)?);
    }
    let mut high = x.to_vec();
    let mut err = vec![T::zero(); n];
    for (s, ks) in k.iter().enumerate() {
        let b5 = T::lit(B5[s]) * h;
        let db = T::lit(B5[s] - B4[s]) * h;
        for i in 0..n {
            high[i] += b5 * ks[i];
            err[i] += db * ks[i];
        }
    }
    Ok((high, err))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stepper<T> {
    /// Fixed step `h`.
    Rk4,
    /// Adaptive Dormand–Prince with mixed absolute/relative error control.
    Rk45 { abs_tol: T, rel_tol: T },
}

/// Why the driver stopped before the horizon.
#[derive(Debug)]
pub enum DriveStop<T, E> {
    /// Callback or field error.
    Failed { t: T, x: Vec<T>, error: E },
    /// State became non-finite or exceeded the bound.
    Diverged { t: T, x: Vec<T>, norm: T },
}

/// Integrates `ẋ = f(t, x)` from `t = 0` to `t_final`, invoking `record`
/// at `t = k·step·record_every` for every integer `k` with that time within
/// the horizon.
///
/// Fixed-step runs take `⌈t_final/step⌉` steps of size `step` (the last one
/// shortened if needed). Adaptive runs start from `step` and are clipped to
/// land on every record time.
#[allow(clippy::too_many_arguments)]
pub fn drive<T, E, F, R>(
    mut f: F,
    x0: &[T],
    stepper: Stepper<T>,
    step: T,
    t_final: T,
    record_every: usize,
    divergence_bound: T,
    mut record: R,
) -> Result<Vec<T>, DriveStop<T, E>>
where
    T: Scalar,
    F: FnMut(T, &[T]) -> Result<Vec<T>, E>,
    R: FnMut(T, &[T]) -> Result<(), E>,
{
    let diverged = |x: &[T]| {
        let norm = crate::linalg::norm(x);
        if !(norm.is_finite() && norm <= divergence_bound) {
            Some(norm)
        } else {
            None
        }
    };
    let mut x = x0.to_vec();
    record(T::zero(), &x).map_err(|error| DriveStop::Failed {
        t: T::zero(),
        x: x.clone(),
        error,
    })?;

    match stepper {
        Stepper::Rk4 => {
            let ratio = (t_final / step).as_f64();
            let n_steps = (ratio - 1e-9).ceil().max(0.0) as usize;
            for k in 0..n_steps {
                let t = T::lit(k as f64) * step;
                let h = if k + 1 == n_steps { t_final - t } else { step };
                let next = rk4_step(&mut f, &x, t, h).map_err(|error| DriveStop::Failed {
                    t,
                    x: x.clone(),
                    error,
                })?;
                let t_next = T::lit((k + 1) as f64) * step;
                if let Some(norm) = diverged(&next) {
                    return Err(DriveStop::Diverged {
                        t: t_next,
                        x: next,
                        norm,
                    });
                }
                x = next;
                if (k + 1) % record_every == 0 && t_next <= t_final {
                    record(t_next, &x).map_err(|error| DriveStop::Failed {
                        t: t_next,
                        x: x.clone(),
                        error,
                    })?;
                }
            }
        }
        Stepper::Rk45 { abs_tol, rel_tol } => {
            let interval = step * T::lit(record_every as f64);
            let n_records = ((t_final / interval).as_f64() + 1e-9).floor() as usize;
            let mut t = T::zero();
            let mut h = step;
            let mut targets: Vec<(T, bool)> = (1..=n_records)
                .map(|r| (T::lit(r as f64) * interval, true))
                .collect();
            if targets.last().is_none_or(|&(tr, _)| tr < t_final) {
                targets.push((t_final, false));
            }
            for (target, is_record) in targets {
                while t < target {
                    let remaining = target - t;
                    let last = h >= remaining;
                    let h_try = if last { remaining } else { h };
                    let (next, err) =
                        dopri5_step(&mut f, &x, t, h_try).map_err(|error| DriveStop::Failed {
                            t,
                            x: x.clone(),
                            error,
                        })?;
                    let n = T::lit(x.len() as f64);
                    let err_norm = (x
                        .iter()
                        .zip(&next)
                        .zip(&err)
                        .map(|((&a, &b), &e)| {
                            let sc = abs_tol + rel_tol * a.abs().max(b.abs());
                            (e / sc) * (e / sc)
                        })
                        .sum::<T>()
                        / n)
                        .sqrt();
                    if !err_norm.is_finite() {
                        if let Some(norm) = diverged(&next) {
                            return Err(DriveStop::Diverged {
                                t: t + h_try,
                                x: next,
                                norm,
                            });
                        }
                    }
                    let factor = if err_norm == T::zero() {
                        T::lit(5.0)
                    } else {
                        (T::lit(0.9) * err_norm.powf(T::lit(-0.2)))
                            .max(T::lit(0.2))
                            .min(T::lit(5.0))
                    };
                    if err_norm <= T::one() {
                        if let Some(norm) = diverged(&next) {
                            return Err(DriveStop::Diverged {
                                t: t + h_try,
                                x: next,
                                norm,
                            });
                        }
                        t = if last { target } else { t + h_try };
                        x = next;
                        if !last {
                            h = h_try * factor;
                        }
                    } else {
                        h = h_try * factor;
                        if h <= T::epsilon() * t.abs().max(T::one()) * T::lit(16.0) {
                            let norm = crate::linalg::norm(&x);
                            return Err(DriveStop::Diverged { t, x, norm });
                        }
                    }
                }
                if is_record {
                    record(target, &x).map_err(|error| DriveStop::Failed {
                        t: target,
                        x: x.clone(),
                        error,
                    })?;
                }
            }
        }
    }
    Ok(x)
}
