//! Adaptive Dormand-Prince 5(4) integrator for small real systems.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Smallest step allowed relative to the magnitude of t (plus one).
    pub min_step_fraction: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            min_step_fraction: 1e-14,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64, last: Vec<f64> },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64, last: Vec<f64> },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64, last: Vec<f64> },
    #[error("output times must be non-decreasing and start at or after t0")]
    BadOutputGrid,
}

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
/// Fifth-order weights (first-same-as-last: equal to the last row of A).
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

/// Integrates `dy/dt = f(t, y)` from `(t0, y0)` and returns the state at each
/// time in `t_out`. Steps are clipped to land exactly on output times.
pub fn solve<F>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t_out: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<Vec<f64>>, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if t_out.first().is_some_and(|&t| t < t0) || t_out.windows(2).any(|w| w[1] < w[0]) {
        return Err(OdeError::BadOutputGrid);
    }
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    f(t, &y, &mut k[0]);

    let span = t_out.last().map_or(0.0, |&t1| t1 - t0);
    let mut h = if span > 0.0 { span * 1e-3 } else { 0.0 };
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(t_out.len());

    for &target in t_out {
        while t < target {
            if steps >= opts.max_steps {
                return Err(OdeError::TooManySteps { t, last: y });
            }
            let remaining = target - t;
            let clipped = h >= remaining;
            let h_try = if clipped { remaining } else { h };
            let h_min = opts.min_step_fraction * (1.0 + t.abs());
            if h_try < h_min && !clipped {
                return Err(OdeError::StepUnderflow {
                    t,
                    h: h_try,
                    last: y,
                });
            }

            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += h_try * A[s][j] * kj[i];
                    }
                    stage[i] = acc;
                }
                f(t + C[s] * h_try, &stage, &mut k[s]);
            }
            // The seventh stage was evaluated at the fifth-order solution.
            y_new.copy_from_slice(&stage);

            let mut err_norm = 0.0f64;
            for i in 0..n {
                let mut e = 0.0;
                for s in 0..7 {
                    e += (B5[s] - B4[s]) * k[s][i];
                }
                let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
                err_norm = err_norm.max((h_try * e).abs() / scale);
            }
            if !err_norm.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if h_try <= h_min {
                    return Err(OdeError::NonFinite { t, last: y });
                }
                h = 0.25 * h_try;
                continue;
            }
            steps += 1;
            if err_norm <= 1.0 {
                t = if clipped { target } else { t + h_try };
                std::mem::swap(&mut y, &mut y_new);
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                let grow = if err_norm == 0.0 {
                    5.0
                } else {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                // A clipped step says nothing about the natural step size.
                if !clipped || h_try * grow > h {
                    h = h_try * grow;
                }
            } else {
                h = h_try * (0.9 * err_norm.powf(-0.2)).max(0.2);
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let ts: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
        let ys = solve(
            |_, y, d| d[0] = -y[0],
            0.0,
            &[1.0],
            &ts,
            &OdeOptions::default(),
        )
        .unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] / (-t).exp() - 1.0).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let ts = [0.0, 10.0, 50.0];
        let ys = solve(
            |_, y, d| {
                d[0] = y[1];
                d[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            &ts,
            &OdeOptions::default(),
        )
        .unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-9);
            assert!((y[0] * y[0] + y[1] * y[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn output_at_start_is_identity() {
        let ys = solve(
            |_, y, d| d[0] = y[0],
            0.0,
            &[2.5],
            &[0.0],
            &OdeOptions::default(),
        )
        .unwrap();
        assert_eq!(ys[0], vec![2.5]);
    }

    #[test]
    fn blow_up_reports_last_state() {
        // y' = y^2 from y(0) = 1 diverges at t = 1.
        let r = solve(
            |_, y, d| d[0] = y[0] * y[0],
            0.0,
            &[1.0],
            &[2.0],
            &OdeOptions::default(),
        );
        match r {
            Err(OdeError::StepUnderflow { t, last, .. }) | Err(OdeError::NonFinite { t, last }) => {
                assert!(t < 1.0 && last[0] > 1e3)
            }
            other => panic!("expected a failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_decreasing_output_times() {
        let r = solve(
            |_, _, d| d[0] = 0.0,
            0.0,
            &[0.0],
            &[1.0, 0.5],
            &OdeOptions::default(),
        );
        assert_eq!(r, Err(OdeError::BadOutputGrid));
    }
}
