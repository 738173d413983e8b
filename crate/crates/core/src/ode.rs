//! Adaptive integration of scalar relaxation equations
//! `y'(t) = -r(t) (y - g(t))`.
//!
//! Fast modes relax on time scales many orders of magnitude shorter than the
//! ramp, so an explicit pair would be step-limited by stability. The solver
//! is the five-stage L-stable, stiffly accurate SDIRK method of order 4 with
//! an embedded order-3 solution (Hairer & Wanner, Solving ODEs II, Sec. IV.6).
//! Because the equation is linear each implicit stage is solved in closed form.

/// `gamma` on the diagonal of the Butcher matrix.
const DIAG: f64 = 0.25;
const C: [f64; 5] = [0.25, 0.75, 11.0 / 20.0, 0.5, 1.0];
const A: [[f64; 4]; 5] = [
    [0.0, 0.0, 0.0, 0.0],
    [0.5, 0.0, 0.0, 0.0],
    [17.0 / 50.0, -1.0 / 25.0, 0.0, 0.0],
    [371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.0],
    [25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0],
];
/// Weights of the order-4 solution (the last row, stiffly accurate).
const B: [f64; 5] = [25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25];
/// Weights of the embedded order-3 solution.
const B_HAT: [f64; 5] = [59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0];

const SAFETY: f64 = 0.9;
const MAX_GROWTH: f64 = 5.0;
const MAX_SHRINK: f64 = 0.2;

#[derive(Clone, Copy, Debug)]
pub struct StepFailure {
    pub t: f64,
    pub step: f64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

/// One SDIRK step from `(t, y)` with size `h`. Returns the new value and the
/// filtered local error estimate.
fn step<F: FnMut(f64) -> (f64, f64)>(coeffs: &mut F, t: f64, y: f64, h: f64) -> (f64, f64) {
    let mut k = [0.0; 5];
    let mut last_rate = 0.0;
    for i in 0..5 {
        let (rate, target) = coeffs(t + C[i] * h);
        let explicit: f64 = (0..i).map(|j| A[i][j] * k[j]).sum();
        k[i] = -rate * (y + h * explicit - target) / (1.0 + h * DIAG * rate);
        last_rate = rate;
    }
    let y_new = y + h * B.iter().zip(&k).map(|(b, k)| b * k).sum::<f64>();
    let raw: f64 = h * (0..5).map(|i| (B[i] - B_HAT[i]) * k[i]).sum::<f64>();
    // Shampine's filter keeps the estimate bounded for very stiff steps.
    let err = raw / (1.0 + h * DIAG * last_rate);
    (y_new, err.abs())
}

/// Integrates from `t = 0` to `t_end`, returning `y` at each of the
/// increasing `sample_times` (which must lie in `[0, t_end]`). `coeffs(t)`
/// returns `(r(t), g(t))`. The local error of each accepted step is at most
/// `tol`; a step below `1e-12 t_end` is reported as a failure.
pub fn integrate_relaxation<F: FnMut(f64) -> (f64, f64)>(
    mut coeffs: F,
    y0: f64,
    t_end: f64,
    sample_times: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, Stats), StepFailure> {
    let floor = 1e-12 * t_end;
    let mut out = Vec::with_capacity(sample_times.len());
    let mut stats = Stats::default();
    let mut t = 0.0;
    let mut y = y0;
    let mut h = 1e-3 * t_end;
    let mut err_prev = tol;
    for &target in sample_times {
        while t < target {
            let remaining = target - t;
            let clipped = h >= remaining;
            let h_try = if clipped { remaining } else { h };
            let (y_new, err) = step(&mut coeffs, t, y, h_try);
            if err <= tol {
                stats.accepted += 1;
                t = if clipped { target } else { t + h_try };
                y = y_new;
                let factor = if err == 0.0 {
                    MAX_GROWTH
                } else {
                    (SAFETY * (tol / err).powf(0.7 / 4.0) * (err_prev / tol).powf(0.4 / 4.0))
                        .clamp(MAX_SHRINK, MAX_GROWTH)
                };
                err_prev = err.max(1e-4 * tol);
                let proposal = h_try * factor;
                h = if clipped { proposal.max(h) } else { proposal };
            } else {
                stats.rejected += 1;
                let factor = (SAFETY * (tol / err).powf(0.25)).clamp(MAX_SHRINK, 1.0);
                h = h_try * factor;
                if h < floor {
                    return Err(StepFailure { t, step: h });
                }
            }
        }
        out.push(y);
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_is_consistent() {
        for i in 0..5 {
            let row: f64 = A[i].iter().sum::<f64>() + DIAG;
            assert!((row - C[i]).abs() < 1e-15);
        }
        assert!((B.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((B_HAT.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_coefficients_match_closed_form() {
        // y' = -2 (y - 1), y(0) = 0  =>  y = 1 - e^{-2t}
        let (out, _) = integrate_relaxation(|_| (2.0, 1.0), 0.0, 3.0, &[0.5, 1.0, 3.0], 1e-10).unwrap();
        for (t, y) in [0.5f64, 1.0, 3.0].iter().zip(out) {
            assert!((y - (1.0 - (-2.0 * t).exp())).abs() < 1e-8);
        }
    }

    #[test]
    fn fourth_order_convergence() {
        // y' = -(1 + t)(y - sin t): compare fixed-size steps.
        let run = |n: usize| {
            let h = 1.0 / n as f64;
            let mut coeffs = |t: f64| (1.0 + t, t.sin());
            let mut y = 0.3;
            for i in 0..n {
                y = step(&mut coeffs, i as f64 * h, y, h).0;
            }
            y
        };
        let reference = run(4096);
        let e1 = (run(16) - reference).abs();
        let e2 = (run(32) - reference).abs();
        let order = (e1 / e2).log2();
        assert!(order > 3.7, "observed order {order}");
    }

    #[test]
    fn very_stiff_problem_takes_few_steps() {
        let (out, stats) = integrate_relaxation(|t| (1e8, (-t).exp()), 1.0, 5.0, &[5.0], 1e-8).unwrap();
        assert!((out[0] - (-5f64).exp()).abs() < 1e-7);
        assert!(stats.accepted + stats.rejected < 400, "{stats:?}");
    }

    #[test]
    fn samples_include_the_start() {
        let (out, _) = integrate_relaxation(|_| (1.0, 0.0), 0.7, 1.0, &[0.0, 1.0], 1e-9).unwrap();
        assert_eq!(out[0], 0.7);
    }
}
