//! Adaptive Dormand–Prince 5(4) integrator for complex linear and nonlinear
//! systems. Used by the brute-force oracle, whose error profile must not
//! depend on matrix exponentials.

use crate::error::{Error, Result};
use crate::model::C64;

/// Tolerances and limits of [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 10_000_000,
        }
    }
}

// Dormand–Prince tableau
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

/// Integrates `y' = f(t, y)` from `times[0]` and records `y` at every entry
/// of `times` (strictly increasing). `f` writes the derivative into its
/// third argument.
pub fn integrate<F>(f: F, y0: &[C64], times: &[f64], tol: Tolerances) -> Result<Vec<Vec<C64>>>
where
    F: Fn(f64, &[C64], &mut [C64]),
{
    let n = y0.len();
    let mut out = Vec::with_capacity(times.len());
    if times.is_empty() {
        return Ok(out);
    }
    let mut t = times[0];
    let mut y = y0.to_vec();
    out.push(y.clone());

    let mut k: Vec<Vec<C64>> = vec![vec![C64::from(0.0); n]; 7];
    let mut stage = vec![C64::from(0.0); n];
    let mut y5 = vec![C64::from(0.0); n];
    let span = times[times.len() - 1] - times[0];
    let mut h = (span * 1e-3).max(1e-6);
    let mut steps = 0usize;
    f(t, &y, &mut k[0]);

    for &target in &times[1..] {
        while t < target {
            if steps >= tol.max_steps {
                return Err(Error::Integrator {
                    t,
                    step: h,
                    steps,
                    reason: "step budget exhausted".into(),
                });
            }
            let last = t + h >= target;
            let h_try = if last { target - t } else { h };

            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, &a) in A[s].iter().take(s).enumerate() {
                        if a != 0.0 {
                            acc += k[j][i] * (a * h_try);
                        }
                    }
                    stage[i] = acc;
                }
                let (_, rest) = k.split_at_mut(s);
                f(t + C[s] * h_try, &stage, &mut rest[0]);
            }

            let mut err_sq = 0.0;
            for i in 0..n {
                let mut hi = C64::from(0.0);
                let mut lo = C64::from(0.0);
                for s in 0..7 {
                    hi += k[s][i] * B5[s];
                    lo += k[s][i] * B4[s];
                }
                y5[i] = y[i] + hi * h_try;
                let e = ((hi - lo) * h_try).norm();
                let sc = tol.atol + tol.rtol * y[i].norm().max(y5[i].norm());
                err_sq += (e / sc) * (e / sc);
            }
            let err = (err_sq / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integrator {
                    t,
                    step: h_try,
                    steps,
                    reason: "non-finite error estimate".into(),
                });
            }
            steps += 1;

            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { target } else { t + h_try };
                std::mem::swap(&mut y, &mut y5);
                // FSAL: last stage was evaluated at the accepted point
                let (first, rest) = k.split_at_mut(6);
                first[0].copy_from_slice(&rest[0]);
                if !last {
                    h = h_try * factor;
                }
            } else {
                h = h_try * factor.min(1.0);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Integrator {
                        t,
                        step: h,
                        steps,
                        reason: "step size underflow".into(),
                    });
                }
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
    fn harmonic_oscillator_to_high_accuracy() {
        let omega = 7.0;
        let f = |_t: f64, y: &[C64], dy: &mut [C64]| {
            dy[0] = C64::new(0.0, -omega) * y[0] - 0.1 * y[0];
        };
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let tol = Tolerances {
            rtol: 1e-12,
            atol: 1e-14,
            ..Tolerances::default()
        };
        let ys = integrate(f, &[C64::from(1.0)], &times, tol).unwrap();
        for (t, y) in times.iter().zip(&ys) {
            let exact = (C64::new(-0.1, -omega) * t).exp();
            assert!((y[0] - exact).norm() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn reports_exhausted_budget() {
        let f = |_t: f64, y: &[C64], dy: &mut [C64]| dy[0] = y[0] * 1e3;
        let tol = Tolerances {
            max_steps: 10,
            ..Tolerances::default()
        };
        let err = integrate(f, &[C64::from(1.0)], &[0.0, 1.0], tol).unwrap_err();
        assert!(matches!(err, Error::Integrator { .. }));
    }
}
