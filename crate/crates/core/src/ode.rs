//! Adaptive Dormand–Prince 5(4) integrator for small first-order systems.

use crate::{Error, Result};

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
/// Difference between the 5th and embedded 4th order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

pub(crate) struct Dopri5<F, const N: usize> {
    f: F,
    rtol: f64,
    h: f64,
    pub stats: StepStats,
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(f: F, rtol: f64, initial_step: f64) -> Self {
        Self {
            f,
            rtol,
            h: initial_step.abs(),
            stats: StepStats::default(),
        }
    }

    /// Integrate from `x0` to `x1` (either direction), landing exactly on `x1`.
    /// The error of each step is measured against `rtol · max|y|`.
    pub fn advance(&mut self, x0: f64, y0: [f64; N], x1: f64) -> Result<[f64; N]> {
        let dir = if x1 >= x0 { 1.0 } else { -1.0 };
        let mut x = x0;
        let mut y = y0;
        let mut k1 = (self.f)(x, &y);
        let mut steps = 0usize;
        while (x1 - x) * dir > 0.0 {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Integration(format!(
                    "step budget exhausted at x = {x} (accepted {}, rejected {})",
                    self.stats.accepted, self.stats.rejected
                )));
            }
            let remaining = (x1 - x).abs();
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h } * dir;
            if h.abs() <= 1e-14 * x.abs().max(1.0) && !last {
                return Err(Error::Integration(format!(
                    "step size underflow ({h:e}) at x = {x} (accepted {}, rejected {})",
                    self.stats.accepted, self.stats.rejected
                )));
            }

            let mut k = [[0.0; N]; 7];
            k[0] = k1;
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        for i in 0..N {
                            ys[i] += h * a * kj[i];
                        }
                    }
                }
                k[s] = (self.f)(x + C[s] * h, &ys);
            }
            let mut ynew = y;
            for (j, kj) in k.iter().enumerate().take(6) {
                for i in 0..N {
                    ynew[i] += h * A[6][j] * kj[i];
                }
            }
            let scale = y
                .iter()
                .chain(ynew.iter())
                .fold(0.0f64, |m, v| m.max(v.abs()))
                * self.rtol;
            let mut err = 0.0f64;
            for i in 0..N {
                let e: f64 = (0..7).map(|j| E[j] * k[j][i]).sum::<f64>() * h;
                err = err.max(e.abs() / scale);
            }
            if !err.is_finite() {
                return Err(Error::Integration(format!("non-finite state near x = {x}")));
            }
            if err <= 1.0 {
                x = if last { x1 } else { x + h };
                y = ynew;
                // FSAL: the 7th stage is f at the new point.
                k1 = k[6];
                self.stats.accepted += 1;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    self.h = h.abs() * fac;
                } else {
                    self.h = self.h.max(h.abs() * fac.min(1.0));
                }
            } else {
                self.stats.rejected += 1;
                self.h = h.abs() * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
        }
        Ok(y)
    }
}
