//! Adaptive Dormand–Prince 5(4) integrator for complex state vectors.

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum IntegrationError {
    #[error("step size underflow at t = {time} (h = {step:e})")]
    StepUnderflow { time: f64, step: f64 },
    #[error("non-finite state at t = {time}")]
    NonFinite { time: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Last accepted step, reused as the next initial guess.
    pub last_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_step: f64::INFINITY }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

impl Dopri5 {
    /// Advance `y` from `t0` to `t1` under `dy/dt = f(t, y)`.
    pub fn integrate<F>(
        &self,
        mut f: F,
        t0: f64,
        t1: f64,
        y: &mut [C64],
        stats: &mut StepStats,
    ) -> Result<(), IntegrationError>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let n = y.len();
        let zero = C64::new(0.0, 0.0);
        let mut k: [Vec<C64>; 7] = std::array::from_fn(|_| vec![zero; n]);
        let mut tmp = vec![zero; n];
        let mut y_new = vec![zero; n];

        let mut t = t0;
        f(t, y, &mut k[0]);
        let mut h = if stats.last_step > 0.0 {
            stats.last_step
        } else {
            let ny = norm(y).max(1e-12);
            let nf = norm(&k[0]).max(1e-12);
            (0.01 * ny / nf).max(1e-6 * span)
        };
        h = h.min(self.max_step).min(span);

        loop {
            let remaining = t1 - t;
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let stage = |coeffs: &[f64], k: &[Vec<C64>], y: &[C64], tmp: &mut [C64]| {
                for i in 0..n {
                    let mut acc = zero;
                    for (j, a) in coeffs.iter().enumerate() {
                        acc += k[j][i] * *a;
                    }
                    tmp[i] = y[i] + acc * h;
                }
            };
            stage(&A2, &k, y, &mut tmp);
            f(t + C[1] * h, &tmp, &mut k[1]);
            stage(&A3, &k, y, &mut tmp);
            f(t + C[2] * h, &tmp, &mut k[2]);
            stage(&A4, &k, y, &mut tmp);
            f(t + C[3] * h, &tmp, &mut k[3]);
            stage(&A5, &k, y, &mut tmp);
            f(t + C[4] * h, &tmp, &mut k[4]);
            stage(&A6, &k, y, &mut tmp);
            f(t + C[5] * h, &tmp, &mut k[5]);
            stage(&B, &k, y, &mut y_new);
            f(t + h, &y_new, &mut k[6]);

            let mut err = 0.0;
            for i in 0..n {
                let mut e = zero;
                for (j, c) in E.iter().enumerate() {
                    e += k[j][i] * *c;
                }
                let scale = self.atol + self.rtol * y[i].norm().max(y_new[i].norm());
                err += (e.norm() * h / scale).powi(2);
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                return Err(IntegrationError::NonFinite { time: t });
            }

            if err <= 1.0 {
                t = if last { t1 } else { t + h };
                y.copy_from_slice(&y_new);
                k.swap(0, 6);
                stats.accepted += 1;
                if !last {
                    stats.last_step = h;
                }
                if last {
                    return Ok(());
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = (h * factor).min(self.max_step);
            } else {
                stats.rejected += 1;
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(IntegrationError::StepUnderflow { time: t, step: h });
                }
            }
        }
    }
}

fn norm(v: &[C64]) -> f64 {
    (v.iter().map(|x| x.norm_sqr()).sum::<f64>() / v.len() as f64).sqrt()
}
