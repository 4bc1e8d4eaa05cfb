//! Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 1.0 / 5.0;
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive step-size controller settings.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

/// Per-accepted-step observer; returning `false` stops the integration.
pub trait StepObserver<const N: usize> {
    fn accept(&mut self, t: f64, y: &[f64; N]) -> bool;
}

impl<const N: usize, F: FnMut(f64, &[f64; N]) -> bool> StepObserver<N> for F {
    fn accept(&mut self, t: f64, y: &[f64; N]) -> bool {
        self(t, y)
    }
}

struct NoObserver;
impl<const N: usize> StepObserver<N> for NoObserver {
    fn accept(&mut self, _t: f64, _y: &[f64; N]) -> bool {
        true
    }
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(&[f64; N], f64)]) -> [f64; N] {
    let mut out = *y;
    for (k, a) in terms {
        for i in 0..N {
            out[i] += h * a * k[i];
        }
    }
    out
}

impl Dopri5 {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
    pub fn integrate<F, const N: usize>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; N],
        t1: f64,
    ) -> Result<[f64; N]>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        self.integrate_observed(f, t0, y0, t1, &mut NoObserver)
            .map(|(_, y)| y)
    }

    /// Integrates and reports every accepted step to `obs`. Returns the
    /// final `(t, y)`, which is short of `t1` only if the observer stopped.
    pub fn integrate_observed<F, O, const N: usize>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; N],
        t1: f64,
        obs: &mut O,
    ) -> Result<(f64, [f64; N])>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        O: StepObserver<N>,
    {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok((t0, y0));
        }
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = self.initial_step(&f, t, &y, &k1, dir).min(span.abs());
        let mut steps = 0usize;
        let mut prev_err: f64 = 1e-4;
        loop {
            if steps >= self.max_steps {
                return Err(Error::Integration {
                    at: t,
                    reason: "step budget exhausted".into(),
                });
            }
            steps += 1;
            let remaining = (t1 - t) * dir;
            let last = h >= remaining;
            let hs = if last { remaining } else { h } * dir;

            let k2 = f(t + C[1] * hs, &axpy(&y, hs, &[(&k1, A21)]));
            let k3 = f(t + C[2] * hs, &axpy(&y, hs, &[(&k1, A3[0]), (&k2, A3[1])]));
            let k4 = f(
                t + C[3] * hs,
                &axpy(&y, hs, &[(&k1, A4[0]), (&k2, A4[1]), (&k3, A4[2])]),
            );
            let k5 = f(
                t + C[4] * hs,
                &axpy(
                    &y,
                    hs,
                    &[(&k1, A5[0]), (&k2, A5[1]), (&k3, A5[2]), (&k4, A5[3])],
                ),
            );
            let k6 = f(
                t + hs,
                &axpy(
                    &y,
                    hs,
                    &[
                        (&k1, A6[0]),
                        (&k2, A6[1]),
                        (&k3, A6[2]),
                        (&k4, A6[3]),
                        (&k5, A6[4]),
                    ],
                ),
            );
            let y_new = axpy(
                &y,
                hs,
                &[
                    (&k1, B[0]),
                    (&k3, B[2]),
                    (&k4, B[3]),
                    (&k5, B[4]),
                    (&k6, B[5]),
                ],
            );
            let k7 = f(t + hs, &y_new);

            let mut err: f64 = 0.0;
            for i in 0..N {
                let e = hs
                    * (E[0] * k1[i]
                        + E[2] * k3[i]
                        + E[3] * k4[i]
                        + E[4] * k5[i]
                        + E[5] * k6[i]
                        + E[6] * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                h *= 0.25;
                if h < 1e-14 * t.abs().max(1e-300) {
                    return Err(Error::Integration {
                        at: t,
                        reason: "non-finite state".into(),
                    });
                }
                continue;
            }
            if err <= 1.0 {
                t = if last { t1 } else { t + hs };
                y = y_new;
                k1 = k7;
                if !obs.accept(t, &y) || last {
                    return Ok((t, y));
                }
                // PI controller
                let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * prev_err.powf(0.4 / 5.0);
                h = (h * fac.clamp(0.2, 5.0)).min(self.h_max);
                prev_err = err.max(1e-4);
            } else {
                h *= (0.9 * err.powf(-0.2)).max(0.1);
            }
            if h < 1e-15 * t.abs().max(1e-300) {
                return Err(Error::Integration {
                    at: t,
                    reason: "step size underflow".into(),
                });
            }
        }
    }

    /// Integrates through the ordered output abscissae `ts` (starting at
    /// `ts[0]` with `y0`), returning the state at each of them.
    pub fn integrate_through<F, const N: usize>(
        &self,
        f: F,
        ts: &[f64],
        y0: [f64; N],
    ) -> Result<Vec<[f64; N]>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut out = Vec::with_capacity(ts.len());
        let Some(&first) = ts.first() else {
            return Ok(out);
        };
        let mut y = y0;
        let mut t = first;
        out.push(y);
        for &tn in &ts[1..] {
            y = self.integrate(&f, t, y, tn)?;
            t = tn;
            out.push(y);
        }
        Ok(out)
    }

    fn initial_step<F, const N: usize>(
        &self,
        f: &F,
        t: f64,
        y: &[f64; N],
        k1: &[f64; N],
        dir: f64,
    ) -> f64
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            d0 = d0.max((y[i] / sc).abs());
            d1 = d1.max((k1[i] / sc).abs());
        }
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1 = axpy(y, h0 * dir, &[(k1, 1.0)]);
        let k2 = f(t + h0 * dir, &y1);
        let mut d2: f64 = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            d2 = d2.max(((k2[i] - k1[i]) / sc).abs() / h0);
        }
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.h_max)
    }
}
