//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.
//!
//! Both shooting solvers need the same thing: integrate a smooth linear
//! system across an interval, observe every accepted step (for node counting
//! and sampling), and stop exactly at the requested endpoint.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Error coefficients: fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |h|; zero means unbounded.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 {
            rtol: 1e-12,
            atol: 1e-12,
            max_step: 0.0,
            max_steps: 2_000_000,
        }
    }
}

#[inline]
fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..D {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl Dopri5 {
    pub fn with_tolerance(tol: f64) -> Self {
        Dopri5 {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }

    pub fn max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }

    /// Integrates `y' = rhs(x, y)` from `x0` to `x1` (either direction).
    /// `observe(x, y)` is called after every accepted step, including the last.
    pub fn integrate<const D: usize, F, O>(
        &self,
        rhs: F,
        x0: f64,
        y0: [f64; D],
        x1: f64,
        mut observe: O,
    ) -> Result<[f64; D]>
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
        O: FnMut(f64, &[f64; D]),
    {
        let span = x1 - x0;
        if span == 0.0 {
            return Ok(y0);
        }
        let dir = span.signum();
        let mut x = x0;
        let mut y = y0;
        let mut k1 = rhs(x, &y);

        let scale0: f64 = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let dscale: f64 = k1.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut h = if dscale > 0.0 {
            (0.01 * (scale0 + self.atol) / dscale).min(span.abs() * 1e-2)
        } else {
            span.abs() * 1e-3
        };
        h = h.max(span.abs() * 1e-12);
        if self.max_step > 0.0 {
            h = h.min(self.max_step);
        }

        let mut steps = 0usize;
        loop {
            if steps >= self.max_steps {
                return Err(Error::NoConvergence(format!(
                    "ODE integration exceeded {} steps near x = {x}",
                    self.max_steps
                )));
            }
            steps += 1;

            let remaining = (x1 - x).abs();
            let last = h >= remaining;
            let hs = if last { remaining } else { h } * dir;

            let k2 = rhs(x + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
            let k3 = rhs(x + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(
                x + C4 * hs,
                &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = rhs(
                x + C5 * hs,
                &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = rhs(
                x + hs,
                &axpy(
                    &y,
                    hs,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = axpy(
                &y,
                hs,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let x_new = if last { x1 } else { x + hs };
            let k7 = rhs(x_new, &y_new);

            let mut err: f64 = 0.0;
            for i in 0..D {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                if h <= span.abs() * 1e-14 {
                    return Err(Error::NoConvergence(format!(
                        "non-finite ODE state near x = {x}"
                    )));
                }
                h *= 0.25;
                continue;
            }

            if err <= 1.0 {
                x = x_new;
                y = y_new;
                k1 = k7;
                observe(x, &y);
                if last {
                    return Ok(y);
                }
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
            if self.max_step > 0.0 {
                h = h.min(self.max_step);
            }
            if h < span.abs() * 1e-15 {
                return Err(Error::NoConvergence(format!(
                    "ODE step size underflow near x = {x}"
                )));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_one_period() {
        let solver = Dopri5::with_tolerance(1e-12);
        let two_pi = 2.0 * std::f64::consts::PI;
        let y = solver
            .integrate(|_, y| [y[1], -y[0]], 0.0, [1.0, 0.0], two_pi, |_, _| {})
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10, "{y:?}");
        assert!(y[1].abs() < 1e-10);
    }

    #[test]
    fn backward_integration_exponential() {
        let solver = Dopri5::with_tolerance(1e-12);
        let y = solver
            .integrate(|_, y| [y[0]], 1.0, [1.0], 0.0, |_, _| {})
            .unwrap();
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn observer_sees_endpoint() {
        let solver = Dopri5::default();
        let mut last = f64::NAN;
        solver
            .integrate(|_, _| [1.0], 0.0, [0.0], 3.0, |x, _| last = x)
            .unwrap();
        assert_eq!(last, 3.0);
    }
}
