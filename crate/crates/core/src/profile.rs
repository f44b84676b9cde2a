//! Radial profiles `R(r)` paired with angular modes in separated functions.

use std::sync::Arc;

use crate::geometry::Bubble;

/// A differentiable function of the radius.
pub trait Radial {
    fn value(&self, r: f64) -> f64;
    fn derivative(&self, r: f64) -> f64;
}

impl<T: Radial + ?Sized> Radial for &T {
    fn value(&self, r: f64) -> f64 {
        (**self).value(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        (**self).derivative(r)
    }
}

/// Profile tabulated in `x = ln r` with cubic Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    /// Strictly increasing `ln r` abscissae.
    pub x: Vec<f64>,
    pub value: Vec<f64>,
    /// `dR/dx = r dR/dr`.
    pub slope: Vec<f64>,
    /// Power-law exponents used outside the tabulated window.
    pub origin_exponent: f64,
    pub decay_exponent: f64,
}

impl SampledProfile {
    fn locate(&self, x: f64) -> usize {
        match self.x.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.x.len() - 2),
        }
    }

    fn hermite(&self, x: f64) -> (f64, f64) {
        let n = self.x.len();
        if x <= self.x[0] {
            let v = self.value[0] * (self.origin_exponent * (x - self.x[0])).exp();
            return (v, self.origin_exponent * v);
        }
        if x >= self.x[n - 1] {
            let v = self.value[n - 1] * (self.decay_exponent * (x - self.x[n - 1])).exp();
            return (v, self.decay_exponent * v);
        }
        let i = self.locate(x);
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        let (y0, y1) = (self.value[i], self.value[i + 1]);
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let dv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (v, dv)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    Bubble(Bubble),
    /// `d/ds U_s` of the given bubble.
    BubbleScaleDerivative(Bubble),
    /// `U(r) p(y0(r))` with `y0 = (r^2-1)/(r^2+1)` and `p` a polynomial in `y0`
    /// (coefficients by increasing degree).
    Zonal {
        bubble: Bubble,
        poly: Arc<Vec<f64>>,
    },
    /// `(1+r^2)^{1-N/2-beta} r^beta`.
    BetaBranch {
        dim: usize,
        beta: f64,
    },
    /// `r^power (c_0 + c_1 r + ...) exp(-decay r^2)`.
    PowerGaussian {
        power: f64,
        coeffs: Vec<f64>,
        decay: f64,
    },
    Sampled(Arc<SampledProfile>),
}

fn poly_eval(c: &[f64], x: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut dv = 0.0;
    for &ci in c.iter().rev() {
        dv = dv * x + v;
        v = v * x + ci;
    }
    (v, dv)
}

impl RadialProfile {
    /// Exponent `a` with `R ~ r^a` as `r -> 0`.
    pub fn origin_exponent(&self) -> f64 {
        match self {
            RadialProfile::Bubble(_) | RadialProfile::BubbleScaleDerivative(_) => 0.0,
            RadialProfile::Zonal { .. } => 0.0,
            RadialProfile::BetaBranch { beta, .. } => *beta,
            RadialProfile::PowerGaussian { power, .. } => *power,
            RadialProfile::Sampled(s) => s.origin_exponent,
        }
    }

    /// Radius around which the profile varies; bubbles carry their dilation.
    pub fn characteristic_radius(&self) -> f64 {
        match self {
            RadialProfile::Bubble(b) | RadialProfile::BubbleScaleDerivative(b) => {
                1.0 / b.dilation()
            }
            RadialProfile::Zonal { bubble, .. } => 1.0 / bubble.dilation(),
            _ => 1.0,
        }
    }

    /// Exponent `b` with `R ~ r^b` as `r -> infinity` (`-inf` for Gaussian tails).
    pub fn decay_exponent(&self) -> f64 {
        match self {
            RadialProfile::Bubble(b) | RadialProfile::BubbleScaleDerivative(b) => {
                2.0 - b.dim as f64
            }
            RadialProfile::Zonal { bubble, .. } => 2.0 - bubble.dim as f64,
            RadialProfile::BetaBranch { dim, beta } => 2.0 - *dim as f64 - beta,
            RadialProfile::PowerGaussian { .. } => f64::NEG_INFINITY,
            RadialProfile::Sampled(s) => s.decay_exponent,
        }
    }
}

impl Radial for RadialProfile {
    fn value(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Bubble(b) => b.value(r),
            RadialProfile::BubbleScaleDerivative(b) => b.scale_derivative(r),
            RadialProfile::Zonal { bubble, poly } => {
                let y0 = (r * r - 1.0) / (r * r + 1.0);
                bubble.value(r) * poly_eval(poly, y0).0
            }
            RadialProfile::BetaBranch { dim, beta } => {
                if r == 0.0 {
                    return if *beta == 0.0 { 1.0 } else { 0.0 };
                }
                let a = 1.0 - *dim as f64 / 2.0 - beta;
                (a * (r * r).ln_1p() + beta * r.ln()).exp()
            }
            RadialProfile::PowerGaussian {
                power,
                coeffs,
                decay,
            } => r.powf(*power) * poly_eval(coeffs, r).0 * (-decay * r * r).exp(),
            RadialProfile::Sampled(s) => s.hermite(r.ln()).0,
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Bubble(b) => b.derivative(r),
            RadialProfile::BubbleScaleDerivative(b) => b.scale_derivative_dr(r),
            RadialProfile::Zonal { bubble, poly } => {
                let d = r * r + 1.0;
                let y0 = (r * r - 1.0) / d;
                let (p, dp) = poly_eval(poly, y0);
                bubble.derivative(r) * p + bubble.value(r) * dp * 4.0 * r / (d * d)
            }
            RadialProfile::BetaBranch { dim, beta } => {
                if r == 0.0 {
                    return 0.0;
                }
                let a = 1.0 - *dim as f64 / 2.0 - beta;
                self.value(r) * (2.0 * a * r / (1.0 + r * r) + beta / r)
            }
            RadialProfile::PowerGaussian {
                power,
                coeffs,
                decay,
            } => {
                let (p, dp) = poly_eval(coeffs, r);
                let e = (-decay * r * r).exp();
                let rp = r.powf(*power);
                let drp = if *power == 0.0 {
                    0.0
                } else {
                    power * r.powf(power - 1.0)
                };
                e * (drp * p + rp * dp - 2.0 * decay * r * rp * p)
            }
            RadialProfile::Sampled(s) => {
                if r <= 0.0 {
                    return 0.0;
                }
                s.hermite(r.ln()).1 / r
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivative(p: &RadialProfile) {
        let h = 1e-6;
        for &r in &[0.05, 0.3, 1.0, 1.7, 4.0, 12.0] {
            let fd = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
            let an = p.derivative(r);
            assert!(
                (fd - an).abs() <= 1e-7 * (1.0 + an.abs()),
                "{p:?} at r={r}: fd {fd} vs {an}"
            );
        }
    }

    #[test]
    fn closed_form_derivatives() {
        let b = Bubble::new(3, 0.9);
        check_derivative(&RadialProfile::Bubble(b));
        check_derivative(&RadialProfile::BubbleScaleDerivative(b.rescaled(1.4)));
        check_derivative(&RadialProfile::Zonal {
            bubble: b,
            poly: Arc::new(vec![-1.0, 0.0, 4.0]),
        });
        check_derivative(&RadialProfile::BetaBranch { dim: 4, beta: 1.3 });
        check_derivative(&RadialProfile::PowerGaussian {
            power: 1.5,
            coeffs: vec![1.0, -0.3, 0.2],
            decay: 0.8,
        });
    }

    #[test]
    fn sampled_profile_reproduces_smooth_function() {
        // R = exp(-r^2) tabulated in ln r
        let x: Vec<f64> = (0..=800).map(|i| -8.0 + i as f64 * 0.0125).collect();
        let value: Vec<f64> = x.iter().map(|x| (-(2.0 * x).exp()).exp()).collect();
        let slope: Vec<f64> = x
            .iter()
            .zip(&value)
            .map(|(x, v)| -2.0 * (2.0 * x).exp() * v)
            .collect();
        let s = RadialProfile::Sampled(Arc::new(SampledProfile {
            x,
            value,
            slope,
            origin_exponent: 0.0,
            decay_exponent: -50.0,
        }));
        for &r in &[0.01, 0.2, 0.77, 1.5] {
            assert!((s.value(r) - (-r * r).exp()).abs() < 1e-9);
            assert!((s.derivative(r) + 2.0 * r * (-r * r).exp()).abs() < 1e-7);
        }
    }
}
