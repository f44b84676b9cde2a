//! Cones spanned by geodesic caps, angular measures and the bubble family.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::functionals::best_constant_bubble;
use crate::profile::Radial;
use crate::quadrature::{gauss_legendre, RadialGrid};

/// Critical Sobolev exponent `2N/(N-2)`.
pub fn critical_exponent(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * n / (n - 2.0)
}

/// Total measure of the unit sphere `S^k` in `R^{k+1}`.
pub fn sphere_measure(k: usize) -> f64 {
    let h = (k as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Measure of the geodesic cap of colatitude radius `theta0` on `S^{N-1}`.
///
/// Unlike [`ConeDomain::cap`] this accepts any `theta0` in `(0, pi]`, so the
/// hemisphere and the whole sphere can be measured as well.
pub fn cap_measure(dim: usize, theta0: f64) -> Result<f64> {
    if dim < 3 {
        return Err(Error::DimensionTooSmall { dim });
    }
    if !(theta0 > 0.0 && theta0 <= PI) {
        return Err(Error::InvalidParameter(format!(
            "cap radius {theta0} outside (0, pi]"
        )));
    }
    let table = gauss_legendre(64);
    let half = 0.5 * theta0;
    let p = (dim - 2) as i32;
    let integral: f64 = table
        .nodes
        .iter()
        .zip(&table.weights)
        .map(|(t, w)| w * (half * (t + 1.0)).sin().powi(p))
        .sum::<f64>()
        * half;
    Ok(sphere_measure(dim - 2) * integral)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CapDescriptor {
    /// Geodesic cap of colatitude radius `theta0` around the pole.
    Cap { theta0: f64 },
    /// A domain known only through its first nontrivial Neumann eigenvalue
    /// and its measure.
    Abstract { lambda1: f64, measure: f64 },
}

/// The cone `{ s q : s > 0, q in D }` over a spherical domain `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeDomain {
    dim: usize,
    descriptor: CapDescriptor,
}

impl ConeDomain {
    pub fn cap(dim: usize, theta0: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::DimensionTooSmall { dim });
        }
        // The closed cap has to sit inside the open hemisphere.
        if !(theta0 > 0.0 && theta0 < FRAC_PI_2) {
            return Err(Error::ApertureOutOfRange { theta0 });
        }
        Ok(ConeDomain {
            dim,
            descriptor: CapDescriptor::Cap { theta0 },
        })
    }

    pub fn abstract_domain(dim: usize, lambda1: f64, measure: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::DimensionTooSmall { dim });
        }
        if !(lambda1 > 0.0 && lambda1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda1 must be positive, got {lambda1}"
            )));
        }
        if !(measure > 0.0 && measure.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "domain measure must be positive, got {measure}"
            )));
        }
        Ok(ConeDomain {
            dim,
            descriptor: CapDescriptor::Abstract { lambda1, measure },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn descriptor(&self) -> CapDescriptor {
        self.descriptor
    }

    pub fn theta0(&self) -> Option<f64> {
        match self.descriptor {
            CapDescriptor::Cap { theta0 } => Some(theta0),
            CapDescriptor::Abstract { .. } => None,
        }
    }

    /// `|D|`, the spherical measure of the spanning domain.
    pub fn measure(&self) -> f64 {
        match self.descriptor {
            CapDescriptor::Cap { theta0 } => {
                cap_measure(self.dim, theta0).expect("validated at construction")
            }
            CapDescriptor::Abstract { measure, .. } => measure,
        }
    }

    pub fn critical_exponent(&self) -> f64 {
        critical_exponent(self.dim)
    }
}

/// The rescaled bubble `U_s(r) = s k0 (1 + (s^{2/(N-2)} r)^2)^{-(N-2)/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bubble {
    pub dim: usize,
    pub k0: f64,
    pub scale: f64,
}

impl Bubble {
    pub fn new(dim: usize, k0: f64) -> Self {
        Bubble {
            dim,
            k0,
            scale: 1.0,
        }
    }

    pub fn rescaled(self, scale: f64) -> Self {
        Bubble { scale, ..self }
    }

    /// Spatial dilation factor `s^{2/(N-2)}`.
    pub fn dilation(&self) -> f64 {
        self.scale.powf(2.0 / (self.dim as f64 - 2.0))
    }

    /// `d/ds U_s` at this bubble's scale.
    pub fn scale_derivative(&self, r: f64) -> f64 {
        let n = self.dim as f64;
        let rho2 = (self.dilation() * r).powi(2);
        self.k0 * (1.0 + rho2).powf(-n / 2.0) * (1.0 - rho2)
    }

    /// Radial derivative of `d/ds U_s`.
    pub fn scale_derivative_dr(&self, r: f64) -> f64 {
        let n = self.dim as f64;
        let sigma = self.dilation();
        let rho = sigma * r;
        let rho2 = rho * rho;
        sigma * self.k0 * rho * (1.0 + rho2).powf(-n / 2.0 - 1.0) * ((n - 2.0) * rho2 - (n + 2.0))
    }
}

impl Radial for Bubble {
    fn value(&self, r: f64) -> f64 {
        let n = self.dim as f64;
        let rho = self.dilation() * r;
        self.scale * self.k0 * (1.0 + rho * rho).powf(-(n - 2.0) / 2.0)
    }

    fn derivative(&self, r: f64) -> f64 {
        let n = self.dim as f64;
        let sigma = self.dilation();
        let rho = sigma * r;
        -(n - 2.0) * self.scale * self.k0 * sigma * rho * (1.0 + rho * rho).powf(-n / 2.0)
    }
}

/// Normalization `k0` with `||grad U||_2 = 1`, obtained from the identity
/// `k0^{2*-2} = S_U^{-2*} N (N-2)` after computing the bubble quotient `S_U`.
pub fn bubble_normalizer(cone: &ConeDomain, grid: &RadialGrid) -> Result<f64> {
    let n = cone.dim() as f64;
    let p = cone.critical_exponent();
    let s_u = best_constant_bubble(cone, grid)?;
    Ok((s_u.powf(-p) * n * (n - 2.0)).powf(1.0 / (p - 2.0)))
}

/// Normalization `k0` computed straight from `||grad U||_2 = 1` by quadrature.
/// Independent of [`bubble_normalizer`]; the two agree when the bubble
/// quotient identity holds.
pub fn bubble_normalizer_direct(cone: &ConeDomain, grid: &RadialGrid) -> Result<f64> {
    let unit = Bubble::new(cone.dim(), 1.0);
    let g = crate::quadrature::integrate_radial(|r| unit.derivative(r).powi(2), cone.dim(), grid)?;
    Ok(1.0 / (cone.measure() * g).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_constructor_echoes_and_validates() {
        let cone = ConeDomain::cap(3, PI / 4.0).unwrap();
        assert_eq!(cone.dim(), 3);
        assert_eq!(cone.theta0(), Some(PI / 4.0));
        assert_eq!(
            ConeDomain::cap(2, PI / 4.0),
            Err(Error::DimensionTooSmall { dim: 2 })
        );
        assert!(matches!(
            ConeDomain::cap(4, FRAC_PI_2),
            Err(Error::ApertureOutOfRange { .. })
        ));
        assert!(matches!(
            ConeDomain::cap(4, 0.0),
            Err(Error::ApertureOutOfRange { .. })
        ));
    }

    #[test]
    fn abstract_domain_requires_positive_lambda1() {
        assert!(ConeDomain::abstract_domain(3, 0.0, 1.0).is_err());
        assert!(ConeDomain::abstract_domain(3, 7.3, -1.0).is_err());
        let cone = ConeDomain::abstract_domain(3, 7.3, 2.0).unwrap();
        assert_eq!(cone.measure(), 2.0);
    }

    #[test]
    fn sphere_measures() {
        assert!((sphere_measure(0) - 2.0).abs() < 1e-14);
        assert!((sphere_measure(1) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_measure(2) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_measure(3) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn hemisphere_cap_measures() {
        // 2 pi * int_0^{pi/2} sin = 2 pi
        assert!((cap_measure(3, FRAC_PI_2).unwrap() - 2.0 * PI).abs() < 1e-13);
        // half of |S^3| = pi^2
        assert!((cap_measure(4, FRAC_PI_2).unwrap() - PI * PI).abs() < 1e-12);
        // whole sphere
        assert!((cap_measure(5, PI).unwrap() - sphere_measure(4)).abs() < 1e-12);
    }

    #[test]
    fn cap_measure_vanishes_and_increases() {
        let mut prev = 0.0;
        for i in 1..=60 {
            let m = cap_measure(3, i as f64 * PI / 60.0).unwrap();
            assert!(m > prev);
            prev = m;
        }
        assert!(cap_measure(3, 1e-4).unwrap() < 1e-7);
    }

    #[test]
    fn bubble_is_positive_and_decreasing() {
        let b = Bubble::new(4, 0.7).rescaled(2.5);
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let r = i as f64 * 0.05;
            let v = b.value(r);
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn bubble_derivatives_match_finite_differences() {
        let b = Bubble::new(5, 1.3).rescaled(0.7);
        let h = 1e-6;
        for &r in &[0.1, 0.5, 1.0, 2.0, 7.0] {
            let fd = (b.value(r + h) - b.value(r - h)) / (2.0 * h);
            assert!((fd - b.derivative(r)).abs() < 1e-8);
            let ds = (b.rescaled(0.7 + h).value(r) - b.rescaled(0.7 - h).value(r)) / (2.0 * h);
            assert!(
                (ds - b.scale_derivative(r)).abs() < 1e-8,
                "{ds} {}",
                b.scale_derivative(r)
            );
            let fd2 = (b.scale_derivative(r + h) - b.scale_derivative(r - h)) / (2.0 * h);
            assert!((fd2 - b.scale_derivative_dr(r)).abs() < 1e-8);
        }
    }
}
