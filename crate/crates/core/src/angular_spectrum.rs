//! Neumann eigenvalues of the Laplace–Beltrami operator on geodesic caps.
//!
//! Separating `Y = f(theta) h(sigma)` with `h` a spherical harmonic of degree
//! `m` on `S^{N-2}` leaves the colatitude problem
//!
//! ```text
//! f'' + (N-2) cot(theta) f' + (lambda - m(m+N-3)/sin^2 theta) f = 0,
//! f ~ theta^m at 0,   f'(theta0) = 0,
//! ```
//!
//! solved here by shooting from the pole and counting oscillations.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{sphere_measure, CapDescriptor, ConeDomain};
use crate::ode::Dopri5;

/// Starting colatitude for the shooting, away from the regular singular point.
pub const POLE_OFFSET: f64 = 1e-6;
pub const BISECTION_TOLERANCE: f64 = 1e-10;
pub const LAMBDA_MAX: f64 = 1e6;
const PROFILE_POINTS: usize = 2001;

fn centrifugal(dim: usize, m: usize) -> f64 {
    (m * (m + dim - 3)) as f64
}

/// Second-order coefficient `a` in `f = theta^m (1 + a theta^2 + ...)`.
fn series_coefficient(dim: usize, m: usize, lambda: f64) -> f64 {
    let (mf, n) = (m as f64, dim as f64);
    -(lambda - mf * (mf + 2.0 * n - 5.0) / 3.0) / (2.0 * (2.0 * mf + n - 1.0))
}

/// Initial data at `POLE_OFFSET`, scaled by `theta^{-m}`.
fn pole_data(dim: usize, m: usize, lambda: f64, theta: f64) -> [f64; 2] {
    let a = series_coefficient(dim, m, lambda);
    let t2 = theta * theta;
    let f = 1.0 + a * t2;
    let df = m as f64 / theta * f + 2.0 * a * theta;
    [f, df]
}

fn rhs(dim: usize, m: usize, lambda: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    let cm = centrifugal(dim, m);
    let nm2 = dim as f64 - 2.0;
    move |t, y| {
        let s = t.sin();
        [
            y[1],
            -nm2 * t.cos() / s * y[1] - (lambda - cm / (s * s)) * y[0],
        ]
    }
}

/// Number of eigenvalues strictly below `lambda` for the given `m`.
fn eigen_count(dim: usize, theta0: f64, m: usize, lambda: f64) -> Result<usize> {
    let solver = Dopri5::with_tolerance(1e-12);
    let y0 = pole_data(dim, m, lambda, POLE_OFFSET);
    let mut zeros = 0usize;
    let mut prev = y0[0];
    let end = solver.integrate(rhs(dim, m, lambda), POLE_OFFSET, y0, theta0, |_, y| {
        if y[0] != 0.0 && prev != 0.0 && (y[0] > 0.0) != (prev > 0.0) {
            zeros += 1;
        }
        if y[0] != 0.0 {
            prev = y[0];
        }
    })?;
    Ok(zeros + usize::from(end[0] * end[1] < 0.0))
}

/// Colatitude profile on a uniform mesh of `[0, theta0]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColatitudeProfile {
    pub theta: Vec<f64>,
    pub value: Vec<f64>,
    pub slope: Vec<f64>,
}

impl ColatitudeProfile {
    /// Hermite interpolation of `(f, f')`; clamps to the mesh.
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        let n = self.theta.len();
        let h = self.theta[1] - self.theta[0];
        let t = theta.clamp(0.0, self.theta[n - 1]);
        let i = ((t / h) as usize).min(n - 2);
        let u = (t - self.theta[i]) / h;
        let (y0, y1) = (self.value[i], self.value[i + 1]);
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let (u2, u3) = (u * u, u * u * u);
        let v = (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * m1;
        let dv = ((6.0 * u2 - 6.0 * u) * y0
            + (3.0 * u2 - 4.0 * u + 1.0) * m0
            + (-6.0 * u2 + 6.0 * u) * y1
            + (3.0 * u2 - 2.0 * u) * m1)
            / h;
        (v, dv)
    }

    pub fn interior_zeros(&self) -> usize {
        let n = self.value.len();
        self.value[1..n - 1]
            .windows(2)
            .filter(|w| (w[0] > 0.0) != (w[1] > 0.0) && w[0] != 0.0 && w[1] != 0.0)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularEigen {
    pub dim: usize,
    pub theta0: f64,
    pub lambda: f64,
    pub m: usize,
    /// Interior zeros of the colatitude profile plus one.
    pub radial_index: usize,
    /// Profile normalized so that `Y = f(theta) h(sigma)` has unit `L^2(D)`
    /// norm, with `h = sigma_1 sqrt((N-1)/|S^{N-2}|)` for `m >= 1` and
    /// `h = 1` for `m = 0`.
    #[serde(skip)]
    pub profile: Arc<ColatitudeProfile>,
}

impl AngularEigen {
    /// Value of the normalized eigenfunction at colatitude `theta` and
    /// `sigma_1` (the first coordinate of the direction on `S^{N-2}`).
    pub fn eval(&self, theta: f64, sigma1: f64) -> f64 {
        let f = self.profile.eval(theta).0;
        if self.m == 0 {
            f
        } else {
            f * self.azimuthal_factor() * sigma1
        }
    }

    /// Normalization of `sigma_1` on `S^{N-2}` for the `m = 1` harmonic.
    pub fn azimuthal_factor(&self) -> f64 {
        ((self.dim as f64 - 1.0) / sphere_measure(self.dim - 2)).sqrt()
    }

    /// `max |f'' + (N-2) cot f' + (lambda - M/sin^2) f|` over the mesh,
    /// relative to `(1 + lambda) max |f|`. Second derivatives come from
    /// fourth-order differences of the integrated slope.
    pub fn residual(&self) -> f64 {
        let p = &self.profile;
        let n = p.theta.len();
        let h = p.theta[1] - p.theta[0];
        let cm = centrifugal(self.dim, self.m);
        let nm2 = self.dim as f64 - 2.0;
        let scale = p.value.iter().fold(0.0f64, |a, v| a.max(v.abs())) * (1.0 + self.lambda);
        let mut worst = 0.0f64;
        for i in 10..n - 2 {
            let t = p.theta[i];
            let d2 = (-p.slope[i + 2] + 8.0 * p.slope[i + 1] - 8.0 * p.slope[i - 1]
                + p.slope[i - 2])
                / (12.0 * h);
            let s = t.sin();
            let r = d2 + nm2 * t.cos() / s * p.slope[i] + (self.lambda - cm / (s * s)) * p.value[i];
            worst = worst.max(r.abs());
        }
        worst / scale
    }
}

fn validate(dim: usize, theta0: f64) -> Result<()> {
    if dim < 3 {
        return Err(Error::DimensionTooSmall { dim });
    }
    if !(theta0 > 0.0 && theta0 < PI) {
        return Err(Error::ApertureOutOfRange { theta0 });
    }
    Ok(())
}

fn sample_profile(dim: usize, theta0: f64, m: usize, lambda: f64) -> Result<ColatitudeProfile> {
    let h = theta0 / (PROFILE_POINTS - 1) as f64;
    let theta: Vec<f64> = (0..PROFILE_POINTS).map(|i| i as f64 * h).collect();
    let a = series_coefficient(dim, m, lambda);
    let mf = m as f64;
    let series = |t: f64| -> (f64, f64) {
        let t2 = t * t;
        let tm = t.powi(m as i32);
        let dtm = if m == 0 {
            0.0
        } else {
            mf * t.powi(m as i32 - 1)
        };
        (tm * (1.0 + a * t2), dtm * (1.0 + a * t2) + tm * 2.0 * a * t)
    };
    let mut value = Vec::with_capacity(PROFILE_POINTS);
    let mut slope = Vec::with_capacity(PROFILE_POINTS);
    let solver = Dopri5::with_tolerance(1e-13);
    let f = rhs(dim, m, lambda);
    let mut state: Option<(f64, [f64; 2])> = None;
    for &t in &theta {
        if t <= POLE_OFFSET {
            let (v, d) = series(t);
            value.push(v);
            slope.push(d);
            continue;
        }
        let (x0, y0) = match state {
            Some(s) => s,
            None => {
                let (v, d) = series(POLE_OFFSET);
                (POLE_OFFSET, [v, d])
            }
        };
        let y = solver.integrate(&f, x0, y0, t, |_, _| {})?;
        value.push(y[0]);
        slope.push(y[1]);
        state = Some((t, y));
    }
    // Normalize: int_0^theta0 f^2 sin^{N-2} = 1 (times |S^{N-2}| when m = 0).
    let p = dim as i32 - 2;
    let mut integral = 0.0;
    for i in 0..PROFILE_POINTS {
        let w = if i == 0 || i == PROFILE_POINTS - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        integral += w * value[i] * value[i] * theta[i].sin().powi(p);
    }
    integral *= h / 3.0;
    if m == 0 {
        integral *= sphere_measure(dim - 2);
    }
    let norm = integral.sqrt();
    let sign = if value[0] < 0.0 || (m > 0 && slope[1] < 0.0) {
        -1.0
    } else {
        1.0
    };
    for v in value.iter_mut().chain(slope.iter_mut()) {
        *v *= sign / norm;
    }
    Ok(ColatitudeProfile {
        theta,
        value,
        slope,
    })
}

/// The `index`-th Neumann eigenvalue of the colatitude problem with
/// azimuthal order `m` (`index = 1` is the lowest; for `m = 0` it is the
/// constant mode with `lambda = 0`).
pub fn cap_eigenvalue(dim: usize, theta0: f64, m: usize, index: usize) -> Result<AngularEigen> {
    validate(dim, theta0)?;
    if index == 0 {
        return Err(Error::InvalidParameter(
            "eigenvalue index starts at 1".into(),
        ));
    }
    let lambda = if m == 0 && index == 1 {
        0.0
    } else {
        let mut lo = 0.0;
        let mut hi = 1.0;
        while eigen_count(dim, theta0, m, hi)? < index {
            lo = hi;
            hi *= 2.0;
            if hi > LAMBDA_MAX {
                return Err(Error::NoConvergence(format!(
                    "no bracket for m = {m}, index = {index} below lambda = {LAMBDA_MAX}"
                )));
            }
        }
        while hi - lo > BISECTION_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if eigen_count(dim, theta0, m, mid)? < index {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let profile = sample_profile(dim, theta0, m, lambda)?;
    Ok(AngularEigen {
        dim,
        theta0,
        lambda,
        m,
        radial_index: index,
        profile: Arc::new(profile),
    })
}

/// The mode realizing the first nontrivial Neumann eigenvalue of a cap,
/// searching azimuthal orders `0..=max_m`.
pub fn first_nontrivial_mode(dim: usize, theta0: f64, max_m: usize) -> Result<AngularEigen> {
    let mut best = cap_eigenvalue(dim, theta0, 0, 2)?;
    for m in 1..=max_m.max(1) {
        let cand = cap_eigenvalue(dim, theta0, m, 1)?;
        if cand.lambda < best.lambda {
            best = cand;
        }
    }
    Ok(best)
}

/// `lambda_1(D)`: supplied value for abstract domains, otherwise the smaller
/// of the first non-constant axisymmetric mode and the first `m = 1` mode.
pub fn lambda1(cone: &ConeDomain) -> Result<f64> {
    match cone.descriptor() {
        CapDescriptor::Abstract { lambda1, .. } => Ok(lambda1),
        CapDescriptor::Cap { theta0 } => Ok(first_nontrivial_mode(cone.dim(), theta0, 1)?.lambda),
    }
}

/// Like [`lambda1`] but also searching `m <= max_m`, to validate that
/// higher azimuthal orders never realize `lambda_1` on caps.
pub fn lambda1_searching(cone: &ConeDomain, max_m: usize) -> Result<f64> {
    match cone.descriptor() {
        CapDescriptor::Abstract { lambda1, .. } => Ok(lambda1),
        CapDescriptor::Cap { theta0 } => {
            Ok(first_nontrivial_mode(cone.dim(), theta0, max_m)?.lambda)
        }
    }
}
