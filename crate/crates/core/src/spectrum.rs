//! Closed-form spectrum of the linearized operator at the bubble.
//!
//! Separation of variables with the constant angular mode gives the radial
//! branch `mu_k`; with the first nontrivial Neumann mode it gives the
//! `lambda_1` branch. Which of them fill the bottom of the spectrum depends
//! on where `lambda_1` sits between consecutive thresholds `k(k+N-2)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{critical_exponent, Bubble};
use crate::profile::RadialProfile;

/// `((k-1)(k+N-2) 4/(N(N-2)) + 1) S^{2*}`.
pub fn mu_radial(dim: usize, k: usize, s: f64) -> f64 {
    assert!(k >= 1, "radial index starts at 1");
    let n = dim as f64;
    let kf = k as f64;
    ((kf - 1.0) * (kf + n - 2.0) * 4.0 / (n * (n - 2.0)) + 1.0) * s.powf(critical_exponent(dim))
}

/// Origin exponent `beta`, the nonnegative root of `beta^2 + (N-2) beta - lambda = 0`.
pub fn origin_exponent(dim: usize, lambda: f64) -> f64 {
    let n = dim as f64 - 2.0;
    0.5 * ((n * n + 4.0 * lambda).sqrt() - n)
}

/// `(beta, mu)` of the branch built on an angular eigenvalue `lambda1`.
pub fn mu_lambda1(dim: usize, lambda1: f64, s: f64) -> (f64, f64) {
    let n = dim as f64;
    let q = ((n - 2.0).powi(2) + 4.0 * lambda1).sqrt();
    let mu = s.powf(critical_exponent(dim)) / (n * (n - 2.0)) * q * (2.0 + q);
    (origin_exponent(dim, lambda1), mu)
}

/// `k(k+N-2)`, the eigenvalue of degree `k` harmonics on `S^{N-1}`.
pub fn threshold(dim: usize, k: usize) -> f64 {
    (k * (k + dim - 2)) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    ClosedFormPolynomial,
    ClosedFormBeta,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair {
    pub mu: f64,
    /// 0 for the constant angular mode, 1 for the `lambda_1` mode.
    pub angular_index: usize,
    pub radial_index: usize,
    /// Radial-branch eigenvalues are simple. The `lambda_1` branch inherits
    /// the multiplicity of `lambda_1(D)`, which is not tracked, so it is never
    /// marked simple.
    pub simple: bool,
    /// Set when the `lambda_1` branch coincides with a radial eigenvalue.
    pub merged: bool,
    pub profile_kind: ProfileKind,
}

/// Index `k` with `(k-1)(k+N-3) < lambda1 < k(k+N-2)`, or the tie index `j`
/// when `lambda1` equals `j(j+N-2)` up to relative `1e-12`.
fn locate(dim: usize, lambda1: f64) -> (usize, Option<usize>) {
    let mut k = 1;
    loop {
        let t = threshold(dim, k);
        if (lambda1 - t).abs() <= 1e-12 * t {
            return (k + 1, Some(k));
        }
        if lambda1 < t {
            return (k, None);
        }
        k += 1;
    }
}

/// The first `min(count, k+1)` eigenvalues, increasing: `mu_1..mu_k` from the
/// radial branch and `mu_{k+1}` from the `lambda_1` branch.
pub fn ordered_spectrum(
    dim: usize,
    lambda1: f64,
    s: f64,
    count: usize,
    allow_ties: bool,
) -> Result<Vec<EigenPair>> {
    if dim < 3 {
        return Err(Error::DimensionTooSmall { dim });
    }
    if !(lambda1 > 0.0 && lambda1.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda1 must be positive, got {lambda1}"
        )));
    }
    let (k, tie) = locate(dim, lambda1);
    if let Some(j) = tie {
        if !allow_ties {
            return Err(Error::ThresholdAmbiguity { lambda1, k: j });
        }
    }
    let mut out: Vec<EigenPair> = (1..=k)
        .map(|i| EigenPair {
            mu: mu_radial(dim, i, s),
            angular_index: 0,
            radial_index: i,
            simple: true,
            merged: false,
            profile_kind: ProfileKind::ClosedFormPolynomial,
        })
        .collect();
    let (_, mu) = mu_lambda1(dim, lambda1, s);
    if tie.is_some() {
        let last = out.last_mut().expect("k >= 2 on a tie");
        last.simple = false;
        last.merged = true;
    } else {
        out.push(EigenPair {
            mu,
            angular_index: 1,
            radial_index: 1,
            simple: false,
            merged: false,
            profile_kind: ProfileKind::ClosedFormBeta,
        });
    }
    out.truncate(count);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nondegeneracy {
    pub nondegenerate: bool,
    pub mu2: f64,
    pub mu3: f64,
    pub relative_gap: f64,
}

/// Nondegeneracy as a spectral gap: `mu_2` simple and `mu_3 > mu_2 (1 + tol)`.
pub fn nondegeneracy(spectrum: &[EigenPair], gap_tolerance: f64) -> Result<Nondegeneracy> {
    if spectrum.len() < 3 {
        return Err(Error::InvalidParameter(
            "need at least three eigenvalues".into(),
        ));
    }
    let (mu2, mu3) = (spectrum[1].mu, spectrum[2].mu);
    let relative_gap = (mu3 - mu2) / mu2;
    Ok(Nondegeneracy {
        nondegenerate: spectrum[1].simple && relative_gap > gap_tolerance,
        mu2,
        mu3,
        relative_gap,
    })
}

/// `|y|^{N-1+2(k-1)} d^{k-1}/dy0^{k-1} |y|^{1-N}`, a harmonic polynomial on
/// `R^{N+1}` homogeneous of degree `k-1`, stored as
/// `sum_a coeffs[a] y0^a |y|^{k-1-a}` (only `a` of the parity of `k-1` occur).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HarmonicPolynomial {
    pub dim: usize,
    pub k: usize,
    pub coeffs: Vec<i128>,
}

pub const MAX_HARMONIC_INDEX: usize = 12;

/// Exact coefficients by repeated differentiation of the Newtonian kernel
/// in `R^{N+1}`.
pub fn harmonic_polynomial(dim: usize, k: usize) -> Result<HarmonicPolynomial> {
    if k == 0 || k > MAX_HARMONIC_INDEX {
        return Err(Error::InvalidParameter(format!(
            "harmonic index {k} outside 1..={MAX_HARMONIC_INDEX}"
        )));
    }
    if dim < 3 {
        return Err(Error::DimensionTooSmall { dim });
    }
    // Terms y0^a |y|^{1-N-2j} keyed by a; j is fixed by homogeneity.
    let mut c: Vec<i128> = vec![1];
    for d in 0..k - 1 {
        let mut next = vec![0i128; c.len() + 1];
        for (a, &ca) in c.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            // |y| exponent of this term: 1 - N - 2j with 2j = a + d.
            let s = 1 - dim as i128 - (a + d) as i128;
            if a > 0 {
                next[a - 1] += a as i128 * ca;
            }
            next[a + 1] += s * ca;
        }
        c = next;
    }
    Ok(HarmonicPolynomial { dim, k, coeffs: c })
}

impl HarmonicPolynomial {
    /// Degree `k-1` polynomial in `y0` obtained on `|y| = 1`.
    pub fn on_sphere(&self) -> Vec<f64> {
        self.coeffs.iter().map(|&c| c as f64).collect()
    }

    pub fn eval_on_sphere(&self, y0: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * y0 + c as f64)
    }

    /// Spherical eigenvalue `(k-1)(k+N-2)` of the restriction to `S^N`.
    pub fn sphere_eigenvalue(&self) -> f64 {
        ((self.k - 1) * (self.k + self.dim - 2)) as f64
    }

    /// Exact Euclidean Laplacian in `R^{N+1}` in the same representation
    /// (degree `k-3`).
    pub fn laplacian(&self) -> Vec<i128> {
        let deg = self.k as i128 - 1;
        let big_d = self.dim as i128 + 1;
        let mut out = vec![0i128; self.coeffs.len().max(2)];
        for (a, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let a_i = a as i128;
            let two_q = deg - a_i;
            if a >= 2 {
                out[a - 2] += a_i * (a_i - 1) * c;
            }
            if two_q > 0 {
                out[a] += (two_q * (two_q + big_d - 2) + 2 * two_q * a_i) * c;
            }
        }
        out
    }
}

/// Closed-form `k`-th radial eigenfunction: `U` for `k = 1`, otherwise
/// `U P_k(y0) / (N-1)` with `y0 = (r^2-1)/(r^2+1)` the stereographic height.
pub fn radial_eigenfunction(dim: usize, k: usize, k0: f64) -> Result<RadialProfile> {
    let bubble = Bubble::new(dim, k0);
    if k == 1 {
        return Ok(RadialProfile::Bubble(bubble));
    }
    let h = harmonic_polynomial(dim, k)?;
    let scale = 1.0 / (dim as f64 - 1.0);
    Ok(RadialProfile::Zonal {
        bubble,
        poly: Arc::new(h.on_sphere().into_iter().map(|c| c * scale).collect()),
    })
}

/// Closed-form profile `(r^2+1)^{1-N/2-beta} r^beta` of the `lambda_1` branch.
pub fn lambda1_eigenfunction(dim: usize, lambda1: f64) -> RadialProfile {
    RadialProfile::BetaBranch {
        dim,
        beta: origin_exponent(dim, lambda1),
    }
}
