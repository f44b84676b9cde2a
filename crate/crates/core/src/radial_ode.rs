//! Shooting solver for the radial weighted eigenproblem
//!
//! ```text
//! (r^{N-1} R')' + r^{N-1} (-lambda r^{-2} + mu k0^{2*-2} (1+r^2)^{-2}) R = 0,
//! ```
//!
//! used as an oracle that knows nothing about the closed-form spectrum.
//!
//! With `x = ln r` and `R = e^{-(N-2)x/2} w` the problem becomes
//! `w'' = (kappa^2 - nu sech^2(x)/4) w` on the whole line, where
//! `kappa^2 = (N-2)^2/4 + lambda` and `nu = mu k0^{2*-2}`. Both endpoints are
//! then plain exponentials, the regular solution at the origin is
//! `w ~ e^{kappa x}` (i.e. `R ~ r^beta`) and the decaying one at infinity is
//! `w ~ e^{-kappa x}` (i.e. `R ~ r^{2-N-beta}`).

use std::f64::consts::LN_10;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::critical_exponent;
use crate::ode::Dopri5;
use crate::profile::SampledProfile;

/// Potential tail below which the truncated problem is exact to rounding.
pub const TAIL_TOLERANCE: f64 = 1e-14;
pub const RELATIVE_TOLERANCE: f64 = 1e-12;
pub const NU_MAX: f64 = 1e8;
const MIN_HALF_WIDTH: f64 = 14.0;
const PROFILE_STEP: f64 = 0.02;

fn kappa(dim: usize, lambda: f64) -> f64 {
    let n = dim as f64 - 2.0;
    (n * n + 4.0 * lambda).sqrt() / 2.0
}

/// Half-width `L` of the window `|ln r| <= L` on which `nu sech^2 / 4`
/// exceeds the tail tolerance.
fn half_width(nu: f64) -> f64 {
    MIN_HALF_WIDTH.max(0.5 * (nu.max(1.0) / TAIL_TOLERANCE).ln())
}

fn schrodinger(kappa: f64, nu: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    let k2 = kappa * kappa;
    move |x, y| {
        let c = x.cosh();
        [y[1], (k2 - 0.25 * nu / (c * c)) * y[0]]
    }
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    x: f64,
    w: f64,
    dw: f64,
    log_scale: f64,
}

struct Sweep {
    end: [f64; 2],
    log_scale: f64,
    zeros: usize,
    samples: Vec<Sample>,
}

/// Integrates from `x0` to `x1`, renormalizing every decade of growth in `r`.
fn sweep(kappa: f64, nu: f64, x0: f64, y0: [f64; 2], x1: f64, record: bool) -> Result<Sweep> {
    let rhs = schrodinger(kappa, nu);
    let mut solver = Dopri5::with_tolerance(1e-13);
    solver.rtol = 1e-12;
    if record {
        solver = solver.max_step(PROFILE_STEP);
    }
    let dir = (x1 - x0).signum();
    let mut x = x0;
    let mut y = y0;
    let mut log_scale = 0.0;
    let mut zeros = 0usize;
    let mut samples = Vec::new();
    if record {
        samples.push(Sample {
            x,
            w: y[0],
            dw: y[1],
            log_scale,
        });
    }
    while (x1 - x) * dir > 0.0 {
        let target = if ((x1 - x) * dir) > LN_10 {
            x + dir * LN_10
        } else {
            x1
        };
        let mut prev = y[0];
        let ls = log_scale;
        y = solver.integrate(&rhs, x, y, target, |xs, ys| {
            if ys[0] != 0.0 && prev != 0.0 && (ys[0] > 0.0) != (prev > 0.0) {
                zeros += 1;
            }
            if ys[0] != 0.0 {
                prev = ys[0];
            }
            if record {
                samples.push(Sample {
                    x: xs,
                    w: ys[0],
                    dw: ys[1],
                    log_scale: ls,
                });
            }
        })?;
        x = target;
        let size = y[0].abs().max(y[1].abs());
        if !size.is_finite() || size == 0.0 {
            return Err(Error::Overflow { r: x.exp() });
        }
        y = [y[0] / size, y[1] / size];
        log_scale += size.ln();
    }
    Ok(Sweep {
        end: y,
        log_scale,
        zeros,
        samples,
    })
}

/// Result of one shooting pass at fixed `(lambda, mu)`.
#[derive(Debug, Clone, Serialize)]
pub struct ShootResult {
    pub dim: usize,
    pub lambda: f64,
    pub mu: f64,
    /// Normalized Wronskian of the regular and decaying solutions at `r = 1`;
    /// vanishes exactly at eigenvalues.
    pub mismatch: f64,
    /// Sign changes of the regular solution over the whole window.
    pub nodes: usize,
    /// Glued eigen-candidate, normalized to `R(1) = 1` (or `R'(1) = 1` if
    /// `R(1)` vanishes).
    #[serde(skip)]
    pub profile: Arc<SampledProfile>,
}

struct Problem {
    kappa: f64,
    nu: f64,
    half: f64,
}

impl Problem {
    fn new(dim: usize, lambda: f64, nu: f64) -> Self {
        Problem {
            kappa: kappa(dim, lambda),
            nu,
            half: half_width(nu),
        }
    }

    fn left(&self, to: f64, record: bool) -> Result<Sweep> {
        sweep(
            self.kappa,
            self.nu,
            -self.half,
            [1.0, self.kappa],
            to,
            record,
        )
    }

    fn right(&self, record: bool) -> Result<Sweep> {
        sweep(
            self.kappa,
            self.nu,
            self.half,
            [1.0, -self.kappa],
            0.0,
            record,
        )
    }

    fn nodes(&self) -> Result<usize> {
        Ok(self.left(self.half, false)?.zeros)
    }

    fn mismatch(&self) -> Result<f64> {
        let l = self.left(0.0, false)?.end;
        let r = self.right(false)?.end;
        let w = l[0] * r[1] - l[1] * r[0];
        Ok(w / ((l[0] * l[0] + l[1] * l[1]) * (r[0] * r[0] + r[1] * r[1])).sqrt())
    }
}

fn nu_factor(dim: usize, k0: f64) -> f64 {
    k0.powf(critical_exponent(dim) - 2.0)
}

fn validate(dim: usize, lambda: f64, k0: f64) -> Result<()> {
    if dim < 3 {
        return Err(Error::DimensionTooSmall { dim });
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    if !(k0 > 0.0 && k0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "k0 must be positive, got {k0}"
        )));
    }
    Ok(())
}

/// Shoots from both ends at `(lambda, mu)` and glues the two solutions at `r = 1`.
pub fn shoot_radial(dim: usize, lambda: f64, mu: f64, k0: f64) -> Result<ShootResult> {
    validate(dim, lambda, k0)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mu must be positive, got {mu}"
        )));
    }
    let p = Problem::new(dim, lambda, mu * nu_factor(dim, k0));
    let left = p.left(0.0, true)?;
    let right = p.right(true)?;
    let nodes = p.nodes()?;

    let (l, r) = (left.end, right.end);
    let mismatch = (l[0] * r[1] - l[1] * r[0])
        / ((l[0] * l[0] + l[1] * l[1]) * (r[0] * r[0] + r[1] * r[1])).sqrt();

    // Scale the right solution onto the left one at x = 0, matching whichever
    // component is better conditioned.
    let ratio_ln;
    let ratio_sign;
    if l[0].abs() >= l[1].abs() {
        ratio_ln = (l[0] / r[0]).abs().ln() + left.log_scale - right.log_scale;
        ratio_sign = (l[0] / r[0]).signum();
    } else {
        ratio_ln = (l[1] / r[1]).abs().ln() + left.log_scale - right.log_scale;
        ratio_sign = (l[1] / r[1]).signum();
    }
    let norm_ln = left.log_scale + l[0].abs().max(l[1].abs()).ln();
    let norm_sign = if l[0].abs() >= l[1].abs() {
        l[0].signum()
    } else {
        l[1].signum()
    };

    let half_n = (dim as f64 - 2.0) / 2.0;
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    let mut push = |s: &Sample, extra_ln: f64, sign: f64| {
        let f = sign * (s.log_scale + extra_ln - norm_ln).exp() * norm_sign;
        let e = (-half_n * s.x).exp();
        let w = s.w * f;
        let dw = s.dw * f;
        pts.push((s.x, e * w, e * (dw - half_n * w)));
    };
    for s in &left.samples {
        push(s, 0.0, 1.0);
    }
    for s in right.samples.iter().rev() {
        if s.x > 0.0 {
            push(s, ratio_ln, ratio_sign);
        }
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);
    let at_one = pts
        .iter()
        .min_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap())
        .copied()
        .expect("both sweeps record x = 0");
    let unit = if at_one.1.abs() > 1e-8 * at_one.2.abs() {
        at_one.1
    } else {
        at_one.2
    };
    for q in pts.iter_mut() {
        q.1 /= unit;
        q.2 /= unit;
    }
    let kappa = p.kappa;
    let profile = SampledProfile {
        x: pts.iter().map(|p| p.0).collect(),
        value: pts.iter().map(|p| p.1).collect(),
        slope: pts.iter().map(|p| p.2).collect(),
        origin_exponent: kappa - half_n,
        decay_exponent: -kappa - half_n,
    };
    if profile.value.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow { r: p.half.exp() });
    }
    Ok(ShootResult {
        dim,
        lambda,
        mu,
        mismatch,
        nodes,
        profile: Arc::new(profile),
    })
}

/// Refines the eigenvalue inside `[lo, hi]`, where the count of eigenvalues
/// below `lo` is `k-1` and below `hi` is `k`, by Illinois regula falsi on
/// the Wronskian with bisection safeguards.
fn refine(dim: usize, lambda: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let eval = |nu: f64| Problem::new(dim, lambda, nu).mismatch();
    let mut flo = eval(lo)?;
    let mut fhi = eval(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoConvergence(format!(
            "Wronskian does not change sign on [{lo}, {hi}]"
        )));
    }
    let mut side = 0i32;
    for iter in 0..200 {
        if hi - lo <= RELATIVE_TOLERANCE * hi {
            break;
        }
        let mut mid = (lo * fhi - hi * flo) / (fhi - flo);
        if iter % 4 == 3 || !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let fm = eval(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            fhi = fm;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The first `count` eigenvalues `mu` at angular eigenvalue `lambda`,
/// increasing, each converged to `1e-12` relative in `nu`.
pub fn find_radial_eigenvalues(dim: usize, lambda: f64, count: usize, k0: f64) -> Result<Vec<f64>> {
    validate(dim, lambda, k0)?;
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let factor = nu_factor(dim, k0);
    let nodes = |nu: f64| Problem::new(dim, lambda, nu).nodes();
    let mut out = Vec::with_capacity(count);
    let mut lo = 0.0;
    for k in 1..=count {
        let mut hi = if lo > 0.0 { 2.0 * lo } else { 1.0 };
        while nodes(hi)? < k {
            lo = hi;
            hi *= 2.0;
            if hi > NU_MAX {
                return Err(Error::NoConvergence(format!(
                    "radial eigenvalue {k} not bracketed below nu = {NU_MAX}"
                )));
            }
        }
        loop {
            let c_lo = nodes(lo)?;
            if c_lo == k - 1 && nodes(hi)? == k {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if nodes(mid)? < k {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 * hi {
                break;
            }
        }
        let nu = refine(dim, lambda, lo, hi)?;
        out.push(nu / factor);
        lo = nu * (1.0 + 1e-9);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    // With k0 = 1 the eigenvalues in nu are (2 beta + N - 2 + 2n)(2 beta + N + 2n).
    fn pt_nu(dim: usize, lambda: f64, n: usize) -> f64 {
        let nn = dim as f64;
        let beta = ((nn - 2.0).powi(2) + 4.0 * lambda).sqrt() / 2.0 - (nn - 2.0) / 2.0;
        let a = 2.0 * beta + nn - 2.0 + 2.0 * n as f64;
        a * (a + 2.0)
    }

    #[test]
    fn first_eigenvalues_at_lambda_zero() {
        for dim in 3..=6 {
            let mus = find_radial_eigenvalues(dim, 0.0, 3, 1.0).unwrap();
            for (n, mu) in mus.iter().enumerate() {
                let exact = pt_nu(dim, 0.0, n);
                assert!(
                    ((mu - exact) / exact).abs() < 1e-9,
                    "N={dim} n={n}: {mu} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn non_integer_beta_branch() {
        let mus = find_radial_eigenvalues(4, 5.0, 1, 1.0).unwrap();
        let exact = pt_nu(4, 5.0, 0);
        assert!(((mus[0] - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn profile_is_bubble_at_first_eigenvalue() {
        let dim = 5;
        let mu = pt_nu(dim, 0.0, 0);
        let s = shoot_radial(dim, 0.0, mu, 1.0).unwrap();
        assert!(s.mismatch.abs() < 1e-9);
        assert_eq!(
            shoot_radial(dim, 0.0, mu * (1.0 - 1e-9), 1.0)
                .unwrap()
                .nodes,
            0
        );
        let p = crate::profile::RadialProfile::Sampled(s.profile.clone());
        use crate::profile::Radial;
        for &r in &[0.01f64, 0.3, 1.0, 3.0, 40.0] {
            let u = 2f64.powf(1.5) * (1.0 + r * r).powf(-1.5);
            assert!(
                (p.value(r) / u - 1.0).abs() < 1e-8,
                "r={r}: {}",
                p.value(r) / u
            );
        }
    }

    #[test]
    fn mismatch_away_from_zero_between_eigenvalues() {
        let dim = 3;
        let (a, b) = (pt_nu(dim, 0.0, 0), pt_nu(dim, 0.0, 1));
        let s = shoot_radial(dim, 0.0, 0.5 * (a + b), 1.0).unwrap();
        assert!(s.mismatch.abs() > 1e-2);
    }

    #[test]
    fn third_eigenfunction_has_two_nodes() {
        let mu = pt_nu(4, 0.0, 2);
        assert_eq!(
            shoot_radial(4, 0.0, mu * (1.0 - 1e-9), 1.0).unwrap().nodes,
            2
        );
    }
}
