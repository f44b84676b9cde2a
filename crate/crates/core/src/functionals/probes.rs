use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::RadialProfile;
use crate::spectrum::radial_eigenfunction;

use super::problem::ConeProblem;
use super::quotient::{critical_integral, deficit_report, distance_to_manifold};
use super::test_function::{AngularMode, TestFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionRow {
    pub d: f64,
    pub deficit: f64,
    pub distance: f64,
    /// `deficit / d^2`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionProbe {
    pub lambda1: f64,
    /// Angular index of the third eigenfunction used as the direction.
    pub third_angular_index: usize,
    /// `1 - mu_2/mu_3`.
    pub target: f64,
    pub rows: Vec<ExpansionRow>,
    /// Richardson limit from the last three rows (needs ratio-2 spacing).
    pub extrapolated: Option<f64>,
    /// `log2(|R(d) - R(d/2)| / |R(d/2) - R(d/4)|)` from the same rows.
    pub observed_order: Option<f64>,
}

fn third_direction(problem: &ConeProblem) -> Result<(TestFunction, f64, usize)> {
    let lambda1 = problem.lambda1()?;
    let n = problem.dim() as f64;
    if lambda1 <= n - 1.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda1 = {lambda1} <= N-1: the bubble is degenerate"
        )));
    }
    let sp = problem.spectrum(3)?;
    let w = problem.eigenfunction(&sp[2])?;
    Ok((w, 1.0 - sp[1].mu / sp[2].mu, sp[2].angular_index))
}

fn richardson(rows: &[ExpansionRow]) -> (Option<f64>, Option<f64>) {
    if rows.len() < 3 {
        return (None, None);
    }
    let t = &rows[rows.len() - 3..];
    let spaced = |a: f64, b: f64| ((a / b) - 2.0).abs() < 1e-12;
    if !(spaced(t[0].d, t[1].d) && spaced(t[1].d, t[2].d)) {
        return (None, None);
    }
    let (r1, r2, r4) = (t[0].ratio, t[1].ratio, t[2].ratio);
    let ext = (8.0 * r4 - 6.0 * r2 + r1) / 3.0;
    let order = ((r1 - r2).abs() / (r2 - r4).abs()).log2();
    (Some(ext), order.is_finite().then_some(order))
}

/// Deficit of `U + d w_3` for each `d`, with `w_3` the unit third eigenfunction.
pub fn expansion_probe(problem: &ConeProblem, d_values: &[f64]) -> Result<ExpansionProbe> {
    let (w, target, idx) = third_direction(problem)?;
    let u = problem.bubble_at(1.0);
    let mut rows = Vec::with_capacity(d_values.len());
    for &d in d_values {
        if !(d > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "d must be positive, got {d}"
            )));
        }
        let rep = deficit_report(&u.plus(d, &w), problem)?;
        rows.push(ExpansionRow {
            d,
            deficit: rep.deficit,
            distance: rep.distance,
            ratio: rep.deficit / (d * d),
        });
    }
    let (extrapolated, observed_order) = richardson(&rows);
    Ok(ExpansionProbe {
        lambda1: problem.lambda1()?,
        third_angular_index: idx,
        target,
        rows,
        extrapolated,
        observed_order,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoChoice {
    /// The radial third eigenfunction `psi_3`.
    Radial,
    /// `U (omega_i omega_j + omega_i omega_l + omega_j omega_l)` pulled back
    /// from the sphere.
    SymmetricProduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrictnessProbe {
    pub rho: RhoChoice,
    /// `int V^{2*-3} rho^3`.
    pub cubic: f64,
    /// `int V^{2*-4} rho^4`.
    pub quartic: f64,
    /// Sign in front of `eps` making `sign * cubic >= 0`.
    pub sign: f64,
    pub verdict: bool,
    pub eps: f64,
    /// `1 - mu_2/mu_3`.
    pub target: f64,
    /// `deficit / eps^2` for `U + sign eps rho`.
    pub ratio: f64,
    /// `eps S^{2*} (2*-1)(2*-2)/3 |cubic|`, the predicted first-order drop.
    pub predicted_drop: f64,
    /// RMS of the conormal derivative of the angular factor over the cap
    /// boundary. Zero for the radial choice, `None` on abstract domains.
    /// The symmetric product is an exact degree-two spherical harmonic, so
    /// this is its only defect.
    pub neumann_residual: Option<f64>,
}

/// RMS over `sigma in S^{N-2}` of
/// `d/dtheta Z = sin(2 theta0) s1 s2 + cos(2 theta0) (s1 + s2)`.
fn symmetric_product_neumann_rms(dim: usize, theta0: f64) -> f64 {
    let n = (dim - 1) as f64;
    let (s, c) = ((2.0 * theta0).sin(), (2.0 * theta0).cos());
    (s * s / (n * (n + 2.0)) + 2.0 * c * c / n).sqrt()
}

/// Cubic and quartic integrals deciding strict inequality `C_D < c_*`.
pub fn strictness_probe(
    problem: &ConeProblem,
    eps: f64,
    rho: RhoChoice,
) -> Result<StrictnessProbe> {
    let p = problem.critical_exponent();
    let sp = problem.s_u().powf(p);
    let spectrum = problem.spectrum(3)?;
    let target = 1.0 - spectrum[1].mu / spectrum[2].mu;
    let raw = match rho {
        RhoChoice::Radial => TestFunction::radial(
            problem.dim(),
            radial_eigenfunction(problem.dim(), 3, problem.k0())?,
        ),
        // U(x) omega_a omega_b = 4 k0 r^2 (1+r^2)^{-(N-2)/2-2} q_a q_b
        RhoChoice::SymmetricProduct => TestFunction::zero(problem.dim()).with(
            4.0 * problem.k0(),
            RadialProfile::BetaBranch {
                dim: problem.dim(),
                beta: 2.0,
            },
            AngularMode::SymmetricProduct,
        ),
    };
    let rho_fn = raw.scaled(1.0 / problem.grad_norm_sq(&raw)?.sqrt());
    let v = problem.bubble_at(1.0);
    let cubic =
        problem.pointwise_integral(&[&v, &rho_fn], |x| x[0].powf(p - 3.0) * x[1].powi(3))?;
    let quartic =
        problem.pointwise_integral(&[&v, &rho_fn], |x| x[0].powf(p - 4.0) * x[1].powi(4))?;
    let scale =
        problem.pointwise_integral(&[&v, &rho_fn], |x| x[0].powf(p - 3.0) * x[1].abs().powi(3))?;
    let cubic_vanishes = cubic.abs() <= 1e-10 * scale;
    let sign = if cubic_vanishes || cubic > 0.0 {
        1.0
    } else {
        -1.0
    };
    let verdict = !cubic_vanishes || (p > 3.0 && quartic > 0.0);

    let phi = v.plus(sign * eps, &rho_fn);
    let grad = problem.grad_norm_sq(&phi)?;
    let crit = critical_integral(&phi, problem)?.powf(2.0 / p);
    let deficit = grad - problem.s_u().powi(2) * crit;
    Ok(StrictnessProbe {
        rho,
        cubic,
        quartic,
        sign,
        verdict,
        eps,
        target,
        ratio: deficit / (eps * eps),
        predicted_drop: eps * sp * (p - 1.0) * (p - 2.0) / 3.0 * cubic.abs(),
        neumann_residual: match rho {
            RhoChoice::Radial => Some(0.0),
            RhoChoice::SymmetricProduct => problem
                .cone()
                .theta0()
                .map(|t| symmetric_product_neumann_rms(problem.dim(), t)),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub distance: f64,
    pub c0: f64,
    pub s0: f64,
    /// `<grad v, grad V_{s0}>` for `v = (phi - c0 V_{s0}) / d`.
    pub orthogonality_value: f64,
    /// `<grad v, grad dV_s/ds at s0>`.
    pub orthogonality_scale: f64,
    /// `int V_{s0}^{2*-2} v^2`.
    pub weighted_l2: f64,
    /// `1/mu_3`.
    pub bound: f64,
}

/// `phi = c0 V_{s0} + d v` together with the orthogonality residuals and
/// the weighted bound on `v`.
pub fn decomposition(phi: &TestFunction, problem: &ConeProblem) -> Result<Decomposition> {
    let dist = distance_to_manifold(phi, problem)?;
    if dist.distance == 0.0 {
        return Err(Error::InvalidParameter("phi lies on the manifold".into()));
    }
    let p = problem.critical_exponent();
    let vs = problem.bubble_at(dist.s0);
    let v = phi.plus(-dist.c0, &vs).scaled(1.0 / dist.distance);
    let orthogonality_value = problem.grad_inner(&v, &vs)?;
    let orthogonality_scale =
        problem.grad_inner(&v, &problem.bubble_scale_derivative_at(dist.s0))?;
    let weighted_l2 =
        problem.pointwise_integral(&[&vs, &v], |x| x[0].powf(p - 2.0) * x[1] * x[1])?;
    let mu3 = problem.spectrum(3)?[2].mu;
    Ok(Decomposition {
        distance: dist.distance,
        c0: dist.c0,
        s0: dist.s0,
        orthogonality_value,
        orthogonality_scale,
        weighted_l2,
        bound: 1.0 / mu3,
    })
}
