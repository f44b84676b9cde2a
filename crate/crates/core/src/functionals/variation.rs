use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{MapKind, RadialGrid};

use super::problem::{ConeProblem, Form};
use super::test_function::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondVariation {
    /// The full quadratic form at the normalized bubble.
    pub full: f64,
    /// `int |grad eta|^2 + (2*-2) (int grad V . grad eta)^2 - (2*-1) S^{2*} int V^{2*-2} eta^2`,
    /// equal to `full` once `int grad V . grad eta = S^{2*} int V^{2*-1} eta` is used.
    pub reduced: f64,
    pub grad_norm_sq: f64,
    /// `int V^{2*-2} eta^2`.
    pub weighted_l2: f64,
}

/// Second variation of the Sobolev quotient at `V = U` (unit gradient norm).
pub fn second_variation(eta: &TestFunction, problem: &ConeProblem) -> Result<SecondVariation> {
    let p = problem.critical_exponent();
    let sp = problem.s_u().powf(p);
    let v = problem.bubble_at(1.0);
    let grad = problem.grad_norm_sq(eta)?;
    let cross = problem.grad_inner(&v, eta)?;
    let a = problem.pointwise_integral(&[&v, eta], |x| x[0].powf(p - 1.0) * x[1])?;
    let c = problem.pointwise_integral(&[&v, eta], |x| x[0].powf(p - 2.0) * x[1] * x[1])?;
    let full = grad - 4.0 * sp * a * cross + sp * (-(p - 1.0) * c + sp * (p + 2.0) * a * a);
    let reduced = grad + (p - 2.0) * cross * cross - (p - 1.0) * sp * c;
    Ok(SecondVariation {
        full,
        reduced,
        grad_norm_sq: grad,
        weighted_l2: c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, or 0 when both sides vanish.
    pub ratio: f64,
}

fn hardy_sides(
    u: &TestFunction,
    problem: &ConeProblem,
    eps: f64,
    grid: &RadialGrid,
) -> Result<(f64, f64)> {
    let n = problem.dim() as f64;
    let c = (n - 4.0 + 2.0 * eps).powi(2) / 4.0;
    let l2 = problem.gram_on(
        u,
        u,
        Form::L2 {
            power: -(4.0 - 2.0 * eps),
        },
        grid,
    )?;
    let grad = problem.gram_on(
        u,
        u,
        Form::Gradient {
            power: -(2.0 - 2.0 * eps),
        },
        grid,
    )?;
    Ok((c * l2, grad))
}

fn agree(a: (f64, f64), b: (f64, f64)) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()) + 1e-300;
    close(a.0, b.0) && close(a.1, b.1)
}

/// Both sides of the weighted Hardy inequality
/// `(N-4+2 eps)^2/4 int u^2 |x|^{2 eps - 4} <= int |grad u|^2 |x|^{2 eps - 2}`.
///
/// Each side is accepted only if a grid and its refinement agree, first
/// with the rational map and then with the double-exponential map.
pub fn hardy_check(u: &TestFunction, problem: &ConeProblem, eps: f64) -> Result<HardyCheck> {
    if eps < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "eps must be >= 0, got {eps}"
        )));
    }
    if u.components.iter().all(|c| c.coeff == 0.0) {
        return Ok(HardyCheck {
            lhs: 0.0,
            rhs: 0.0,
            ratio: 0.0,
        });
    }
    let size = problem.grid().size();
    let mut last = None;
    for map in [MapKind::RationalMap, MapKind::DoubleExponential] {
        let grid = RadialGrid::new(size, map);
        let coarse = hardy_sides(u, problem, eps, &grid);
        let fine = hardy_sides(u, problem, eps, grid.refined());
        match (coarse, fine) {
            (Ok(a), Ok(b)) if agree(a, b) => {
                let ratio = if b.1 == 0.0 { 0.0 } else { b.0 / b.1 };
                return Ok(HardyCheck {
                    lhs: b.0,
                    rhs: b.1,
                    ratio,
                });
            }
            (Ok(a), Ok(b)) => last = Some(format!("{a:?} vs {b:?}")),
            (Err(e), _) | (_, Err(e)) => last = Some(e.to_string()),
        }
    }
    Err(Error::DivergentIntegral(format!(
        "Hardy integrals did not converge: {}",
        last.unwrap_or_default()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConeDomain;
    use crate::profile::RadialProfile;

    #[test]
    fn gaussian_example_n5() {
        let p = ConeProblem::new(ConeDomain::cap(5, 1.0).unwrap(), RadialGrid::default()).unwrap();
        let u = TestFunction::radial(
            5,
            RadialProfile::PowerGaussian {
                power: 2.0,
                coeffs: vec![1.0],
                decay: 1.0,
            },
        );
        let h = hardy_check(&u, &p, 0.0).unwrap();
        assert!(h.ratio <= 1.0 && h.ratio > 0.0);
    }

    #[test]
    fn zero_function() {
        let p = ConeProblem::new(ConeDomain::cap(3, 1.0).unwrap(), RadialGrid::default()).unwrap();
        let h = hardy_check(&TestFunction::zero(3), &p, 0.0).unwrap();
        assert_eq!((h.lhs, h.rhs, h.ratio), (0.0, 0.0, 0.0));
    }

    #[test]
    fn divergent_weight_reported() {
        let p = ConeProblem::new(ConeDomain::cap(3, 1.0).unwrap(), RadialGrid::default()).unwrap();
        // u ~ 1 at the origin makes int u^2 |x|^{-4} r^2 dr diverge for N = 3.
        let u = TestFunction::radial(
            3,
            RadialProfile::PowerGaussian {
                power: 0.0,
                coeffs: vec![1.0],
                decay: 1.0,
            },
        );
        assert!(matches!(
            hardy_check(&u, &p, 0.0),
            Err(Error::DivergentIntegral(_))
        ));
    }

    #[test]
    fn bubble_second_variation_vanishes_on_tangent_space() {
        let p = ConeProblem::new(ConeDomain::cap(3, 0.6).unwrap(), RadialGrid::default()).unwrap();
        for eta in [p.bubble_at(1.0), p.bubble_scale_derivative_at(1.0)] {
            let q = second_variation(&eta, &p).unwrap();
            assert!(q.full.abs() < 1e-10, "{q:?}");
            assert!(q.reduced.abs() < 1e-10, "{q:?}");
        }
    }
}
