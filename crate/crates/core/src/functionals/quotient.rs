use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Bubble, ConeDomain};
use crate::profile::Radial;
use crate::quadrature::{integrate_radial, RadialGrid};

use super::problem::ConeProblem;
use super::test_function::TestFunction;

/// `S_U = Q_D(U)`, the Sobolev quotient of the bubble on the cone.
pub fn best_constant_bubble(cone: &ConeDomain, grid: &RadialGrid) -> Result<f64> {
    let dim = cone.dim();
    let p = cone.critical_exponent();
    let u = Bubble::new(dim, 1.0);
    let grad = cone.measure() * integrate_radial(|r| u.derivative(r).powi(2), dim, grid)?;
    let crit = cone.measure() * integrate_radial(|r| u.value(r).powf(p), dim, grid)?;
    if !(grad > 0.0 && crit > 0.0) {
        return Err(Error::QuadratureFailure(
            "bubble integrals are not positive".into(),
        ));
    }
    Ok(grad.sqrt() / crit.powf(1.0 / p))
}

/// `int |phi|^{2*}`.
pub fn critical_integral(phi: &TestFunction, problem: &ConeProblem) -> Result<f64> {
    let p = problem.critical_exponent();
    problem.pointwise_integral(&[phi], |v| v[0].abs().powf(p))
}

/// `Q_D(phi) = ||grad phi||_2 / ||phi||_{2*}`.
pub fn sobolev_quotient(phi: &TestFunction, problem: &ConeProblem) -> Result<f64> {
    let grad = problem.grad_norm_sq(phi)?;
    let crit = critical_integral(phi, problem)?;
    if grad <= 0.0 || crit <= 0.0 {
        return Err(Error::ZeroFunction);
    }
    Ok(grad.sqrt() / crit.powf(1.0 / problem.critical_exponent()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distance {
    pub distance: f64,
    pub c0: f64,
    pub s0: f64,
    /// Two nearly equal maxima were found over the scale scan.
    pub multimodal: bool,
}

const LOG_SCALE_RANGE: f64 = 6.0;
const COARSE_POINTS: usize = 121;
const GOLDEN_TOLERANCE: f64 = 1e-10;

fn golden_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// `d(phi, M)` for the bubble manifold `{c U_s}`: the optimal `c` is
/// eliminated in closed form and `log s` is found by a coarse scan, golden
/// section and a final secant step on the stationarity condition.
pub fn distance_to_manifold(phi: &TestFunction, problem: &ConeProblem) -> Result<Distance> {
    let grad_sq = problem.grad_norm_sq(phi)?;
    if grad_sq == 0.0 {
        return Ok(Distance {
            distance: 0.0,
            c0: 0.0,
            s0: 1.0,
            multimodal: false,
        });
    }
    let overlap = |t: f64| problem.grad_inner(phi, &problem.bubble_at(t.exp()));
    let objective = |t: f64| overlap(t).map(|v| v * v);

    let step = 2.0 * LOG_SCALE_RANGE / (COARSE_POINTS - 1) as f64;
    let ts: Vec<f64> = (0..COARSE_POINTS)
        .map(|i| -LOG_SCALE_RANGE + i as f64 * step)
        .collect();
    let vals = ts
        .iter()
        .map(|&t| objective(t))
        .collect::<Result<Vec<f64>>>()?;
    let best = (0..COARSE_POINTS)
        .max_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap())
        .unwrap();
    let maxima: Vec<usize> = (0..COARSE_POINTS)
        .filter(|&i| {
            (i == 0 || vals[i] >= vals[i - 1]) && (i + 1 == COARSE_POINTS || vals[i] > vals[i + 1])
        })
        .collect();
    let multimodal = maxima
        .iter()
        .filter(|&&i| i != best && (vals[best] - vals[i]).abs() <= 1e-6 * vals[best])
        .any(|&i| i.abs_diff(best) > 1);

    let lo = ts[best.saturating_sub(1)];
    let hi = ts[(best + 1).min(COARSE_POINTS - 1)];
    let mut t = golden_max(objective, lo, hi, GOLDEN_TOLERANCE)?;

    // Secant on d/ds <grad phi, grad U_s> = <grad phi, grad dU_s/ds>.
    let slope = |t: f64| problem.grad_inner(phi, &problem.bubble_scale_derivative_at(t.exp()));
    let mut t_prev = t + 1e-6;
    let mut g_prev = slope(t_prev)?;
    let mut g = slope(t)?;
    for _ in 0..30 {
        if g == 0.0 || g == g_prev {
            break;
        }
        let next = t - g * (t - t_prev) / (g - g_prev);
        if !(next >= lo && next <= hi) {
            break;
        }
        let g_next = slope(next)?;
        if g_next.abs() >= g.abs() {
            break;
        }
        t_prev = t;
        g_prev = g;
        t = next;
        g = g_next;
    }

    let s0 = t.exp();
    let c0 = overlap(t)?;
    let residual = phi.plus(-c0, &problem.bubble_at(s0));
    let d2 = problem.grad_norm_sq(&residual)?.max(0.0);
    Ok(Distance {
        distance: d2.sqrt(),
        c0,
        s0,
        multimodal,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeficitReport {
    pub grad_norm_sq: f64,
    pub crit_norm_sq: f64,
    /// The bubble quotient `S_U`; the true `S_D` of a general cone is unknown.
    pub s_used: f64,
    pub deficit: f64,
    pub distance: f64,
    /// `deficit / distance^2`, absent when the distance vanishes.
    pub quotient: Option<f64>,
    pub c0: f64,
    pub s0: f64,
}

pub fn deficit_report(phi: &TestFunction, problem: &ConeProblem) -> Result<DeficitReport> {
    let grad = problem.grad_norm_sq(phi)?;
    let crit = critical_integral(phi, problem)?;
    if grad <= 0.0 || crit <= 0.0 {
        return Err(Error::ZeroFunction);
    }
    let crit_norm_sq = crit.powf(2.0 / problem.critical_exponent());
    let s = problem.s_u();
    let deficit = grad - s * s * crit_norm_sq;
    let dist = distance_to_manifold(phi, problem)?;
    let quotient = (dist.distance > 0.0).then(|| deficit / (dist.distance * dist.distance));
    Ok(DeficitReport {
        grad_norm_sq: grad,
        crit_norm_sq,
        s_used: s,
        deficit,
        distance: dist.distance,
        quotient,
        c0: dist.c0,
        s0: dist.s0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cap_measure;
    use statrs::function::gamma::gamma;
    use std::f64::consts::PI;

    fn full_space_constant(n: f64) -> f64 {
        (PI * n * (n - 2.0)).sqrt() * (gamma(n / 2.0) / gamma(n)).powf(1.0 / n)
    }

    #[test]
    fn bubble_quotient_scales_with_cap_measure() {
        let grid = RadialGrid::default();
        for dim in 3..=6 {
            let a = ConeDomain::cap(dim, 0.4).unwrap();
            let b = ConeDomain::cap(dim, 1.2).unwrap();
            let ratio =
                best_constant_bubble(&a, &grid).unwrap() / best_constant_bubble(&b, &grid).unwrap();
            let expect = (a.measure() / b.measure()).powf(1.0 / dim as f64);
            assert!((ratio - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn near_hemisphere_matches_half_of_full_space() {
        let grid = RadialGrid::default();
        for dim in 3..=6 {
            let n = dim as f64;
            let cone = ConeDomain::cap(dim, std::f64::consts::FRAC_PI_2 - 1e-9).unwrap();
            let s = best_constant_bubble(&cone, &grid).unwrap();
            let expect = 2f64.powf(-1.0 / n) * full_space_constant(n);
            let frac = (cap_measure(dim, cone.theta0().unwrap()).unwrap()
                / cap_measure(dim, std::f64::consts::FRAC_PI_2).unwrap())
            .powf(1.0 / n);
            assert!((s - expect * frac).abs() < 1e-10 * s, "N={dim}");
        }
    }

    #[test]
    fn quotient_invariances() {
        let p = ConeProblem::new(ConeDomain::cap(3, 0.8).unwrap(), RadialGrid::default()).unwrap();
        let base = sobolev_quotient(&p.bubble_at(1.0), &p).unwrap();
        assert!((base - p.s_u()).abs() < 1e-12);
        for s in [0.3, 2.0, 7.0] {
            for c in [0.5, 3.0, -2.0] {
                let q = sobolev_quotient(&p.bubble_at(s).scaled(c), &p).unwrap();
                assert!((q - base).abs() < 1e-10 * base, "s={s} c={c}");
            }
        }
        assert_eq!(
            sobolev_quotient(&TestFunction::zero(3), &p),
            Err(Error::ZeroFunction)
        );
    }

    #[test]
    fn distance_of_points_on_the_manifold() {
        let p = ConeProblem::new(ConeDomain::cap(4, 0.9).unwrap(), RadialGrid::default()).unwrap();
        let d = distance_to_manifold(&p.bubble_at(3.0).scaled(5.0), &p).unwrap();
        assert!(d.distance < 1e-8, "{d:?}");
        assert!((d.c0 - 5.0).abs() < 1e-9);
        assert!((d.s0 - 3.0).abs() < 1e-8);
        assert!(!d.multimodal);
    }
}
