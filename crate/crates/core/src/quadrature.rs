//! Radial quadrature on `(0, inf)` and angular quadrature on geodesic caps.
//!
//! Every integral over a cone reduces either to `int_0^inf f(r) r^{N-1} dr`
//! times an angular factor, or (for non-separated integrands such as
//! `|phi|^{2*}` with angular dependence) to a product rule over the radius
//! and the cap.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{sphere_measure, ConeDomain};
use crate::profile::Radial;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussTable {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn compute_gauss_legendre(n: usize) -> GaussTable {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        // Tricomi initial guess for the i-th root from the top.
        let mut x = ((i as f64 + 0.75) / (nf + 0.5) * PI).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = p0;
            dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussTable { nodes, weights }
}

/// Cached Gauss–Legendre table with `n` points, nodes increasing.
pub fn gauss_legendre(n: usize) -> Arc<GaussTable> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("gauss table cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(compute_gauss_legendre(n)))
        .clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    /// `r = t/(1-t)` with Gauss–Legendre nodes in `t`.
    RationalMap,
    /// `r = exp((pi/2) sinh tau)` with the trapezoid rule in `tau`.
    DoubleExponential,
}

pub const DEFAULT_GRID_SIZE: usize = 256;

/// Default agreement demanded between a grid and its refinement.
pub const REFINEMENT_TOLERANCE: f64 = 1e-9;

const DE_HALF_WIDTH: f64 = 3.6;

#[derive(Debug, Clone)]
pub struct RadialGrid {
    map: MapKind,
    size: usize,
    verify: bool,
    nodes: Arc<Vec<f64>>,
    weights: Arc<Vec<f64>>,
    refined: Arc<OnceLock<RadialGrid>>,
}

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid::new(DEFAULT_GRID_SIZE, MapKind::RationalMap)
    }
}

impl RadialGrid {
    pub fn new(size: usize, map: MapKind) -> Self {
        assert!(size >= 8, "radial grid needs at least 8 nodes");
        let (nodes, weights) = match map {
            MapKind::RationalMap => {
                let table = gauss_legendre(size);
                table
                    .nodes
                    .iter()
                    .zip(&table.weights)
                    .map(|(x, w)| {
                        let t = 0.5 * (x + 1.0);
                        let one_minus = 1.0 - t;
                        (t / one_minus, 0.5 * w / (one_minus * one_minus))
                    })
                    .unzip()
            }
            MapKind::DoubleExponential => {
                let h = 2.0 * DE_HALF_WIDTH / (size as f64 - 1.0);
                (0..size)
                    .map(|i| {
                        let tau = -DE_HALF_WIDTH + i as f64 * h;
                        let r = (FRAC_PI_2 * tau.sinh()).exp();
                        (r, h * FRAC_PI_2 * tau.cosh() * r)
                    })
                    .unzip()
            }
        };
        RadialGrid {
            map,
            size,
            verify: false,
            nodes: Arc::new(nodes),
            weights: Arc::new(weights),
            refined: Arc::new(OnceLock::new()),
        }
    }

    /// Same grid with two-grid agreement checks switched on.
    pub fn verification(mut self) -> Self {
        self.verify = true;
        self
    }

    pub fn is_verifying(&self) -> bool {
        self.verify
    }

    pub fn map(&self) -> MapKind {
        self.map
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The grid with twice as many nodes and the same map.
    pub fn refined(&self) -> &RadialGrid {
        self.refined
            .get_or_init(|| RadialGrid::new(2 * self.size, self.map))
    }

    /// Plain weighted sum approximating `int_0^inf g(r) dr`.
    pub fn quad(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(|(&r, &w)| w * g(r))
            .sum()
    }

    /// `int_0^inf g(r) dr` evaluated after the substitution `r = c rho`.
    pub fn quad_scaled(&self, scale: f64, g: impl Fn(f64) -> f64) -> f64 {
        scale * self.quad(|rho| g(scale * rho))
    }
}

fn checked_sum(g: &dyn Fn(f64) -> f64, grid: &RadialGrid, what: &str) -> Result<f64> {
    let mut total = 0.0;
    let mut magnitude = 0.0;
    for (&r, &w) in grid.nodes().iter().zip(grid.weights()) {
        let v = w * g(r);
        total += v;
        magnitude += v.abs();
    }
    if !total.is_finite() {
        return Err(Error::NonConvergent(format!(
            "{what}: non-finite quadrature sum"
        )));
    }
    if grid.is_verifying() {
        let fine: f64 = grid.refined().quad(g);
        let tol = REFINEMENT_TOLERANCE * magnitude.max(fine.abs()) + 1e-300;
        if !fine.is_finite() || (fine - total).abs() > tol {
            return Err(Error::NonConvergent(format!(
                "{what}: grids of {} and {} nodes disagree ({total:e} vs {fine:e})",
                grid.size(),
                2 * grid.size()
            )));
        }
    }
    Ok(total)
}

/// `int_0^inf f(r) r^{N-1} dr`.
pub fn integrate_radial(f: impl Fn(f64) -> f64, dim: usize, grid: &RadialGrid) -> Result<f64> {
    let p = dim as i32 - 1;
    checked_sum(&|r| f(r) * r.powi(p), grid, "radial integral")
}

/// `int_{Sigma_D} f dx` for `f = radial_part(r) * (angular density)`, where
/// `angular_factor` is the integral of the angular density over `D`.
pub fn integrate_cone(
    radial_part: impl Fn(f64) -> f64,
    cone: &ConeDomain,
    angular_factor: f64,
    grid: &RadialGrid,
) -> Result<f64> {
    if angular_factor == 0.0 {
        return Ok(0.0);
    }
    Ok(angular_factor * integrate_radial(radial_part, cone.dim(), grid)?)
}

/// `int grad(f Y) . grad(g Y) dx` for profiles sharing one normalized
/// angular eigenfunction `Y` of eigenvalue `lambda_j`:
/// `int f'g' r^{N-1} dr + lambda_j int f g r^{N-3} dr`.
///
/// The `r^{N-3}` term is always cross-checked on the refined grid, since it
/// is the one that diverges for profiles inadmissible at that angular index.
pub fn grad_inner<F: Radial, G: Radial>(
    f: &F,
    g: &G,
    lambda_j: f64,
    dim: usize,
    grid: &RadialGrid,
) -> Result<f64> {
    let p = dim as i32 - 1;
    let radial = checked_sum(
        &|r| f.derivative(r) * g.derivative(r) * r.powi(p),
        grid,
        "gradient inner product",
    )?;
    if lambda_j == 0.0 {
        return Ok(radial);
    }
    let q = dim as i32 - 3;
    let integrand = |r: f64| f.value(r) * g.value(r) * r.powi(q);
    let hardy_term = checked_sum(
        &integrand,
        &grid.clone().verification(),
        "angular gradient term",
    )?;
    Ok(radial + lambda_j * hardy_term)
}

/// One node of a quadrature over a geodesic cap around the pole `e_N`.
///
/// A point of the cap is `q = (sin(theta) sigma, cos(theta))` with
/// `sigma` on `S^{N-2}`; only the first two components of `sigma` are
/// resolved, the rest integrate out analytically.
#[derive(Debug, Clone, Copy)]
pub struct AngularNode {
    pub weight: f64,
    pub theta: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl AngularNode {
    pub fn q1(&self) -> f64 {
        self.theta.sin() * self.sigma1
    }
    pub fn q2(&self) -> f64 {
        self.theta.sin() * self.sigma2
    }
    pub fn q_axis(&self) -> f64 {
        self.theta.cos()
    }
}

#[derive(Debug, Clone)]
pub struct CapQuadrature {
    pub dim: usize,
    pub theta0: f64,
    /// Whether `sigma2` is resolved (otherwise it is set to zero).
    pub resolves_two_planes: bool,
    pub nodes: Vec<AngularNode>,
}

fn mapped(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let table = gauss_legendre(n);
    let half = 0.5 * (b - a);
    table
        .nodes
        .iter()
        .zip(&table.weights)
        .map(|(x, w)| (a + half * (x + 1.0), half * w))
        .collect()
}

impl CapQuadrature {
    /// Quadrature exact for integrands depending on `(theta, sigma1)` only.
    pub fn axial(dim: usize, theta0: f64, n_theta: usize, n_alpha: usize) -> Self {
        let thetas = mapped(n_theta, 0.0, theta0);
        let alphas = mapped(n_alpha, 0.0, PI);
        let inner = sphere_measure(dim - 3);
        let mut nodes = Vec::with_capacity(n_theta * n_alpha);
        for &(theta, wt) in &thetas {
            let radial_w = wt * theta.sin().powi(dim as i32 - 2);
            for &(alpha, wa) in &alphas {
                nodes.push(AngularNode {
                    weight: radial_w * wa * inner * alpha.sin().powi(dim as i32 - 3),
                    theta,
                    sigma1: alpha.cos(),
                    sigma2: 0.0,
                });
            }
        }
        CapQuadrature {
            dim,
            theta0,
            resolves_two_planes: false,
            nodes,
        }
    }

    /// Quadrature for integrands depending on `(theta, sigma1, sigma2)`.
    pub fn two_plane(
        dim: usize,
        theta0: f64,
        n_theta: usize,
        n_alpha: usize,
        n_beta: usize,
    ) -> Self {
        let thetas = mapped(n_theta, 0.0, theta0);
        let alphas = mapped(n_alpha, 0.0, PI);
        let mut nodes = Vec::new();
        for &(theta, wt) in &thetas {
            let radial_w = wt * theta.sin().powi(dim as i32 - 2);
            for &(alpha, wa) in &alphas {
                if dim == 3 {
                    // sigma = (cos a, +-sin a) on the circle
                    for sign in [1.0, -1.0] {
                        nodes.push(AngularNode {
                            weight: radial_w * wa,
                            theta,
                            sigma1: alpha.cos(),
                            sigma2: sign * alpha.sin(),
                        });
                    }
                } else {
                    let inner = sphere_measure(dim - 4);
                    for &(beta, wb) in &mapped(n_beta, 0.0, PI) {
                        nodes.push(AngularNode {
                            weight: radial_w
                                * wa
                                * wb
                                * inner
                                * alpha.sin().powi(dim as i32 - 3)
                                * beta.sin().powi(dim as i32 - 4),
                            theta,
                            sigma1: alpha.cos(),
                            sigma2: alpha.sin() * beta.cos(),
                        });
                    }
                }
            }
        }
        CapQuadrature {
            dim,
            theta0,
            resolves_two_planes: true,
            nodes,
        }
    }

    pub fn integrate(&self, f: impl Fn(&AngularNode) -> f64) -> f64 {
        self.nodes.iter().map(|n| n.weight * f(n)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cap_measure;
    use statrs::function::beta::beta;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let t = gauss_legendre(12);
        for k in 0..24 {
            let approx: f64 = t
                .nodes
                .iter()
                .zip(&t.weights)
                .map(|(x, w)| w * x.powi(k))
                .sum();
            let exact = if k % 2 == 1 {
                0.0
            } else {
                2.0 / (k as f64 + 1.0)
            };
            assert!((approx - exact).abs() < 1e-14, "k={k}");
        }
        assert!(t.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_nodes_increase_and_weights_positive() {
        for map in [MapKind::RationalMap, MapKind::DoubleExponential] {
            let g = RadialGrid::new(128, map);
            assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(g.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn beta_integral_reproduced() {
        // int_0^inf r^{N-1} (1+r^2)^{-N} dr = B(N/2, N/2)/2
        for map in [MapKind::RationalMap, MapKind::DoubleExponential] {
            let grid = RadialGrid::new(DEFAULT_GRID_SIZE, map);
            for n in 3..=8usize {
                let exact = 0.5 * beta(n as f64 / 2.0, n as f64 / 2.0);
                let approx =
                    integrate_radial(|r| (1.0 + r * r).powi(-(n as i32)), n, &grid).unwrap();
                assert!(((approx - exact) / exact).abs() < 1e-10, "{map:?} N={n}");
            }
        }
    }

    #[test]
    fn integrate_radial_examples() {
        let grid = RadialGrid::default().verification();
        let v = integrate_radial(|r| (1.0 + r * r).powi(-3), 3, &grid).unwrap();
        assert!((v - PI / 16.0).abs() < 1e-13);
        assert_eq!(integrate_radial(|_| 0.0, 3, &grid).unwrap(), 0.0);
        let v = integrate_radial(|r| (-r).exp(), 3, &grid).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn divergent_integral_detected() {
        // int_0^inf r^{-3/2} r^{2} e^{-r} / r^2 ... weight r^{N-1} with f ~ r^{-3.5} near 0
        let grid = RadialGrid::default().verification();
        let err = integrate_radial(|r| r.powf(-3.5) * (-r).exp(), 3, &grid).unwrap_err();
        assert!(matches!(err, Error::NonConvergent(_)));
    }

    #[test]
    fn cone_identity_between_power_integrals() {
        let grid = RadialGrid::default();
        for n in 3..=6usize {
            let cone = ConeDomain::cap(n, 0.9).unwrap();
            let m = cone.measure();
            let lhs = integrate_cone(|r| (1.0 + r * r).powi(-(n as i32)) * r * r, &cone, m, &grid)
                .unwrap();
            let rhs = integrate_cone(|r| (1.0 + r * r).powi(1 - n as i32), &cone, m, &grid)
                .unwrap()
                * n as f64
                / (2.0 * (n as f64 - 1.0));
            assert!(((lhs - rhs) / rhs).abs() < 1e-9);
            assert_eq!(integrate_cone(|r| r, &cone, 0.0, &grid).unwrap(), 0.0);
        }
    }

    #[test]
    fn cap_quadratures_measure_the_cap() {
        for dim in 3..=6 {
            let theta0 = 1.1;
            let exact = cap_measure(dim, theta0).unwrap();
            let ax = CapQuadrature::axial(dim, theta0, 24, 24);
            assert!((ax.integrate(|_| 1.0) - exact).abs() < 1e-12 * exact);
            let tp = CapQuadrature::two_plane(dim, theta0, 24, 24, 16);
            assert!((tp.integrate(|_| 1.0) - exact).abs() < 1e-12 * exact);
            // odd moments vanish
            assert!(tp.integrate(|n| n.q1() * n.q2() * n.q2()).abs() < 1e-14);
            // second moment of sigma1 on S^{N-2} is 1/(N-1)
            let ref_val = exact / (dim as f64 - 1.0);
            assert!((ax.integrate(|n| n.sigma1 * n.sigma1) - ref_val).abs() < 1e-12);
            assert!((tp.integrate(|n| n.sigma2 * n.sigma2) - ref_val).abs() < 1e-12);
        }
    }
}
