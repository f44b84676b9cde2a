use std::sync::{Arc, OnceLock};

use crate::angular_spectrum::{first_nontrivial_mode, AngularEigen};
use crate::error::{Error, Result};
use crate::geometry::{critical_exponent, Bubble, CapDescriptor, ConeDomain};
use crate::profile::{Radial, RadialProfile};
use crate::quadrature::{CapQuadrature, RadialGrid};
use crate::spectrum::{lambda1_eigenfunction, ordered_spectrum, radial_eigenfunction, EigenPair};

use super::quotient::best_constant_bubble;
use super::test_function::{
    symmetric_product, symmetric_product_grad_sq, AngularMode, TestFunction,
};

const AXIAL_NODES: (usize, usize) = (48, 24);
const TWO_PLANE_NODES: (usize, usize, usize) = (32, 24, 16);

#[derive(Debug, Clone, Copy)]
struct SymmetricOverlaps {
    mean: f64,
    l2: f64,
    grad: f64,
}

/// Which quadratic form [`ConeProblem::gram`] evaluates, with an extra
/// radial weight `|x|^power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Form {
    Gradient { power: f64 },
    L2 { power: f64 },
}

/// A cone together with its quadrature, bubble normalization and lazily
/// computed angular data. Everything in the functionals module runs
/// against one of these.
#[derive(Debug)]
pub struct ConeProblem {
    cone: ConeDomain,
    grid: RadialGrid,
    measure: f64,
    s_u: f64,
    k0: f64,
    first_mode: OnceLock<Result<Option<Arc<AngularEigen>>>>,
    axial: OnceLock<CapQuadrature>,
    two_plane: OnceLock<CapQuadrature>,
    symmetric: OnceLock<Result<SymmetricOverlaps>>,
}

fn rpow(r: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() < 64.0 {
        r.powi(e as i32)
    } else {
        r.powf(e)
    }
}

impl ConeProblem {
    pub fn new(cone: ConeDomain, grid: RadialGrid) -> Result<Self> {
        let s_u = best_constant_bubble(&cone, &grid)?;
        let n = cone.dim() as f64;
        let p = cone.critical_exponent();
        let k0 = (s_u.powf(-p) * n * (n - 2.0)).powf(1.0 / (p - 2.0));
        Ok(ConeProblem {
            measure: cone.measure(),
            cone,
            grid,
            s_u,
            k0,
            first_mode: OnceLock::new(),
            axial: OnceLock::new(),
            two_plane: OnceLock::new(),
            symmetric: OnceLock::new(),
        })
    }

    pub fn cone(&self) -> &ConeDomain {
        &self.cone
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// Bubble quotient `S_U`.
    pub fn s_u(&self) -> f64 {
        self.s_u
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn critical_exponent(&self) -> f64 {
        critical_exponent(self.dim())
    }

    pub fn bubble(&self) -> Bubble {
        Bubble::new(self.dim(), self.k0)
    }

    pub fn bubble_at(&self, scale: f64) -> TestFunction {
        TestFunction::bubble(self.bubble().rescaled(scale))
    }

    pub fn bubble_scale_derivative_at(&self, scale: f64) -> TestFunction {
        TestFunction::radial(
            self.dim(),
            RadialProfile::BubbleScaleDerivative(self.bubble().rescaled(scale)),
        )
    }

    /// The angular mode realizing `lambda_1` (caps only).
    pub fn first_mode(&self) -> Result<Option<Arc<AngularEigen>>> {
        self.first_mode
            .get_or_init(|| match self.cone.descriptor() {
                CapDescriptor::Cap { theta0 } => {
                    first_nontrivial_mode(self.dim(), theta0, 1).map(|m| Some(Arc::new(m)))
                }
                CapDescriptor::Abstract { .. } => Ok(None),
            })
            .clone()
    }

    pub fn lambda1(&self) -> Result<f64> {
        match self.cone.descriptor() {
            CapDescriptor::Abstract { lambda1, .. } => Ok(lambda1),
            CapDescriptor::Cap { .. } => {
                Ok(self.first_mode()?.expect("caps always carry a mode").lambda)
            }
        }
    }

    pub fn spectrum(&self, count: usize) -> Result<Vec<EigenPair>> {
        ordered_spectrum(self.dim(), self.lambda1()?, self.s_u, count, false)
    }

    /// Closed-form eigenfunction for `pair`, scaled to unit gradient norm.
    pub fn eigenfunction(&self, pair: &EigenPair) -> Result<TestFunction> {
        let f = if pair.angular_index == 0 {
            TestFunction::radial(
                self.dim(),
                radial_eigenfunction(self.dim(), pair.radial_index, self.k0)?,
            )
        } else {
            let lambda = self.lambda1()?;
            TestFunction::zero(self.dim()).with(
                1.0,
                lambda1_eigenfunction(self.dim(), lambda),
                AngularMode::Eigen {
                    lambda,
                    harmonic: self.first_mode()?,
                },
            )
        };
        let norm = self.grad_norm_sq(&f)?.sqrt();
        Ok(f.scaled(1.0 / norm))
    }

    fn axial(&self) -> Result<&CapQuadrature> {
        let theta0 = self.require_cap()?;
        Ok(self
            .axial
            .get_or_init(|| CapQuadrature::axial(self.dim(), theta0, AXIAL_NODES.0, AXIAL_NODES.1)))
    }

    fn two_plane(&self) -> Result<&CapQuadrature> {
        let theta0 = self.require_cap()?;
        Ok(self.two_plane.get_or_init(|| {
            let (a, b, c) = TWO_PLANE_NODES;
            CapQuadrature::two_plane(self.dim(), theta0, a, b, c)
        }))
    }

    fn require_cap(&self) -> Result<f64> {
        self.cone.theta0().ok_or_else(|| {
            Error::UnsupportedAngularMode(
                "pointwise angular integrals need a cap, not an abstract domain".into(),
            )
        })
    }

    fn symmetric(&self) -> Result<SymmetricOverlaps> {
        self.symmetric
            .get_or_init(|| {
                let q = self.two_plane()?;
                Ok(SymmetricOverlaps {
                    mean: q.integrate(symmetric_product),
                    l2: q.integrate(|n| symmetric_product(n).powi(2)),
                    grad: q.integrate(symmetric_product_grad_sq),
                })
            })
            .clone()
    }

    /// `(int_D A B, int_D grad A . grad B)` for two angular modes.
    pub fn mode_overlap(&self, a: &AngularMode, b: &AngularMode) -> Result<(f64, f64)> {
        use AngularMode::*;
        match (a, b) {
            (Constant, Constant) => Ok((self.measure, 0.0)),
            (Constant, Eigen { .. }) | (Eigen { .. }, Constant) => Ok((0.0, 0.0)),
            (Eigen { lambda: la, .. }, Eigen { lambda: lb, .. }) => {
                if la.to_bits() == lb.to_bits() {
                    Ok((1.0, *la))
                } else {
                    Ok((0.0, 0.0))
                }
            }
            (SymmetricProduct, SymmetricProduct) => {
                let s = self.symmetric()?;
                Ok((s.l2, s.grad))
            }
            (SymmetricProduct, Constant) | (Constant, SymmetricProduct) => {
                Ok((self.symmetric()?.mean, 0.0))
            }
            (SymmetricProduct, e @ Eigen { lambda, .. })
            | (e @ Eigen { lambda, .. }, SymmetricProduct) => {
                let q = self.two_plane()?;
                let mut l2 = 0.0;
                for n in &q.nodes {
                    l2 += n.weight * symmetric_product(n) * e.at(n)?;
                }
                // Green's formula against the Neumann eigenfunction.
                Ok((l2, lambda * l2))
            }
        }
    }

    fn shift(&self, funcs: &[&TestFunction]) -> f64 {
        let logs: Vec<f64> = funcs.iter().filter_map(|f| f.log_radius()).collect();
        if logs.is_empty() {
            1.0
        } else {
            (logs.iter().sum::<f64>() / logs.len() as f64).exp()
        }
    }

    /// Bilinear form between `f` and `g` in the requested [`Form`].
    /// Components sharing an angular mode are combined pointwise before
    /// integrating, so nearly cancelling sums keep their precision.
    pub fn gram(&self, f: &TestFunction, g: &TestFunction, form: Form) -> Result<f64> {
        self.gram_on(f, g, form, &self.grid)
    }

    pub(crate) fn gram_on(
        &self,
        f: &TestFunction,
        g: &TestFunction,
        form: Form,
        grid: &RadialGrid,
    ) -> Result<f64> {
        let shift = self.shift(&[f, g]);
        let n = self.dim() as f64;
        let mut total = 0.0;
        for (ma, fa) in f.classes() {
            for (mb, gb) in g.classes() {
                let (l2, gr) = self.mode_overlap(&ma, &mb)?;
                match form {
                    Form::Gradient { power } => {
                        if l2 != 0.0 {
                            let e = n - 1.0 + power;
                            total += l2
                                * grid.quad_scaled(shift, |r| {
                                    fa.derivative(r) * gb.derivative(r) * rpow(r, e)
                                });
                        }
                        if gr != 0.0 {
                            let e = n - 3.0 + power;
                            total += gr
                                * grid
                                    .quad_scaled(shift, |r| fa.value(r) * gb.value(r) * rpow(r, e));
                        }
                    }
                    Form::L2 { power } => {
                        if l2 != 0.0 {
                            let e = n - 1.0 + power;
                            total += l2
                                * grid
                                    .quad_scaled(shift, |r| fa.value(r) * gb.value(r) * rpow(r, e));
                        }
                    }
                }
            }
        }
        if !total.is_finite() {
            return Err(Error::NonConvergent("non-finite inner product".into()));
        }
        Ok(total)
    }

    /// `int grad f . grad g`.
    pub fn grad_inner(&self, f: &TestFunction, g: &TestFunction) -> Result<f64> {
        self.gram(f, g, Form::Gradient { power: 0.0 })
    }

    pub fn grad_norm_sq(&self, f: &TestFunction) -> Result<f64> {
        self.grad_inner(f, f)
    }

    /// `int_{Sigma_D} kernel(f_1(x), ..., f_m(x)) dx`.
    pub fn pointwise_integral(
        &self,
        funcs: &[&TestFunction],
        kernel: impl Fn(&[f64]) -> f64,
    ) -> Result<f64> {
        let shift = self.shift(funcs);
        let nodes = self.grid.nodes();
        let weights = self.grid.weights();
        let e = self.dim() as i32 - 1;
        let radial: Vec<Vec<Vec<f64>>> = funcs
            .iter()
            .map(|f| {
                f.components
                    .iter()
                    .map(|c| {
                        nodes
                            .iter()
                            .map(|&rho| c.coeff * c.radial.value(shift * rho))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let radial_weight: Vec<f64> = nodes
            .iter()
            .zip(weights)
            .map(|(&rho, &w)| shift * w * (shift * rho).powi(e))
            .collect();
        let mut vals = vec![0.0; funcs.len()];
        let total = if funcs.iter().all(|f| f.is_radial()) {
            let mut sum = 0.0;
            for i in 0..nodes.len() {
                for (k, comps) in radial.iter().enumerate() {
                    vals[k] = comps.iter().map(|c| c[i]).sum();
                }
                sum += radial_weight[i] * kernel(&vals);
            }
            self.measure * sum
        } else {
            let two = funcs
                .iter()
                .any(|f| f.components.iter().any(|c| c.mode.needs_two_planes()));
            let quad = if two {
                self.two_plane()?
            } else {
                self.axial()?
            };
            let mut modes: Vec<Vec<Vec<f64>>> = Vec::with_capacity(funcs.len());
            for f in funcs {
                let mut per = Vec::with_capacity(f.components.len());
                for c in &f.components {
                    per.push(
                        quad.nodes
                            .iter()
                            .map(|n| c.mode.at(n))
                            .collect::<Result<Vec<f64>>>()?,
                    );
                }
                modes.push(per);
            }
            let mut sum = 0.0;
            for (a, node) in quad.nodes.iter().enumerate() {
                let mut inner = 0.0;
                for i in 0..nodes.len() {
                    for k in 0..funcs.len() {
                        vals[k] = radial[k]
                            .iter()
                            .zip(&modes[k])
                            .map(|(r, m)| r[i] * m[a])
                            .sum();
                    }
                    inner += radial_weight[i] * kernel(&vals);
                }
                sum += node.weight * inner;
            }
            sum
        };
        if !total.is_finite() {
            return Err(Error::NonConvergent("non-finite pointwise integral".into()));
        }
        Ok(total)
    }
}
