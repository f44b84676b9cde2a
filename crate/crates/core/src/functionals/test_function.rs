use std::sync::Arc;

use crate::angular_spectrum::AngularEigen;
use crate::error::{Error, Result};
use crate::geometry::Bubble;
use crate::profile::{Radial, RadialProfile};
use crate::quadrature::AngularNode;

/// Angular factor of one separated component.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularMode {
    /// The constant function 1 on `D` (not normalized).
    Constant,
    /// A Neumann eigenfunction with unit `L^2(D)` norm. The pointwise
    /// harmonic is only available for caps.
    Eigen {
        lambda: f64,
        harmonic: Option<Arc<AngularEigen>>,
    },
    /// `q1 q2 + q1 qN + q2 qN` restricted to the cap.
    SymmetricProduct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ModeKey {
    Constant,
    Eigen(u64),
    Symmetric,
}

impl AngularMode {
    pub(crate) fn key(&self) -> ModeKey {
        match self {
            AngularMode::Constant => ModeKey::Constant,
            AngularMode::Eigen { lambda, .. } => ModeKey::Eigen(lambda.to_bits()),
            AngularMode::SymmetricProduct => ModeKey::Symmetric,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, AngularMode::Constant)
    }

    pub(crate) fn needs_two_planes(&self) -> bool {
        matches!(self, AngularMode::SymmetricProduct)
    }

    pub(crate) fn at(&self, node: &AngularNode) -> Result<f64> {
        match self {
            AngularMode::Constant => Ok(1.0),
            AngularMode::Eigen {
                harmonic: Some(h), ..
            } => Ok(h.eval(node.theta, node.sigma1)),
            AngularMode::Eigen {
                lambda,
                harmonic: None,
            } => Err(Error::UnsupportedAngularMode(format!(
                "eigenfunction with lambda = {lambda} has no pointwise representation"
            ))),
            AngularMode::SymmetricProduct => Ok(symmetric_product(node)),
        }
    }
}

pub(crate) fn symmetric_product(node: &AngularNode) -> f64 {
    let (a, b, c) = (node.q1(), node.q2(), node.q_axis());
    a * b + a * c + b * c
}

/// `|grad_S Z|^2 = |grad Z|^2 - (2Z)^2` for the degree-two form `Z`.
pub(crate) fn symmetric_product_grad_sq(node: &AngularNode) -> f64 {
    let (a, b, c) = (node.q1(), node.q2(), node.q_axis());
    let z = a * b + a * c + b * c;
    (b + c).powi(2) + (a + c).powi(2) + (a + b).powi(2) - 4.0 * z * z
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub coeff: f64,
    pub radial: RadialProfile,
    pub mode: AngularMode,
}

/// A finite sum of separated functions `c R(r) A(q)` on the cone.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub dim: usize,
    pub components: Vec<Component>,
}

impl TestFunction {
    pub fn zero(dim: usize) -> Self {
        TestFunction {
            dim,
            components: Vec::new(),
        }
    }

    pub fn radial(dim: usize, radial: RadialProfile) -> Self {
        TestFunction::zero(dim).with(1.0, radial, AngularMode::Constant)
    }

    pub fn bubble(bubble: Bubble) -> Self {
        TestFunction::radial(bubble.dim, RadialProfile::Bubble(bubble))
    }

    pub fn with(mut self, coeff: f64, radial: RadialProfile, mode: AngularMode) -> Self {
        self.components.push(Component {
            coeff,
            radial,
            mode,
        });
        self
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for comp in &mut out.components {
            comp.coeff *= c;
        }
        out
    }

    /// `self + c * other`.
    pub fn plus(&self, c: f64, other: &TestFunction) -> Self {
        let mut out = self.clone();
        out.components.extend(other.scaled(c).components);
        out
    }

    pub fn is_radial(&self) -> bool {
        self.components.iter().all(|c| c.mode.is_constant())
    }

    pub(crate) fn log_radius(&self) -> Option<f64> {
        if self.components.is_empty() {
            return None;
        }
        let sum: f64 = self
            .components
            .iter()
            .map(|c| c.radial.characteristic_radius().ln())
            .sum();
        Some(sum / self.components.len() as f64)
    }

    /// Components grouped by angular mode, in first-appearance order.
    pub(crate) fn classes(&self) -> Vec<(AngularMode, Combo<'_>)> {
        let mut out: Vec<(AngularMode, Combo<'_>)> = Vec::new();
        for comp in &self.components {
            let key = comp.mode.key();
            match out.iter_mut().find(|(m, _)| m.key() == key) {
                Some((_, combo)) => combo.terms.push((comp.coeff, &comp.radial)),
                None => out.push((
                    comp.mode.clone(),
                    Combo {
                        terms: vec![(comp.coeff, &comp.radial)],
                    },
                )),
            }
        }
        out
    }
}

/// Pointwise linear combination of radial profiles.
#[derive(Debug, Clone)]
pub(crate) struct Combo<'a> {
    pub terms: Vec<(f64, &'a RadialProfile)>,
}

impl Radial for Combo<'_> {
    fn value(&self, r: f64) -> f64 {
        self.terms.iter().map(|(c, p)| c * p.value(r)).sum()
    }
    fn derivative(&self, r: f64) -> f64 {
        self.terms.iter().map(|(c, p)| c * p.derivative(r)).sum()
    }
}
