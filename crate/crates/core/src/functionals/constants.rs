use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectrum::ordered_spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `lambda_1 <= N-1`: the bubble is degenerate and the value is only a signed diagnostic.
    Degenerate,
    /// `N-1 < lambda_1 <= 2N`: the third eigenvalue comes from `lambda_1`.
    Lambda1,
    /// `lambda_1 > 2N`: the third eigenvalue is radial.
    Radial,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Degenerate => "degenerate",
            Branch::Lambda1 => "lambda1",
            Branch::Radial => "radial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalConstant {
    pub dim: usize,
    pub lambda1: f64,
    pub c_star: f64,
    pub branch: Branch,
    pub degenerate: bool,
    /// `1 - mu_2/mu_3` from the ordered spectrum, when it has three entries.
    pub from_spectrum: Option<f64>,
}

fn lambda1_branch(n: f64, lambda1: f64) -> f64 {
    let q = ((n - 2.0).powi(2) + 4.0 * lambda1).sqrt();
    (2.0 * q - 2.0 * n + 4.0 * (lambda1 - n + 1.0)) / (q * (2.0 + q))
}

/// The local stability constant `c_*` of the bubble as a function of `lambda_1(D)`.
pub fn local_constant(dim: usize, lambda1: f64) -> Result<LocalConstant> {
    if dim < 3 {
        return Err(Error::DimensionTooSmall { dim });
    }
    if !(lambda1 > 0.0 && lambda1.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda1 must be positive, got {lambda1}"
        )));
    }
    let n = dim as f64;
    let (c_star, branch) = if lambda1 > 2.0 * n {
        (4.0 / (n + 4.0), Branch::Radial)
    } else if lambda1 > n - 1.0 {
        (lambda1_branch(n, lambda1), Branch::Lambda1)
    } else {
        (lambda1_branch(n, lambda1), Branch::Degenerate)
    };
    let from_spectrum = ordered_spectrum(dim, lambda1, 1.0, 3, true)
        .ok()
        .filter(|s| s.len() == 3)
        .map(|s| 1.0 - s[1].mu / s[2].mu);
    Ok(LocalConstant {
        dim,
        lambda1,
        c_star,
        branch,
        degenerate: branch == Branch::Degenerate,
        from_spectrum,
    })
}

/// `min_i (1 - mu_2^i / mu_3^i)` over supplied minimizer spectra.
pub fn cd_upper_bound(spectra: &[(f64, f64)]) -> Result<f64> {
    if spectra.is_empty() {
        return Err(Error::InvalidParameter("no spectra supplied".into()));
    }
    let mut best = f64::INFINITY;
    for &(mu2, mu3) in spectra {
        if !(mu2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mu2 must be positive, got {mu2}"
            )));
        }
        if mu3 <= mu2 {
            return Err(Error::GapViolation { mu2, mu3 });
        }
        best = best.min(1.0 - mu2 / mu3);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_branch_value() {
        for dim in 3..=8 {
            let c = local_constant(dim, 2.0 * dim as f64 + 0.1).unwrap();
            assert_eq!(c.c_star, 4.0 / (dim as f64 + 4.0));
            assert_eq!(c.branch, Branch::Radial);
            assert!((c.from_spectrum.unwrap() - c.c_star).abs() < 1e-14);
        }
        assert!((local_constant(3, 10.0).unwrap().c_star - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn continuity_at_2n() {
        for dim in 3..=8 {
            let n = dim as f64;
            let at = local_constant(dim, 2.0 * n).unwrap().c_star;
            assert!((at - 4.0 / (n + 4.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn general_form_agrees_on_lambda1_branch() {
        for dim in 3..=6 {
            let n = dim as f64;
            for t in [0.1, 0.5, 0.9] {
                let l = n - 1.0 + t * (n + 1.0);
                let c = local_constant(dim, l).unwrap();
                assert!((c.c_star - c.from_spectrum.unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn degenerate_regime() {
        let c = local_constant(5, 4.0).unwrap();
        assert!(c.degenerate && c.c_star.abs() < 1e-15);
        let c = local_constant(5, 3.0).unwrap();
        assert!(c.degenerate && c.c_star < 0.0);
    }

    #[test]
    fn upper_bound() {
        assert_eq!(cd_upper_bound(&[(2.0, 5.0), (2.0, 4.0)]).unwrap(), 0.5);
        assert_eq!(
            cd_upper_bound(&[(2.0, 2.0)]),
            Err(Error::GapViolation { mu2: 2.0, mu3: 2.0 })
        );
    }
}
