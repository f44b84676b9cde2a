use conestab::functionals::local_constant;
use conestab::geometry::critical_exponent;
use conestab::radial_ode::find_radial_eigenvalues;
use conestab::spectrum::{harmonic_polynomial, mu_lambda1, mu_radial, ordered_spectrum, threshold};
use conestab::Error;
use proptest::prelude::*;

/// Eigenvalues `nu` of `-w'' + (nu/4) sech^2(x) w = -kappa^2 w` with
/// `kappa = beta + (N-2)/2`: the classical Poschl-Teller ladder.
fn poschl_teller(dim: usize, lambda: f64, n: usize) -> f64 {
    let nn = dim as f64;
    let kappa = ((nn - 2.0).powi(2) / 4.0 + lambda).sqrt();
    let a = 2.0 * kappa + 2.0 * n as f64;
    a * (a + 2.0)
}

/// Gegenbauer `C_n^{(alpha)}(y)` by the three-term recurrence.
fn gegenbauer(n: usize, alpha: f64, y: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * alpha * y);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let k = k as f64;
        let c = (2.0 * y * (k + alpha) * b - (k + 2.0 * alpha - 1.0) * a) / (k + 1.0);
        a = b;
        b = c;
    }
    b
}

#[test]
fn harmonic_polynomials_are_gegenbauer() {
    for dim in 3..=7 {
        let alpha = (dim as f64 - 1.0) / 2.0;
        for k in 1..=8 {
            let h = harmonic_polynomial(dim, k).unwrap();
            let ys = [-0.8, -0.31, 0.17, 0.6, 0.93];
            let ratios: Vec<f64> = ys
                .iter()
                .map(|&y| h.eval_on_sphere(y) / gegenbauer(k - 1, alpha, y))
                .collect();
            for r in &ratios {
                assert!(
                    (r / ratios[0] - 1.0).abs() < 1e-10,
                    "N={dim} k={k}: {ratios:?}"
                );
            }
        }
    }
}

#[test]
fn radial_closed_form_through_unit_bubble() {
    // With k0 = 1 the normalization identity gives S^{2*} = N(N-2).
    for dim in 3..=6 {
        let n = dim as f64;
        let s = (n * (n - 2.0)).powf(1.0 / critical_exponent(dim));
        for k in 1..=4 {
            let exact = poschl_teller(dim, 0.0, k - 1);
            assert!((mu_radial(dim, k, s) / exact - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn threshold_ties_are_reported() {
    for dim in 3..=6 {
        for k in 1..=3 {
            let t = threshold(dim, k);
            assert_eq!(
                ordered_spectrum(dim, t, 1.0, 5, false),
                Err(Error::ThresholdAmbiguity { lambda1: t, k })
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shooting_matches_ladder(dim in 3usize..=6, lambda in 0.0f64..40.0) {
        let mus = find_radial_eigenvalues(dim, lambda, 2, 1.0).unwrap();
        for (n, mu) in mus.iter().enumerate() {
            let exact = poschl_teller(dim, lambda, n);
            prop_assert!((mu / exact - 1.0).abs() < 1e-9, "{} vs {}", mu, exact);
        }
    }

    #[test]
    fn lambda1_branch_is_first_radial_level(dim in 3usize..=8, lambda in 0.1f64..80.0) {
        let n = dim as f64;
        let s = (n * (n - 2.0)).powf(1.0 / critical_exponent(dim));
        let (_, mu) = mu_lambda1(dim, lambda, s);
        prop_assert!((mu / poschl_teller(dim, lambda, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ordered_spectrum_increases(dim in 3usize..=8, lambda in 0.05f64..90.0, s in 0.2f64..3.0) {
        if let Ok(sp) = ordered_spectrum(dim, lambda, s, 12, false) {
            prop_assert!(sp.windows(2).all(|w| w[0].mu < w[1].mu));
            if let Some(i) = sp.iter().position(|p| p.angular_index == 1) {
                prop_assert_eq!(i, sp.len() - 1);
            }
        }
    }

    #[test]
    fn local_constant_bounds(dim in 3usize..=9, t in 1e-6f64..1.0, extra in 0.0f64..50.0) {
        let n = dim as f64;
        let lambda = n - 1.0 + t * (n + 1.0) + extra;
        let c = local_constant(dim, lambda).unwrap();
        prop_assert!(c.c_star > 0.0 && c.c_star <= 4.0 / (n + 4.0) + 1e-15);
        let bigger = local_constant(dim, lambda + 0.1).unwrap();
        prop_assert!(bigger.c_star >= c.c_star - 1e-15);
    }
}
