use std::f64::consts::PI;

use conestab::angular_spectrum::{cap_eigenvalue, lambda1};
use conestab::geometry::{bubble_normalizer, bubble_normalizer_direct, cap_measure};
use conestab::quadrature::{integrate_radial, CapQuadrature};
use conestab::{ConeDomain, MapKind, RadialGrid};
use proptest::prelude::*;

/// Gauss hypergeometric series, fine for `|z| <= 1/2`.
fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..2000 {
        let k = k as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Colatitude slope at `theta` of the regular cap eigenfunction
/// `sin^m(theta) 2F1(m-nu, nu+m+N-2; m+(N-1)/2; (1-cos theta)/2)`,
/// whose eigenvalue is `nu (nu+N-2)`.
fn slope(dim: usize, m: usize, nu: f64, theta: f64) -> f64 {
    let n = dim as f64;
    let mf = m as f64;
    let (a, b, c) = (mf - nu, nu + mf + n - 2.0, mf + (n - 1.0) / 2.0);
    let z = (1.0 - theta.cos()) / 2.0;
    let f = hyp2f1(a, b, c, z);
    let df = a * b / c * hyp2f1(a + 1.0, b + 1.0, c + 1.0, z);
    let s = theta.sin();
    let lead = if m == 0 {
        0.0
    } else {
        mf * s.powi(m as i32 - 1) * theta.cos() * f
    };
    lead + s.powi(m as i32) * df * s / 2.0
}

/// First Neumann eigenvalue with `nu > nu_min` for azimuthal order `m`.
fn hypergeometric_eigenvalue(dim: usize, theta0: f64, m: usize, nu_min: f64) -> f64 {
    let mut lo = nu_min;
    let step = 1e-3;
    let mut hi = lo + step;
    while slope(dim, m, lo, theta0).signum() == slope(dim, m, hi, theta0).signum() {
        lo = hi;
        hi += step;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if slope(dim, m, mid, theta0).signum() == slope(dim, m, lo, theta0).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let nu = 0.5 * (lo + hi);
    nu * (nu + dim as f64 - 2.0)
}

#[test]
fn cap_eigenvalues_match_hypergeometric_oracle() {
    for dim in 3..=5 {
        for theta0 in [0.4, 0.8, 1.2, 1.5] {
            let m1 = hypergeometric_eigenvalue(dim, theta0, 1, 1e-3);
            let got = cap_eigenvalue(dim, theta0, 1, 1).unwrap().lambda;
            assert!(
                (got / m1 - 1.0).abs() < 1e-8,
                "N={dim} theta0={theta0} m=1: {got} vs {m1}"
            );
            let m0 = hypergeometric_eigenvalue(dim, theta0, 0, 1e-2);
            let got = cap_eigenvalue(dim, theta0, 0, 2).unwrap().lambda;
            assert!(
                (got / m0 - 1.0).abs() < 1e-8,
                "N={dim} theta0={theta0} m=0: {got} vs {m0}"
            );
            let l1 = lambda1(&ConeDomain::cap(dim, theta0).unwrap()).unwrap();
            assert!((l1 - m0.min(m1)).abs() < 1e-7 * l1);
        }
    }
}

#[test]
fn three_dimensional_cap_measure() {
    for theta0 in [0.1, 0.7, 1.5, PI] {
        let exact = 2.0 * PI * (1.0 - theta0.cos());
        assert!((cap_measure(3, theta0).unwrap() / exact - 1.0).abs() < 1e-13);
    }
}

#[test]
fn cap_quadrature_total_measure() {
    for dim in 3..=6 {
        for theta0 in [0.3, 1.1] {
            let exact = cap_measure(dim, theta0).unwrap();
            let axial = CapQuadrature::axial(dim, theta0, 48, 24).integrate(|_| 1.0);
            let planes = CapQuadrature::two_plane(dim, theta0, 32, 24, 16).integrate(|_| 1.0);
            assert!((axial / exact - 1.0).abs() < 1e-12);
            assert!((planes / exact - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn normalizers_agree() {
    let grid = RadialGrid::default();
    for dim in 3..=7 {
        for theta0 in [0.2, 0.9, 1.5] {
            let cone = ConeDomain::cap(dim, theta0).unwrap();
            let a = bubble_normalizer(&cone, &grid).unwrap();
            let b = bubble_normalizer_direct(&cone, &grid).unwrap();
            assert!((a / b - 1.0).abs() < 1e-10, "N={dim} theta0={theta0}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn beta_integrals(dim in 3usize..=8, a in 0.0f64..6.0, extra in 0.5f64..4.0) {
        // int_0^inf r^{a} (1+r^2)^{-b} r^{N-1} dr = B(s, b-s)/2 with s = (a+N)/2.
        // The rational map is only spectrally accurate once the mapped tail
        // (1-t)^{2 extra - 1} is smooth enough, hence the split.
        let s = (a + dim as f64) / 2.0;
        let b = s + extra;
        let exact = statrs::function::beta::beta(s, b - s) / 2.0;
        let f = |r: f64| r.powf(a) * (1.0 + r * r).powf(-b);
        let de = integrate_radial(f, dim, &RadialGrid::new(256, MapKind::DoubleExponential)).unwrap();
        prop_assert!((de / exact - 1.0).abs() < 1e-10, "{} vs {}", de, exact);
        if extra >= 1.0 || (2.0 * extra).fract() == 0.0 {
            let rat = integrate_radial(f, dim, &RadialGrid::new(256, MapKind::RationalMap)).unwrap();
            prop_assert!((rat / exact - 1.0).abs() < 1e-10, "{} vs {}", rat, exact);
        }
    }

    #[test]
    fn lambda1_decreases_with_aperture(dim in 3usize..=5, t in 0.2f64..1.4, dt in 0.01f64..0.15) {
        let a = lambda1(&ConeDomain::cap(dim, t).unwrap()).unwrap();
        let b = lambda1(&ConeDomain::cap(dim, t + dt).unwrap()).unwrap();
        prop_assert!(b < a);
    }
}
