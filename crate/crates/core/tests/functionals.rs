use conestab::functionals::{
    critical_integral, decomposition, deficit_report, distance_to_manifold, hardy_check,
    second_variation, sobolev_quotient, strictness_probe, ConeProblem, RhoChoice,
};
use conestab::geometry::critical_exponent;
use conestab::{ConeDomain, RadialGrid, RadialProfile, TestFunction};
use proptest::prelude::*;

fn cap(dim: usize, theta0: f64) -> ConeProblem {
    ConeProblem::new(ConeDomain::cap(dim, theta0).unwrap(), RadialGrid::default()).unwrap()
}

fn gaussian(dim: usize, power: f64, coeffs: Vec<f64>, decay: f64) -> TestFunction {
    TestFunction::radial(
        dim,
        RadialProfile::PowerGaussian {
            power,
            coeffs,
            decay,
        },
    )
}

fn modes(p: &ConeProblem, count: usize) -> Vec<TestFunction> {
    p.spectrum(count)
        .unwrap()
        .iter()
        .map(|pair| p.eigenfunction(pair).unwrap())
        .collect()
}

#[test]
fn second_variation_eigen_expansion() {
    // theta0 = 0.5 puts a radial function third, theta0 = 1.0 an angular one.
    for theta0 in [0.5, 1.0] {
        let p = cap(3, theta0);
        let sp = p.spectrum(3).unwrap();
        let psi = modes(&p, 3);
        let q1 = second_variation(&psi[0], &p).unwrap();
        assert!(q1.full.abs() < 1e-10, "{q1:?}");
        for k in 1..3 {
            let q = second_variation(&psi[k], &p).unwrap();
            let expect = (sp[k].mu - sp[1].mu) * q.weighted_l2;
            assert!(
                (q.reduced - expect).abs() < 1e-7,
                "theta0={theta0} k={}: {q:?}",
                k + 1
            );
            assert!((q.full - q.reduced).abs() < 1e-7);
            assert!((q.weighted_l2 - 1.0 / sp[k].mu).abs() < 1e-7 / sp[k].mu);
        }
    }
}

#[test]
fn critical_norm_second_order_coefficient() {
    // int |c V + d psi_3|^{2*} = c^{2*} S^{-2*} + d^2 c^{2*-2} 2*(2*-1)/2 / mu_3 + O(d^3)
    let p = cap(3, 0.5);
    let e = critical_exponent(3);
    let sp = p.spectrum(3).unwrap();
    let psi3 = &modes(&p, 3)[2];
    let c = 1.3f64;
    let base = c.powf(e) * p.s_u().powf(-e);
    let coeff = |d: f64| {
        let phi = p.bubble_at(1.0).scaled(c).plus(d, psi3);
        (critical_integral(&phi, &p).unwrap() - base) / (d * d)
    };
    let (r1, r2, r4) = (coeff(4e-3), coeff(2e-3), coeff(1e-3));
    let extrapolated = (8.0 * r4 - 6.0 * r2 + r1) / 3.0;
    let predicted = c.powf(e - 2.0) * e * (e - 1.0) / 2.0 / sp[2].mu;
    assert!(
        (extrapolated / predicted - 1.0).abs() < 1e-5,
        "{extrapolated} vs {predicted}"
    );
}

#[test]
fn strictness_sign_flip() {
    let p = cap(3, 0.5);
    let a = strictness_probe(&p, 1e-2, RhoChoice::Radial).unwrap();
    assert!(a.verdict && a.quartic > 0.0);
    assert!(a.sign * a.cubic >= 0.0);
    assert!(a.ratio < a.target);
}

#[test]
fn symmetric_product_cubic_is_positive_on_hemisphere() {
    let p = cap(3, std::f64::consts::FRAC_PI_2 - 1e-6);
    let s = strictness_probe(&p, 1e-2, RhoChoice::SymmetricProduct).unwrap();
    assert!(s.cubic > 0.0 && s.quartic > 0.0 && s.verdict, "{s:?}");
}

#[test]
fn symmetric_product_neumann_residual() {
    // N = 3: Z = xy + xz + yz on the circle theta = theta0, averaged in phi.
    let z = |t: f64, f: f64| {
        let (x, y, w) = (t.sin() * f.cos(), t.sin() * f.sin(), t.cos());
        x * y + x * w + y * w
    };
    for theta0 in [0.4, 1.1, std::f64::consts::FRAC_PI_2 - 1e-6] {
        let n = 4000;
        let h = 1e-5;
        let mean_sq = (0..n)
            .map(|i| {
                let f = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                ((z(theta0 + h, f) - z(theta0 - h, f)) / (2.0 * h)).powi(2)
            })
            .sum::<f64>()
            / n as f64;
        let s = strictness_probe(&cap(3, theta0), 1e-2, RhoChoice::SymmetricProduct).unwrap();
        let got = s.neumann_residual.unwrap();
        assert!(
            (got - mean_sq.sqrt()).abs() < 1e-8,
            "{got} vs {}",
            mean_sq.sqrt()
        );
        assert!(got > 0.5);
    }
    let r = strictness_probe(&cap(3, 0.5), 1e-2, RhoChoice::Radial).unwrap();
    assert_eq!(r.neumann_residual, Some(0.0));
}

#[test]
fn expansion_distance_equals_amplitude() {
    let p = cap(3, 0.5);
    let w = &modes(&p, 3)[2];
    for d in [1e-2, 5e-3] {
        let rep = deficit_report(&p.bubble_at(1.0).plus(d, w), &p).unwrap();
        assert!((rep.distance / d - 1.0).abs() < 1e-6, "{rep:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn deficit_nonnegative_and_distance_bounded(
        a in prop::collection::vec(-0.2f64..0.2, 4),
        g in -0.3f64..0.3,
    ) {
        let p = cap(3, 0.5);
        let psi = modes(&p, 4);
        let mut phi = p.bubble_at(1.0);
        for (ai, m) in a.iter().zip(&psi) {
            phi = phi.plus(*ai, m);
        }
        phi = phi.plus(g, &gaussian(3, 2.0, vec![1.0], 1.0));
        let rep = deficit_report(&phi, &p).unwrap();
        prop_assert!(rep.deficit >= -1e-9, "{:?}", rep);
        prop_assert!(rep.distance <= rep.grad_norm_sq.sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn decomposition_residuals(a in prop::collection::vec(-0.1f64..0.1, 4)) {
        let p = cap(3, 0.5);
        let psi = modes(&p, 4);
        let mut phi = p.bubble_at(1.0);
        for (ai, m) in a.iter().zip(&psi) {
            phi = phi.plus(*ai, m);
        }
        prop_assume!(a[2].abs() + a[3].abs() > 1e-3);
        let dec = decomposition(&phi, &p).unwrap();
        prop_assert!(dec.orthogonality_value.abs() <= 1e-7);
        prop_assert!(dec.orthogonality_scale.abs() <= 1e-7);
        prop_assert!(dec.weighted_l2 <= dec.bound + 1e-7);
    }

    #[test]
    fn quotient_is_scale_invariant(c in 0.1f64..10.0, s in 0.2f64..5.0, decay in 0.3f64..3.0) {
        let p = cap(4, 0.9);
        let f = gaussian(4, 0.0, vec![1.0, 0.3], decay);
        let q = sobolev_quotient(&f, &p).unwrap();
        prop_assert!((sobolev_quotient(&f.scaled(c), &p).unwrap() / q - 1.0).abs() < 1e-12);
        prop_assert!(q >= p.s_u() * (1.0 - 1e-9));
        let d = distance_to_manifold(&p.bubble_at(s).scaled(c), &p).unwrap();
        prop_assert!(d.distance <= 1e-8 * c);
    }

    #[test]
    fn hardy_holds(dim in 3usize..=6, eps in 0.0f64..1.0, power in 2i32..5, decay in 0.2f64..3.0,
                   c1 in -1.0f64..1.0) {
        let p = ConeProblem::new(
            ConeDomain::abstract_domain(dim, 5.0, 1.0).unwrap(),
            RadialGrid::default(),
        ).unwrap();
        let u = gaussian(dim, power as f64, vec![1.0, c1], decay);
        let h = hardy_check(&u, &p, eps).unwrap();
        prop_assert!(h.ratio <= 1.0 + 1e-9, "{:?}", h);
    }
}
