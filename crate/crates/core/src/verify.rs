//! The acceptance suite: numbered checks with their tolerances, each
//! returning a serializable [`Outcome`]. Randomized checks draw from a
//! ChaCha stream keyed by the seed and the criterion id, so results do not
//! depend on which criteria run or in what order.

use std::f64::consts::FRAC_PI_2;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::angular_spectrum::{cap_eigenvalue, lambda1};
use crate::error::Result;
use crate::functionals::{
    best_constant_bubble, decomposition, distance_to_manifold, expansion_probe, hardy_check,
    local_constant, strictness_probe, ConeProblem, RhoChoice, TestFunction,
};
use crate::geometry::{bubble_normalizer_direct, critical_exponent, ConeDomain};
use crate::profile::RadialProfile;
use crate::quadrature::{integrate_radial, RadialGrid};
use crate::radial_ode::find_radial_eigenvalues;
use crate::spectrum::{mu_lambda1, mu_radial, origin_exponent};

pub const CRITERIA: [usize; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub grid_size: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            grid_size: crate::quadrature::DEFAULT_GRID_SIZE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Upper,
    Lower,
    /// A boolean property; `value` is 1 or 0.
    Holds,
}

/// A single measured quantity against its bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub kind: Bound,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// Largest `value / bound` over upper-bound checks with a positive bound.
    pub worst: f64,
    pub checks: Vec<Check>,
    /// Set when a computation failed outright.
    pub error: Option<String>,
}

#[derive(Default)]
struct Recorder {
    checks: Vec<Check>,
}

impl Recorder {
    /// `value <= bound`.
    fn at_most(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.checks.push(Check {
            label: label.into(),
            kind: Bound::Upper,
            value,
            bound,
            passed: value <= bound,
        });
    }

    /// `value >= bound`, recorded with the bound as its reference.
    fn at_least(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.checks.push(Check {
            label: label.into(),
            kind: Bound::Lower,
            value,
            bound,
            passed: value >= bound,
        });
    }

    fn holds(&mut self, label: impl Into<String>, ok: bool) {
        self.checks.push(Check {
            label: label.into(),
            kind: Bound::Holds,
            value: if ok { 1.0 } else { 0.0 },
            bound: 1.0,
            passed: ok,
        });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn problem(dim: usize, theta0: f64, cfg: &SuiteConfig) -> Result<ConeProblem> {
    ConeProblem::new(ConeDomain::cap(dim, theta0)?, grid(cfg))
}

fn grid(cfg: &SuiteConfig) -> RadialGrid {
    RadialGrid::new(cfg.grid_size, crate::quadrature::MapKind::RationalMap)
}

fn rng(cfg: &SuiteConfig, id: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    r.set_stream(id as u64);
    r
}

/// `S^{2*}` of the bubble with `k0 = 1`.
fn unit_bubble_sp(dim: usize) -> f64 {
    let n = dim as f64;
    n * (n - 2.0)
}

fn spectrum_closed_form(rec: &mut Recorder, _: &SuiteConfig) -> Result<()> {
    let start = Instant::now();
    for dim in 3..=6 {
        let p = critical_exponent(dim);
        let s = unit_bubble_sp(dim).powf(1.0 / p);
        let mus = find_radial_eigenvalues(dim, 0.0, 4, 1.0)?;
        for (i, &mu) in mus.iter().enumerate() {
            let k = i + 1;
            rec.at_most(
                format!("N={dim} k={k}"),
                rel(mu, mu_radial(dim, k, s)),
                1e-6,
            );
        }
    }
    rec.holds(
        "runtime under 10 s",
        start.elapsed() < Duration::from_secs(10),
    );
    Ok(())
}

/// Residual of `R'' + (N-1)/r R' - lambda/r^2 R + nu (1+r^2)^{-2} R = 0`
/// for `R = (1+r^2)^a r^beta`, divided by `R` and by the largest term.
fn beta_branch_residual(dim: usize, lambda: f64, nu: f64, r: f64) -> f64 {
    let n = dim as f64;
    let beta = ((n - 2.0).powi(2) + 4.0 * lambda).sqrt() / 2.0 - (n - 2.0) / 2.0;
    let a = 1.0 - n / 2.0 - beta;
    let q = 1.0 + r * r;
    let g = beta / r + 2.0 * a * r / q;
    let dg = -beta / (r * r) + 2.0 * a * (1.0 - r * r) / (q * q);
    let terms = [
        dg,
        g * g,
        (n - 1.0) / r * g,
        -lambda / (r * r),
        nu / (q * q),
    ];
    let sum: f64 = terms.iter().sum();
    let scale = terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
    (sum / scale).abs()
}

fn lambda1_branch(rec: &mut Recorder, _: &SuiteConfig) -> Result<()> {
    for dim in 3..=5 {
        let n = dim as f64;
        let p = critical_exponent(dim);
        let s = unit_bubble_sp(dim).powf(1.0 / p);
        for lambda in [n - 0.5, 2.0 * n - 0.5, 2.0 * n + 3.0] {
            let shot = find_radial_eigenvalues(dim, lambda, 1, 1.0)?[0];
            let (beta, mu) = mu_lambda1(dim, lambda, s);
            rec.at_most(
                format!("N={dim} lambda1={lambda} eigenvalue"),
                rel(shot, mu),
                1e-5,
            );
            debug_assert!((beta - origin_exponent(dim, lambda)).abs() < 1e-14);
            let worst = [1e-3, 0.05, 0.4, 1.0, 2.5, 10.0, 1e3]
                .iter()
                .map(|&r| beta_branch_residual(dim, lambda, mu, r))
                .fold(0.0, f64::max);
            rec.at_most(
                format!("N={dim} lambda1={lambda} profile residual"),
                worst,
                1e-7,
            );
        }
    }
    Ok(())
}

fn cap_solver(rec: &mut Recorder, _: &SuiteConfig) -> Result<()> {
    for dim in 3..=5 {
        let n = dim as f64;
        let mode = cap_eigenvalue(dim, FRAC_PI_2 - 1e-6, 1, 1)?;
        rec.at_most(
            format!("N={dim} near-hemisphere"),
            (mode.lambda - (n - 1.0)).abs(),
            1e-5,
        );
        let mut prev = None;
        let mut increasing = true;
        for i in 0..10 {
            let theta0 = 1.5 - 0.12 * i as f64;
            let l = lambda1(&ConeDomain::cap(dim, theta0)?)?;
            if let Some(q) = prev {
                increasing &= l > q;
            }
            prev = Some(l);
        }
        rec.holds(
            format!("N={dim} lambda1 increases as theta0 decreases"),
            increasing,
        );
    }
    Ok(())
}

fn normalization_identity(rec: &mut Recorder, cfg: &SuiteConfig) -> Result<()> {
    let grid = grid(cfg);
    for dim in 3..=5 {
        let n = dim as f64;
        let p = critical_exponent(dim);
        for theta0 in [0.4, 0.9, 1.4] {
            let cone = ConeDomain::cap(dim, theta0)?;
            let k0 = bubble_normalizer_direct(&cone, &grid)?;
            let s = best_constant_bubble(&cone, &grid)?;
            let closure = k0.powf(p - 2.0) * s.powf(p) / (n * (n - 2.0));
            rec.at_most(
                format!("N={dim} theta0={theta0} identity"),
                (closure - 1.0).abs(),
                1e-7,
            );
            let lhs =
                cone.measure() * integrate_radial(|r| r * r * (1.0 + r * r).powf(-n), dim, &grid)?;
            let rhs = n / (2.0 * (n - 1.0))
                * cone.measure()
                * integrate_radial(|r| (1.0 + r * r).powf(1.0 - n), dim, &grid)?;
            rec.at_most(
                format!("N={dim} theta0={theta0} moment identity"),
                rel(lhs, rhs),
                1e-9,
            );
        }
    }
    Ok(())
}

fn constant_formula(rec: &mut Recorder, _: &SuiteConfig) -> Result<()> {
    for dim in 3..=6 {
        let n = dim as f64;
        let exact = 4.0 / (n + 4.0);
        for lambda in [2.0 * n + 1e-9, 2.0 * n + 1.0, 5.0 * n] {
            let c = local_constant(dim, lambda)?.c_star;
            rec.at_most(
                format!("N={dim} lambda1={lambda} radial branch"),
                (c - exact).abs(),
                0.0,
            );
        }
        let at = local_constant(dim, 2.0 * n)?.c_star;
        rec.at_most(
            format!("N={dim} continuity at 2N"),
            (at - exact).abs(),
            1e-12,
        );
        let near = local_constant(dim, n - 1.0 + 1e-5 * n)?.c_star;
        rec.at_most(format!("N={dim} value just above N-1"), near.abs(), 1e-5);
        rec.holds(format!("N={dim} nonnegative just above N-1"), near >= 0.0);
    }
    Ok(())
}

fn expansion_sharpness(rec: &mut Recorder, cfg: &SuiteConfig) -> Result<()> {
    for theta0 in [1.0, 0.5] {
        let pr = problem(3, theta0, cfg)?;
        let probe = expansion_probe(&pr, &[1e-2, 5e-3, 2.5e-3])?;
        let ext = probe.extrapolated.unwrap_or(f64::NAN);
        rec.at_most(
            format!("theta0={theta0} extrapolated ratio"),
            rel(ext, probe.target),
            1e-3,
        );
        rec.at_least(
            format!("theta0={theta0} observed order"),
            probe.observed_order.unwrap_or(f64::NAN),
            0.9,
        );
    }
    Ok(())
}

fn random_perturbation(
    pr: &ConeProblem,
    rng: &mut ChaCha8Rng,
    modes: &[TestFunction],
) -> TestFunction {
    let mut phi = pr.bubble_at(1.0);
    for m in modes {
        phi = phi.plus(rng.random_range(-0.05..0.05), m);
    }
    phi
}

fn first_modes(pr: &ConeProblem, count: usize) -> Result<Vec<TestFunction>> {
    pr.spectrum(count)?
        .iter()
        .map(|pair| pr.eigenfunction(pair))
        .collect()
}

fn decomposition_suite(rec: &mut Recorder, cfg: &SuiteConfig) -> Result<()> {
    let pr = problem(3, 0.5, cfg)?;
    let modes = first_modes(&pr, 4)?;
    let mut rng = rng(cfg, 7);
    for trial in 0..5 {
        let phi = random_perturbation(&pr, &mut rng, &modes);
        let dec = decomposition(&phi, &pr)?;
        rec.at_most(
            format!("trial {trial} value orthogonality"),
            dec.orthogonality_value.abs(),
            1e-7,
        );
        rec.at_most(
            format!("trial {trial} scale orthogonality"),
            dec.orthogonality_scale.abs(),
            1e-7,
        );
        rec.at_most(
            format!("trial {trial} weighted bound"),
            dec.weighted_l2,
            dec.bound + 1e-7,
        );
    }
    Ok(())
}

fn random_hardy_function(dim: usize, eps: f64, rng: &mut ChaCha8Rng) -> TestFunction {
    // Integrability of u^2 |x|^{2 eps - 4} at the origin needs 2 power > 4 - N - 2 eps.
    let min_power = ((4.0 - dim as f64 - 2.0 * eps) / 2.0).floor().max(-1.0) as i32 + 1;
    let power = rng.random_range(min_power..=min_power + 3);
    let len = rng.random_range(1..=3);
    let coeffs = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
    TestFunction::radial(
        dim,
        RadialProfile::PowerGaussian {
            power: power as f64,
            coeffs,
            decay: rng.random_range(0.3..2.0),
        },
    )
}

fn hardy_suite(rec: &mut Recorder, cfg: &SuiteConfig) -> Result<()> {
    let mut rng = rng(cfg, 8);
    for dim in 3..=5 {
        let pr = problem(dim, 1.0, cfg)?;
        for eps in [0.0, 0.5] {
            let mut worst = 0.0f64;
            for _ in 0..20 {
                let u = random_hardy_function(dim, eps, &mut rng);
                worst = worst.max(hardy_check(&u, &pr, eps)?.ratio);
            }
            rec.at_most(
                format!("N={dim} eps={eps} largest ratio"),
                worst,
                1.0 + 1e-9,
            );
        }
    }
    Ok(())
}

fn strictness(rec: &mut Recorder, cfg: &SuiteConfig) -> Result<()> {
    for dim in 3..=5 {
        let pr = problem(dim, 0.5, cfg)?;
        let n = dim as f64;
        rec.at_least(format!("N={dim} lambda1 above 2N"), pr.lambda1()?, 2.0 * n);
        let probe = strictness_probe(&pr, 1e-2, RhoChoice::Radial)?;
        rec.holds(format!("N={dim} verdict"), probe.verdict);
        rec.holds(format!("N={dim} quartic positive"), probe.quartic > 0.0);
        if probe.cubic != 0.0 {
            rec.at_least(
                format!("N={dim} drop below target"),
                probe.target - probe.ratio,
                0.1 * probe.predicted_drop,
            );
        }
    }
    Ok(())
}

fn distance_properties(rec: &mut Recorder, cfg: &SuiteConfig) -> Result<()> {
    let pr = problem(3, 0.5, cfg)?;
    for c in [1.0, 5.0] {
        for s in [0.5, 1.0, 3.0] {
            let d = distance_to_manifold(&pr.bubble_at(s).scaled(c), &pr)?;
            rec.at_most(format!("c={c} s={s} on manifold"), d.distance, 1e-8);
        }
    }
    let modes = first_modes(&pr, 4)?;
    let mut suite: Vec<TestFunction> = modes.clone();
    let mut rng = rng(cfg, 10);
    for _ in 0..5 {
        suite.push(random_perturbation(&pr, &mut rng, &modes));
    }
    for _ in 0..5 {
        suite.push(random_hardy_function(3, 0.0, &mut rng));
    }
    let mut worst = f64::NEG_INFINITY;
    for phi in &suite {
        let d = distance_to_manifold(phi, &pr)?.distance;
        let norm = pr.grad_norm_sq(phi)?.sqrt();
        worst = worst.max((d - norm) / norm);
    }
    // Both sides are computed independently, so allow rounding in the last bits.
    rec.at_most("suite: (d - |grad phi|) / |grad phi|", worst, 1e-12);
    Ok(())
}

type Runner = fn(&mut Recorder, &SuiteConfig) -> Result<()>;

fn lookup(id: usize) -> Option<(&'static str, Runner)> {
    let entry: (&'static str, Runner) = match id {
        1 => (
            "closed-form vs shooting radial spectrum",
            spectrum_closed_form,
        ),
        2 => ("lambda1 branch eigenvalue and profile", lambda1_branch),
        3 => ("cap eigensolver", cap_solver),
        4 => ("bubble normalization identity", normalization_identity),
        5 => ("local constant formula", constant_formula),
        6 => ("expansion sharpness", expansion_sharpness),
        7 => ("decomposition residuals", decomposition_suite),
        8 => ("weighted Hardy inequality", hardy_suite),
        9 => ("strictness probe", strictness),
        10 => ("distance properties", distance_properties),
        _ => return None,
    };
    Some(entry)
}

/// Runs criterion `id`; `None` for unknown ids.
pub fn run(id: usize, cfg: &SuiteConfig) -> Option<Outcome> {
    let (name, runner) = lookup(id)?;
    let mut rec = Recorder::default();
    let error = runner(&mut rec, cfg)
        .err()
        .map(|e| format!("{}: {e}", e.name()));
    let worst = rec
        .checks
        .iter()
        .filter(|c| c.kind == Bound::Upper && c.bound > 0.0)
        .map(|c| c.value / c.bound)
        .fold(0.0, f64::max);
    let passed = error.is_none() && !rec.checks.is_empty() && rec.checks.iter().all(|c| c.passed);
    Some(Outcome {
        id,
        name,
        passed,
        worst,
        checks: rec.checks,
        error,
    })
}

pub fn run_all(cfg: &SuiteConfig) -> Vec<Outcome> {
    CRITERIA.iter().filter_map(|&id| run(id, cfg)).collect()
}
