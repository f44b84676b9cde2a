use std::fmt::Display;
use std::fs;
use std::io::{self, Write};

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use conestab::functionals::{
    deficit_report, hardy_check, local_constant, DeficitReport, LocalConstant,
};
use conestab::radial_ode::find_radial_eigenvalues;
use conestab::spectrum::ordered_spectrum;
use conestab::verify::{self, Outcome, SuiteConfig};
use conestab::{
    ConeDomain, ConeProblem, EigenPair, MapKind, RadialGrid, RadialProfile, TestFunction,
};

use crate::config::{CommandKind, Format, Probe, RunConfig};
use crate::plot::line_chart;
use crate::CliError;

pub const SPECTRUM_HEADER: &str = "N,lambda1,mu1,mu2,mu3,c_star,branch";

#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub label: String,
    pub value: f64,
}

#[derive(Serialize)]
struct Report<'a, R: Serialize> {
    config: &'a RunConfig,
    results: &'a [R],
    residuals: &'a [Residual],
    version: &'static str,
}

fn emit<R: Serialize>(
    cfg: &RunConfig,
    results: &[R],
    residuals: &[Residual],
    header: &str,
    rows: &[String],
) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    match cfg.output_format {
        Format::Json => {
            let report = Report {
                config: cfg,
                results,
                residuals,
                version: env!("CARGO_PKG_VERSION"),
            };
            serde_json::to_writer_pretty(&mut out, &report)
                .map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "{header}")?;
            for r in rows {
                writeln!(out, "{r}")?;
            }
        }
    }
    Ok(())
}

fn write_plot(cfg: &RunConfig, svg: impl FnOnce() -> String) -> Result<(), CliError> {
    if let Some(path) = &cfg.plot_path {
        fs::write(path, svg()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn opt<T: Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn dim(cfg: &RunConfig) -> usize {
    cfg.dim.expect("validated")
}

fn grid(cfg: &RunConfig) -> RadialGrid {
    RadialGrid::new(cfg.grid_size, MapKind::RationalMap)
}

fn cone(cfg: &RunConfig) -> Result<ConeDomain, CliError> {
    let d = dim(cfg);
    Ok(match (cfg.theta0, cfg.lambda1) {
        (Some(t), _) => ConeDomain::cap(d, t)?,
        (None, Some(l)) => ConeDomain::abstract_domain(d, l, cfg.measure)?,
        (None, None) => unreachable!("validated"),
    })
}

fn problem(cfg: &RunConfig) -> Result<ConeProblem, CliError> {
    Ok(ConeProblem::new(cone(cfg)?, grid(cfg))?)
}

fn pool(cfg: &RunConfig) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))
}

/// One row of the `N,lambda1,mu1,mu2,mu3,c_star,branch` table.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantRow {
    /// The first (up to three) eigenvalues of the linearized operator.
    pub mu: Vec<f64>,
    #[serde(flatten)]
    pub constant: LocalConstant,
}

impl ConstantRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.constant.dim,
            self.constant.lambda1,
            opt(self.mu.first()),
            opt(self.mu.get(1)),
            opt(self.mu.get(2)),
            self.constant.c_star,
            self.constant.branch.as_str()
        )
    }
}

fn constant_row(problem: &ConeProblem) -> Result<ConstantRow, CliError> {
    let lambda1 = problem.lambda1()?;
    let constant = local_constant(problem.dim(), lambda1)?;
    let mu = ordered_spectrum(problem.dim(), lambda1, problem.s_u(), 3, true)?
        .iter()
        .map(|p| p.mu)
        .collect();
    Ok(ConstantRow { mu, constant })
}

fn formula_residual(row: &ConstantRow) -> Option<Residual> {
    let general = row.constant.from_spectrum?;
    (!row.constant.degenerate).then(|| Residual {
        label: format!("lambda1={}: c_star - (1 - mu2/mu3)", row.constant.lambda1),
        value: row.constant.c_star - general,
    })
}

pub fn spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let pr = problem(cfg)?;
    let d = dim(cfg);
    let pairs: Vec<EigenPair> = pr.spectrum(cfg.count.unwrap_or(6))?;
    let lambda1 = pr.lambda1()?;
    let radial_count = pairs.iter().filter(|p| p.angular_index == 0).count();
    let radial = if radial_count > 0 {
        find_radial_eigenvalues(d, 0.0, radial_count, pr.k0())?
    } else {
        Vec::new()
    };
    let mut residuals = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        let shot = if p.angular_index == 0 {
            radial[p.radial_index - 1]
        } else {
            find_radial_eigenvalues(d, lambda1, p.radial_index, pr.k0())?[p.radial_index - 1]
        };
        residuals.push(Residual {
            label: format!("mu{}: shooting vs closed form (relative)", i + 1),
            value: (shot - p.mu) / p.mu,
        });
    }
    let row = constant_row(&pr)?;
    emit(cfg, &pairs, &residuals, SPECTRUM_HEADER, &[row.csv()])?;
    write_plot(cfg, || {
        let pts: Vec<(f64, f64)> = pairs
            .iter()
            .enumerate()
            .map(|(i, p)| ((i + 1) as f64, p.mu))
            .collect();
        line_chart(
            &format!("Spectrum, N={d}, lambda1={lambda1:.6}"),
            "index",
            "mu",
            &pts,
        )
    })
}

pub fn constant(cfg: &RunConfig) -> Result<(), CliError> {
    let row = constant_row(&problem(cfg)?)?;
    let residuals: Vec<Residual> = formula_residual(&row).into_iter().collect();
    if row.constant.degenerate {
        eprintln!(
            "note: lambda1 = {} <= N-1: degenerate regime, c_star = {} is not a stability constant",
            row.constant.lambda1, row.constant.c_star
        );
    }
    let line = row.csv();
    emit(cfg, &[row], &residuals, SPECTRUM_HEADER, &[line])
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let d = dim(cfg);
    let points = cfg.lambda1_range.expect("validated").points();
    let grid = grid(cfg);
    let rows: Vec<ConstantRow> = pool(cfg)?.install(|| {
        points
            .par_iter()
            .map(|&l| {
                let cone = ConeDomain::abstract_domain(d, l, cfg.measure)?;
                constant_row(&ConeProblem::new(cone, grid.clone())?)
            })
            .collect::<Result<_, CliError>>()
    })?;
    let residuals: Vec<Residual> = rows.iter().filter_map(formula_residual).collect();
    let lines: Vec<String> = rows.iter().map(ConstantRow::csv).collect();
    emit(cfg, &rows, &residuals, SPECTRUM_HEADER, &lines)?;
    write_plot(cfg, || {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r.constant.lambda1, r.constant.c_star))
            .collect();
        line_chart(&format!("Local constant, N={d}"), "lambda1", "c_star", &pts)
    })
}

#[derive(Debug, Clone, Serialize)]
struct DeficitRow {
    probe: Probe,
    amplitude: f64,
    #[serde(flatten)]
    report: DeficitReport,
}

pub fn deficit(cfg: &RunConfig) -> Result<(), CliError> {
    let pr = problem(cfg)?;
    let probe = cfg.probe.unwrap_or(Probe::ThirdMode);
    let amplitude = cfg.amplitude.unwrap_or(1e-2);
    let u = pr.bubble_at(1.0);
    let mut residuals = Vec::new();
    let phi = match probe {
        Probe::Bubble => u,
        Probe::Gaussian => u.plus(
            amplitude,
            &TestFunction::radial(
                pr.dim(),
                RadialProfile::PowerGaussian {
                    power: 2.0,
                    coeffs: vec![1.0],
                    decay: 1.0,
                },
            ),
        ),
        Probe::ThirdMode => {
            let sp = pr.spectrum(3)?;
            if sp.len() < 3 {
                return Err(CliError::Usage(
                    "third-mode probe needs lambda1 > N-1 (three eigenvalues)".into(),
                ));
            }
            residuals.push(Residual {
                label: "target 1 - mu2/mu3".into(),
                value: 1.0 - sp[1].mu / sp[2].mu,
            });
            u.plus(amplitude, &pr.eigenfunction(&sp[2])?)
        }
    };
    let report = deficit_report(&phi, &pr)?;
    let row = DeficitRow {
        probe,
        amplitude,
        report,
    };
    let r = &row.report;
    let line = format!(
        "{},{},{},{},{},{},{},{},{},{}",
        probe
            .to_possible_value()
            .expect("no skipped variants")
            .get_name(),
        amplitude,
        r.grad_norm_sq,
        r.crit_norm_sq,
        r.s_used,
        r.deficit,
        r.distance,
        opt(r.quotient),
        r.c0,
        r.s0
    );
    emit(
        cfg,
        &[row],
        &residuals,
        "probe,amplitude,grad_norm_sq,crit_norm_sq,s_used,deficit,distance,quotient,c0,s0",
        &[line],
    )
}

#[derive(Debug, Clone, Serialize)]
struct HardyRow {
    function: &'static str,
    eps: f64,
    lhs: f64,
    rhs: f64,
    ratio: f64,
}

fn hardy_functions() -> Vec<(&'static str, RadialProfile)> {
    let pg = |power: f64, coeffs: Vec<f64>, decay: f64| RadialProfile::PowerGaussian {
        power,
        coeffs,
        decay,
    };
    vec![
        ("r^2 exp(-r^2)", pg(2.0, vec![1.0], 1.0)),
        ("r^2 exp(-r^2/4)", pg(2.0, vec![1.0], 0.25)),
        ("r^3 (1 - r/2) exp(-r^2)", pg(3.0, vec![1.0, -0.5], 1.0)),
        ("r^4 exp(-2 r^2)", pg(4.0, vec![1.0], 2.0)),
        (
            "r^2 (1 - r^2) exp(-r^2)",
            pg(2.0, vec![1.0, 0.0, -1.0], 1.0),
        ),
    ]
}

pub fn hardy(cfg: &RunConfig) -> Result<(), CliError> {
    let pr = problem(cfg)?;
    let eps = cfg.eps.unwrap_or(0.0);
    let mut rows = Vec::new();
    for (name, profile) in hardy_functions() {
        let h = hardy_check(&TestFunction::radial(pr.dim(), profile), &pr, eps)?;
        rows.push(HardyRow {
            function: name,
            eps,
            lhs: h.lhs,
            rhs: h.rhs,
            ratio: h.ratio,
        });
    }
    let residuals: Vec<Residual> = rows
        .iter()
        .map(|r| Residual {
            label: format!("{}: ratio - 1", r.function),
            value: r.ratio - 1.0,
        })
        .collect();
    let lines: Vec<String> = rows
        .iter()
        .map(|r| format!("{},{},{},{},{}", r.function, r.eps, r.lhs, r.rhs, r.ratio))
        .collect();
    emit(cfg, &rows, &residuals, "function,eps,lhs,rhs,ratio", &lines)
}

/// Runs the acceptance suite; `Ok(false)` when some criterion failed.
pub fn verify(cfg: &RunConfig) -> Result<bool, CliError> {
    let suite = SuiteConfig {
        seed: cfg.seed,
        grid_size: cfg.grid_size,
    };
    let outcomes: Vec<Outcome> = pool(cfg)?.install(|| {
        verify::CRITERIA
            .par_iter()
            .filter_map(|&id| verify::run(id, &suite))
            .collect()
    });
    for o in &outcomes {
        eprintln!(
            "{} criterion {:>2}: {}{}",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.error
                .as_deref()
                .map(|e| format!(" ({e})"))
                .unwrap_or_default()
        );
    }
    let residuals: Vec<Residual> = outcomes
        .iter()
        .map(|o| Residual {
            label: format!("criterion {} worst value/bound", o.id),
            value: o.worst,
        })
        .collect();
    let lines: Vec<String> = outcomes
        .iter()
        .map(|o| format!("{},{},{},{}", o.id, o.name, o.passed, o.worst))
        .collect();
    emit(cfg, &outcomes, &residuals, "id,name,passed,worst", &lines)?;
    Ok(outcomes.iter().all(|o| o.passed))
}

pub fn run(cfg: &RunConfig) -> Result<bool, CliError> {
    match cfg.command {
        CommandKind::Spectrum => spectrum(cfg).map(|_| true),
        CommandKind::Constant => constant(cfg).map(|_| true),
        CommandKind::Sweep => sweep(cfg).map(|_| true),
        CommandKind::Deficit => deficit(cfg).map(|_| true),
        CommandKind::Hardy => hardy(cfg).map(|_| true),
        CommandKind::Verify => verify(cfg),
    }
}
