use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Spectrum,
    Constant,
    Sweep,
    Deficit,
    Verify,
    Hardy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Probe {
    /// The bubble itself (zero deficit and distance).
    Bubble,
    /// Bubble plus `amplitude` times the unit third eigenfunction.
    ThirdMode,
    /// Bubble plus `amplitude` times `r^2 exp(-r^2)`.
    Gaussian,
}

/// Inclusive `start:end:step` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(format!("expected start:end:step, got '{s}'"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
        let r = Range {
            start: num(a)?,
            end: num(b)?,
            step: num(c)?,
        };
        if !(r.step > 0.0) || !(r.end >= r.start) || !r.start.is_finite() || !r.end.is_finite() {
            return Err(format!("range '{s}' needs start <= end and step > 0"));
        }
        Ok(r)
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.step)
    }
}

/// Flags shared by every subcommand. All are optional so that values from
/// `--config` can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Ambient dimension N (at least 3).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Aperture of a geodesic cap cone.
    #[arg(long, conflicts_with = "lambda1")]
    pub theta0: Option<f64>,
    /// First nontrivial Neumann eigenvalue of an abstract cross-section.
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Cross-section measure for abstract cones [default: 1].
    #[arg(long)]
    pub measure: Option<f64>,
    /// Radial quadrature nodes [default: 256, minimum 64].
    #[arg(long)]
    pub grid_size: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write an SVG plot to this path (spectrum and sweep).
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps and the verification suite [default: all cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// INI-style `key = value` file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Command-specific options, collected from flags or the config file.
#[derive(Debug, Clone, Default)]
pub struct Extras {
    pub count: Option<usize>,
    pub lambda1_range: Option<Range>,
    pub probe: Option<Probe>,
    pub amplitude: Option<f64>,
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    pub measure: f64,
    pub grid_size: usize,
    pub output_format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot_path: Option<PathBuf>,
    pub seed: u64,
    #[serde(skip)]
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1_range: Option<Range>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<Probe>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

pub const MIN_GRID_SIZE: usize = 64;

/// Reads `key = value` lines; `[sections]`, blank lines and `#`/`;`
/// comments are skipped. Dashes in keys are treated as underscores.
pub fn read_ini(path: &Path) -> Result<BTreeMap<String, String>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_ini(&text)
}

pub fn parse_ini(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty()
            || line.starts_with('#')
            || line.starts_with(';')
            || line.starts_with('[')
        {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("config line {}: expected key = value", i + 1));
        };
        out.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

fn take<T: FromStr>(file: &mut BTreeMap<String, String>, key: &str) -> Result<Option<T>, String>
where
    T::Err: fmt::Display,
{
    match file.remove(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|e| format!("config key '{key}': {e}")),
    }
}

fn take_enum<T: ValueEnum>(
    file: &mut BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, String> {
    match file.remove(key) {
        None => Ok(None),
        Some(v) => T::from_str(&v, true)
            .map(Some)
            .map_err(|e| format!("config key '{key}': {e}")),
    }
}

impl RunConfig {
    pub fn resolve(command: CommandKind, args: CommonArgs, extras: Extras) -> Result<Self, String> {
        let mut file = match &args.config {
            Some(p) => read_ini(p)?,
            None => BTreeMap::new(),
        };
        let dim = args.dim.or(take(&mut file, "dim")?);
        let file_theta0: Option<f64> = take(&mut file, "theta0")?;
        let file_lambda1: Option<f64> = take(&mut file, "lambda1")?;
        // A flag for one of the pair replaces the file's value for the other.
        let (theta0, lambda1) = match (args.theta0, args.lambda1) {
            (Some(t), None) => (Some(t), None),
            (None, Some(l)) => (None, Some(l)),
            _ => (file_theta0, file_lambda1),
        };
        let cfg = RunConfig {
            command,
            dim,
            theta0,
            lambda1,
            measure: args.measure.or(take(&mut file, "measure")?).unwrap_or(1.0),
            grid_size: args
                .grid_size
                .or(take(&mut file, "grid_size")?)
                .unwrap_or(conestab::quadrature::DEFAULT_GRID_SIZE),
            output_format: args
                .format
                .or(take_enum(&mut file, "format")?)
                .unwrap_or_default(),
            plot_path: args.plot.or(take(&mut file, "plot")?),
            seed: args.seed.or(take(&mut file, "seed")?).unwrap_or(0),
            jobs: args.jobs.or(take(&mut file, "jobs")?),
            count: extras.count.or(take(&mut file, "count")?),
            lambda1_range: extras.lambda1_range.or(take(&mut file, "lambda1_range")?),
            probe: extras.probe.or(take_enum(&mut file, "probe")?),
            amplitude: extras.amplitude.or(take(&mut file, "amplitude")?),
            eps: extras.eps.or(take(&mut file, "eps")?),
        };
        if let Some(key) = file.keys().next() {
            return Err(format!("unknown config key '{key}'"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if self.grid_size < MIN_GRID_SIZE {
            return Err(format!(
                "--grid-size must be at least {MIN_GRID_SIZE}, got {}",
                self.grid_size
            ));
        }
        if !(self.measure > 0.0 && self.measure.is_finite()) {
            return Err(format!("--measure must be positive, got {}", self.measure));
        }
        if self.theta0.is_some() && self.lambda1.is_some() {
            return Err("give exactly one of --theta0 and --lambda1".into());
        }
        let needs_cone = matches!(
            self.command,
            CommandKind::Spectrum
                | CommandKind::Constant
                | CommandKind::Deficit
                | CommandKind::Hardy
        );
        if self.command != CommandKind::Verify && self.dim.is_none() {
            return Err("--dim is required".into());
        }
        if needs_cone && self.theta0.is_none() && self.lambda1.is_none() {
            return Err("give exactly one of --theta0 and --lambda1".into());
        }
        if self.command == CommandKind::Sweep {
            if self.lambda1_range.is_none() {
                return Err("sweep needs --lambda1-range start:end:step".into());
            }
            if self.theta0.is_some() || self.lambda1.is_some() {
                return Err("sweep takes --lambda1-range instead of --theta0/--lambda1".into());
            }
        }
        if self.plot_path.is_some()
            && !matches!(self.command, CommandKind::Spectrum | CommandKind::Sweep)
        {
            return Err("--plot is only available for spectrum and sweep".into());
        }
        Ok(())
    }
}
