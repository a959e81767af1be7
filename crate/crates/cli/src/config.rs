//! Run configuration: command-line flags merged over an optional JSON file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lambert_coulomb::{energy_from_nu, EnergySpec, SystemParams};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Sc,
    Ua,
    Qm,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QmRoute {
    /// l = 0 reduction, no angular sum
    Closed,
    /// explicit sum over l <= lmax
    PartialWave,
}

/// Flags shared by `scan` and `cut`. Every field may also come from the
/// JSON file given with `--config`; flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanArgs {
    /// JSON file with any of these options (keys as the long flag names, '-' -> '_')
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Continuous principal quantum number nu = k + 1
    #[arg(long, conflicts_with = "energy")]
    pub nu: Option<f64>,
    /// Energy (Hartree in atomic units)
    #[arg(long, allow_negative_numbers = true)]
    pub energy: Option<f64>,
    /// Spatial dimension [default: 3]
    #[arg(long)]
    pub ndim: Option<usize>,
    /// Reduced mass [default: 1]
    #[arg(long)]
    pub mu: Option<f64>,
    /// Coupling in V = -kc/r [default: 1]
    #[arg(long)]
    pub kc: Option<f64>,
    /// Reduced Planck constant [default: 1]
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Repulsive interaction
    #[arg(long)]
    pub repulsive: Option<bool>,
    /// Source point r', comma separated
    #[arg(long, allow_hyphen_values = true)]
    pub source: Option<String>,
    /// Grid axis as axis:min:max:count (repeat for two axes)
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Vec<String>,
    /// Cut axis as axis:min:max:count
    #[arg(long, allow_hyphen_values = true)]
    pub cut: Option<String>,
    /// Fixed coordinate as axis=value (repeatable)
    #[arg(long, allow_hyphen_values = true)]
    pub fix: Vec<String>,
    /// Which Green functions to evaluate [default: sc for scan, all for cut]
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    /// Highest partial wave for --qm-route partial-wave [default: 80]
    #[arg(long)]
    pub lmax: Option<usize>,
    #[arg(long, value_enum)]
    pub qm_route: Option<QmRoute>,
    /// Points closer than this to the source are skipped [default: 5]
    #[arg(long)]
    pub exclude_radius: Option<f64>,
    /// Output CSV file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ScanArgs {
    /// Fill unset flags from the config file.
    pub fn merged(self) -> Result<Self, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = read_file(&path)?;
        Ok(Self {
            config: self.config,
            nu: self.nu.or(if self.energy.is_some() { None } else { file.nu }),
            energy: self.energy.or(if self.nu.is_some() { None } else { file.energy }),
            ndim: self.ndim.or(file.ndim),
            mu: self.mu.or(file.mu),
            kc: self.kc.or(file.kc),
            hbar: self.hbar.or(file.hbar),
            repulsive: self.repulsive.or(file.repulsive),
            source: self.source.or(file.source),
            grid: if self.grid.is_empty() { file.grid } else { self.grid },
            cut: self.cut.or(file.cut),
            fix: if self.fix.is_empty() { file.fix } else { self.fix },
            method: self.method.or(file.method),
            lmax: self.lmax.or(file.lmax),
            qm_route: self.qm_route.or(file.qm_route),
            exclude_radius: self.exclude_radius.or(file.exclude_radius),
            out: self.out.or(file.out),
        })
    }
}

fn read_file(path: &Path) -> Result<ScanArgs, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub index: usize,
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + step * i as f64).collect()
    }
}

const AXIS_NAMES: [&str; 6] = ["x", "y", "z", "w", "v", "u"];

fn axis_index(name: &str, ndim: usize) -> Result<usize, CliError> {
    let idx = AXIS_NAMES
        .iter()
        .position(|n| *n == name)
        .or_else(|| name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()).filter(|&d| d >= 1).map(|d| d - 1))
        .ok_or_else(|| CliError::Config(format!("unknown axis '{name}' (use x, y, z, ... or x1, x2, ...)")))?;
    if idx >= ndim {
        return Err(CliError::Config(format!("axis '{name}' exceeds ndim = {ndim}")));
    }
    Ok(idx)
}

fn parse_f64(text: &str, what: &str) -> Result<f64, CliError> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("cannot parse {what} '{text}'")))
}

pub fn parse_axis(spec: &str, ndim: usize) -> Result<Axis, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 {
        return Err(CliError::Config(format!("axis spec '{spec}' is not axis:min:max:count")));
    }
    let count: usize = parts[3]
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("cannot parse count '{}'", parts[3])))?;
    if count < 2 {
        return Err(CliError::Config(format!("axis '{}' needs count >= 2, got {count}", parts[0])));
    }
    let (min, max) = (parse_f64(parts[1], "axis min")?, parse_f64(parts[2], "axis max")?);
    if !(min.is_finite() && max.is_finite() && max > min) {
        return Err(CliError::Config(format!("axis '{}' needs finite min < max", parts[0])));
    }
    Ok(Axis {
        index: axis_index(parts[0].trim(), ndim)?,
        name: parts[0].trim().to_string(),
        min,
        max,
        count,
    })
}

pub fn parse_vector(text: &str, ndim: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v = text
        .split(',')
        .map(|t| parse_f64(t, what))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != ndim {
        return Err(CliError::Config(format!("{what} has {} components, ndim = {ndim}", v.len())));
    }
    Ok(v)
}

/// Physical constants and energy, shared by every subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Physics {
    pub params: SystemParams,
    pub spec: EnergySpec,
}

pub fn physics(
    nu: Option<f64>,
    energy: Option<f64>,
    ndim: usize,
    mu: f64,
    kc: f64,
    hbar: f64,
    repulsive: bool,
) -> Result<Physics, CliError> {
    let mut params = SystemParams::new(mu, kc, hbar, ndim).map_err(CliError::from_config)?;
    if repulsive {
        params = params.repulsive();
    }
    let spec = match (nu, energy) {
        (Some(nu), None) => energy_from_nu(nu, &params).map_err(CliError::from_config)?,
        (None, Some(e)) => EnergySpec::from_energy(e, &params).map_err(CliError::from_config)?,
        (Some(_), Some(_)) => return Err(CliError::Config("--nu and --energy are mutually exclusive".into())),
        (None, None) => return Err(CliError::Config("one of --nu or --energy is required".into())),
    };
    if repulsive && spec.energy < 0.0 {
        return Err(CliError::Config("a repulsive interaction has no E < 0 states".into()));
    }
    Ok(Physics { params, spec })
}

/// Fully validated scan or cut configuration.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub physics: Physics,
    pub method: MethodChoice,
    pub source: Vec<f64>,
    pub axes: Vec<Axis>,
    pub fixed: Vec<f64>,
    pub lmax: usize,
    pub qm_route: QmRoute,
    pub exclude_radius: f64,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_LMAX: usize = 80;
pub const DEFAULT_EXCLUDE_RADIUS: f64 = 5.0;

impl ScanConfig {
    /// `cut` selects the single `--cut` axis instead of `--grid`.
    pub fn from_args(args: ScanArgs, cut: bool) -> Result<Self, CliError> {
        let args = args.merged()?;
        let ndim = args.ndim.unwrap_or(3);
        let physics = physics(
            args.nu,
            args.energy,
            ndim,
            args.mu.unwrap_or(1.0),
            args.kc.unwrap_or(1.0),
            args.hbar.unwrap_or(1.0),
            args.repulsive.unwrap_or(false),
        )?;
        let method = args.method.unwrap_or(if cut { MethodChoice::All } else { MethodChoice::Sc });
        let source = match &args.source {
            Some(s) => parse_vector(s, ndim, "source")?,
            None => return Err(CliError::Config("--source is required".into())),
        };
        let axes = if cut {
            let spec = args.cut.as_deref().ok_or_else(|| CliError::Config("--cut is required".into()))?;
            vec![parse_axis(spec, ndim)?]
        } else {
            if args.grid.is_empty() || args.grid.len() > 2 {
                return Err(CliError::Config(format!("scan needs one or two --grid axes, got {}", args.grid.len())));
            }
            args.grid.iter().map(|g| parse_axis(g, ndim)).collect::<Result<Vec<_>, _>>()?
        };
        if axes.len() == 2 && axes[0].index == axes[1].index {
            return Err(CliError::Config("the two grid axes coincide".into()));
        }
        let mut fixed = vec![0.0; ndim];
        for f in &args.fix {
            let (name, value) = f
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--fix '{f}' is not axis=value")))?;
            let idx = axis_index(name.trim(), ndim)?;
            if axes.iter().any(|a| a.index == idx) {
                return Err(CliError::Config(format!("axis '{name}' is both scanned and fixed")));
            }
            fixed[idx] = parse_f64(value, "fixed coordinate")?;
        }
        let needs_three = matches!(method, MethodChoice::Qm | MethodChoice::Ua) || cut;
        if needs_three && ndim != 3 {
            return Err(CliError::Config(format!(
                "method {method:?} requires ndim = 3 (got {ndim})"
            )));
        }
        if (cut || matches!(method, MethodChoice::Qm | MethodChoice::Ua)) && !(physics.spec.energy < 0.0) {
            return Err(CliError::Config("quantum reference and uniform approximation need E < 0".into()));
        }
        let exclude_radius = args.exclude_radius.unwrap_or(DEFAULT_EXCLUDE_RADIUS);
        if !(exclude_radius >= 0.0) {
            return Err(CliError::Config("--exclude-radius must be non-negative".into()));
        }
        Ok(Self {
            physics,
            method,
            source,
            axes,
            fixed,
            lmax: args.lmax.unwrap_or(DEFAULT_LMAX),
            qm_route: args.qm_route.unwrap_or(QmRoute::Closed),
            exclude_radius,
            out: args.out,
        })
    }

    /// Sample points in output order (first axis slowest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        let first = self.axes[0].values();
        let second = self.axes.get(1).map(|a| a.values());
        for &u in &first {
            match &second {
                None => {
                    let mut p = self.fixed.clone();
                    p[self.axes[0].index] = u;
                    out.push(p);
                }
                Some(vs) => {
                    for &v in vs {
                        let mut p = self.fixed.clone();
                        p[self.axes[0].index] = u;
                        p[self.axes[1].index] = v;
                        out.push(p);
                    }
                }
            }
        }
        out
    }
}
