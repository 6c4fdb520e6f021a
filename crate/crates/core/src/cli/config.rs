use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use log::warn;

use crate::dynamics::{Mode, Scheme, StepConfig};
use crate::grid::Grid;
use crate::state::PressureLaw;

/// How the initial state is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitKind {
    Equilibrium,
    TaylorGreenPerturbed,
    ConstraintCompatible,
    Checkpoint,
    Manufactured,
}

impl InitKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitKind::Equilibrium => "equilibrium",
            InitKind::TaylorGreenPerturbed => "taylor_green_perturbed",
            InitKind::ConstraintCompatible => "constraint_compatible",
            InitKind::Checkpoint => "checkpoint",
            InitKind::Manufactured => "manufactured",
        }
    }
}

/// A configuration error, located by key and, when the key was given,
/// by line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}: {k}: {}", self.message),
            (None, Some(k)) => write!(f, "{k}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Everything a run, check or study needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub mu: f64,
    pub gamma: f64,
    pub mode: Mode,
    pub dt: f64,
    pub t_end: f64,
    /// Diagnostics cadence in steps.
    pub output_every: usize,
    pub q_norm: f64,
    pub scheme: Scheme,
    pub dealias: bool,
    /// When false, `E` is held fixed.
    pub evolve_e: bool,
    pub init: InitKind,
    pub delta: f64,
    pub seed: u64,
    /// Source of `init = checkpoint`.
    pub checkpoint_in: Option<PathBuf>,
    pub csv_path: PathBuf,
    pub checkpoint_path: PathBuf,
    /// Pass threshold of `check`.
    pub tolerance: f64,
    pub pressure_tol: f64,
    pub pressure_max_iter: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 2,
            n: 64,
            length: 2.0 * PI,
            mu: 0.1,
            gamma: 2.0,
            mode: Mode::Incompressible,
            dt: 1e-3,
            t_end: 1.0,
            output_every: 100,
            q_norm: 4.0,
            scheme: Scheme::Imex2,
            dealias: true,
            evolve_e: true,
            init: InitKind::Equilibrium,
            delta: 1e-2,
            seed: 0,
            checkpoint_in: None,
            csv_path: PathBuf::from("vela.csv"),
            checkpoint_path: PathBuf::from("vela.ckpt"),
            tolerance: 1e-8,
            pressure_tol: 1e-10,
            pressure_max_iter: 200,
        }
    }
}

/// Recognized keys, in documentation order.
pub const KEYS: &[&str] = &[
    "dim",
    "n",
    "length",
    "mu",
    "gamma",
    "mode",
    "dt",
    "t_end",
    "output_every",
    "q_norm",
    "scheme",
    "dealias",
    "evolve_e",
    "init",
    "delta",
    "seed",
    "checkpoint_in",
    "csv_path",
    "checkpoint_path",
    "tolerance",
    "pressure_tol",
    "pressure_max_iter",
];

fn parse_value<T: FromStr>(raw: &str, what: &str) -> Result<T, String> {
    raw.parse().map_err(|_| format!("expected {what}, got '{raw}'"))
}

fn parse_bool(raw: &str) -> Result<bool, String> {
    match raw {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got '{raw}'")),
    }
}

fn parse_mode(raw: &str) -> Result<Mode, String> {
    match raw {
        "incompressible" => Ok(Mode::Incompressible),
        "compressible" => Ok(Mode::Compressible),
        _ => Err(format!("expected incompressible or compressible, got '{raw}'")),
    }
}

fn parse_scheme(raw: &str) -> Result<Scheme, String> {
    match raw {
        "imex2" => Ok(Scheme::Imex2),
        "imex1" => Ok(Scheme::Imex1),
        _ => Err(format!("expected imex2 or imex1, got '{raw}'")),
    }
}

fn parse_init(raw: &str) -> Result<InitKind, String> {
    [
        InitKind::Equilibrium,
        InitKind::TaylorGreenPerturbed,
        InitKind::ConstraintCompatible,
        InitKind::Checkpoint,
        InitKind::Manufactured,
    ]
    .into_iter()
    .find(|k| k.as_str() == raw)
    .ok_or_else(|| {
        format!(
            "expected one of equilibrium, taylor_green_perturbed, constraint_compatible, checkpoint, manufactured, got '{raw}'"
        )
    })
}

impl RunConfig {
    fn set(&mut self, key: &str, raw: &str) -> Result<(), String> {
        match key {
            "dim" => self.dim = parse_value(raw, "an integer")?,
            "n" => self.n = parse_value(raw, "an integer")?,
            "length" => self.length = parse_value(raw, "a number")?,
            "mu" => self.mu = parse_value(raw, "a number")?,
            "gamma" => self.gamma = parse_value(raw, "a number")?,
            "mode" => self.mode = parse_mode(raw)?,
            "dt" => self.dt = parse_value(raw, "a number")?,
            "t_end" => self.t_end = parse_value(raw, "a number")?,
            "output_every" => self.output_every = parse_value(raw, "an integer")?,
            "q_norm" => self.q_norm = parse_value(raw, "a number")?,
            "scheme" => self.scheme = parse_scheme(raw)?,
            "dealias" => self.dealias = parse_bool(raw)?,
            "evolve_e" => self.evolve_e = parse_bool(raw)?,
            "init" => self.init = parse_init(raw)?,
            "delta" => self.delta = parse_value(raw, "a number")?,
            "seed" => self.seed = parse_value(raw, "a non-negative integer")?,
            "checkpoint_in" => self.checkpoint_in = Some(PathBuf::from(raw)),
            "csv_path" => self.csv_path = PathBuf::from(raw),
            "checkpoint_path" => self.checkpoint_path = PathBuf::from(raw),
            "tolerance" => self.tolerance = parse_value(raw, "a number")?,
            "pressure_tol" => self.pressure_tol = parse_value(raw, "a number")?,
            "pressure_max_iter" => self.pressure_max_iter = parse_value(raw, "an integer")?,
            _ => unreachable!("keys are checked against KEYS"),
        }
        Ok(())
    }

    /// Number of steps from 0 to `t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn grid(&self) -> crate::Result<Grid> {
        Grid::new(self.dim, self.n, self.length)
    }

    pub fn law(&self) -> crate::Result<PressureLaw> {
        PressureLaw::with_gamma(self.gamma)
    }

    pub fn step_config(&self) -> crate::Result<StepConfig> {
        let mut cfg = StepConfig::new(self.dt, self.mu)?
            .with_mode(self.mode)
            .with_scheme(self.scheme)
            .with_law(self.law()?);
        cfg.dealias = self.dealias;
        cfg.evolve_e = self.evolve_e;
        cfg.pressure_tol = self.pressure_tol;
        cfg.pressure_max_iter = self.pressure_max_iter;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every constraint; `lines` maps keys to where they were set.
    fn validate(&self, lines: &HashMap<&'static str, usize>) -> Result<(), ConfigError> {
        let fail = |key: &'static str, message: String| ConfigError {
            line: lines.get(key).copied(),
            key: Some(key.to_string()),
            message,
        };
        let positive = |key: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(fail(key, format!("must be > 0, got {v}")))
            }
        };
        if self.dim != 2 && self.dim != 3 {
            return Err(fail("dim", format!("must be 2 or 3, got {}", self.dim)));
        }
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(fail("n", format!("must be a power of two >= 8, got {}", self.n)));
        }
        positive("length", self.length)?;
        positive("mu", self.mu)?;
        if !(self.gamma.is_finite() && self.gamma > 1.0) {
            return Err(fail("gamma", format!("must satisfy gamma > 1, got {}", self.gamma)));
        }
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        let steps = (self.t_end / self.dt).round();
        if steps < 1.0 || (steps * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(fail("t_end", format!("must be a whole multiple of dt = {}", self.dt)));
        }
        if self.output_every == 0 {
            return Err(fail("output_every", "must be >= 1".into()));
        }
        if !(self.q_norm.is_finite() && self.q_norm >= 1.0) {
            return Err(fail("q_norm", format!("must be >= 1, got {}", self.q_norm)));
        }
        if !(self.q_norm > 3.0 && self.q_norm <= 6.0) {
            warn!("q_norm = {} lies outside the usual range (3, 6]", self.q_norm);
        }
        if !(self.delta.is_finite() && (0.0..0.5).contains(&self.delta)) {
            return Err(fail("delta", format!("must lie in [0, 0.5), got {}", self.delta)));
        }
        match self.init {
            InitKind::Checkpoint if self.checkpoint_in.is_none() => {
                return Err(fail("init", "init = checkpoint needs checkpoint_in".into()));
            }
            InitKind::Manufactured if self.dim != 2 => {
                return Err(fail("init", "the manufactured solution is two-dimensional; set dim = 2".into()));
            }
            InitKind::Manufactured if self.delta > 0.2 => {
                return Err(fail("delta", format!("manufactured amplitude must be <= 0.2, got {}", self.delta)));
            }
            _ => {}
        }
        positive("tolerance", self.tolerance)?;
        positive("pressure_tol", self.pressure_tol)?;
        if self.pressure_max_iter == 0 {
            return Err(fail("pressure_max_iter", "must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parses `key = value` lines; `#` starts a comment. Omitted keys take
/// their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &[])
}

/// [`parse_config`] followed by `key=value` overrides, which win over the
/// text. Overrides are numbered after the last line.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut lines: HashMap<&'static str, usize> = HashMap::new();
    let text_lines = text.lines().count();
    let entries = text
        .lines()
        .map(|l| (l, false))
        .chain(overrides.iter().map(|o| (o.as_str(), true)))
        .enumerate();
    for (idx, (raw_line, is_override)) in entries {
        let line_no = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let at = |key: Option<&str>, message: String| ConfigError {
            line: Some(line_no),
            key: key.map(str::to_string),
            message,
        };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| at(None, format!("expected 'key = value', got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let key = *KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| at(Some(key), "unknown key".into()))?;
        if !is_override && lines.contains_key(key) {
            return Err(at(Some(key), format!("duplicate key, first set on line {}", lines[key])));
        }
        if value.is_empty() {
            return Err(at(Some(key), "missing value".into()));
        }
        cfg.set(key, value).map_err(|m| at(Some(key), m))?;
        lines.insert(key, line_no);
    }
    debug_assert!(lines.values().all(|&l| l <= text_lines + overrides.len()));
    cfg.validate(&lines)?;
    Ok(cfg)
}

/// Renders `cfg` as config text that parses back to it.
pub fn render_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
    put("dim", cfg.dim.to_string());
    put("n", cfg.n.to_string());
    put("length", format!("{:?}", cfg.length));
    put("mu", format!("{:?}", cfg.mu));
    put("gamma", format!("{:?}", cfg.gamma));
    put("mode", cfg.mode.as_str().into());
    put("dt", format!("{:?}", cfg.dt));
    put("t_end", format!("{:?}", cfg.t_end));
    put("output_every", cfg.output_every.to_string());
    put("q_norm", format!("{:?}", cfg.q_norm));
    put("scheme", cfg.scheme.as_str().into());
    put("dealias", cfg.dealias.to_string());
    put("evolve_e", cfg.evolve_e.to_string());
    put("init", cfg.init.as_str().into());
    put("delta", format!("{:?}", cfg.delta));
    put("seed", cfg.seed.to_string());
    if let Some(p) = &cfg.checkpoint_in {
        put("checkpoint_in", p.display().to_string());
    }
    put("csv_path", cfg.csv_path.display().to_string());
    put("checkpoint_path", cfg.checkpoint_path.display().to_string());
    put("tolerance", format!("{:?}", cfg.tolerance));
    put("pressure_tol", format!("{:?}", cfg.pressure_tol));
    put("pressure_max_iter", cfg.pressure_max_iter.to_string());
    out
}
