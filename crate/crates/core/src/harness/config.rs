//! `key=value` configuration overrides.
//!
//! One pair per line, `#` starts a comment. Command-line `--set` flags are
//! applied after the file so they win. Unknown keys are rejected.

use std::fmt;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("line {line}: expected key=value, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("`{key}`: cannot parse `{value}` as {expected}")]
    Type {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("{0}")]
    Range(String),
    #[error("`{key}` does not apply to scenario `{scenario}`")]
    NotApplicable { key: String, scenario: String },
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
}

/// Parameter swept by a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Mu,
    Gamma,
    SlopeFactor,
    Rescale,
}

impl SweepParam {
    /// Config key of the value list for this parameter.
    pub fn list_key(self) -> &'static str {
        match self {
            SweepParam::Mu => "mu-list",
            SweepParam::Gamma => "gamma-list",
            SweepParam::SlopeFactor => "g-list",
            SweepParam::Rescale => "a-list",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            SweepParam::Mu => "μ",
            SweepParam::Gamma => "γ",
            SweepParam::SlopeFactor => "g",
            SweepParam::Rescale => "a",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Typed, validated overrides. `None` keeps the scenario default.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Overrides {
    pub kt: Option<f64>,
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
    pub omega_r: Option<f64>,
    pub x0: Option<f64>,
    pub sigma: Option<f64>,
    pub mass_mev: Option<f64>,
    pub gamma0: Option<f64>,
    pub mu0: Option<f64>,
    pub t_end: Option<f64>,
    pub record_interval: Option<f64>,
    pub dt: Option<f64>,
    pub grid_points: Option<usize>,
    pub half_width: Option<f64>,
    pub workers: Option<usize>,
    /// Sweep list, tagged with the parameter its key named.
    pub sweep: Option<(SweepParam, Vec<f64>)>,
}

#[derive(Clone, Copy)]
enum Bound {
    Positive,
    NonNegative,
    Finite,
}

impl Bound {
    fn check(self, symbol: &str, v: f64) -> Result<f64, ConfigError> {
        let ok = v.is_finite()
            && match self {
                Bound::Positive => v > 0.0,
                Bound::NonNegative => v >= 0.0,
                Bound::Finite => true,
            };
        if ok {
            return Ok(v);
        }
        let rule = match self {
            Bound::Positive => "> 0",
            Bound::NonNegative => "≥ 0",
            Bound::Finite => "finite",
        };
        Err(ConfigError::Range(format!("{symbol} must be {rule}, got {v}")))
    }
}

/// Every accepted key with its display symbol.
pub const KEYS: &[(&str, &str)] = &[
    ("kT", "thermal energy kT in eV"),
    ("gamma", "relaxation rate γ in fs⁻¹"),
    ("mu", "bath damping μ in fs⁻¹"),
    ("omega_R", "renormalized frequency ω_R in fs⁻¹"),
    ("x0", "well position x0 in Å"),
    ("sigma", "initial Gaussian width σ in Å"),
    ("mass_MeV", "particle mass in MeV/c²"),
    ("gamma0", "rescaling base γ₀ in fs⁻¹"),
    ("mu0", "rescaling base μ₀ in fs⁻¹"),
    ("t_end", "final time in fs"),
    ("record_interval", "observable cadence in fs"),
    ("dt", "upper bound on the time step in fs"),
    ("grid_points", "odd number of grid points per axis"),
    ("half_width", "grid half width L in Å"),
    ("workers", "parallel sweep runs"),
    ("mu-list", "comma-separated μ sweep"),
    ("gamma-list", "comma-separated γ sweep"),
    ("g-list", "comma-separated slope-factor sweep"),
    ("a-list", "comma-separated rescaling sweep"),
];

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::Type {
        key: key.into(),
        value: value.into(),
        expected: "a number",
    })
}

fn parse_usize(key: &str, value: &str) -> Result<usize, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::Type {
        key: key.into(),
        value: value.into(),
        expected: "a non-negative integer",
    })
}

fn parse_list(key: &str, value: &str, bound: Bound, symbol: &str) -> Result<Vec<f64>, ConfigError> {
    let trimmed = value.trim().trim_start_matches('[').trim_end_matches(']');
    let list = trimmed
        .split(',')
        .map(|v| parse_f64(key, v).and_then(|x| bound.check(symbol, x)))
        .collect::<Result<Vec<_>, _>>()?;
    if list.is_empty() {
        return Err(ConfigError::Range(format!("`{key}` needs at least one value")));
    }
    Ok(list)
}

impl Overrides {
    /// Applies one `key=value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim();
        let f = |bound: Bound, symbol: &str| parse_f64(key, value).and_then(|v| bound.check(symbol, v));
        match key {
            "kT" => self.kt = Some(f(Bound::Positive, "kT")?),
            "gamma" => self.gamma = Some(f(Bound::NonNegative, "γ")?),
            "mu" => self.mu = Some(f(Bound::NonNegative, "μ")?),
            "omega_R" => self.omega_r = Some(f(Bound::Positive, "ω_R")?),
            "x0" => self.x0 = Some(f(Bound::Positive, "x0")?),
            "sigma" => self.sigma = Some(f(Bound::Positive, "σ")?),
            "mass_MeV" => self.mass_mev = Some(f(Bound::Positive, "M")?),
            "gamma0" => self.gamma0 = Some(f(Bound::NonNegative, "γ₀")?),
            "mu0" => self.mu0 = Some(f(Bound::NonNegative, "μ₀")?),
            "t_end" => self.t_end = Some(f(Bound::Positive, "t_end")?),
            "record_interval" => self.record_interval = Some(f(Bound::Positive, "record_interval")?),
            "dt" => self.dt = Some(f(Bound::Positive, "dt")?),
            "half_width" => self.half_width = Some(f(Bound::Positive, "L")?),
            "grid_points" => self.grid_points = Some(parse_usize(key, value)?),
            "workers" => {
                let w = parse_usize(key, value)?;
                if w == 0 {
                    return Err(ConfigError::Range("workers must be ≥ 1".into()));
                }
                self.workers = Some(w);
            }
            "mu-list" => self.sweep = Some((SweepParam::Mu, parse_list(key, value, Bound::NonNegative, "μ")?)),
            "gamma-list" => {
                self.sweep = Some((SweepParam::Gamma, parse_list(key, value, Bound::NonNegative, "γ")?))
            }
            "g-list" => {
                self.sweep = Some((SweepParam::SlopeFactor, parse_list(key, value, Bound::Finite, "g")?))
            }
            "a-list" => self.sweep = Some((SweepParam::Rescale, parse_list(key, value, Bound::Positive, "a")?)),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies a `key=value` flag.
    pub fn set_flag(&mut self, flag: &str) -> Result<(), ConfigError> {
        let (k, v) = flag.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: 0,
            text: flag.to_string(),
        })?;
        self.set(k, v)
    }

    /// Parses a config file body.
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut out = Self::default();
        out.merge_str(text)?;
        Ok(out)
    }

    pub fn merge_str(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// File first, then flags.
    pub fn load(path: Option<&Path>, flags: &[String]) -> Result<Self, ConfigError> {
        let mut out = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            out.merge_str(&text)?;
        }
        for flag in flags {
            out.set_flag(flag)?;
        }
        Ok(out)
    }
}
