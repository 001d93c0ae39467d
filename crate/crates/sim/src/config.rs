//! Run configuration: flat `key = value` text with `#` comments.
//!
//! Values are resolved in increasing precedence: preset defaults, config
//! file, `--set key=value` pairs in order, then dedicated CLI flags. A
//! resolved configuration is written back as `manifest.cfg`, which can be
//! passed to `--config` to repeat the run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use director_core::experiments::{preset_dt, Preset, DEFAULT_CELLS};
use director_core::{CflMode, Params};

use crate::error::ConfigError;

/// Keys accepted in config files and `--set`.
pub const KEYS: &[&str] = &[
    "preset",
    "n",
    "alpha",
    "beta",
    "k",
    "eps1",
    "eps2",
    "dt",
    "fp_tol",
    "max_fp_iters",
    "cfl_kappa",
    "theta",
    "cfl",
    "final_time",
    "solver_tol",
    "snapshots",
    "seed",
];

/// Unresolved `key → value` assignments, later ones win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    entries: BTreeMap<String, String>,
}

impl Overrides {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.entries
            .insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Parses one `key=value` assignment.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = pair.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: 0,
            text: pair.to_string(),
        })?;
        self.set(k, v)
    }

    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut out = Self::new();
        out.merge_str(text)?;
        Ok(out)
    }

    /// Applies every assignment in `text` on top of the current entries.
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

    pub fn merge_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            source: e,
        })?;
        self.merge_str(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| ConfigError::BadValue {
                    key,
                    value: v.to_string(),
                })
            })
            .transpose()
    }

    /// Resolves against the selected preset's defaults.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let preset = match self.get("preset") {
            Some(name) => name.parse::<Preset>().map_err(ConfigError::Preset)?,
            None => return Err(ConfigError::MissingPreset),
        };
        let n = self.parse::<usize>("n")?.unwrap_or(DEFAULT_CELLS);
        if n < 2 {
            return Err(ConfigError::BadValue {
                key: "n",
                value: n.to_string(),
            });
        }
        let mut params = preset.params(n);
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = self.parse(stringify!($field))? {
                    params.$field = v;
                }
            };
        }
        take!(alpha);
        take!(beta);
        take!(k);
        take!(eps1);
        take!(eps2);
        take!(fp_tol);
        take!(max_fp_iters);
        take!(cfl_kappa);
        take!(theta);
        take!(final_time);
        // The preset step depends on α and β, so recompute unless given.
        params.dt = match self.parse::<f64>("dt")? {
            Some(dt) => dt,
            None => preset_dt(1.0 / n as f64, params.beta, params.alpha),
        };
        if let Some(mode) = self.get("cfl") {
            params.cfl_mode = mode.parse::<CflMode>().map_err(|_| ConfigError::BadValue {
                key: "cfl",
                value: mode.to_string(),
            })?;
        }
        params.solver_tol = self.parse("solver_tol")?;
        let snapshots = match self.get("snapshots") {
            Some(list) => parse_times(list)?,
            None => preset.snapshot_times(),
        };
        let seed = self.parse("seed")?.unwrap_or(0);
        Ok(RunConfig {
            preset,
            n,
            params,
            snapshots,
            seed,
        })
    }
}

fn parse_times(list: &str) -> Result<Vec<f64>, ConfigError> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let t: f64 = item.parse().map_err(|_| ConfigError::BadValue {
            key: "snapshots",
            value: list.to_string(),
        })?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(ConfigError::BadValue {
                key: "snapshots",
                value: list.to_string(),
            });
        }
        out.push(t);
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Preset,
    pub n: usize,
    pub params: Params,
    pub snapshots: Vec<f64>,
    pub seed: u64,
}

impl RunConfig {
    /// Re-loadable text listing every resolved value, floats in round-trip
    /// exact form.
    pub fn to_manifest(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(s, "# resolved run configuration");
        let _ = writeln!(s, "preset = {}", self.preset);
        let _ = writeln!(s, "n = {}", self.n);
        for (key, v) in [
            ("alpha", p.alpha),
            ("beta", p.beta),
            ("k", p.k),
            ("eps1", p.eps1),
            ("eps2", p.eps2),
            ("dt", p.dt),
            ("fp_tol", p.fp_tol),
            ("cfl_kappa", p.cfl_kappa),
            ("theta", p.theta),
            ("final_time", p.final_time),
        ] {
            let _ = writeln!(s, "{key} = {}", crate::output::fmt_f64(v));
        }
        let _ = writeln!(s, "max_fp_iters = {}", p.max_fp_iters);
        let _ = writeln!(s, "cfl = {}", p.cfl_mode);
        match p.solver_tol {
            Some(t) => {
                let _ = writeln!(s, "solver_tol = {}", crate::output::fmt_f64(t));
            }
            None => {
                let _ = writeln!(
                    s,
                    "# solver_tol unset, effective {}",
                    crate::output::fmt_f64(p.effective_solver_tol())
                );
            }
        }
        let times: Vec<String> = self
            .snapshots
            .iter()
            .map(|&t| crate::output::fmt_f64(t))
            .collect();
        let _ = writeln!(s, "snapshots = {}", times.join(","));
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}
