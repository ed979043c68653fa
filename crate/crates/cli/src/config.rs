//! Run configuration: a TOML file whose every field has a default, plus
//! command-line overrides applied on top.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::Fail;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub background: PathBuf,
    pub out: PathBuf,
    pub jobs: usize,
    /// Seed for randomized utilities; no command currently draws from it.
    pub seed: u64,
    /// "bed-slope" or "interface-unit".
    pub normalization: String,
    pub critical: CriticalConfig,
    pub grid: GridConfig,
    pub newton: NewtonConfig,
    pub solve: SolveConfig,
    pub continuation: ContinuationConfig,
    pub reconstruct: ReconstructConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriticalConfig {
    pub count: usize,
    /// Samples per layer in the Φ₀ and background tables.
    pub table_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub nq: usize,
    pub np_minus: usize,
    pub np_plus: usize,
    /// Half-length of the q interval; 0 selects 60/(ε√B₁) clipped to [20, 400].
    pub l: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    /// One solve per entry, run in parallel.
    pub eps: Vec<f64>,
    /// Fixed Froude number; 0 uses F = (μ_cr^h − ε²)^(−1/2) with the
    /// discrete critical value of the grid.
    pub froude: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationConfig {
    pub eps_start: f64,
    pub eps_second: f64,
    pub ds_init: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    pub min_hp_stop: f64,
    pub sup_hp_stop: f64,
    pub max_points: usize,
    pub corrector_max_iter: usize,
    pub easy_iterations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconstructConfig {
    pub dimensional: bool,
    /// Added to the dimensional pressure (Pa).
    pub p_atm: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            background: PathBuf::new(),
            out: PathBuf::from("out"),
            jobs: 1,
            seed: 0,
            normalization: "bed-slope".into(),
            critical: CriticalConfig::default(),
            grid: GridConfig::default(),
            newton: NewtonConfig::default(),
            solve: SolveConfig::default(),
            continuation: ContinuationConfig::default(),
            reconstruct: ReconstructConfig::default(),
        }
    }
}

impl Default for CriticalConfig {
    fn default() -> Self {
        CriticalConfig {
            count: 5,
            table_points: 200,
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            nq: 161,
            np_minus: 33,
            np_plus: 33,
            l: 0.0,
        }
    }
}

impl Default for NewtonConfig {
    fn default() -> Self {
        let d = stratwave::height_solver::NewtonOptions::default();
        NewtonConfig {
            tol: d.tol,
            max_iter: d.max_iter,
            max_halvings: d.max_halvings,
        }
    }
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            eps: vec![0.1],
            froude: 0.0,
        }
    }
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        let d = stratwave::height_solver::ContinuationOptions::default();
        ContinuationConfig {
            eps_start: 0.05,
            eps_second: 0.055,
            ds_init: d.ds_init,
            ds_min: d.ds_min,
            ds_max: d.ds_max,
            min_hp_stop: d.min_hp_stop,
            sup_hp_stop: d.sup_hp_stop,
            max_points: d.max_points,
            corrector_max_iter: d.newton.max_iter,
            easy_iterations: d.easy_iterations,
        }
    }
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        ReconstructConfig {
            dimensional: false,
            p_atm: 0.0,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<(), Fail> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Fail::Config(format!("`{field}` must be positive, got {v}")))
    }
}

fn at_least(field: &str, v: usize, min: usize) -> Result<(), Fail> {
    if v >= min {
        Ok(())
    } else {
        Err(Fail::Config(format!(
            "`{field}` must be at least {min}, got {v}"
        )))
    }
}

impl RunConfig {
    /// Reads a config file; a relative background path is taken relative to it.
    pub fn load(path: &Path) -> Result<Self, Fail> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Fail::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Fail::Config(format!("{}: {e}", path.display())))?;
        if cfg.background.is_relative() && !cfg.background.as_os_str().is_empty() {
            if let Some(dir) = path.parent() {
                cfg.background = dir.join(&cfg.background);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Fail> {
        if self.background.as_os_str().is_empty() {
            return Err(Fail::Config(
                "`background` is required (config file or --background)".into(),
            ));
        }
        at_least("jobs", self.jobs, 1)?;
        self.normalization()?;
        at_least("critical.count", self.critical.count, 1)?;
        at_least("critical.table_points", self.critical.table_points, 8)?;
        at_least("grid.nq", self.grid.nq, 8)?;
        at_least("grid.np_minus", self.grid.np_minus, 8)?;
        at_least("grid.np_plus", self.grid.np_plus, 8)?;
        if self.grid.l != 0.0 {
            positive("grid.l", self.grid.l)?;
        }
        positive("newton.tol", self.newton.tol)?;
        at_least("newton.max_iter", self.newton.max_iter, 1)?;
        if self.solve.eps.is_empty() {
            return Err(Fail::Config("`solve.eps` must not be empty".into()));
        }
        for e in &self.solve.eps {
            positive("solve.eps", *e)?;
        }
        if self.solve.froude != 0.0 {
            positive("solve.froude", self.solve.froude)?;
        }
        let c = &self.continuation;
        positive("continuation.eps_start", c.eps_start)?;
        positive("continuation.eps_second", c.eps_second)?;
        if c.eps_second == c.eps_start {
            return Err(Fail::Config(
                "`continuation.eps_second` must differ from `continuation.eps_start`".into(),
            ));
        }
        positive("continuation.ds_init", c.ds_init)?;
        positive("continuation.ds_min", c.ds_min)?;
        positive("continuation.ds_max", c.ds_max)?;
        if !(c.ds_min <= c.ds_init && c.ds_init <= c.ds_max) {
            return Err(Fail::Config(
                "`continuation.ds_init` must lie in [ds_min, ds_max]".into(),
            ));
        }
        positive("continuation.min_hp_stop", c.min_hp_stop)?;
        positive("continuation.sup_hp_stop", c.sup_hp_stop)?;
        at_least("continuation.max_points", c.max_points, 2)?;
        at_least("continuation.corrector_max_iter", c.corrector_max_iter, 1)?;
        Ok(())
    }

    pub fn normalization(&self) -> Result<stratwave::reduced_model::Normalization, Fail> {
        use stratwave::reduced_model::Normalization;
        match self.normalization.as_str() {
            "bed-slope" => Ok(Normalization::BedSlope),
            "interface-unit" => Ok(Normalization::InterfaceUnit),
            other => Err(Fail::Config(format!(
                "`normalization` must be \"bed-slope\" or \"interface-unit\", got {other:?}"
            ))),
        }
    }

    pub fn newton_options(&self) -> stratwave::height_solver::NewtonOptions {
        stratwave::height_solver::NewtonOptions {
            tol: self.newton.tol,
            max_iter: self.newton.max_iter,
            max_halvings: self.newton.max_halvings,
        }
    }

    pub fn continuation_options(&self) -> stratwave::height_solver::ContinuationOptions {
        let c = &self.continuation;
        stratwave::height_solver::ContinuationOptions {
            ds_init: c.ds_init,
            ds_min: c.ds_min,
            ds_max: c.ds_max,
            min_hp_stop: c.min_hp_stop,
            sup_hp_stop: c.sup_hp_stop,
            max_points: c.max_points,
            newton: stratwave::height_solver::NewtonOptions {
                max_iter: c.corrector_max_iter,
                ..self.newton_options()
            },
            easy_iterations: c.easy_iterations,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// `section.key = value` pairs in serialization order.
    pub fn flat(&self) -> Vec<(String, String)> {
        let v = toml::Value::try_from(self).expect("config serializes");
        let mut out = Vec::new();
        flatten(&v, "", &mut out);
        out
    }
}

fn flatten(v: &toml::Value, prefix: &str, out: &mut Vec<(String, String)>) {
    match v {
        toml::Value::Table(t) => {
            for (k, x) in t {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(x, &key, out);
            }
        }
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Default domain half-length for amplitude ε.
pub fn auto_length(eps: f64, b1: f64) -> f64 {
    (60.0 / (eps * b1.sqrt())).clamp(20.0, 400.0)
}
