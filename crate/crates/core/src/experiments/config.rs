use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::optimizers::LineSearchConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    Motivating,
    Ex1,
    Ex2,
    Ex3,
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "motivating" => Ok(Example::Motivating),
            "ex1" => Ok(Example::Ex1),
            "ex2" => Ok(Example::Ex2),
            "ex3" => Ok(Example::Ex3),
            other => Err(Error::Config(format!("unknown example '{other}'"))),
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Example::Motivating => "motivating",
            Example::Ex1 => "ex1",
            Example::Ex2 => "ex2",
            Example::Ex3 => "ex3",
        })
    }
}

/// Everything needed to reproduce one run. `corruption` means `eps` for the
/// two-atom examples, the corrupted fraction `M/N` for ex2 and the half-width
/// `delta` for ex3.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub example: Example,
    pub corruption: f64,
    pub theta: f64,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,

    pub n_cells: usize,
    pub alpha: f64,
    pub kkl_modes: usize,
    pub n_samples: usize,
    pub sigma: f64,
    pub target_dof: usize,
    pub quad_nodes: usize,

    pub gd_tol: f64,
    pub gd_max_iter: usize,
    pub z_gtol: f64,
    pub z_max_iter: usize,
    pub lbfgs_m: usize,
    pub t_tol: f64,
    pub t_inner_tol: f64,
    pub t_max_iter: usize,
    pub max_outer: usize,
    pub line_search: LineSearchConfig,
}

impl ExperimentConfig {
    /// Defaults for `example`; corruption and theta default to the headline cases.
    pub fn new(example: Example) -> Self {
        let (corruption, theta, alpha, z_gtol, t_tol) = match example {
            Example::Motivating => (0.05, 1.0, 1e-4, 1e-5, 1e-5),
            Example::Ex1 => (0.05, 1.0, 1e-4, 1e-5, 1e-5),
            Example::Ex2 => (0.05, 5e-2, 1e-4, 1e-5, 1e-5),
            Example::Ex3 => (0.3, 0.1, 1e-5, 1e-6, 1e-2),
        };
        Self {
            example,
            corruption,
            theta,
            seed: 20240607,
            output_dir: None,
            n_cells: 256,
            alpha,
            kkl_modes: 50,
            n_samples: 1000,
            sigma: 0.4,
            target_dof: 5185,
            quad_nodes: 8,
            gd_tol: 1e-4,
            gd_max_iter: 100_000,
            z_gtol,
            z_max_iter: 10_000,
            lbfgs_m: 7,
            t_tol,
            t_inner_tol: 1e-6,
            t_max_iter: 1000,
            max_outer: 50,
            line_search: LineSearchConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.corruption;
        let ok = match self.example {
            Example::Motivating | Example::Ex1 => c > 0.0 && c < 1.0,
            Example::Ex2 => (0.0..1.0).contains(&c),
            Example::Ex3 => c > 0.0 && c < 0.5,
        };
        if !ok {
            return Err(Error::Config(format!(
                "corruption {c} out of range for {}",
                self.example
            )));
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(Error::Config(format!(
                "theta must be positive, got {}",
                self.theta
            )));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if self.n_cells < 2
            || self.n_samples == 0
            || self.kkl_modes == 0
            || self.quad_nodes == 0
            || self.lbfgs_m == 0
        {
            return Err(Error::Config("sizes must be positive".into()));
        }
        if self.target_dof < 10 {
            return Err(Error::Config("target_dof must be at least 10".into()));
        }
        if !(self.gd_tol > 0.0 && self.z_gtol > 0.0 && self.t_tol > 0.0 && self.t_inner_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_outer == 0 {
            return Err(Error::Config("max_outer must be at least 1".into()));
        }
        self.line_search
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Number of corrupted samples for ex2, `round(corruption * N)`.
    pub fn n_corrupted(&self) -> usize {
        (self.corruption * self.n_samples as f64).round() as usize
    }

    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value '{v}' for '{key}'")))
        }
        match key {
            "example" => self.example = value.parse()?,
            "corruption" => self.corruption = num(key, value)?,
            "theta" => self.theta = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "output_dir" | "out" => self.output_dir = Some(PathBuf::from(value)),
            "n_cells" => self.n_cells = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "kkl_modes" => self.kkl_modes = num(key, value)?,
            "n_samples" => self.n_samples = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "target_dof" => self.target_dof = num(key, value)?,
            "quad_nodes" => self.quad_nodes = num(key, value)?,
            "gd_tol" => self.gd_tol = num(key, value)?,
            "gd_max_iter" => self.gd_max_iter = num(key, value)?,
            "z_gtol" => self.z_gtol = num(key, value)?,
            "z_max_iter" => self.z_max_iter = num(key, value)?,
            "lbfgs_m" => self.lbfgs_m = num(key, value)?,
            "t_tol" => self.t_tol = num(key, value)?,
            "t_inner_tol" => self.t_inner_tol = num(key, value)?,
            "t_max_iter" => self.t_max_iter = num(key, value)?,
            "max_outer" => self.max_outer = num(key, value)?,
            "armijo_c1" => self.line_search.armijo_c1 = num(key, value)?,
            "backtrack_factor" => self.line_search.backtrack_factor = num(key, value)?,
            "wolfe_c2" => self.line_search.wolfe_c2 = num(key, value)?,
            "max_backtracks" => self.line_search.max_backtracks = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }
}

/// Parse flat `key = value` text. `#` starts a comment; blank lines are ignored.
/// Later duplicates override earlier ones.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected key = value",
                n + 1
            )));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

/// Build a config from file settings; `example` must be present or supplied.
pub fn config_from_settings(
    settings: &BTreeMap<String, String>,
    example: Option<Example>,
) -> Result<ExperimentConfig> {
    let example = match (settings.get("example"), example) {
        (_, Some(e)) => e,
        (Some(v), None) => v.parse()?,
        (None, None) => return Err(Error::Config("no example given".into())),
    };
    let mut cfg = ExperimentConfig::new(example);
    for (k, v) in settings {
        if k != "example" {
            cfg.set(k, v)?;
        }
    }
    Ok(cfg)
}
