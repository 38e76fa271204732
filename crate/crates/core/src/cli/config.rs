//! TOML run configuration.
//!
//! ```toml
//! base_seed = 2021
//! horizon = 1000
//! n_trials = 50
//! lambda_grid = [0.0, 0.25, 0.5, 0.75, 1.0]   # default [1.0]
//! output_dir = "out"
//! emit_traces = false
//!
//! [env]
//! preset = "small-world-2x3"     # or: dims = [2, 3]
//! stationarity = "constant"      # constant | periodic | every_step
//! period = 10                    # periodic only
//! noise_sigma = 0.05
//! cost_floor = 0.001
//! reward_delay = 0
//! context_dim = 2                # defaults to the number of dimensions
//!
//! [mixer]
//! mode = "convex"                # convex | ratio
//! cost_floor = 0.001
//!
//! [[agents]]
//! kind = "cctsb"                 # cctsb | indcomb-ucb1 | indcomb-ts | random | random-fixed
//! alpha = 0.1
//! discount = 1.0
//! ```
//!
//! Unknown keys are rejected. Every top-level key and section is optional
//! except `agents`.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::{preset, ActionSpace, MixMode, DEFAULT_COST_FLOOR};
use crate::envworld::{EnvConfig, Stationarity, DEFAULT_NOISE_SIGMA, DEFAULT_PERIOD};
use crate::harness::{ExperimentPlan, DEFAULT_HORIZON, DEFAULT_TRIALS};
use crate::policies::PolicyConfig;

/// A configuration problem, optionally pinned to a line of the file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.path.display(), l, self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default = "default_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub emit_traces: bool,
    #[serde(default)]
    pub env: EnvSection,
    #[serde(default)]
    pub mixer: MixerSection,
    pub agents: Vec<AgentSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSection {
    pub preset: Option<String>,
    pub dims: Option<Vec<usize>>,
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub stationarity: StationarityKind,
    pub period: Option<usize>,
    #[serde(default = "default_sigma")]
    pub noise_sigma: f64,
    #[serde(default = "default_floor")]
    pub cost_floor: f64,
    #[serde(default)]
    pub reward_delay: usize,
    pub context_dim: Option<usize>,
}

impl Default for EnvSection {
    fn default() -> Self {
        Self {
            preset: None,
            dims: None,
            labels: None,
            stationarity: StationarityKind::Constant,
            period: None,
            noise_sigma: DEFAULT_NOISE_SIGMA,
            cost_floor: DEFAULT_COST_FLOOR,
            reward_delay: 0,
            context_dim: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationarityKind {
    #[default]
    Constant,
    Periodic,
    EveryStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixerSection {
    #[serde(default = "default_mode")]
    pub mode: MixMode,
    #[serde(default = "default_floor")]
    pub cost_floor: f64,
}

impl Default for MixerSection {
    fn default() -> Self {
        Self {
            mode: MixMode::Convex,
            cost_floor: DEFAULT_COST_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSection {
    pub kind: AgentKind,
    pub alpha: Option<f64>,
    pub discount: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    Cctsb,
    IndcombUcb1,
    IndcombTs,
    Random,
    RandomFixed,
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}
/// Reward-driven only; the five-point grid must be asked for.
fn default_grid() -> Vec<f64> {
    vec![1.0]
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_sigma() -> f64 {
    DEFAULT_NOISE_SIGMA
}
fn default_floor() -> f64 {
    DEFAULT_COST_FLOOR
}
fn default_mode() -> MixMode {
    MixMode::Convex
}

/// Where a key lives: top level, a `[section]`, or the n-th `[[array]]` entry.
#[derive(Debug, Clone, Copy)]
enum Scope<'a> {
    Root,
    Table(&'a str),
    Array(&'a str, usize),
}

/// 1-based line of `key` inside `scope`, found by a line scan of `src`.
fn locate(src: &str, scope: Scope<'_>, key: &str) -> Option<usize> {
    let mut array_seen: usize = 0;
    let mut in_scope = matches!(scope, Scope::Root);
    for (n, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            let is_array = line.starts_with("[[");
            let name = line.trim_matches(|c| c == '[' || c == ']' || c == ' ').to_string();
            in_scope = match scope {
                Scope::Root => false,
                Scope::Table(t) => !is_array && name == t,
                Scope::Array(t, i) => {
                    if is_array && name == t {
                        array_seen += 1;
                        array_seen == i + 1
                    } else {
                        false
                    }
                }
            };
            continue;
        }
        if !in_scope {
            continue;
        }
        if let Some((k, _)) = line.split_once('=') {
            if k.trim().trim_matches('"') == key {
                return Some(n + 1);
            }
        }
    }
    None
}

impl RunConfig {
    /// Reads, parses and validates a configuration file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: None,
            message: format!("cannot read: {e}"),
        })?;
        Self::parse(&src, path)
    }

    /// Parses and validates `src`; `path` only labels diagnostics.
    pub fn parse(src: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: e.span().map(|s| src[..s.start.min(src.len())].matches('\n').count() + 1),
            message: e.message().trim().to_string(),
        })?;
        cfg.validate_in(src, path)?;
        Ok(cfg)
    }

    fn validate_in(&self, src: &str, path: &Path) -> Result<(), ConfigError> {
        let err = |scope, key: &str, message: String| ConfigError {
            path: path.to_path_buf(),
            line: locate(src, scope, key),
            message: format!("`{key}`: {message}"),
        };
        self.check().map_err(|(scope, key, msg)| err(scope, key, msg))
    }

    /// Range checks shared by file loading and command-line overrides.
    fn check(&self) -> Result<(), (Scope<'static>, &'static str, String)> {
        use Scope::*;
        if self.horizon == 0 {
            return Err((Root, "horizon", "must be ≥ 1".into()));
        }
        if self.n_trials == 0 {
            return Err((Root, "n_trials", "must be ≥ 1".into()));
        }
        check_grid(&self.lambda_grid).map_err(|m| (Root, "lambda_grid", m))?;
        if self.agents.is_empty() {
            return Err((Root, "agents", "at least one [[agents]] entry is required".into()));
        }

        let env = &self.env;
        match (&env.preset, &env.dims) {
            (Some(_), Some(_)) => return Err((Table("env"), "dims", "give either `preset` or `dims`, not both".into())),
            (Some(p), None) if preset(p).is_none() => {
                return Err((Table("env"), "preset", format!("unknown preset {p:?}")));
            }
            (None, Some(d)) if d.is_empty() || d.contains(&0) => {
                return Err((Table("env"), "dims", "every dimension needs ≥ 1 arm".into()));
            }
            _ => {}
        }
        if env.labels.is_some() && env.dims.is_none() {
            return Err((Table("env"), "labels", "labels require `dims`".into()));
        }
        if let (Some(l), Some(d)) = (&env.labels, &env.dims) {
            if l.len() != d.len() {
                return Err((Table("env"), "labels", format!("expected {} labels, got {}", d.len(), l.len())));
            }
        }
        match (env.stationarity, env.period) {
            (StationarityKind::Periodic, Some(0)) => return Err((Table("env"), "period", "must be ≥ 1".into())),
            (StationarityKind::Periodic, _) => {}
            (_, Some(_)) => {
                return Err((Table("env"), "period", "only valid with stationarity = \"periodic\"".into()));
            }
            _ => {}
        }
        if !(env.noise_sigma.is_finite() && env.noise_sigma >= 0.0) {
            return Err((Table("env"), "noise_sigma", format!("must be ≥ 0, got {}", env.noise_sigma)));
        }
        if !(env.cost_floor.is_finite() && env.cost_floor > 0.0) {
            return Err((Table("env"), "cost_floor", format!("must be > 0, got {}", env.cost_floor)));
        }
        if let Some(c) = env.context_dim {
            let k = self.space_unchecked().dims();
            if c < k {
                return Err((Table("env"), "context_dim", format!("must be ≥ {k} (one weight per dimension)")));
            }
        }
        if !(self.mixer.cost_floor.is_finite() && self.mixer.cost_floor > 0.0) {
            return Err((Table("mixer"), "cost_floor", format!("must be > 0, got {}", self.mixer.cost_floor)));
        }

        let mut names = Vec::new();
        for (i, a) in self.agents.iter().enumerate() {
            let at = Array("agents", i);
            match a.kind {
                AgentKind::Cctsb => {
                    let alpha = a.alpha.ok_or((at, "alpha", "required for kind = \"cctsb\"".to_string()))?;
                    if !(alpha.is_finite() && alpha > 0.0) {
                        return Err((at, "alpha", format!("must be > 0, got {alpha}")));
                    }
                    if let Some(d) = a.discount {
                        if !(d > 0.0 && d <= 1.0) {
                            return Err((at, "discount", format!("must be in (0, 1], got {d}")));
                        }
                    }
                }
                _ if a.alpha.is_some() => return Err((at, "alpha", "only valid for kind = \"cctsb\"".into())),
                _ if a.discount.is_some() => {
                    return Err((at, "discount", "only valid for kind = \"cctsb\"".into()));
                }
                _ => {}
            }
            let name = a.policy().name();
            if names.contains(&name) {
                return Err((at, "kind", format!("duplicate agent {name}")));
            }
            names.push(name);
        }
        Ok(())
    }

    /// Replaces the λ grid after validating it.
    pub fn set_lambda_grid(&mut self, grid: Vec<f64>) -> Result<(), String> {
        check_grid(&grid)?;
        self.lambda_grid = grid;
        Ok(())
    }

    fn space_unchecked(&self) -> ActionSpace {
        match (&self.env.preset, &self.env.dims, &self.env.labels) {
            (Some(p), _, _) => preset(p).expect("validated preset"),
            (None, Some(d), Some(l)) => ActionSpace::with_labels(d.clone(), l.clone()).expect("validated dims"),
            (None, Some(d), None) => ActionSpace::new(d.clone()).expect("validated dims"),
            (None, None, _) => preset("small-world-2x3").expect("built-in preset"),
        }
    }

    pub fn space(&self) -> ActionSpace {
        self.space_unchecked()
    }

    pub fn stationarity(&self) -> Stationarity {
        match self.env.stationarity {
            StationarityKind::Constant => Stationarity::Constant,
            StationarityKind::Periodic => Stationarity::Periodic(self.env.period.unwrap_or(DEFAULT_PERIOD)),
            StationarityKind::EveryStep => Stationarity::EveryStep,
        }
    }

    pub fn plan(&self) -> ExperimentPlan {
        let space = self.space();
        let mut env = EnvConfig::new(space, self.stationarity(), 0);
        if let Some(c) = self.env.context_dim {
            env.context_dim = c;
        }
        env.noise_sigma = self.env.noise_sigma;
        env.cost_floor = self.env.cost_floor;
        env.reward_delay = self.env.reward_delay;
        let mut plan = ExperimentPlan::new(env, self.agents.iter().map(AgentSection::policy).collect());
        plan.horizon = self.horizon;
        plan.n_trials = self.n_trials;
        plan.base_seed = self.base_seed;
        plan.lambda_grid = self.lambda_grid.clone();
        plan.mix_mode = self.mixer.mode;
        plan.cost_floor = self.mixer.cost_floor;
        plan.keep_traces = self.emit_traces;
        plan
    }
}

impl AgentSection {
    pub fn policy(&self) -> PolicyConfig {
        match self.kind {
            AgentKind::Cctsb => PolicyConfig::Cctsb {
                alpha: self.alpha.unwrap_or(f64::NAN),
                discount: self.discount.unwrap_or(1.0),
            },
            AgentKind::IndcombUcb1 => PolicyConfig::IndCombUcb1,
            AgentKind::IndcombTs => PolicyConfig::IndCombTs,
            AgentKind::Random => PolicyConfig::Random,
            AgentKind::RandomFixed => PolicyConfig::RandomFixed,
        }
    }
}

fn check_grid(grid: &[f64]) -> Result<(), String> {
    if grid.is_empty() {
        return Err("λ grid is empty".into());
    }
    for (i, &l) in grid.iter().enumerate() {
        if !(0.0..=1.0).contains(&l) {
            return Err(format!("λ = {l} outside [0, 1]"));
        }
        if grid[..i].contains(&l) {
            return Err(format!("λ = {l} listed twice"));
        }
    }
    Ok(())
}

/// Parses a comma-separated λ list such as `0,0.5,1`.
pub fn parse_lambda_grid(s: &str) -> Result<Vec<f64>, String> {
    let grid = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("not a number: {p:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    check_grid(&grid)?;
    Ok(grid)
}
