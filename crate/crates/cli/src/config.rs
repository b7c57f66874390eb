//! Experiment configuration files.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use scstat_core::models::{Family2, ModelSpec};
use scstat_core::orders::StochasticOrder;
use scstat_core::stationary;

/// A config problem, located by field path and, when known, by line and column.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), line: None, column: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, "line {l}, column {c}: ")?;
        }
        if self.field.is_empty() || self.field == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Assumption-1 structure of every distinct model.
    Assumption1,
    /// Chain dominance propagated through time, on consecutive kernel variants.
    Theorem1,
    /// Expected decisions rising along a discount or payoff axis.
    Parameter,
    /// Expected decisions rising with the initial state.
    InitialState,
    /// Kernel comparison for models that differ only in the transition.
    Transition,
    /// Kernel comparison through a common transition map and ordered shocks.
    TransitionMap,
    /// Least and greatest stationary distributions.
    Stationary,
}

/// What varies across the solved models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParameterAxis {
    /// Increasing discount factors.
    Discount { values: Vec<f64> },
    /// `r(s, a) + c·term(s, a)` for increasing `c`; `s` is the first state coordinate.
    Payoff { values: Vec<f64>, term: Family2 },
    /// Overrides merged into the base model, ordered from low to high.
    Kernel { order: StochasticOrder, variants: Vec<Map<String, Value>> },
    /// Two initial states (coordinates) for one model.
    InitialState { low: Vec<f64>, high: Vec<f64> },
}

/// Where trajectories start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Named(InitialName),
    State(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialName {
    Lowest,
    Highest,
    Uniform,
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Named(InitialName::Lowest)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_argmax_tol")]
    pub argmax_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { eps: default_eps(), argmax_tol: default_argmax_tol(), max_iter: default_max_iter() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationaryConfig {
    #[serde(default = "default_stationary_tol")]
    pub tol: f64,
    #[serde(default = "default_stationary_iter")]
    pub max_iter: usize,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        Self { tol: default_stationary_tol(), max_iter: default_stationary_iter() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_report")]
    pub report: PathBuf,
    #[serde(default = "default_trajectories")]
    pub trajectories: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { report: default_report(), trajectories: default_trajectories() }
    }
}

fn default_eps() -> f64 {
    1e-10
}
fn default_argmax_tol() -> f64 {
    scstat_core::solver::DEFAULT_ARGMAX_TOL
}
fn default_max_iter() -> usize {
    scstat_core::solver::DEFAULT_MAX_ITER
}
fn default_stationary_tol() -> f64 {
    stationary::DEFAULT_TOL
}
fn default_stationary_iter() -> usize {
    stationary::DEFAULT_MAX_ITER
}
fn default_report() -> PathBuf {
    PathBuf::from("report.json")
}
fn default_trajectories() -> PathBuf {
    PathBuf::from("trajectories.csv")
}
fn default_horizon() -> usize {
    scstat_core::dynamics::DEFAULT_HORIZON
}
fn default_tol() -> f64 {
    scstat_core::ORDER_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub parameter: Option<ParameterAxis>,
    #[serde(default)]
    pub checks: Vec<CheckKind>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub stationary: StationaryConfig,
    /// Output paths, relative to the config file.
    #[serde(default)]
    pub output: OutputConfig,
    /// Seed of the generator that produced the config; echoed, never used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn from_serde(e: serde_path_to_error::Error<serde_json::Error>, prefix: &str) -> ConfigError {
    let path = e.path().to_string();
    let inner = e.into_inner();
    let line = (inner.line() > 0).then(|| inner.line());
    let column = (inner.column() > 0).then(|| inner.column());
    let field = match (prefix.is_empty(), path.as_str()) {
        (true, p) => p.to_string(),
        (false, ".") => prefix.to_string(),
        (false, p) => format!("{prefix}.{p}"),
    };
    let mut message = inner.to_string();
    if let Some(i) = message.find(" at line ") {
        message.truncate(i);
    }
    ConfigError { field, line, column, message }
}

/// Parses and validates a config from JSON text.
pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let mut err = from_serde(e, "");
        if err.field == "model" {
            if let Some(m) = serde_json::from_str::<Value>(text).ok().as_ref().and_then(|v| v.get("model")) {
                if let Some(inner) = diagnose_model(m, "model") {
                    err.field = inner.field;
                    err.message = inner.message;
                }
            }
        }
        err
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::field("", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

/// Re-runs deserialization of a tagged model object against its concrete
/// variant, which recovers the path of the offending field.
fn diagnose_model(model: &Value, prefix: &str) -> Option<ConfigError> {
    use scstat_core::models::{CapitalSpec, PricingSpec, RandomWalkSpec, RawSpec, SavingsSpec};
    fn concrete<T: serde::de::DeserializeOwned>(v: Value, prefix: &str) -> Option<ConfigError> {
        serde_path_to_error::deserialize::<_, T>(v).err().map(|e| {
            let path = e.path().to_string();
            let field = if path == "." { prefix.to_string() } else { format!("{prefix}.{path}") };
            ConfigError::field(field, e.into_inner().to_string())
        })
    }
    let mut body = model.as_object()?.clone();
    let tag = body.remove("model")?;
    let body = Value::Object(body);
    match tag.as_str()? {
        "capital" => concrete::<CapitalSpec>(body, prefix),
        "pricing" => concrete::<PricingSpec>(body, prefix),
        "randomwalk" => concrete::<RandomWalkSpec>(body, prefix),
        "savings" => concrete::<SavingsSpec>(body, prefix),
        "raw" => concrete::<RawSpec>(body, prefix),
        _ => None,
    }
}

fn unit_interval(field: &str, beta: f64) -> Result<(), ConfigError> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(ConfigError::field(field, format!("discount factor must lie in (0, 1), got {beta}")))
    }
}

fn increasing(field: &str, values: &[f64]) -> Result<(), ConfigError> {
    if values.is_empty() {
        return Err(ConfigError::field(field, "needs at least one value"));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(ConfigError::field(format!("{field}[{i}]"), "must be finite"));
    }
    if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
        return Err(ConfigError::field(format!("{field}[{}]", i + 1), "values must be nondecreasing"));
    }
    Ok(())
}

fn merge(base: &Value, overrides: &Map<String, Value>) -> Value {
    let mut v = base.clone();
    if let Value::Object(m) = &mut v {
        for (k, x) in overrides {
            m.insert(k.clone(), x.clone());
        }
    }
    v
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        unit_interval("model.beta", self.model.beta())?;
        if self.horizon == 0 {
            return Err(ConfigError::field("horizon", "must be at least 1"));
        }
        if !(self.tol >= 0.0) {
            return Err(ConfigError::field("tol", "must be a nonnegative number"));
        }
        if !(self.solver.eps > 0.0) {
            return Err(ConfigError::field("solver.eps", "must be positive"));
        }
        if !(self.stationary.tol > 0.0) {
            return Err(ConfigError::field("stationary.tol", "must be positive"));
        }
        match &self.parameter {
            Some(ParameterAxis::Discount { values }) => {
                increasing("parameter.values", values)?;
                for (i, &b) in values.iter().enumerate() {
                    unit_interval(&format!("parameter.values[{i}]"), b)?;
                }
            }
            Some(ParameterAxis::Payoff { values, .. }) => increasing("parameter.values", values)?,
            Some(ParameterAxis::Kernel { variants, .. }) => {
                if variants.len() < 2 {
                    return Err(ConfigError::field("parameter.variants", "needs at least two kernel variants"));
                }
                for (i, v) in variants.iter().enumerate() {
                    if v.contains_key("model") || v.contains_key("beta") {
                        return Err(ConfigError::field(
                            format!("parameter.variants[{i}]"),
                            "variants may override kernel fields only",
                        ));
                    }
                }
                self.variant_specs()?;
            }
            Some(ParameterAxis::InitialState { .. }) | None => {}
        }
        for (i, c) in self.checks.iter().enumerate() {
            let field = format!("checks[{i}]");
            let axis = self.parameter.as_ref();
            let ok = match c {
                CheckKind::Assumption1 | CheckKind::InitialState => true,
                CheckKind::Parameter => {
                    matches!(axis, Some(ParameterAxis::Discount { .. } | ParameterAxis::Payoff { .. }))
                }
                CheckKind::Theorem1 | CheckKind::Transition | CheckKind::Stationary => {
                    matches!(axis, Some(ParameterAxis::Kernel { .. }))
                }
                CheckKind::TransitionMap => {
                    matches!(axis, Some(ParameterAxis::Kernel { order: StochasticOrder::St, .. }))
                        && matches!(self.model, ModelSpec::Pricing(_) | ModelSpec::Randomwalk(_) | ModelSpec::Savings(_))
                }
            };
            if !ok {
                return Err(ConfigError::field(field, format!("{} check is incompatible with the parameter axis or model", name(*c))));
            }
            if matches!(c, CheckKind::Transition | CheckKind::Stationary) {
                if let Some(ParameterAxis::Kernel { order: StochasticOrder::Icx, .. }) = axis {
                    return Err(ConfigError::field(field, "kernel comparisons use the st or cx order"));
                }
            }
        }
        Ok(())
    }

    /// The base model with each kernel variant applied, low to high.
    pub fn variant_specs(&self) -> Result<Vec<ModelSpec>, ConfigError> {
        let Some(ParameterAxis::Kernel { variants, .. }) = &self.parameter else {
            return Ok(vec![self.model.clone()]);
        };
        let base = serde_json::to_value(&self.model).map_err(|e| ConfigError::field("model", e.to_string()))?;
        variants
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let merged = merge(&base, v);
                let prefix = format!("parameter.variants[{i}]");
                serde_json::from_value(merged.clone()).map_err(|e| {
                    diagnose_model(&merged, &prefix).unwrap_or_else(|| ConfigError::field(prefix.clone(), e.to_string()))
                })
            })
            .collect()
    }
}

pub fn name(c: CheckKind) -> &'static str {
    match c {
        CheckKind::Assumption1 => "assumption1",
        CheckKind::Theorem1 => "theorem1",
        CheckKind::Parameter => "parameter",
        CheckKind::InitialState => "initial_state",
        CheckKind::Transition => "transition",
        CheckKind::TransitionMap => "transition_map",
        CheckKind::Stationary => "stationary",
    }
}
