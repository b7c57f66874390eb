//! The check pipeline behind `scstat run`.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use scstat_core::dynamics::{self, TheoremCheck};
use scstat_core::models::ModelSpec;
use scstat_core::orders::{FunctionFamily, StochasticOrder};
use scstat_core::stationary::{self, StationaryPart};
use scstat_core::structure::assumption1_check;
use scstat_core::{DiscreteDistribution, Grid, MdpModel, SolvedModel, SolverOptions};

use crate::config::{CheckKind, ConfigError, ExperimentConfig, InitialName, InitialSpec, ParameterAxis};
use crate::report::{
    AssumptionEntry, CheckEntry, ParameterPoint, RunReport, SolutionSummary, StationaryEntry, Summary, Timing,
    TrajectoryRow,
};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] scstat_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("report error: {0}")]
    Json(#[from] serde_json::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub rows: Vec<TrajectoryRow>,
}

struct Point {
    label: String,
    value: Option<f64>,
    model: MdpModel,
    spec: ModelSpec,
}

fn build(spec: &ModelSpec, field: &str) -> Result<MdpModel, ConfigError> {
    spec.build().map_err(|e| ConfigError::field(field, e.to_string()))
}

fn state_index(grid: &Grid, coords: &[f64], field: &str) -> Result<usize, ConfigError> {
    if coords.len() != grid.dim() {
        return Err(ConfigError::field(field, format!("expected {} coordinates", grid.dim())));
    }
    let idx: Vec<usize> = (0..grid.dim())
        .map(|k| {
            grid.axis(k)
                .iter()
                .position(|&p| p == coords[k])
                .ok_or_else(|| ConfigError::field(field, format!("{} is not a grid point on axis {k}", coords[k])))
        })
        .collect::<Result<_, _>>()?;
    Ok(if grid.dim() == 1 { idx[0] } else { grid.index([idx[0], idx[1]]) })
}

fn initial_distribution(grid: &Grid, spec: &InitialSpec) -> Result<DiscreteDistribution, ConfigError> {
    Ok(match spec {
        InitialSpec::Named(InitialName::Lowest) => DiscreteDistribution::point_mass(grid.clone(), grid.min_index()),
        InitialSpec::Named(InitialName::Highest) => DiscreteDistribution::point_mass(grid.clone(), grid.max_index()),
        InitialSpec::Named(InitialName::Uniform) => DiscreteDistribution::uniform(grid.clone()),
        InitialSpec::State(x) => DiscreteDistribution::point_mass(grid.clone(), state_index(grid, x, "initial")?),
    })
}

fn points(cfg: &ExperimentConfig) -> Result<Vec<Point>, ConfigError> {
    let base = || build(&cfg.model, "model");
    let one = |label: String, value, model| Point { label, value, model, spec: cfg.model.clone() };
    Ok(match &cfg.parameter {
        None => vec![one("base".into(), None, base()?)],
        Some(ParameterAxis::InitialState { .. }) => {
            let m = base()?;
            vec![one("initial_low".into(), None, m.clone()), one("initial_high".into(), None, m)]
        }
        Some(ParameterAxis::Discount { values }) => {
            let m = base()?;
            values
                .iter()
                .map(|&b| {
                    let model = m.with_beta(b).map_err(|e| ConfigError::field("parameter.values", e.to_string()))?;
                    Ok(Point { label: format!("beta={b}"), value: Some(b), model, spec: cfg.model.clone().with_beta(b) })
                })
                .collect::<Result<_, ConfigError>>()?
        }
        Some(ParameterAxis::Payoff { values, term }) => {
            let m = base()?;
            let xs: Vec<f64> = (0..m.n_states()).map(|s| m.states().value(s, 0)).collect();
            let h = term
                .evaluate(&xs, m.actions().points())
                .map_err(|e| ConfigError::field("parameter.term", e.to_string()))?;
            values
                .iter()
                .map(|&c| {
                    let r = m.reward_table().iter().zip(&h).map(|(r, h)| r + c * h).collect();
                    let model = m.with_reward(r).map_err(|e| ConfigError::field("parameter.term", e.to_string()))?;
                    Ok(one(format!("c={c}"), Some(c), model))
                })
                .collect::<Result<_, ConfigError>>()?
        }
        Some(ParameterAxis::Kernel { .. }) => {
            let specs = cfg.variant_specs()?;
            let models = specs
                .iter()
                .enumerate()
                .map(|(i, s)| build(s, &format!("parameter.variants[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let first = &models[0];
            for (i, m) in models.iter().enumerate().skip(1) {
                if m.states() != first.states()
                    || m.actions() != first.actions()
                    || m.feasible() != first.feasible()
                    || m.reward_table() != first.reward_table()
                {
                    return Err(ConfigError::field(
                        format!("parameter.variants[{i}]"),
                        "kernel variants must share the state grid, actions, feasibility and rewards",
                    ));
                }
            }
            specs
                .into_iter()
                .zip(models)
                .enumerate()
                .map(|(i, (spec, model))| Point { label: format!("kernel_{i}"), value: None, model, spec })
                .collect()
        }
    })
}

/// Laws `v2`, `v1` re-expressed on the union of their supports.
fn common_support(v2: &DiscreteDistribution, v1: &DiscreteDistribution) -> scstat_core::Result<(Vec<f64>, DiscreteDistribution, DiscreteDistribution)> {
    let mut pts: Vec<f64> = v2.grid().points().iter().chain(v1.grid().points()).copied().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let lift = |v: &DiscreteDistribution| {
        let mut atoms: Vec<(f64, f64)> = pts.iter().map(|&p| (p, 0.0)).collect();
        atoms.extend(v.grid().points().iter().copied().zip(v.mass().iter().copied()));
        DiscreteDistribution::from_atoms(&atoms)
    };
    Ok((pts.clone(), lift(v2)?, lift(v1)?))
}

fn kernel_order(cfg: &ExperimentConfig) -> StochasticOrder {
    match &cfg.parameter {
        Some(ParameterAxis::Kernel { order, .. }) => *order,
        _ => StochasticOrder::St,
    }
}

pub fn execute(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<RunOutcome, RunError> {
    let started = Instant::now();
    cfg.validate()?;
    let pts = points(cfg)?;
    let opts = SolverOptions { eps: cfg.solver.eps, argmax_tol: cfg.solver.argmax_tol, max_iter: cfg.solver.max_iter };
    let solve_all = || -> Result<Vec<SolvedModel>, scstat_core::Error> {
        pts.par_iter().map(|p| SolvedModel::solve(p.model.clone(), &opts)).collect()
    };
    let solved = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ConfigError::field("jobs", e.to_string()))?
            .install(solve_all)?,
        None => solve_all()?,
    };
    let (tol, horizon) = (cfg.tol, cfg.horizon);
    let grid = solved[0].model.states().clone();

    let initial = match &cfg.parameter {
        Some(ParameterAxis::InitialState { low, high }) => {
            let lo = state_index(&grid, low, "parameter.low")?;
            let hi = state_index(&grid, high, "parameter.high")?;
            vec![DiscreteDistribution::point_mass(grid.clone(), lo), DiscreteDistribution::point_mass(grid.clone(), hi)]
        }
        _ => vec![initial_distribution(&grid, &cfg.initial)?; solved.len()],
    };
    let mut rows = Vec::with_capacity(horizon * solved.len());
    let trajectories = solved
        .iter()
        .zip(&initial)
        .map(|(sm, mu)| dynamics::trajectory(sm.induced(), sm.policy(), mu, horizon))
        .collect::<scstat_core::Result<Vec<_>>>()?;
    for t in 0..horizon {
        for (id, tr) in trajectories.iter().enumerate() {
            rows.push(TrajectoryRow { t: t + 1, param_id: id, expected_decision: tr.expected_decision[t], mean_state: tr.mean_state[t] });
        }
    }

    let mut assumptions = Vec::new();
    let mut checks = Vec::new();
    let mut stationary_out = Vec::new();
    let order = kernel_order(cfg);
    let pairs: Vec<usize> = (1..solved.len()).collect();
    let push = |checks: &mut Vec<CheckEntry>, kind, params, check: TheoremCheck| checks.push(CheckEntry { kind, params, check });
    for &kind in &cfg.checks {
        match kind {
            CheckKind::Assumption1 => {
                let distinct = if matches!(cfg.parameter, Some(ParameterAxis::InitialState { .. })) { 1 } else { solved.len() };
                for (id, sm) in solved.iter().enumerate().take(distinct) {
                    assumptions.push(AssumptionEntry { param_id: id, report: assumption1_check(&sm.model, tol)? });
                }
            }
            CheckKind::Parameter => {
                push(&mut checks, kind, (0..solved.len()).collect(), dynamics::check_scs_parameter(&solved, horizon, tol)?);
            }
            CheckKind::InitialState => match &cfg.parameter {
                Some(ParameterAxis::InitialState { low, high }) => {
                    let lo = state_index(&grid, low, "parameter.low")?;
                    let hi = state_index(&grid, high, "parameter.high")?;
                    push(&mut checks, kind, vec![0, 1], dynamics::check_initial_state(&solved[0], lo, hi, horizon, tol)?);
                }
                _ => {
                    for (id, sm) in solved.iter().enumerate() {
                        let c = dynamics::check_initial_state(sm, grid.min_index(), grid.max_index(), horizon, tol)?;
                        push(&mut checks, kind, vec![id], c);
                    }
                }
            },
            CheckKind::Theorem1 => {
                let family = match order {
                    StochasticOrder::St => FunctionFamily::Increasing,
                    _ => FunctionFamily::IncreasingConvex,
                };
                for &j in &pairs {
                    let c = dynamics::check_theorem1(solved[j].induced(), solved[j - 1].induced(), None, family, horizon, tol)?;
                    push(&mut checks, kind, vec![j - 1, j], c);
                }
            }
            CheckKind::Transition => {
                for &j in &pairs {
                    let c = dynamics::check_theorem2(&solved[j], &solved[j - 1], order, horizon, tol)?;
                    push(&mut checks, kind, vec![j - 1, j], c);
                }
            }
            CheckKind::TransitionMap => {
                for &j in &pairs {
                    let (v2, v1) = match (pts[j].spec.shock_law()?, pts[j - 1].spec.shock_law()?) {
                        (Some(a), Some(b)) => (a, b),
                        _ => return Err(ConfigError::field("checks", "model has no shock law").into()),
                    };
                    let (support, v2, v1) = common_support(&v2, &v1)?;
                    let m = pts[j].spec.transition_map(&support)?.expect("shock-driven model");
                    let c = dynamics::check_theorem4(&m, &v2, &v1, &solved[j], &solved[j - 1], horizon, tol)?;
                    push(&mut checks, kind, vec![j - 1, j], c);
                }
            }
            CheckKind::Stationary => {
                let part = match order {
                    StochasticOrder::St => StationaryPart::I,
                    _ => StationaryPart::Ii,
                };
                for &j in &pairs {
                    let cmp = stationary::check_prop4(&solved[j], &solved[j - 1], part, tol, cfg.stationary.tol, cfg.stationary.max_iter)?;
                    let [e2, e1] = cmp.pairs;
                    if !stationary_out.iter().any(|e: &StationaryEntry| e.param_id == j - 1) {
                        stationary_out.push(StationaryEntry { param_id: j - 1, pair: e1 });
                    }
                    stationary_out.push(StationaryEntry { param_id: j, pair: e2 });
                    push(&mut checks, kind, vec![j - 1, j], cmp.check);
                }
            }
        }
    }

    let parameters = pts
        .iter()
        .enumerate()
        .map(|(id, p)| ParameterPoint { param_id: id, label: p.label.clone(), value: p.value })
        .collect();
    let solutions = solved
        .iter()
        .enumerate()
        .map(|(id, sm)| SolutionSummary {
            param_id: id,
            policy: sm.policy().values().to_vec(),
            policy_indices: sm.policy().indices().to_vec(),
            value: sm.solution.value.values().to_vec(),
            min_margin: sm.solution.correspondence.margins().iter().copied().fold(f64::INFINITY, f64::min),
        })
        .collect();
    let summary = Summary::from_checks(&checks);
    let report = RunReport {
        tool: crate::report::ToolInfo::current(),
        config: cfg.clone(),
        parameters,
        solutions,
        assumptions,
        checks,
        stationary: stationary_out,
        summary,
        timing: Timing { elapsed_ms: started.elapsed().as_millis() },
    };
    Ok(RunOutcome { report, rows })
}

/// Writes the report and the trajectory table next to the config file.
pub fn write_outputs(outcome: &RunOutcome, base_dir: &Path) -> Result<(), RunError> {
    let out = &outcome.report.config.output;
    let report_path = base_dir.join(&out.report);
    let csv_path = base_dir.join(&out.trajectories);
    for p in [&report_path, &csv_path] {
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(&report_path, outcome.report.to_json()?)?;
    std::fs::write(&csv_path, crate::report::csv_string(&outcome.rows))?;
    Ok(())
}
