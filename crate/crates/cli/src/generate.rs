//! Seeded random experiment configs whose instances satisfy their family's
//! hypotheses by construction.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use scstat_core::models::{Family1, Family2, GridSpec, ModelSpec, PricingSpec, RandomWalkSpec, RawSpec, SavingsSpec, UtilitySpec};
use scstat_core::orders::StochasticOrder;

use crate::config::{CheckKind, ExperimentConfig, InitialSpec, OutputConfig, ParameterAxis, SolverConfig, StationaryConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Family {
    /// Raw tables with increasing-differences rewards, a supermodular mixture
    /// kernel and ascending threshold feasibility; discount axis.
    #[value(name = "assumption1-random")]
    Assumption1Random,
    /// Downward-drifting walks with convex increasing state reward and noise
    /// shifted up one grid step; kernel axis.
    #[value(name = "randomwalk-random")]
    RandomwalkRandom,
    /// CRRA savings with a one-step mean-preserving spread of income; kernel axis.
    #[value(name = "savings-random")]
    SavingsRandom,
    /// Reference-price models with nonnegative linear demand; discount axis.
    #[value(name = "pricing-random")]
    PricingRandom,
}

impl Family {
    pub fn id(self) -> &'static str {
        match self {
            Family::Assumption1Random => "assumption1-random",
            Family::RandomwalkRandom => "randomwalk-random",
            Family::SavingsRandom => "savings-random",
            Family::PricingRandom => "pricing-random",
        }
    }
}

/// Relative risk aversion range used by `savings-random`.
pub const SAVINGS_SIGMA: (f64, f64) = (1.5, 4.0);
/// Discount factor range used by `savings-random`.
pub const SAVINGS_BETA: (f64, f64) = (0.85, 0.95);

pub const DISCOUNTS: [f64; 3] = [0.3, 0.6, 0.9];

#[derive(Debug, Clone)]
pub struct Generated {
    pub file_name: String,
    pub config: ExperimentConfig,
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    round4(rng.gen_range(lo..hi))
}

/// `n` probabilities with small integer weights.
fn weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
    let total: u32 = w.iter().sum();
    w.iter().map(|&k| k as f64 / total as f64).collect()
}

/// Nondecreasing nonnegative sequence.
fn increasing_table(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut x = uniform(rng, 0.0, 1.0);
    (0..n)
        .map(|_| {
            let v = x;
            x = round4(x + rng.gen_range(0.0..1.0));
            v
        })
        .collect()
}

fn config(model: ModelSpec, parameter: ParameterAxis, checks: Vec<CheckKind>, stem: &str, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        model,
        parameter: Some(parameter),
        checks,
        horizon: scstat_core::dynamics::DEFAULT_HORIZON,
        tol: scstat_core::ORDER_TOL,
        initial: InitialSpec::default(),
        solver: SolverConfig::default(),
        stationary: StationaryConfig::default(),
        output: OutputConfig { report: PathBuf::from(format!("{stem}.report.json")), trajectories: PathBuf::from(format!("{stem}.csv")) },
        seed: Some(seed),
    }
}

fn variants(key: &str, values: [Value; 2]) -> Vec<Map<String, Value>> {
    values
        .into_iter()
        .map(|v| {
            let mut m = Map::new();
            m.insert(key.to_string(), v);
            m
        })
        .collect()
}

fn assumption1(rng: &mut ChaCha8Rng) -> (ModelSpec, ParameterAxis, Vec<CheckKind>) {
    let ns = rng.gen_range(4..=10);
    let na = rng.gen_range(2..=4);
    let terms = 2;
    let f: Vec<Vec<f64>> = (0..terms).map(|_| increasing_table(rng, ns)).collect();
    let h: Vec<Vec<f64>> = (0..terms).map(|_| increasing_table(rng, na)).collect();
    let u = increasing_table(rng, ns);
    let c: Vec<f64> = (0..na).map(|_| uniform(rng, -1.0, 1.0)).collect();
    let reward = (0..ns)
        .map(|s| (0..na).map(|a| (0..terms).map(|k| f[k][s] * h[k][a]).sum::<f64>() + u[s] - c[a]).collect())
        .collect();
    let mut tau = rng.gen_range(0..na);
    let feasible = (0..ns)
        .map(|_| {
            let row = (0..na).map(|a| a <= tau).collect();
            if rng.gen_bool(0.4) {
                tau = (tau + 1).min(na - 1);
            }
            row
        })
        .collect();
    let q0 = weights(rng, ns);
    let mut q1 = vec![0.0; ns];
    for (i, &m) in q0.iter().enumerate() {
        q1[rng.gen_range(i..ns)] += m;
    }
    let (alpha, gamma, delta) = (uniform(rng, 0.2, 1.0), uniform(rng, 0.2, 1.0), uniform(rng, 0.2, 1.0));
    let transition = (0..ns)
        .map(|s| {
            (0..na)
                .map(|a| {
                    let (x, y) = (s as f64 / (ns - 1) as f64, a as f64 / (na - 1) as f64);
                    let w = (alpha * x + gamma * y + delta * x * y) / (alpha + gamma + delta);
                    q0.iter().zip(&q1).map(|(p0, p1)| (1.0 - w) * p0 + w * p1).collect()
                })
                .collect()
        })
        .collect();
    let model = ModelSpec::Raw(RawSpec {
        states: vec![GridSpec::Uniform { lo: 0.0, hi: (ns - 1) as f64, n: ns }],
        actions: GridSpec::Uniform { lo: 0.0, hi: (na - 1) as f64, n: na },
        reward,
        feasible: Some(feasible),
        transition,
        beta: 0.9,
    });
    (model, ParameterAxis::Discount { values: DISCOUNTS.to_vec() }, vec![CheckKind::Assumption1, CheckKind::Parameter])
}

fn randomwalk(rng: &mut ChaCha8Rng) -> (ModelSpec, ParameterAxis, Vec<CheckKind>) {
    let n = rng.gen_range(8..=16);
    let k = rng.gen_range(1..=2);
    let support = rng.gen_range(2..=3);
    let w = weights(rng, support);
    let low: Vec<Value> = (0..support).map(|j| json!([-((support - j) as f64), w[j]])).collect();
    let high: Vec<Value> = (0..support).map(|j| json!([1.0 - (support - j) as f64, w[j]])).collect();
    let model = ModelSpec::Randomwalk(RandomWalkSpec {
        states: GridSpec::Uniform { lo: 0.0, hi: (n - 1) as f64, n },
        actions: GridSpec::Points { points: (0..=k).map(|j| j as f64 - k as f64).collect() },
        reward: Family1::Power { scale: uniform(rng, 0.05, 0.5), exponent: uniform(rng, 1.2, 2.5), shift: 0.0 },
        cost: Family1::Linear { slope: uniform(rng, 0.5, 3.0), intercept: 0.0 },
        noise: (0..support).map(|j| (-((support - j) as f64), w[j])).collect(),
        beta: uniform(rng, 0.8, 0.95),
    });
    let axis = ParameterAxis::Kernel { order: StochasticOrder::St, variants: variants("noise", [Value::Array(low), Value::Array(high)]) };
    (model, axis, vec![CheckKind::TransitionMap, CheckKind::Transition, CheckKind::InitialState])
}

fn savings(rng: &mut ChaCha8Rng) -> (ModelSpec, ParameterAxis, Vec<CheckKind>) {
    let sigma = uniform(rng, SAVINGS_SIGMA.0, SAVINGS_SIGMA.1);
    let beta = uniform(rng, SAVINGS_BETA.0, SAVINGS_BETA.1);
    let gross_return = uniform(rng, 1.0, 1.0 / beta - 0.01);
    let y_mid = uniform(rng, 1.0, 1.4);
    let h = uniform(rng, 0.1, 0.3);
    let y: Vec<f64> = (0..5).map(|j| y_mid + (j as f64 - 2.0) * h).collect();
    let w: Vec<u32> = vec![rng.gen_range(1..=6), rng.gen_range(4..=12), rng.gen_range(1..=6)];
    let d = rng.gen_range(1..=w[1] / 2);
    let total = (w[0] + w[1] + w[2]) as f64;
    let law = |m: [u32; 3]| -> Vec<(f64, f64)> {
        vec![(y[0], 0.0), (y[1], m[0] as f64 / total), (y[2], m[1] as f64 / total), (y[3], m[2] as f64 / total), (y[4], 0.0)]
    };
    let nu1 = law([w[0], w[1], w[2]]);
    let nu2 = law([w[0] + d, w[1] - 2 * d, w[2] + d]);
    let wealth_points = rng.gen_range(41..=61);
    let model = ModelSpec::Savings(SavingsSpec {
        utility: UtilitySpec::Crra { sigma },
        gross_return,
        income: nu1.clone(),
        borrowing_limit: uniform(rng, -0.5, 0.0),
        savings_cap: uniform(rng, 3.0, 5.0),
        wealth_points,
        action_points: wealth_points,
        consumption_floor: 0.05,
        beta,
    });
    let to_json = |v: &[(f64, f64)]| Value::Array(v.iter().map(|&(a, b)| json!([a, b])).collect());
    let axis = ParameterAxis::Kernel { order: StochasticOrder::Cx, variants: variants("income", [to_json(&nu1), to_json(&nu2)]) };
    (model, axis, vec![CheckKind::Transition, CheckKind::Stationary])
}

fn pricing(rng: &mut ChaCha8Rng) -> (ModelSpec, ParameterAxis, Vec<CheckKind>) {
    let pmax = uniform(rng, 1.0, 2.0);
    let n = rng.gen_range(6..=12);
    let da = uniform(rng, 0.5, 1.5);
    let ds = round4(da * rng.gen_range(0.1..0.8));
    let d0 = round4(da * pmax + rng.gen_range(0.0..0.5));
    let k = rng.gen_range(1..=3);
    let mut gammas: Vec<f64> = (0..k).map(|_| uniform(rng, 0.1, 0.9)).collect();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    let w = weights(rng, gammas.len());
    let grid = GridSpec::Uniform { lo: 0.0, hi: pmax, n };
    let model = ModelSpec::Pricing(PricingSpec {
        reference: grid.clone(),
        prices: grid,
        demand: Family2::LinearDemand { d0, ds, da },
        memory: gammas.into_iter().zip(w).collect(),
        beta: 0.9,
    });
    (model, ParameterAxis::Discount { values: DISCOUNTS.to_vec() }, vec![CheckKind::Parameter, CheckKind::InitialState])
}

/// `count` configs for `family`; instance `i` depends only on `(seed, i)`.
pub fn generate(family: Family, count: usize, seed: u64) -> Vec<Generated> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (model, axis, checks) = match family {
                Family::Assumption1Random => assumption1(&mut rng),
                Family::RandomwalkRandom => randomwalk(&mut rng),
                Family::SavingsRandom => savings(&mut rng),
                Family::PricingRandom => pricing(&mut rng),
            };
            let stem = format!("{}-{i:04}", family.id());
            Generated { file_name: format!("{stem}.json"), config: config(model, axis, checks, &stem, seed) }
        })
        .collect()
}

pub fn to_json(config: &ExperimentConfig) -> String {
    let mut s = serde_json::to_string_pretty(config).expect("config serializes");
    s.push('\n');
    s
}

/// Writes the configs into `dir` and returns their paths.
pub fn write_all(generated: &[Generated], dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    generated
        .iter()
        .map(|g| {
            let path = dir.join(&g.file_name);
            std::fs::write(&path, to_json(&g.config))?;
            Ok(path)
        })
        .collect()
}
