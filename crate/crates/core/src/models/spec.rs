//! Declarative model descriptions, deserializable from JSON.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{build_capital, build_pricing, build_randomwalk, build_savings, Family1, Family2, Hara, SavingsParams};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::Kernel;
use crate::lattice::LatticeTable;
use crate::model::MdpModel;
use crate::structure::map_table;

/// A 1-D grid, either uniform or listed point by point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GridSpec {
    Uniform { lo: f64, hi: f64, n: usize },
    Points { points: Vec<f64> },
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        match self {
            GridSpec::Uniform { lo, hi, n } => Grid::uniform(*lo, *hi, *n),
            GridSpec::Points { points } => Grid::new(points.clone()),
        }
    }
}

fn atoms(what: &str, a: &[(f64, f64)]) -> Result<DiscreteDistribution> {
    DiscreteDistribution::from_atoms(a).map_err(|e| Error::InvalidDistribution(format!("{what}: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilitySpec {
    Crra { sigma: f64 },
    Cara { alpha: f64 },
    Quadratic { bliss: f64 },
    Hara { a: f64, b: f64 },
}

impl UtilitySpec {
    pub fn build(&self) -> Result<Hara> {
        match *self {
            UtilitySpec::Crra { sigma } => Hara::crra(sigma),
            UtilitySpec::Cara { alpha } => Hara::cara(alpha),
            UtilitySpec::Quadratic { bliss } => Hara::quadratic(bliss),
            UtilitySpec::Hara { a, b } => Hara::new(a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapitalSpec {
    pub capital: GridSpec,
    pub demand: GridSpec,
    /// `R(s₁, s₂)`.
    pub revenue: Family2,
    /// `c(s₁, a)`.
    pub cost: Family2,
    /// Row-stochastic demand transition, one row per demand state.
    pub transition: Vec<Vec<f64>>,
    /// `feasible[i][a]` per capital level.
    #[serde(default)]
    pub feasible: Option<Vec<Vec<bool>>>,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingSpec {
    pub reference: GridSpec,
    pub prices: GridSpec,
    /// `D(s, a)`.
    pub demand: Family2,
    /// `(γ, probability)` atoms.
    pub memory: Vec<(f64, f64)>,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomWalkSpec {
    pub states: GridSpec,
    pub actions: GridSpec,
    /// `c₁(s)`.
    pub reward: Family1,
    /// `c₂(a)`.
    pub cost: Family1,
    /// `(ε, probability)` atoms.
    pub noise: Vec<(f64, f64)>,
    pub beta: f64,
}

fn default_floor() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SavingsSpec {
    pub utility: UtilitySpec,
    pub gross_return: f64,
    /// `(y, probability)` atoms.
    pub income: Vec<(f64, f64)>,
    pub borrowing_limit: f64,
    pub savings_cap: f64,
    pub wealth_points: usize,
    pub action_points: usize,
    #[serde(default = "default_floor")]
    pub consumption_floor: f64,
    pub beta: f64,
}

impl SavingsSpec {
    pub fn params(&self) -> Result<SavingsParams> {
        Ok(SavingsParams {
            utility: self.utility.build()?,
            gross_return: self.gross_return,
            income: atoms("income", &self.income)?,
            borrowing_limit: self.borrowing_limit,
            savings_cap: self.savings_cap,
            wealth_points: self.wealth_points,
            action_points: self.action_points,
            consumption_floor: self.consumption_floor,
            beta: self.beta,
        })
    }
}

/// Explicit tables on a 1-D or 2-D state grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpec {
    /// One or two state axes.
    pub states: Vec<GridSpec>,
    pub actions: GridSpec,
    /// `reward[s][a]`.
    pub reward: Vec<Vec<f64>>,
    #[serde(default)]
    pub feasible: Option<Vec<Vec<bool>>>,
    /// `transition[s][a][s']`.
    pub transition: Vec<Vec<Vec<f64>>>,
    pub beta: f64,
}

/// Any of the supported models, tagged by `"model"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Capital(CapitalSpec),
    Pricing(PricingSpec),
    Randomwalk(RandomWalkSpec),
    Savings(SavingsSpec),
    Raw(RawSpec),
}

fn table<T: Copy>(what: &str, rows: &[Vec<T>], n_rows: usize, n_cols: usize) -> Result<Vec<T>> {
    if rows.len() != n_rows || rows.iter().any(|r| r.len() != n_cols) {
        return Err(Error::GridMismatch(format!("{what} must be {n_rows} x {n_cols}")));
    }
    Ok(rows.concat())
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::Capital(_) => "capital",
            ModelSpec::Pricing(_) => "pricing",
            ModelSpec::Randomwalk(_) => "randomwalk",
            ModelSpec::Savings(_) => "savings",
            ModelSpec::Raw(_) => "raw",
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            ModelSpec::Capital(c) => c.beta,
            ModelSpec::Pricing(c) => c.beta,
            ModelSpec::Randomwalk(c) => c.beta,
            ModelSpec::Savings(c) => c.beta,
            ModelSpec::Raw(c) => c.beta,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        match &mut self {
            ModelSpec::Capital(c) => c.beta = beta,
            ModelSpec::Pricing(c) => c.beta = beta,
            ModelSpec::Randomwalk(c) => c.beta = beta,
            ModelSpec::Savings(c) => c.beta = beta,
            ModelSpec::Raw(c) => c.beta = beta,
        }
        self
    }

    pub fn build(&self) -> Result<MdpModel> {
        match self {
            ModelSpec::Capital(c) => {
                let k = c.capital.build()?;
                let z = c.demand.build()?;
                let revenue = c.revenue.evaluate(k.points(), z.points())?;
                let cost = c.cost.evaluate(k.points(), k.points())?;
                let q = table("transition", &c.transition, z.len(), z.len())?;
                let f = c.feasible.as_ref().map(|f| table("feasible", f, k.len(), k.len())).transpose()?;
                build_capital(&k, &z, &revenue, &cost, &q, f.as_deref(), c.beta)
            }
            ModelSpec::Pricing(c) => {
                let s = c.reference.build()?;
                let a = c.prices.build()?;
                let d = c.demand.evaluate(s.points(), a.points())?;
                build_pricing(&s, &a, &d, &atoms("memory", &c.memory)?, c.beta)
            }
            ModelSpec::Randomwalk(c) => {
                let s = c.states.build()?;
                let a = c.actions.build()?;
                let c1 = c.reward.evaluate(s.points())?;
                let c2 = c.cost.evaluate(a.points())?;
                build_randomwalk(&s, &a, &c1, &c2, &atoms("noise", &c.noise)?, c.beta)
            }
            ModelSpec::Savings(c) => build_savings(&c.params()?),
            ModelSpec::Raw(c) => {
                let axes = c.states.iter().map(GridSpec::build).collect::<Result<Vec<_>>>()?;
                let states = match axes.len() {
                    1 => axes[0].clone(),
                    2 => Grid::product(axes[0].points().to_vec(), axes[1].points().to_vec())?,
                    n => return Err(Error::InvalidGrid(format!("{n} state axes; only 1 or 2 are supported"))),
                };
                let actions = c.actions.build()?;
                let (ns, na) = (states.len(), actions.len());
                let reward = table("reward", &c.reward, ns, na)?;
                let feasible = match &c.feasible {
                    Some(f) => table("feasible", f, ns, na)?,
                    None => alloc::vec![true; ns * na],
                };
                if c.transition.len() != ns {
                    return Err(Error::GridMismatch(format!("transition must have {ns} state rows")));
                }
                let mut probs = Vec::with_capacity(ns * na * ns);
                for (s, rows) in c.transition.iter().enumerate() {
                    let flat = table(&format!("transition[{s}]"), rows, na, ns)?;
                    probs.extend(flat);
                }
                for pair in 0..ns * na {
                    if !feasible[pair] {
                        probs[pair * ns..(pair + 1) * ns].iter_mut().for_each(|p| *p = 0.0);
                    }
                }
                let kernel = Kernel::new(states, actions, feasible, probs)?;
                MdpModel::new(kernel, reward, c.beta)
            }
        }
    }

    /// The shock law of models built from a transition map.
    pub fn shock_law(&self) -> Result<Option<DiscreteDistribution>> {
        match self {
            ModelSpec::Pricing(c) => atoms("memory", &c.memory).map(Some),
            ModelSpec::Randomwalk(c) => atoms("noise", &c.noise).map(Some),
            ModelSpec::Savings(c) => atoms("income", &c.income).map(Some),
            _ => Ok(None),
        }
    }

    /// The deterministic part `m(s, a, ε)` of the transition, tabulated on
    /// `states × actions × shocks`, for models built from a transition map.
    pub fn transition_map(&self, shocks: &[f64]) -> Result<Option<LatticeTable>> {
        let model = self.build()?;
        let (s, a) = (model.states().points(), model.actions().points());
        let table = match self {
            ModelSpec::Pricing(_) => map_table(s, a, shocks, |s, a, g| g * s + (1.0 - g) * a)?,
            ModelSpec::Randomwalk(_) => map_table(s, a, shocks, |s, a, e| s + a + e)?,
            ModelSpec::Savings(c) => {
                let r = c.gross_return;
                map_table(s, a, shocks, |_, a, y| r * a + y)?
            }
            _ => return Ok(None),
        };
        Ok(Some(table))
    }

    pub fn describe(&self) -> String {
        format!("{} model, beta {}", self.kind(), self.beta())
    }
}
