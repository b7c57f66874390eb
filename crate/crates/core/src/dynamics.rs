//! Forward propagation of the state distribution under an optimal policy and
//! executable checks of the stochastic comparative statics theorems.
//!
//! Every check returns a [`TheoremCheck`]: the preconditions are evaluated
//! first, the conclusion is evaluated regardless, and the status separates
//! "preconditions fail" from a genuine refutation (preconditions hold but the
//! conclusion does not).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::InducedKernel;
use crate::model::PolicyFunction;
use crate::orders::{
    self, chain_compare, compare, convexity_preserving_check, d_preserving_check, dominates_pointwise,
    kernel_compare, monotone_kernel_check, nondecreasing_on_grid, Condition, FunctionFamily, OrderVerdict,
    StochasticOrder, TestFunction, VerdictBuilder, Witness,
};
use crate::lattice::LatticeTable;
use crate::solver::SolvedModel;
use crate::structure::{theorem4_preconditions_check, AssumptionReport};

pub const DEFAULT_HORIZON: usize = 20;

/// Above this many states, checks start from an evenly spaced sample of initial states.
pub const MAX_INITIAL_STATES: usize = 50;

/// `μ¹, …, μᵀ` with the expected decision and the mean state per period.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub distributions: Vec<DiscreteDistribution>,
    pub expected_decision: Vec<f64>,
    /// Mean of the first state coordinate.
    pub mean_state: Vec<f64>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.distributions.len()
    }
}

fn same_states(p: &InducedKernel, grid: &Grid) -> Result<()> {
    if p.states() != grid {
        return Err(Error::GridMismatch("distribution and chain live on different grids".into()));
    }
    Ok(())
}

/// `μ¹, …, μᵀ` with `μ^{t+1} = μᵗ P`.
pub fn propagate(p: &InducedKernel, mu1: &DiscreteDistribution, horizon: usize) -> Result<Vec<DiscreteDistribution>> {
    same_states(p, mu1.grid())?;
    if horizon == 0 {
        return Err(Error::InvalidModel("horizon must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(horizon);
    out.push(mu1.clone());
    for _ in 1..horizon {
        let next = p.push_forward(out.last().expect("nonempty").mass());
        out.push(DiscreteDistribution::from_parts_unchecked(p.states().clone(), next));
    }
    Ok(out)
}

/// `Σ_s g(s) μ(s)`.
pub fn expected_decision(g: &PolicyFunction, mu: &DiscreteDistribution) -> Result<f64> {
    if g.states() != mu.grid() {
        return Err(Error::GridMismatch("policy and distribution live on different grids".into()));
    }
    Ok(mu.expect(g.values()))
}

pub fn trajectory(p: &InducedKernel, g: &PolicyFunction, mu1: &DiscreteDistribution, horizon: usize) -> Result<Trajectory> {
    let distributions = propagate(p, mu1, horizon)?;
    let expected_decision = distributions
        .iter()
        .map(|mu| expected_decision(g, mu))
        .collect::<Result<Vec<_>>>()?;
    let mean_state = distributions.iter().map(|mu| mu.mean_along(0)).collect();
    Ok(Trajectory {
        distributions,
        expected_decision,
        mean_state,
    })
}

/// `𝔼ᵗ(g | s(1) = s) = (P^{t−1} g)(s)` for every initial state at once;
/// entry `[t − 1][s]`.
pub fn expected_decisions_from_each_state(p: &InducedKernel, g: &PolicyFunction, horizon: usize) -> Result<Vec<Vec<f64>>> {
    same_states(p, g.states())?;
    let mut out = Vec::with_capacity(horizon);
    let mut f = g.values().to_vec();
    for t in 0..horizon {
        if t > 0 {
            f = p.apply(&f);
        }
        out.push(f.clone());
    }
    Ok(out)
}

/// All states when there are at most [`MAX_INITIAL_STATES`], otherwise that
/// many evenly spaced indices including both ends.
pub fn initial_states(grid: &Grid) -> Vec<usize> {
    let n = grid.len();
    if n <= MAX_INITIAL_STATES {
        return (0..n).collect();
    }
    let k = MAX_INITIAL_STATES;
    let mut out: Vec<usize> = (0..k).map(|i| (i * (n - 1) + (k - 1) / 2) / (k - 1)).collect();
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CheckStatus {
    /// Preconditions and conclusion hold.
    Confirmed,
    /// Some precondition fails; the conclusion is reported but not asserted.
    PreconditionsFailed,
    /// Preconditions hold and the conclusion fails.
    Refuted,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TheoremCheck {
    pub name: String,
    pub status: CheckStatus,
    pub preconditions: AssumptionReport,
    pub conclusion: OrderVerdict,
    /// Smallest gap between the optimal value and the best action outside the
    /// optimal set, over the solved models involved. Tiny values flag near-ties.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub policy_margin: Option<f64>,
}

impl TheoremCheck {
    pub fn new(name: &str, preconditions: AssumptionReport, conclusion: OrderVerdict) -> Self {
        let status = match (preconditions.holds, conclusion.holds) {
            (false, _) => CheckStatus::PreconditionsFailed,
            (true, true) => CheckStatus::Confirmed,
            (true, false) => CheckStatus::Refuted,
        };
        Self {
            name: String::from(name),
            status,
            preconditions,
            conclusion,
            policy_margin: None,
        }
    }

    fn with_margin(mut self, models: &[&SolvedModel]) -> Self {
        self.policy_margin = models
            .iter()
            .flat_map(|m| m.solution.correspondence.margins().iter().copied())
            .reduce(f64::min);
        self
    }

    pub fn is_refuted(&self) -> bool {
        self.status == CheckStatus::Refuted
    }
}

pub mod names {
    pub const D_PRESERVING: &str = "chain_d_preserving";
    pub const CHAIN_DOMINANCE: &str = "chain_rowwise_dominance";
    pub const POLICY_INCREASING_IN_PARAMETER: &str = "policy_increasing_in_parameter";
    pub const POLICY_INCREASING: &str = "policy_increasing_in_s";
    pub const POLICY_CONVEX: &str = "policy_convex_in_s";
    pub const POLICY_DOMINANCE: &str = "policy_dominance";
    pub const KERNEL_MONOTONE: &str = "kernel_monotone";
    pub const KERNEL_CONVEXITY_PRESERVING: &str = "kernel_convexity_preserving";
    pub const KERNEL_DOMINANCE: &str = "kernel_dominance";
    pub const INITIAL_STATES_ORDERED: &str = "initial_states_ordered";
}

fn expectation_compare(
    hi: &[Vec<f64>],
    lo: &[Vec<f64>],
    starts: &[usize],
    b: &mut VerdictBuilder,
    prefix: &[usize],
) {
    for t in 0..hi.len() {
        for &s in starts {
            let shortfall = lo[t][s] - hi[t][s];
            b.record(shortfall, || Witness {
                test: TestFunction::Pointwise,
                at: [prefix, &[t + 1, s]].concat(),
                magnitude: shortfall,
                detail: format!("period {} from initial state {s}: {} < {}", t + 1, hi[t][s], lo[t][s]),
            });
        }
    }
}

/// `P₂` D-preserving and `P₂(s, ·) ⪰_D P₁(s, ·)` imply `μ₂ᵗ ⪰_D μ₁ᵗ`. The
/// conclusion is checked from `mu1` if given, otherwise from a point mass at
/// every state of [`initial_states`]; witnesses are located at `[t, start]`.
pub fn check_theorem1(
    p2: &InducedKernel,
    p1: &InducedKernel,
    mu1: Option<&DiscreteDistribution>,
    family: FunctionFamily,
    horizon: usize,
    tol: f64,
) -> Result<TheoremCheck> {
    let order = family.order();
    let pre = AssumptionReport::new(vec![
        Condition::new(names::D_PRESERVING, d_preserving_check(p2, family, tol)?),
        Condition::new(names::CHAIN_DOMINANCE, chain_compare(p2, p1, order, tol)?),
    ]);
    let grid = p2.states();
    let starts: Vec<(usize, DiscreteDistribution)> = match mu1 {
        Some(mu) => vec![(0, mu.clone())],
        None => initial_states(grid)
            .into_iter()
            .map(|s| (s, DiscreteDistribution::point_mass(grid.clone(), s)))
            .collect(),
    };
    let mut conclusion = OrderVerdict::pass();
    for (s, mu) in &starts {
        let (a, b) = (propagate(p2, mu, horizon)?, propagate(p1, mu, horizon)?);
        for t in 0..horizon {
            let mut v = compare(&a[t], &b[t], order, tol)?;
            if let Some(w) = v.witness.as_mut() {
                w.at = [&[t + 1, *s][..], &w.at].concat();
                w.detail = format!("period {} from initial state {s}", t + 1);
            }
            conclusion = conclusion.and(v);
        }
    }
    Ok(TheoremCheck::new("theorem1", pre, conclusion))
}

fn common_kernel(models: &[SolvedModel]) -> Result<()> {
    let first = models[0].model.kernel();
    for m in &models[1..] {
        if m.model.kernel() != first {
            return Err(Error::InvalidModel("parameter comparisons need a common transition kernel".into()));
        }
    }
    Ok(())
}

/// Models ordered along a reward or discount parameter, sharing one kernel.
/// Preconditions: `g` increasing in the parameter, `g(·, e_max)` increasing in
/// `s`, `p` monotone. Conclusion: `𝔼ᵗ` increasing in the parameter for every
/// initial state and `t ≤ horizon`; witnesses at `[i, j, t, start]`.
pub fn check_scs_parameter(models: &[SolvedModel], horizon: usize, tol: f64) -> Result<TheoremCheck> {
    if models.is_empty() {
        return Err(Error::InvalidModel("parameter grid is empty".into()));
    }
    common_kernel(models)?;
    let last = models.last().expect("nonempty");
    let mut in_param = OrderVerdict::pass();
    for (i, w) in models.windows(2).enumerate() {
        let mut v = dominates_pointwise(w[1].policy().values(), w[0].policy().values(), tol);
        if let Some(w) = v.witness.as_mut() {
            w.at.insert(0, i);
            w.detail = format!("g(s, e_{}) < g(s, e_{i}): {}", i + 1, w.detail);
        }
        in_param = in_param.and(v);
    }
    let pre = AssumptionReport::new(vec![
        Condition::new(names::POLICY_INCREASING_IN_PARAMETER, in_param),
        Condition::new(names::POLICY_INCREASING, nondecreasing_on_grid(last.policy().values(), last.model.states(), tol)?),
        Condition::new(names::KERNEL_MONOTONE, monotone_kernel_check(last.model.kernel(), tol)),
    ]);
    let starts = initial_states(last.model.states());
    let tables = models
        .iter()
        .map(|m| expected_decisions_from_each_state(m.induced(), m.policy(), horizon))
        .collect::<Result<Vec<_>>>()?;
    let mut b = VerdictBuilder::new(tol);
    for j in 0..models.len() {
        for i in 0..j {
            expectation_compare(&tables[j], &tables[i], &starts, &mut b, &[i, j]);
        }
    }
    let refs: Vec<&SolvedModel> = models.iter().collect();
    Ok(TheoremCheck::new("parameter", pre, b.finish()).with_margin(&refs))
}

/// A higher initial state raises every period's expected decision when `g` is
/// increasing and `p` is monotone; witnesses at `[t, s_high]`.
pub fn check_initial_state(model: &SolvedModel, s_low: usize, s_high: usize, horizon: usize, tol: f64) -> Result<TheoremCheck> {
    let grid = model.model.states();
    if s_low >= grid.len() || s_high >= grid.len() {
        return Err(Error::InvalidModel("initial state index out of range".into()));
    }
    let ordered = if grid.leq(s_low, s_high) {
        OrderVerdict::pass()
    } else {
        OrderVerdict::fail(Witness {
            test: TestFunction::Pointwise,
            at: vec![s_low, s_high],
            magnitude: 1.0,
            detail: String::from("initial states are not ordered"),
        })
    };
    let pre = AssumptionReport::new(vec![
        Condition::new(names::INITIAL_STATES_ORDERED, ordered),
        Condition::new(names::POLICY_INCREASING, nondecreasing_on_grid(model.policy().values(), grid, tol)?),
        Condition::new(names::KERNEL_MONOTONE, monotone_kernel_check(model.model.kernel(), tol)),
    ]);
    let table = expected_decisions_from_each_state(model.induced(), model.policy(), horizon)?;
    let mut b = VerdictBuilder::new(tol);
    for (t, row) in table.iter().enumerate() {
        let shortfall = row[s_low] - row[s_high];
        b.record(shortfall, || Witness {
            test: TestFunction::Pointwise,
            at: vec![t + 1, s_high],
            magnitude: shortfall,
            detail: format!("period {}: {} < {}", t + 1, row[s_high], row[s_low]),
        });
    }
    Ok(TheoremCheck::new("initial_state", pre, b.finish()).with_margin(&[model]))
}

/// Models differing only in the kernel. Part (i) for [`StochasticOrder::St`],
/// part (ii) (adding convexity preservation and convex `g`) for
/// [`StochasticOrder::Cx`]. Witnesses at `[t, start]`.
pub fn check_theorem2(m2: &SolvedModel, m1: &SolvedModel, order: StochasticOrder, horizon: usize, tol: f64) -> Result<TheoremCheck> {
    if order == StochasticOrder::Icx {
        return Err(Error::Unsupported("kernel comparisons use the st or cx order".into()));
    }
    let (k2, k1) = (m2.model.kernel(), m1.model.kernel());
    k2.same_shape(k1)?;
    let grid = m2.model.states();
    let (g2, g1) = (m2.policy().values(), m1.policy().values());
    let mut conditions = vec![Condition::new(names::KERNEL_MONOTONE, monotone_kernel_check(k2, tol))];
    if order == StochasticOrder::Cx {
        conditions.push(Condition::new(names::KERNEL_CONVEXITY_PRESERVING, convexity_preserving_check(k2, tol)?));
    }
    conditions.push(Condition::new(names::POLICY_INCREASING, nondecreasing_on_grid(g2, grid, tol)?));
    if order == StochasticOrder::Cx {
        conditions.push(Condition::new(names::POLICY_CONVEX, orders::convex_on_grid(g2, grid, tol)?));
    }
    conditions.push(Condition::new(names::POLICY_DOMINANCE, dominates_pointwise(g2, g1, tol)));
    conditions.push(Condition::new(names::KERNEL_DOMINANCE, kernel_compare(k2, k1, order, tol)?));
    let pre = AssumptionReport::new(conditions);
    let starts = initial_states(grid);
    let hi = expected_decisions_from_each_state(m2.induced(), m2.policy(), horizon)?;
    let lo = expected_decisions_from_each_state(m1.induced(), m1.policy(), horizon)?;
    let mut b = VerdictBuilder::new(tol);
    expectation_compare(&hi, &lo, &starts, &mut b, &[]);
    let name = match order {
        StochasticOrder::St => "transition_st",
        _ => "transition_cx",
    };
    Ok(TheoremCheck::new(name, pre, b.finish()).with_margin(&[m2, m1]))
}

/// Kernels `pᵢ(s, a, ·) = law of m(s, a, εᵢ)` with `εᵢ ~ vᵢ`. Preconditions
/// come from [`theorem4_preconditions_check`] on `m2`'s reward and feasibility;
/// the conclusion bundles `g₂ ≥ g₁`, `g₂` increasing in `s`, and `𝔼₂ᵗ ≥ 𝔼₁ᵗ`.
pub fn check_theorem4(
    m: &LatticeTable,
    v2: &DiscreteDistribution,
    v1: &DiscreteDistribution,
    m2: &SolvedModel,
    m1: &SolvedModel,
    horizon: usize,
    tol: f64,
) -> Result<TheoremCheck> {
    let pre = theorem4_preconditions_check(m, v2, v1, &m2.model, tol)?;
    let grid = m2.model.states();
    let (g2, g1) = (m2.policy().values(), m1.policy().values());
    let hi = expected_decisions_from_each_state(m2.induced(), m2.policy(), horizon)?;
    let lo = expected_decisions_from_each_state(m1.induced(), m1.policy(), horizon)?;
    let mut b = VerdictBuilder::new(tol);
    expectation_compare(&hi, &lo, &initial_states(grid), &mut b, &[]);
    let conclusion = dominates_pointwise(g2, g1, tol)
        .context(names::POLICY_DOMINANCE)
        .and(nondecreasing_on_grid(g2, grid, tol)?.context(names::POLICY_INCREASING))
        .and(b.finish().context("expected_decisions"));
    Ok(TheoremCheck::new("transition_map", pre, conclusion).with_margin(&[m2, m1]))
}
