//! Bellman operator, value iteration and policy extraction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::InducedKernel;
use crate::model::{MdpModel, PolicyFunction};

/// A real function on the state grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl ValueFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} states",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidModel(format!("value at state {i} is not finite")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        let n = grid.len();
        Self { grid, values: vec![c; n] }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[inline]
fn h_unchecked(model: &MdpModel, s: usize, a: usize, f: &[f64]) -> f64 {
    model.reward(s, a) + model.beta() * model.kernel().expect(s, a, f)
}

/// `h(s, a, f) = r(s, a) + β Σ f(s') p(s, a, s')`.
pub fn bellman_h(model: &MdpModel, s: usize, a: usize, f: &ValueFunction) -> Result<f64> {
    if s >= model.n_states() || a >= model.n_actions() || !model.is_feasible(s, a) {
        return Err(Error::Infeasible { state: s, action: a });
    }
    Ok(h_unchecked(model, s, a, &f.values))
}

fn max_h(model: &MdpModel, s: usize, f: &[f64]) -> f64 {
    model
        .feasible_actions(s)
        .map(|a| h_unchecked(model, s, a, f))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `(Tf)(s) = max_{a ∈ Γ(s)} h(s, a, f)`.
pub fn bellman_operator(model: &MdpModel, f: &ValueFunction) -> ValueFunction {
    let values = (0..model.n_states()).map(|s| max_h(model, s, &f.values)).collect();
    ValueFunction {
        grid: model.states().clone(),
        values,
    }
}

/// Iteration cap used by [`value_iterate`].
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// Iterates `T` from `f0` until the sup-norm change drops below
/// `eps (1 − β) / (2β)`, which puts the result within `eps` of the fixed point.
pub fn value_iterate(model: &MdpModel, f0: &ValueFunction, eps: f64) -> Result<ValueFunction> {
    value_iterate_capped(model, f0, eps, DEFAULT_MAX_ITER)
}

pub fn value_iterate_capped(model: &MdpModel, f0: &ValueFunction, eps: f64, max_iter: usize) -> Result<ValueFunction> {
    if !(eps > 0.0) {
        return Err(Error::InvalidModel(format!("tolerance must be positive, got {eps}")));
    }
    if f0.values.len() != model.n_states() {
        return Err(Error::GridMismatch("initial guess does not match the state grid".into()));
    }
    let beta = model.beta();
    let threshold = eps * (1.0 - beta) / (2.0 * beta);
    let mut current = f0.values.clone();
    let mut next = vec![0.0; current.len()];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        for (s, out) in next.iter_mut().enumerate() {
            *out = max_h(model, s, &current);
        }
        residual = current
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        core::mem::swap(&mut current, &mut next);
        let scale = current.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        // Below the rounding floor of T the residual cannot shrink further.
        if residual < threshold || residual <= 16.0 * f64::EPSILON * scale {
            return ValueFunction::new(model.states().clone(), current);
        }
    }
    Err(Error::NoConvergence {
        what: "value iteration",
        iterations: max_iter,
        residual,
    })
}

/// Optimal-action sets `G(s)` within an argmax tolerance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PolicyCorrespondence {
    #[cfg_attr(feature = "serde", serde(skip))]
    states: Grid,
    #[cfg_attr(feature = "serde", serde(skip))]
    actions: Grid,
    sets: Vec<Vec<usize>>,
    /// Best value minus the best value outside the set (infinite when every
    /// feasible action is optimal). Small margins flag near-ties.
    margins: Vec<f64>,
}

impl PolicyCorrespondence {
    pub fn states(&self) -> &Grid {
        &self.states
    }

    pub fn actions(&self) -> &Grid {
        &self.actions
    }

    /// Ascending action indices of `G(s)`.
    pub fn set(&self, s: usize) -> &[usize] {
        &self.sets[s]
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn margin(&self, s: usize) -> f64 {
        self.margins[s]
    }

    pub fn margins(&self) -> &[f64] {
        &self.margins
    }
}

/// Default argmax tolerance defining `G`.
pub const DEFAULT_ARGMAX_TOL: f64 = 1e-9;

/// All feasible actions with `h(s, a, V) ≥ max_a h(s, a, V) − tol`.
pub fn policy_correspondence(model: &MdpModel, value: &ValueFunction, tol: f64) -> PolicyCorrespondence {
    let mut sets = Vec::with_capacity(model.n_states());
    let mut margins = Vec::with_capacity(model.n_states());
    for s in 0..model.n_states() {
        let hs: Vec<(usize, f64)> = model
            .feasible_actions(s)
            .map(|a| (a, h_unchecked(model, s, a, &value.values)))
            .collect();
        let best = hs.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        let set: Vec<usize> = hs.iter().filter(|x| x.1 >= best - tol).map(|x| x.0).collect();
        let runner_up = hs
            .iter()
            .filter(|x| x.1 < best - tol)
            .map(|x| x.1)
            .fold(f64::NEG_INFINITY, f64::max);
        sets.push(set);
        margins.push(best - runner_up);
    }
    PolicyCorrespondence {
        states: model.states().clone(),
        actions: model.actions().clone(),
        sets,
        margins,
    }
}

/// `g(s) = max G(s)`.
pub fn policy_function(correspondence: &PolicyCorrespondence) -> PolicyFunction {
    let idx = correspondence
        .sets
        .iter()
        .map(|set| *set.last().expect("optimal sets are nonempty"))
        .collect();
    PolicyFunction::from_indices_unchecked(correspondence.states.clone(), correspondence.actions.clone(), idx)
}

/// Chain `P(s, ·) = p(s, g(s), ·)`.
pub fn induced_kernel(model: &MdpModel, policy: &PolicyFunction) -> Result<InducedKernel> {
    let n = model.n_states();
    if policy.indices().len() != n {
        return Err(Error::GridMismatch("policy does not match the state grid".into()));
    }
    let mut probs = Vec::with_capacity(n * n);
    for (s, &a) in policy.indices().iter().enumerate() {
        let row = model.kernel().row(s, a).ok_or(Error::Infeasible { state: s, action: a })?;
        probs.extend_from_slice(row);
    }
    Ok(InducedKernel::from_rows_unchecked(model.states().clone(), probs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Guaranteed sup-norm accuracy of the value function.
    pub eps: f64,
    pub argmax_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            eps: 1e-10,
            argmax_tol: DEFAULT_ARGMAX_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Everything value iteration produces for one model.
#[derive(Debug, Clone)]
pub struct Solution {
    pub value: ValueFunction,
    pub correspondence: PolicyCorrespondence,
    pub policy: PolicyFunction,
    pub induced: InducedKernel,
}

pub fn solve(model: &MdpModel, options: &SolverOptions) -> Result<Solution> {
    let value = value_iterate_capped(model, &ValueFunction::zeros(model.states().clone()), options.eps, options.max_iter)?;
    let correspondence = policy_correspondence(model, &value, options.argmax_tol);
    let policy = policy_function(&correspondence);
    let induced = induced_kernel(model, &policy)?;
    Ok(Solution {
        value,
        correspondence,
        policy,
        induced,
    })
}

/// A model together with its solution.
#[derive(Debug, Clone)]
pub struct SolvedModel {
    pub model: MdpModel,
    pub solution: Solution,
}

impl SolvedModel {
    pub fn solve(model: MdpModel, options: &SolverOptions) -> Result<Self> {
        let solution = solve(&model, options)?;
        Ok(Self { model, solution })
    }

    pub fn policy(&self) -> &PolicyFunction {
        &self.solution.policy
    }

    pub fn induced(&self) -> &InducedKernel {
        &self.solution.induced
    }
}
