//! Model assembly and mean-preserving allocation of off-grid successor states.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::Kernel;

/// Adds `weight` times the allocation of `x` on `points` into `row`.
///
/// Points outside the grid are clamped to the nearest end point; interior
/// points are split between the two bracketing neighbours so that the mean
/// of the allocation is exactly `x`.
pub(crate) fn allocate_into(points: &[f64], x: f64, weight: f64, row: &mut [f64]) {
    let n = points.len();
    if x <= points[0] {
        row[0] += weight;
        return;
    }
    if x >= points[n - 1] {
        row[n - 1] += weight;
        return;
    }
    // First index with points[hi] > x; 1 <= hi <= n - 1 here.
    let hi = points.partition_point(|&p| p <= x);
    let lo = hi - 1;
    if points[lo] == x {
        row[lo] += weight;
        return;
    }
    let upper = (x - points[lo]) / (points[hi] - points[lo]);
    row[lo] += weight * (1.0 - upper);
    row[hi] += weight * upper;
}

/// Two-point (or point-mass) distribution on a 1-D grid with mean `x`,
/// clamped at the grid ends.
pub fn allocate_offgrid(grid: &Grid, x: f64) -> Result<DiscreteDistribution> {
    if grid.dim() != 1 {
        return Err(Error::Unsupported(
            "allocate_offgrid takes a 1-D grid; use allocate_offgrid_point for products".into(),
        ));
    }
    let mut mass = vec![0.0; grid.len()];
    allocate_into(grid.points(), x, 1.0, &mut mass);
    Ok(DiscreteDistribution::from_parts_unchecked(grid.clone(), mass))
}

/// Coordinatewise allocation on a 1-D or product grid. On a product grid the
/// result is the product of the per-axis allocations.
pub fn allocate_offgrid_point(grid: &Grid, x: &[f64]) -> Result<DiscreteDistribution> {
    if x.len() != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "point has {} coordinates, grid has {}",
            x.len(),
            grid.dim()
        )));
    }
    let mut mass = vec![0.0; grid.len()];
    allocate_point_into(grid, x, 1.0, &mut mass);
    Ok(DiscreteDistribution::from_parts_unchecked(grid.clone(), mass))
}

pub(crate) fn allocate_point_into(grid: &Grid, x: &[f64], weight: f64, row: &mut [f64]) {
    if grid.dim() == 1 {
        allocate_into(grid.points(), x[0], weight, row);
        return;
    }
    let (a0, a1) = (grid.axis(0), grid.axis(1));
    let mut w0 = vec![0.0; a0.len()];
    let mut w1 = vec![0.0; a1.len()];
    allocate_into(a0, x[0], 1.0, &mut w0);
    allocate_into(a1, x[1], 1.0, &mut w1);
    for (i, &u) in w0.iter().enumerate().filter(|(_, u)| **u != 0.0) {
        for (j, &v) in w1.iter().enumerate().filter(|(_, v)| **v != 0.0) {
            row[grid.index([i, j])] += weight * u * v;
        }
    }
}

/// Kernel of `s' = m(s, a, ε)` with `ε` drawn from `noise`, every pair feasible.
pub fn kernel_from_map<F>(states: &Grid, actions: &Grid, m: F, noise: &DiscreteDistribution) -> Result<Kernel>
where
    F: Fn(f64, f64, f64) -> f64,
{
    let mask = vec![true; states.len() * actions.len()];
    kernel_from_map_masked(states, actions, &mask, m, noise)
}

/// As [`kernel_from_map`], computing rows only where `feasible` is set.
pub fn kernel_from_map_masked<F>(
    states: &Grid,
    actions: &Grid,
    feasible: &[bool],
    m: F,
    noise: &DiscreteDistribution,
) -> Result<Kernel>
where
    F: Fn(f64, f64, f64) -> f64,
{
    if states.dim() != 1 || actions.dim() != 1 || noise.grid().dim() != 1 {
        return Err(Error::Unsupported("kernel_from_map needs 1-D state, action and noise grids".into()));
    }
    let (ns, na) = (states.len(), actions.len());
    let mut probs = vec![0.0; ns * na * ns];
    let pts = states.points();
    for s in 0..ns {
        for a in 0..na {
            if !feasible[s * na + a] {
                continue;
            }
            let row = &mut probs[(s * na + a) * ns..(s * na + a + 1) * ns];
            for (e, (&eps, &w)) in noise.grid().points().iter().zip(noise.mass()).enumerate() {
                if w == 0.0 {
                    continue;
                }
                let x = m(pts[s], actions.points()[a], eps);
                if !x.is_finite() {
                    return Err(Error::NonFiniteImage { state: s, action: a, shock: e });
                }
                allocate_into(pts, x, w, row);
            }
        }
    }
    Kernel::new(states.clone(), actions.clone(), feasible.to_vec(), probs)
}

/// The tuple `(S, A, Γ, p, r, β)` on finite grids.
#[derive(Debug, Clone, PartialEq)]
pub struct MdpModel {
    reward: Vec<f64>,
    kernel: Kernel,
    beta: f64,
}

impl MdpModel {
    /// `reward` is laid out `[s * |A| + a]`; the feasibility mask is the kernel's.
    pub fn new(kernel: Kernel, reward: Vec<f64>, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidModel(format!("discount factor must lie in (0, 1), got {beta}")));
        }
        let (ns, na) = (kernel.n_states(), kernel.n_actions());
        if reward.len() != ns * na {
            return Err(Error::InvalidModel(format!(
                "reward table has {} entries, expected {}",
                reward.len(),
                ns * na
            )));
        }
        for s in 0..ns {
            if !(0..na).any(|a| kernel.is_feasible(s, a)) {
                return Err(Error::InvalidModel(format!("state {s} has no feasible action")));
            }
            for a in 0..na {
                if kernel.is_feasible(s, a) && !reward[s * na + a].is_finite() {
                    return Err(Error::InvalidModel(format!(
                        "reward at feasible pair ({s}, {a}) is not finite"
                    )));
                }
            }
        }
        Ok(Self { reward, kernel, beta })
    }

    pub fn states(&self) -> &Grid {
        self.kernel.states()
    }

    pub fn actions(&self) -> &Grid {
        self.kernel.actions()
    }

    pub fn n_states(&self) -> usize {
        self.kernel.n_states()
    }

    pub fn n_actions(&self) -> usize {
        self.kernel.n_actions()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn reward_table(&self) -> &[f64] {
        &self.reward
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions() + a]
    }

    pub fn feasible(&self) -> &[bool] {
        self.kernel.feasible()
    }

    pub fn is_feasible(&self, s: usize, a: usize) -> bool {
        self.kernel.is_feasible(s, a)
    }

    pub fn feasible_actions(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_actions()).filter(move |&a| self.is_feasible(s, a))
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.kernel.clone(), self.reward.clone(), beta)
    }

    pub fn with_reward(&self, reward: Vec<f64>) -> Result<Self> {
        Self::new(self.kernel.clone(), reward, self.beta)
    }

    pub fn with_kernel(&self, kernel: Kernel) -> Result<Self> {
        Self::new(kernel, self.reward.clone(), self.beta)
    }
}

/// A stationary deterministic policy: one feasible action index per state.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PolicyFunction {
    #[cfg_attr(feature = "serde", serde(skip))]
    states: Grid,
    #[cfg_attr(feature = "serde", serde(skip))]
    actions: Grid,
    action_index: Vec<usize>,
    action: Vec<f64>,
}

impl PolicyFunction {
    pub fn new(model: &MdpModel, action_index: Vec<usize>) -> Result<Self> {
        if action_index.len() != model.n_states() {
            return Err(Error::InvalidModel(format!(
                "policy has {} entries for {} states",
                action_index.len(),
                model.n_states()
            )));
        }
        for (s, &a) in action_index.iter().enumerate() {
            if a >= model.n_actions() || !model.is_feasible(s, a) {
                return Err(Error::Infeasible { state: s, action: a });
            }
        }
        Ok(Self::from_indices_unchecked(model.states().clone(), model.actions().clone(), action_index))
    }

    pub(crate) fn from_indices_unchecked(states: Grid, actions: Grid, action_index: Vec<usize>) -> Self {
        let action = action_index.iter().map(|&a| actions.points()[a]).collect();
        Self {
            states,
            actions,
            action_index,
            action,
        }
    }

    /// Constant policy; fails if `a` is infeasible somewhere.
    pub fn constant(model: &MdpModel, a: usize) -> Result<Self> {
        Self::new(model, vec![a; model.n_states()])
    }

    pub fn states(&self) -> &Grid {
        &self.states
    }

    pub fn actions(&self) -> &Grid {
        &self.actions
    }

    pub fn indices(&self) -> &[usize] {
        &self.action_index
    }

    /// Action values `g(s)`.
    pub fn values(&self) -> &[f64] {
        &self.action
    }
}
