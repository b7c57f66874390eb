//! Structural hypotheses behind monotone policies: increasing differences,
//! supermodular transition maps, stochastically increasing differences and
//! ordered feasibility correspondences.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::distribution::DiscreteDistribution;
use crate::error::Result;
use crate::grid::Grid;
use crate::kernel::Kernel;
use crate::lattice::{self, LatticeTable};
use crate::model::MdpModel;
use crate::orders::{fosd_compare, Condition, OrderVerdict, TestFunction, VerdictBuilder, Witness};
use crate::upper_sets::{for_each_upper_set, Suffixes};

/// A bundle of named sub-checks.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AssumptionReport {
    pub holds: bool,
    pub conditions: Vec<Condition>,
}

impl AssumptionReport {
    pub fn new(conditions: Vec<Condition>) -> Self {
        Self {
            holds: conditions.iter().all(|c| c.verdict.holds),
            conditions,
        }
    }

    pub fn get(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn first_failure(&self) -> Option<&Condition> {
        self.conditions.iter().find(|c| !c.verdict.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.verdict.holds)
    }

    pub fn sampled(&self) -> bool {
        self.conditions.iter().any(|c| c.verdict.sampled)
    }

    pub fn extend(&mut self, other: AssumptionReport) {
        self.holds &= other.holds;
        self.conditions.extend(other.conditions);
    }
}

pub mod names {
    pub const REWARD_INCREASING: &str = "reward_increasing_in_s";
    pub const REWARD_DIFFERENCES: &str = "reward_increasing_differences";
    pub const REWARD_CONVEX: &str = "reward_convex_in_s";
    pub const KERNEL_MONOTONE: &str = "kernel_monotone";
    pub const KERNEL_SID: &str = "kernel_stochastically_increasing_differences";
    pub const FEASIBILITY_EXPANDING: &str = "feasibility_expanding";
    pub const FEASIBILITY_ASCENDING: &str = "feasibility_ascending";
    pub const FEASIBILITY_CONSTANT: &str = "feasibility_constant";
    pub const MAP_INCREASING: &str = "transition_map_increasing";
    pub const MAP_CONVEX: &str = "transition_map_convex";
    pub const MAP_SUPERMODULAR: &str = "transition_map_supermodular";
    pub const NOISE_DOMINANCE: &str = "noise_first_order_dominance";
}

/// `f(x₂, y₂) − f(x₁, y₂) ≥ f(x₂, y₁) − f(x₁, y₁)` on adjacent pairs; `values`
/// is laid out `[i * |y| + j]`.
pub fn increasing_differences_check(x: &[f64], y: &[f64], values: &[f64], tol: f64) -> Result<OrderVerdict> {
    let table = LatticeTable::new(vec![x.to_vec(), y.to_vec()], values.to_vec())?;
    Ok(lattice::increasing_differences_in(&table, 0, 1, tol))
}

/// Increasing differences of `m(s, a, ε)` in every coordinate pair, with the
/// third coordinate fixed at each grid value.
pub fn supermodularity_check_3(m: &LatticeTable, tol: f64) -> OrderVerdict {
    lattice::supermodularity_check(m, tol)
}

/// Tabulates `m` over `states × actions × shocks`.
pub fn map_table<F: Fn(f64, f64, f64) -> f64>(states: &[f64], actions: &[f64], shocks: &[f64], m: F) -> Result<LatticeTable> {
    LatticeTable::from_fn(vec![states.to_vec(), actions.to_vec(), shocks.to_vec()], |p| m(p[0], p[1], p[2]))
}

/// The reward as a masked table over `state axes × actions`.
pub fn reward_table(model: &MdpModel) -> Result<LatticeTable> {
    let mut axes = model.states().axes().to_vec();
    axes.push(model.actions().points().to_vec());
    LatticeTable::new(axes, model.reward_table().to_vec())?.with_mask(model.feasible().to_vec())
}

/// Reward nondecreasing along every state axis at each fixed action.
pub fn reward_increasing_check(model: &MdpModel, tol: f64) -> Result<OrderVerdict> {
    let table = reward_table(model)?;
    let mut b = VerdictBuilder::new(tol);
    for k in 0..model.states().dim() {
        lattice::increasing_along_into(&table, k, &mut b, &String::new);
    }
    Ok(b.finish())
}

/// Reward has increasing differences between each state axis and the action.
pub fn reward_differences_check(model: &MdpModel, tol: f64) -> Result<OrderVerdict> {
    let table = reward_table(model)?;
    let action_axis = model.states().dim();
    let mut b = VerdictBuilder::new(tol);
    for k in 0..action_axis {
        lattice::increasing_differences_into(&table, k, action_axis, &mut b, &String::new);
    }
    Ok(b.finish())
}

/// Reward midpoint convex along every state axis at each fixed action.
pub fn reward_convex_check(model: &MdpModel, tol: f64) -> Result<OrderVerdict> {
    let table = reward_table(model)?;
    let mut v = OrderVerdict::pass();
    for k in 0..model.states().dim() {
        v = v.and(lattice::convex_along(&table, k, tol));
    }
    Ok(v)
}

/// For every upper set `B`, `(s, a) ↦ p(s, a, B)` has increasing differences
/// between each state axis and the action. Checked on adjacent cells whose
/// four corners are feasible; witnesses are located at the lower corner `[s, a]`.
pub fn stochastically_increasing_differences_check(p: &Kernel, tol: f64) -> OrderVerdict {
    let grid = p.states();
    let (ns, na) = (p.n_states(), p.n_actions());
    // (s, s', a) with all of (s, a), (s', a), (s, a+1), (s', a+1) feasible.
    let mut cells: Vec<[usize; 4]> = Vec::new();
    for s in 0..ns {
        for k in 0..grid.dim() {
            let Some(t) = grid.step_up(s, k) else { continue };
            for a in 0..na.saturating_sub(1) {
                if p.is_feasible(s, a) && p.is_feasible(t, a) && p.is_feasible(s, a + 1) && p.is_feasible(t, a + 1) {
                    cells.push([s, t, a, k]);
                }
            }
        }
    }
    let mut b = VerdictBuilder::new(tol);
    if cells.is_empty() {
        return b.finish();
    }
    let rows = Suffixes::new(grid, (0..ns * na).map(|i| p.probs_row(i)));
    let sampled = for_each_upper_set(grid, |c| {
        for (rank, &[s, t, a, k]) in cells.iter().enumerate() {
            let m = |s: usize, a: usize| rows.mass(s * na + a, c);
            let shortfall = (m(s, a + 1) - m(s, a)) - (m(t, a + 1) - m(t, a));
            b.record_ranked(shortfall, rank, || Witness {
                test: TestFunction::UpperSet { thresholds: c.to_vec() },
                at: vec![s, a],
                magnitude: shortfall,
                detail: format!("state axis {k} against the action"),
            });
        }
    });
    if sampled {
        b.mark_sampled();
    }
    b.finish()
}

fn feasible_set(mask: &[bool], n_actions: usize, s: usize) -> &[bool] {
    &mask[s * n_actions..(s + 1) * n_actions]
}

/// Both closure conditions over every comparable pair `s₁ ≤ s₂`:
/// `max{b, b'} ∈ Γ(s₂)` and `min{b, b'} ∈ Γ(s₁)` for `b ∈ Γ(s₁)`, `b' ∈ Γ(s₂)`.
/// Witnesses are located at `[s₁, s₂, b, b']`.
pub fn ascending_check(states: &Grid, feasible: &[bool], n_actions: usize) -> OrderVerdict {
    let mut b = VerdictBuilder::new(0.0);
    let n = states.len();
    for s1 in 0..n {
        let g1 = feasible_set(feasible, n_actions, s1);
        let (Some(lo1), Some(hi1)) = (g1.iter().position(|&x| x), g1.iter().rposition(|&x| x)) else {
            continue;
        };
        for s2 in 0..n {
            if s1 == s2 || !states.leq(s1, s2) {
                continue;
            }
            let g2 = feasible_set(feasible, n_actions, s2);
            let Some(lo2) = g2.iter().position(|&x| x) else { continue };
            // max{b, min Γ(s₂)} must lie in Γ(s₂) for every b ∈ Γ(s₁).
            for a in (lo2 + 1).max(lo1)..n_actions {
                let bad = g1[a] && !g2[a];
                b.record(if bad { 1.0 } else { 0.0 }, || Witness {
                    test: TestFunction::Ascending,
                    at: vec![s1, s2, a, lo2],
                    magnitude: 1.0,
                    detail: format!("max of actions {a} and {lo2} is not feasible at state {s2}"),
                });
            }
            // min{max Γ(s₁), b'} must lie in Γ(s₁) for every b' ∈ Γ(s₂).
            for a in lo2..hi1.min(n_actions) {
                let bad = g2[a] && !g1[a];
                b.record(if bad { 1.0 } else { 0.0 }, || Witness {
                    test: TestFunction::Ascending,
                    at: vec![s1, s2, hi1, a],
                    magnitude: 1.0,
                    detail: format!("min of actions {hi1} and {a} is not feasible at state {s1}"),
                });
            }
        }
    }
    b.finish()
}

/// `Γ(s₁) ⊆ Γ(s₂)` for `s₁ ≤ s₂`, on adjacent states; witnesses at `[s₁, s₂, a]`.
pub fn expanding_check(states: &Grid, feasible: &[bool], n_actions: usize) -> OrderVerdict {
    let mut b = VerdictBuilder::new(0.0);
    for s in 0..states.len() {
        for k in 0..states.dim() {
            let Some(t) = states.step_up(s, k) else { continue };
            let (g1, g2) = (feasible_set(feasible, n_actions, s), feasible_set(feasible, n_actions, t));
            for a in 0..n_actions {
                let bad = g1[a] && !g2[a];
                b.record(if bad { 1.0 } else { 0.0 }, || Witness {
                    test: TestFunction::Inclusion,
                    at: vec![s, t, a],
                    magnitude: 1.0,
                    detail: format!("action {a} feasible at state {s} but not at {t}"),
                });
            }
        }
    }
    b.finish()
}

/// `Γ(s)` is the same set at every state; witnesses at `[0, s, a]`.
pub fn constant_feasibility_check(states: &Grid, feasible: &[bool], n_actions: usize) -> OrderVerdict {
    let mut b = VerdictBuilder::new(0.0);
    let first = feasible_set(feasible, n_actions, 0);
    for s in 1..states.len() {
        let g = feasible_set(feasible, n_actions, s);
        for a in 0..n_actions {
            let bad = g[a] != first[a];
            b.record(if bad { 1.0 } else { 0.0 }, || Witness {
                test: TestFunction::Constant,
                at: vec![0, s, a],
                magnitude: 1.0,
                detail: format!("feasibility of action {a} differs between states 0 and {s}"),
            });
        }
    }
    b.finish()
}

/// Reward increasing in `s` with increasing differences, a monotone kernel
/// with stochastically increasing differences, and an expanding feasibility
/// correspondence; the ascending property is reported alongside.
pub fn assumption1_check(model: &MdpModel, tol: f64) -> Result<AssumptionReport> {
    let (states, mask, na) = (model.states(), model.feasible(), model.n_actions());
    Ok(AssumptionReport::new(vec![
        Condition::new(names::REWARD_INCREASING, reward_increasing_check(model, tol)?),
        Condition::new(names::REWARD_DIFFERENCES, reward_differences_check(model, tol)?),
        Condition::new(names::KERNEL_MONOTONE, crate::orders::monotone_kernel_check(model.kernel(), tol)),
        Condition::new(names::KERNEL_SID, stochastically_increasing_differences_check(model.kernel(), tol)),
        Condition::new(names::FEASIBILITY_EXPANDING, expanding_check(states, mask, na)),
        Condition::new(names::FEASIBILITY_ASCENDING, ascending_check(states, mask, na)),
    ]))
}

/// Hypotheses for comparing kernels generated by one transition map `m` and
/// two shock laws: `m` increasing, convex and supermodular over
/// `states × actions × shocks`; the reward convex and increasing in `s` with
/// increasing differences; `Γ` constant; `v2 ⪰_st v1`. The shock laws live on
/// the third axis of `m`.
pub fn theorem4_preconditions_check(
    m: &LatticeTable,
    v2: &DiscreteDistribution,
    v1: &DiscreteDistribution,
    model: &MdpModel,
    tol: f64,
) -> Result<AssumptionReport> {
    let (states, mask, na) = (model.states(), model.feasible(), model.n_actions());
    crate::orders::require_1d(states, "transition map checks")?;
    Ok(AssumptionReport::new(vec![
        Condition::new(names::MAP_INCREASING, lattice::increasing_check(m, tol)),
        Condition::new(names::MAP_CONVEX, lattice::convexity_check(m, tol)),
        Condition::new(names::MAP_SUPERMODULAR, supermodularity_check_3(m, tol)),
        Condition::new(names::REWARD_INCREASING, reward_increasing_check(model, tol)?),
        Condition::new(names::REWARD_CONVEX, reward_convex_check(model, tol)?),
        Condition::new(names::REWARD_DIFFERENCES, reward_differences_check(model, tol)?),
        Condition::new(names::FEASIBILITY_CONSTANT, constant_feasibility_check(states, mask, na)),
        Condition::new(names::NOISE_DOMINANCE, fosd_compare(v2, v1, tol)?),
    ]))
}
