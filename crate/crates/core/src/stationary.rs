//! Extremal stationary distributions by monotone iteration, and comparisons
//! of them across kernels.
//!
//! For a monotone chain the map `λ ↦ λP` is increasing in `⪰_st`, so iterating
//! from the point masses at the bottom and top of the grid yields the least
//! and greatest stationary distributions. Without monotonicity the same
//! iterations still run, but their limits are only limits from below/above.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::distribution::DiscreteDistribution;
use crate::dynamics::{names as dn, TheoremCheck};
use crate::error::{Error, Result};
use crate::kernel::InducedKernel;
use crate::orders::{
    self, compare, convexity_preserving_check, d_preserving_check, dominates_pointwise, kernel_compare,
    monotone_kernel_check, nondecreasing_on_grid, Condition, FunctionFamily, StochasticOrder,
};
use crate::solver::SolvedModel;
use crate::structure::AssumptionReport;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ExtremeLabels {
    /// The chain is monotone: the limits are the least and greatest stationary distributions.
    LeastGreatest,
    /// Monotonicity fails: the limits are only the limits from below and above.
    LimitFromBelowAbove,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StationaryPair {
    /// Limit from the point mass at the bottom of the grid.
    pub least: DiscreteDistribution,
    /// Limit from the point mass at the top of the grid.
    pub greatest: DiscreteDistribution,
    pub iterations: [usize; 2],
    /// `‖λ − λP‖_TV` at the stop, for `[least, greatest]`.
    pub residual: [f64; 2],
    pub labels: ExtremeLabels,
}

/// Successive iterates `μ, μP, μP², …`.
pub struct Iterates<'a> {
    p: &'a InducedKernel,
    current: Vec<f64>,
}

impl<'a> Iterates<'a> {
    pub fn new(p: &'a InducedKernel, mu: &DiscreteDistribution) -> Result<Self> {
        if p.states() != mu.grid() {
            return Err(Error::GridMismatch("distribution and chain live on different grids".into()));
        }
        Ok(Self {
            p,
            current: mu.mass().to_vec(),
        })
    }
}

impl Iterator for Iterates<'_> {
    type Item = DiscreteDistribution;

    fn next(&mut self) -> Option<Self::Item> {
        let next = self.p.push_forward(&self.current);
        let out = core::mem::replace(&mut self.current, next);
        Some(DiscreteDistribution::from_parts_unchecked(self.p.states().clone(), out))
    }
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn iterate_from(p: &InducedKernel, start: usize, tol: f64, max_iter: usize) -> Result<(DiscreteDistribution, usize, f64)> {
    let mut mu = vec![0.0; p.len()];
    mu[start] = 1.0;
    let mut residual = f64::INFINITY;
    for k in 1..=max_iter {
        let next = p.push_forward(&mu);
        residual = tv(&next, &mu);
        mu = next;
        if residual < tol {
            let exact = tv(&p.push_forward(&mu), &mu);
            return Ok((DiscreteDistribution::from_parts_unchecked(p.states().clone(), mu), k, exact));
        }
    }
    Err(Error::NoConvergence {
        what: "stationary iteration",
        iterations: max_iter,
        residual,
    })
}

/// Iterates from `δ_min` and `δ_max` until the total-variation change drops below `tol`.
pub fn stationary_extremes(p: &InducedKernel, tol: f64, max_iter: usize) -> Result<StationaryPair> {
    let grid = p.states();
    let (lo, lo_iter, lo_res) = iterate_from(p, grid.min_index(), tol, max_iter)?;
    let (hi, hi_iter, hi_res) = iterate_from(p, grid.max_index(), tol, max_iter)?;
    let monotone = d_preserving_check(p, FunctionFamily::Increasing, crate::ORDER_TOL)?.holds;
    Ok(StationaryPair {
        least: lo,
        greatest: hi,
        iterations: [lo_iter, hi_iter],
        residual: [lo_res, hi_res],
        labels: if monotone {
            ExtremeLabels::LeastGreatest
        } else {
            ExtremeLabels::LimitFromBelowAbove
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum StationaryPart {
    /// Monotone kernels ordered by `⪰_st`; extremes compared in `⪰_st`.
    I,
    /// Monotone convexity-preserving kernels ordered by `⪰_CX`, convex policies;
    /// extremes compared in `⪰_ICX`.
    Ii,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StationaryComparison {
    pub check: TheoremCheck,
    /// Extremes under `[p₂, p₁]`.
    pub pairs: [StationaryPair; 2],
}

/// Whether the least and greatest stationary distributions rise from `m1` to `m2`.
pub fn check_prop4(
    m2: &SolvedModel,
    m1: &SolvedModel,
    part: StationaryPart,
    tol: f64,
    stationary_tol: f64,
    max_iter: usize,
) -> Result<StationaryComparison> {
    let (k2, k1) = (m2.model.kernel(), m1.model.kernel());
    k2.same_shape(k1)?;
    let grid = m2.model.states();
    orders::require_1d(grid, "stationary comparisons")?;
    let (g2, g1) = (m2.policy().values(), m1.policy().values());
    let mut conditions = vec![
        Condition::new("kernel_monotone_p2", monotone_kernel_check(k2, tol)),
        Condition::new("kernel_monotone_p1", monotone_kernel_check(k1, tol)),
    ];
    if part == StationaryPart::Ii {
        conditions.push(Condition::new("kernel_convexity_preserving_p2", convexity_preserving_check(k2, tol)?));
        conditions.push(Condition::new("kernel_convexity_preserving_p1", convexity_preserving_check(k1, tol)?));
    }
    conditions.push(Condition::new("policy_increasing_in_s_p2", nondecreasing_on_grid(g2, grid, tol)?));
    conditions.push(Condition::new("policy_increasing_in_s_p1", nondecreasing_on_grid(g1, grid, tol)?));
    if part == StationaryPart::Ii {
        conditions.push(Condition::new("policy_convex_in_s_p2", orders::convex_on_grid(g2, grid, tol)?));
        conditions.push(Condition::new("policy_convex_in_s_p1", orders::convex_on_grid(g1, grid, tol)?));
    }
    conditions.push(Condition::new(dn::POLICY_DOMINANCE, dominates_pointwise(g2, g1, tol)));
    let (kernel_order, result_order) = match part {
        StationaryPart::I => (StochasticOrder::St, StochasticOrder::St),
        StationaryPart::Ii => (StochasticOrder::Cx, StochasticOrder::Icx),
    };
    conditions.push(Condition::new(dn::KERNEL_DOMINANCE, kernel_compare(k2, k1, kernel_order, tol)?));
    let pre = AssumptionReport::new(conditions);

    let e2 = stationary_extremes(m2.induced(), stationary_tol, max_iter)?;
    let e1 = stationary_extremes(m1.induced(), stationary_tol, max_iter)?;
    let conclusion = compare(&e2.least, &e1.least, result_order, tol)?
        .context("least")
        .and(compare(&e2.greatest, &e1.greatest, result_order, tol)?.context("greatest"));
    let name = match part {
        StationaryPart::I => "stationary_st",
        StationaryPart::Ii => "stationary_icx",
    };
    Ok(StationaryComparison {
        check: TheoremCheck::new(name, pre, conclusion),
        pairs: [e2, e1],
    })
}

/// `‖λP − λ‖_TV`.
pub fn stationarity_residual(p: &InducedKernel, lambda: &DiscreteDistribution) -> f64 {
    tv(&p.push_forward(lambda.mass()), lambda.mass())
}

/// A short human-readable label for report output.
pub fn describe(pair: &StationaryPair) -> alloc::string::String {
    match pair.labels {
        ExtremeLabels::LeastGreatest => format!("least/greatest after {:?} iterations", pair.iterations),
        ExtremeLabels::LimitFromBelowAbove => format!("limits from below/above after {:?} iterations", pair.iterations),
    }
}
