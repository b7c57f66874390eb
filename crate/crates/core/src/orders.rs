//! Stochastic orders on grids and kernel property certificates.
//!
//! Every order is checked against a finite family of cone generators:
//! indicators of upper sets for first-order dominance, hinges `(x − t)⁺` at
//! the grid knots plus `±x` for the convex order, and hinges plus `x` for the
//! increasing convex order. On a finite grid these families generate the whole
//! cone of test functions, so the checks are exact.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::distribution::{stop_loss, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::{InducedKernel, Kernel};
use crate::lattice::{self, LatticeTable};
use crate::upper_sets::{for_each_upper_set, Suffixes};

/// The test function or inequality behind a violation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum TestFunction {
    /// Indicator of an upper set. Column `i` of the first axis contains the
    /// points whose last coordinate index is at least `thresholds[i]`; on a
    /// 1-D grid this is the single set `{x ≥ x_k}`.
    UpperSet { thresholds: Vec<usize> },
    /// `(x − x_k)⁺`.
    Hinge { knot: usize },
    Identity,
    NegatedIdentity,
    /// Comparison of means (equal means for the convex order, `t` below the
    /// grid for the increasing convex order).
    Mean,
    /// Direct comparison of two functions at a point.
    Pointwise,
    Monotone { axis: usize },
    IncreasingDifferences { axes: [usize; 2] },
    Convexity,
    /// `Γ(s₁) ⊆ Γ(s₂)` for `s₁ ≤ s₂`.
    Inclusion,
    /// Closure of `Γ` under max/min across ordered states.
    Ascending,
    /// Equality of feasible sets across states.
    Constant,
}

/// A concrete violation: where it happens and by how much.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Witness {
    pub test: TestFunction,
    /// Index tuple locating the violation; its meaning depends on the check
    /// (for kernel checks, `[s, a]` or `[s, a, s', a']`).
    pub at: Vec<usize>,
    pub magnitude: f64,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "String::is_empty"))]
    pub detail: String,
}

/// Outcome of an order or structure check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OrderVerdict {
    pub holds: bool,
    /// First violation beyond tolerance; present iff `holds` is false.
    pub witness: Option<Witness>,
    /// Largest shortfall seen, including ones within tolerance.
    pub near_violation: f64,
    /// The test family was sampled rather than enumerated.
    pub sampled: bool,
    pub comparisons: usize,
}

impl OrderVerdict {
    pub fn pass() -> Self {
        Self {
            holds: true,
            witness: None,
            near_violation: 0.0,
            sampled: false,
            comparisons: 0,
        }
    }

    pub fn fail(witness: Witness) -> Self {
        Self {
            holds: false,
            near_violation: witness.magnitude,
            witness: Some(witness),
            sampled: false,
            comparisons: 1,
        }
    }

    /// Holds but a shortfall within tolerance was seen.
    pub fn within_tolerance(&self) -> bool {
        self.holds && self.near_violation > 0.0
    }

    /// Conjunction; keeps the first witness.
    pub fn and(mut self, other: OrderVerdict) -> OrderVerdict {
        if self.holds && !other.holds {
            self.witness = other.witness;
        }
        self.holds &= other.holds;
        self.near_violation = self.near_violation.max(other.near_violation);
        self.sampled |= other.sampled;
        self.comparisons += other.comparisons;
        self
    }

    /// Prefixes the witness detail with `context`.
    pub fn context(mut self, context: &str) -> Self {
        if let Some(w) = self.witness.as_mut() {
            w.detail = if w.detail.is_empty() {
                String::from(context)
            } else {
                format!("{context}: {}", w.detail)
            };
        }
        self
    }
}

/// A named sub-check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Condition {
    pub name: String,
    pub verdict: OrderVerdict,
}

impl Condition {
    pub fn new(name: &str, verdict: OrderVerdict) -> Self {
        Self {
            name: String::from(name),
            verdict,
        }
    }
}

pub(crate) struct VerdictBuilder {
    tol: f64,
    first: Option<Witness>,
    first_rank: usize,
    worst: f64,
    sampled: bool,
    comparisons: usize,
}

impl VerdictBuilder {
    pub(crate) fn new(tol: f64) -> Self {
        Self {
            tol,
            first: None,
            first_rank: usize::MAX,
            worst: 0.0,
            sampled: false,
            comparisons: 0,
        }
    }

    /// `shortfall > tol` is a violation.
    #[inline]
    pub(crate) fn record<F: FnOnce() -> Witness>(&mut self, shortfall: f64, witness: F) {
        self.comparisons += 1;
        if shortfall > self.worst || shortfall.is_nan() {
            self.worst = shortfall;
        }
        if self.first.is_none() && !(shortfall <= self.tol) {
            self.first = Some(witness());
        }
    }

    /// Like [`record`](Self::record), but the reported witness is the violation
    /// with the smallest `rank` rather than the first one seen.
    #[inline]
    pub(crate) fn record_ranked<F: FnOnce() -> Witness>(&mut self, shortfall: f64, rank: usize, witness: F) {
        self.comparisons += 1;
        if shortfall > self.worst || shortfall.is_nan() {
            self.worst = shortfall;
        }
        if !(shortfall <= self.tol) && (self.first.is_none() || rank < self.first_rank) {
            self.first = Some(witness());
            self.first_rank = rank;
        }
    }

    pub(crate) fn mark_sampled(&mut self) {
        self.sampled = true;
    }

    pub(crate) fn finish(self) -> OrderVerdict {
        OrderVerdict {
            holds: self.first.is_none(),
            witness: self.first,
            near_violation: self.worst.max(0.0),
            sampled: self.sampled,
            comparisons: self.comparisons,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum StochasticOrder {
    /// First-order stochastic dominance.
    St,
    /// Convex order.
    Cx,
    /// Increasing convex order.
    Icx,
}

/// Test families of D-preserving chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FunctionFamily {
    Increasing,
    IncreasingConvex,
}

impl FunctionFamily {
    pub fn order(self) -> StochasticOrder {
        match self {
            FunctionFamily::Increasing => StochasticOrder::St,
            FunctionFamily::IncreasingConvex => StochasticOrder::Icx,
        }
    }
}

fn same_grid(a: &DiscreteDistribution, b: &DiscreteDistribution) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch("distributions live on different grids".into()));
    }
    Ok(())
}

pub(crate) fn require_1d(grid: &Grid, what: &str) -> Result<()> {
    if grid.dim() != 1 {
        return Err(Error::Unsupported(format!("{what} is only implemented on 1-D grids")));
    }
    Ok(())
}

/// First-order dominance of each `upper[i]` over `lower[i]`, enumerating upper
/// sets once for all pairs.
fn st_pairs(
    grid: &Grid,
    upper: &[&[f64]],
    lower: &[&[f64]],
    locate: &dyn Fn(usize) -> Vec<usize>,
    b: &mut VerdictBuilder,
) {
    if upper.is_empty() {
        return;
    }
    let hi = Suffixes::new(grid, upper.iter().copied());
    let lo = Suffixes::new(grid, lower.iter().copied());
    let sampled = for_each_upper_set(grid, |c| {
        for p in 0..upper.len() {
            let shortfall = lo.mass(p, c) - hi.mass(p, c);
            b.record_ranked(shortfall, p, || Witness {
                test: TestFunction::UpperSet { thresholds: c.to_vec() },
                at: locate(p),
                magnitude: shortfall,
                detail: String::new(),
            });
        }
    });
    if sampled {
        b.mark_sampled();
    }
}

fn cx_rows(points: &[f64], hi: &[f64], lo: &[f64], order: StochasticOrder, at: Vec<usize>, b: &mut VerdictBuilder) {
    let mean = |m: &[f64]| -> f64 { m.iter().zip(points).map(|(p, x)| p * x).sum() };
    let (m_hi, m_lo) = (mean(hi), mean(lo));
    match order {
        StochasticOrder::Cx => {
            let gap = (m_hi - m_lo).abs();
            b.record(gap, || Witness {
                test: TestFunction::Mean,
                at: at.clone(),
                magnitude: gap,
                detail: format!("means differ: {m_hi} vs {m_lo}"),
            });
        }
        _ => {
            let shortfall = m_lo - m_hi;
            b.record(shortfall, || Witness {
                test: TestFunction::Mean,
                at: at.clone(),
                magnitude: shortfall,
                detail: String::from("hinge below the grid minimum (mean)"),
            });
        }
    }
    let (s_hi, s_lo) = (stop_loss(points, hi), stop_loss(points, lo));
    for k in 0..points.len() {
        let shortfall = s_lo[k] - s_hi[k];
        b.record(shortfall, || Witness {
            test: TestFunction::Hinge { knot: k },
            at: at.clone(),
            magnitude: shortfall,
            detail: String::new(),
        });
    }
}

/// `mu2 ⪰_st mu1`.
pub fn fosd_compare(mu2: &DiscreteDistribution, mu1: &DiscreteDistribution, tol: f64) -> Result<OrderVerdict> {
    same_grid(mu2, mu1)?;
    let mut b = VerdictBuilder::new(tol);
    st_pairs(mu2.grid(), &[mu2.mass()], &[mu1.mass()], &|_| Vec::new(), &mut b);
    Ok(b.finish())
}

/// `mu2 ⪰_CX mu1` on a 1-D grid.
pub fn cx_compare(mu2: &DiscreteDistribution, mu1: &DiscreteDistribution, tol: f64) -> Result<OrderVerdict> {
    same_grid(mu2, mu1)?;
    require_1d(mu2.grid(), "the convex order")?;
    let mut b = VerdictBuilder::new(tol);
    cx_rows(mu2.grid().points(), mu2.mass(), mu1.mass(), StochasticOrder::Cx, Vec::new(), &mut b);
    Ok(b.finish())
}

/// `mu2 ⪰_ICX mu1` on a 1-D grid.
pub fn icx_compare(mu2: &DiscreteDistribution, mu1: &DiscreteDistribution, tol: f64) -> Result<OrderVerdict> {
    same_grid(mu2, mu1)?;
    require_1d(mu2.grid(), "the increasing convex order")?;
    let mut b = VerdictBuilder::new(tol);
    cx_rows(mu2.grid().points(), mu2.mass(), mu1.mass(), StochasticOrder::Icx, Vec::new(), &mut b);
    Ok(b.finish())
}

pub fn compare(
    mu2: &DiscreteDistribution,
    mu1: &DiscreteDistribution,
    order: StochasticOrder,
    tol: f64,
) -> Result<OrderVerdict> {
    match order {
        StochasticOrder::St => fosd_compare(mu2, mu1, tol),
        StochasticOrder::Cx => cx_compare(mu2, mu1, tol),
        StochasticOrder::Icx => icx_compare(mu2, mu1, tol),
    }
}

/// Compares many row pairs on one grid; `locate` maps a pair to its witness location.
pub(crate) fn compare_rows(
    grid: &Grid,
    upper: &[&[f64]],
    lower: &[&[f64]],
    order: StochasticOrder,
    locate: &dyn Fn(usize) -> Vec<usize>,
    tol: f64,
) -> Result<OrderVerdict> {
    let mut b = VerdictBuilder::new(tol);
    match order {
        StochasticOrder::St => st_pairs(grid, upper, lower, locate, &mut b),
        _ => {
            require_1d(grid, "the convex orders")?;
            for p in 0..upper.len() {
                cx_rows(grid.points(), upper[p], lower[p], order, locate(p), &mut b);
            }
        }
    }
    Ok(b.finish())
}

/// `p2 ⪰ p1` row by row at every feasible `(s, a)`; witnesses are located at `[s, a]`.
pub fn kernel_compare(p2: &Kernel, p1: &Kernel, order: StochasticOrder, tol: f64) -> Result<OrderVerdict> {
    p2.same_shape(p1)?;
    let na = p2.n_actions();
    let pairs: Vec<usize> = (0..p2.n_states() * na).filter(|&i| p2.feasible()[i]).collect();
    let upper: Vec<&[f64]> = pairs.iter().map(|&i| p2.row_unchecked(i / na, i % na)).collect();
    let lower: Vec<&[f64]> = pairs.iter().map(|&i| p1.row_unchecked(i / na, i % na)).collect();
    compare_rows(p2.states(), &upper, &lower, order, &|k| vec![pairs[k] / na, pairs[k] % na], tol)
}

/// Rowwise `P2(s, ·) ⪰ P1(s, ·)`; witnesses are located at `[s]`.
pub fn chain_compare(p2: &InducedKernel, p1: &InducedKernel, order: StochasticOrder, tol: f64) -> Result<OrderVerdict> {
    if p2.states() != p1.states() {
        return Err(Error::GridMismatch("chains live on different grids".into()));
    }
    let n = p2.len();
    let upper: Vec<&[f64]> = (0..n).map(|s| p2.row(s)).collect();
    let lower: Vec<&[f64]> = (0..n).map(|s| p1.row(s)).collect();
    compare_rows(p2.states(), &upper, &lower, order, &|s| vec![s], tol)
}

/// Next feasible state above `s` along axis `k` at action `a`.
fn next_feasible_state(p: &Kernel, s: usize, a: usize, k: usize) -> Option<usize> {
    let mut t = p.states().step_up(s, k)?;
    loop {
        if p.is_feasible(t, a) {
            return Some(t);
        }
        t = p.states().step_up(t, k)?;
    }
}

/// `p(s, a, ·)` is first-order nondecreasing in `(s, a)`. Each feasible pair
/// is compared with the next feasible pair along every state axis and along
/// the action axis; witnesses are located at `[s, a, s', a']`.
pub fn monotone_kernel_check(p: &Kernel, tol: f64) -> OrderVerdict {
    let (ns, na) = (p.n_states(), p.n_actions());
    let mut edges: Vec<[usize; 4]> = Vec::new();
    for s in 0..ns {
        for a in 0..na {
            if !p.is_feasible(s, a) {
                continue;
            }
            for k in 0..p.states().dim() {
                if let Some(t) = next_feasible_state(p, s, a, k) {
                    edges.push([s, a, t, a]);
                }
            }
            if let Some(b) = (a + 1..na).find(|&b| p.is_feasible(s, b)) {
                edges.push([s, a, s, b]);
            }
        }
    }
    let upper: Vec<&[f64]> = edges.iter().map(|e| p.row_unchecked(e[2], e[3])).collect();
    let lower: Vec<&[f64]> = edges.iter().map(|e| p.row_unchecked(e[0], e[1])).collect();
    let mut b = VerdictBuilder::new(tol);
    st_pairs(p.states(), &upper, &lower, &|i| edges[i].to_vec(), &mut b);
    b.finish()
}

/// Generator values `∫ f dq` for `f ∈ {x, −x, (x − x_k)⁺ for each knot}`.
fn generator_values(points: &[f64], row: &[f64], negated_identity: bool) -> Vec<(TestFunction, f64)> {
    let mean: f64 = row.iter().zip(points).map(|(p, x)| p * x).sum();
    let mut out = vec![(TestFunction::Identity, mean)];
    if negated_identity {
        out.push((TestFunction::NegatedIdentity, -mean));
    }
    let sl = stop_loss(points, row);
    // The hinge at the top knot is identically zero.
    for (k, v) in sl.iter().enumerate().take(points.len().saturating_sub(1)) {
        out.push((TestFunction::Hinge { knot: k }, *v));
    }
    out
}

fn generator_name(t: &TestFunction) -> String {
    match t {
        TestFunction::Identity => String::from("generator x"),
        TestFunction::NegatedIdentity => String::from("generator -x"),
        TestFunction::Hinge { knot } => format!("generator (x - x_{knot})+"),
        other => format!("{other:?}"),
    }
}

/// For every convex generator `f`, `(s, a) ↦ ∫ f dp(s, a, ·)` is midpoint
/// convex on the feasible part of the state-action grid. 1-D states only.
pub fn convexity_preserving_check(p: &Kernel, tol: f64) -> Result<OrderVerdict> {
    require_1d(p.states(), "convexity preservation")?;
    let (ns, na) = (p.n_states(), p.n_actions());
    let points = p.states().points();
    let gens: Vec<Vec<(TestFunction, f64)>> = (0..ns * na)
        .map(|i| {
            if p.feasible()[i] {
                generator_values(points, p.row_unchecked(i / na, i % na), true)
            } else {
                Vec::new()
            }
        })
        .collect();
    let n_gen = points.len() + 1;
    let mut b = VerdictBuilder::new(tol);
    for g in 0..n_gen {
        let values: Vec<f64> = gens.iter().map(|row| row.get(g).map_or(0.0, |x| x.1)).collect();
        let table = LatticeTable::new(vec![points.to_vec(), p.actions().points().to_vec()], values)?
            .with_mask(p.feasible().to_vec())?;
        let test = gens.iter().find_map(|row| row.get(g).map(|x| x.0.clone()));
        let Some(test) = test else { continue };
        let name = generator_name(&test);
        lattice::convexity_into(&table, &mut b, &|| name.clone());
    }
    Ok(b.finish())
}

/// The chain maps the family into itself: `s ↦ ∫ f dP(s, ·)` is increasing
/// (and convex, for the increasing convex family) for every generator `f`.
pub fn d_preserving_check(p: &InducedKernel, family: FunctionFamily, tol: f64) -> Result<OrderVerdict> {
    let grid = p.states();
    match family {
        FunctionFamily::Increasing => {
            let mut edges: Vec<[usize; 2]> = Vec::new();
            for s in 0..p.len() {
                for k in 0..grid.dim() {
                    if let Some(t) = grid.step_up(s, k) {
                        edges.push([s, t]);
                    }
                }
            }
            let upper: Vec<&[f64]> = edges.iter().map(|e| p.row(e[1])).collect();
            let lower: Vec<&[f64]> = edges.iter().map(|e| p.row(e[0])).collect();
            let mut b = VerdictBuilder::new(tol);
            st_pairs(grid, &upper, &lower, &|i| edges[i].to_vec(), &mut b);
            Ok(b.finish())
        }
        FunctionFamily::IncreasingConvex => {
            require_1d(grid, "the increasing convex family")?;
            let points = grid.points();
            let gens: Vec<Vec<(TestFunction, f64)>> =
                (0..p.len()).map(|s| generator_values(points, p.row(s), false)).collect();
            let mut b = VerdictBuilder::new(tol);
            for g in 0..gens[0].len() {
                let name = generator_name(&gens[0][g].0);
                let table = LatticeTable::new(vec![points.to_vec()], gens.iter().map(|r| r[g].1).collect())?;
                lattice::increasing_along_into(&table, 0, &mut b, &|| name.clone());
                lattice::convexity_into(&table, &mut b, &|| name.clone());
            }
            Ok(b.finish())
        }
    }
}

/// Values on a grid are nondecreasing along every axis.
pub fn nondecreasing_on_grid(values: &[f64], grid: &Grid, tol: f64) -> Result<OrderVerdict> {
    let table = LatticeTable::new(grid.axes().to_vec(), values.to_vec())?;
    Ok(lattice::increasing_check(&table, tol))
}

/// Values on a 1-D grid are midpoint convex (weighted for nonuniform spacing).
pub fn convex_on_grid(values: &[f64], grid: &Grid, tol: f64) -> Result<OrderVerdict> {
    require_1d(grid, "convexity of functions")?;
    let table = LatticeTable::new(vec![grid.points().to_vec()], values.to_vec())?;
    Ok(lattice::convexity_check(&table, tol))
}

/// `hi(i) ≥ lo(i)` for every index; witnesses are located at `[i]`.
pub fn dominates_pointwise(hi: &[f64], lo: &[f64], tol: f64) -> OrderVerdict {
    let mut b = VerdictBuilder::new(tol);
    for (i, (h, l)) in hi.iter().zip(lo).enumerate() {
        let shortfall = l - h;
        b.record(shortfall, || Witness {
            test: TestFunction::Pointwise,
            at: vec![i],
            magnitude: shortfall,
            detail: format!("{h} < {l}"),
        });
    }
    b.finish()
}
