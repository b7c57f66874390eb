//! Builders for four application models: capital accumulation with
//! adjustment costs, pricing with a reference price, a controlled random walk
//! and a consumption-savings problem with HARA utility.

mod families;
mod hara;
#[cfg(feature = "serde")]
mod spec;

use alloc::format;
use alloc::vec;


pub use families::{Family1, Family2};
pub use hara::Hara;
#[cfg(feature = "serde")]
pub use spec::{
    CapitalSpec, GridSpec, ModelSpec, PricingSpec, RandomWalkSpec, RawSpec, SavingsSpec, UtilitySpec,
};

use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::Kernel;
use crate::model::{kernel_from_map, kernel_from_map_masked, MdpModel};

fn expect_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::GridMismatch(format!("{what} has {got} entries, expected {want}")));
    }
    Ok(())
}

/// Firm choosing next period's capital `a` on the capital grid, with demand
/// `s₂` following the Markov kernel `q`. The state is `(s₁, s₂)`, the reward
/// `R(s₁, s₂) − c(s₁, a)`, and `s₁` moves to `a` deterministically.
///
/// Layouts: `revenue[i·|S₂| + j]`, `cost[i·|A| + a]`, `q[j·|S₂| + j']`,
/// `feasible[i·|A| + a]` (per capital level, shared across demand states).
pub fn build_capital(
    capital: &Grid,
    demand: &Grid,
    revenue: &[f64],
    cost: &[f64],
    q: &[f64],
    feasible: Option<&[bool]>,
    beta: f64,
) -> Result<MdpModel> {
    if capital.dim() != 1 || demand.dim() != 1 {
        return Err(Error::InvalidGrid("capital and demand grids must be 1-D".into()));
    }
    let (n1, n2) = (capital.len(), demand.len());
    expect_len("revenue table", revenue.len(), n1 * n2)?;
    expect_len("cost table", cost.len(), n1 * n1)?;
    expect_len("demand transition", q.len(), n2 * n2)?;
    if let Some(f) = feasible {
        expect_len("feasibility mask", f.len(), n1 * n1)?;
    }
    for j in 0..n2 {
        crate::distribution::validate_mass(&q[j * n2..(j + 1) * n2])
            .map_err(|e| Error::InvalidKernel(format!("demand transition row {j}: {e}")))?;
    }
    let states = Grid::product(capital.points().to_vec(), demand.points().to_vec())?;
    let actions = capital.clone();
    let ns = n1 * n2;
    let mut mask = vec![true; ns * n1];
    let mut probs = vec![0.0; ns * n1 * ns];
    let mut reward = vec![0.0; ns * n1];
    for i in 0..n1 {
        for j in 0..n2 {
            let s = states.index([i, j]);
            for a in 0..n1 {
                let pair = s * n1 + a;
                mask[pair] = feasible.map_or(true, |f| f[i * n1 + a]);
                reward[pair] = revenue[i * n2 + j] - cost[i * n1 + a];
                if mask[pair] {
                    for jj in 0..n2 {
                        probs[pair * ns + states.index([a, jj])] = q[j * n2 + jj];
                    }
                }
            }
        }
    }
    let kernel = Kernel::new(states, actions, mask, probs)?;
    MdpModel::new(kernel, reward, beta)
}

/// Monopolist charging `a` against reference price `s`; reward `a·D(s, a)`, next
/// reference `γ s + (1 − γ) a` with memory factor `γ ~ memory`.
/// `demand[i·|A| + a]`.
pub fn build_pricing(reference: &Grid, prices: &Grid, demand: &[f64], memory: &DiscreteDistribution, beta: f64) -> Result<MdpModel> {
    let (ns, na) = (reference.len(), prices.len());
    expect_len("demand table", demand.len(), ns * na)?;
    if memory.grid().points().iter().any(|g| !(0.0..=1.0).contains(g)) {
        return Err(Error::InvalidModel("memory factors must lie in [0, 1]".into()));
    }
    let kernel = kernel_from_map(reference, prices, |s, a, g| g * s + (1.0 - g) * a, memory)?;
    let reward = (0..ns * na).map(|i| prices.points()[i % na] * demand[i]).collect();
    MdpModel::new(kernel, reward, beta)
}

/// `s' = s + a + ε` clamped to the state grid, reward `c₁(s) − c₂(a)`.
pub fn build_randomwalk(states: &Grid, actions: &Grid, c1: &[f64], c2: &[f64], noise: &DiscreteDistribution, beta: f64) -> Result<MdpModel> {
    let (ns, na) = (states.len(), actions.len());
    expect_len("state reward", c1.len(), ns)?;
    expect_len("action cost", c2.len(), na)?;
    let kernel = kernel_from_map(states, actions, |s, a, e| s + a + e, noise)?;
    let reward = (0..ns * na).map(|i| c1[i / na] - c2[i % na]).collect();
    MdpModel::new(kernel, reward, beta)
}

/// Consumption-savings problem: wealth `s`, savings `a`, reward `u(s − a)`,
/// next wealth `R a + y` with income `y ~ income`.
#[derive(Debug, Clone, PartialEq)]
pub struct SavingsParams {
    pub utility: Hara,
    pub gross_return: f64,
    /// Income law; its grid end points bound the wealth grid (zero-mass atoms count).
    pub income: DiscreteDistribution,
    pub borrowing_limit: f64,
    pub savings_cap: f64,
    pub wealth_points: usize,
    pub action_points: usize,
    /// Smallest admissible consumption; keeps `u` finite for CRRA.
    pub consumption_floor: f64,
    pub beta: f64,
}

impl SavingsParams {
    /// `[R s̲ + y̲, R s̄ + ȳ]`.
    pub fn wealth_bounds(&self) -> (f64, f64) {
        let y = self.income.grid().points();
        (
            self.gross_return * self.borrowing_limit + y[0],
            self.gross_return * self.savings_cap + y[y.len() - 1],
        )
    }
}

/// Wealth lives on a uniform grid over the exact range of next-period wealth,
/// savings on a uniform grid over `[s̲, s̄]`, and
/// `Γ(s) = {a : a ≤ min(s − c_floor, s̄)}`.
pub fn build_savings(p: &SavingsParams) -> Result<MdpModel> {
    if p.income.grid().dim() != 1 || p.income.grid().points()[0] < 0.0 {
        return Err(Error::InvalidModel("income must be a nonnegative 1-D law".into()));
    }
    if !(p.gross_return > 0.0) || !(p.borrowing_limit < p.savings_cap) || !(p.consumption_floor > 0.0) {
        return Err(Error::InvalidModel(
            "need R > 0, borrowing limit below the savings cap and a positive consumption floor".into(),
        ));
    }
    let (lo, hi) = p.wealth_bounds();
    if lo - p.borrowing_limit < p.consumption_floor {
        return Err(Error::InvalidModel(format!(
            "lowest wealth {lo} cannot afford the consumption floor {} at the borrowing limit {}",
            p.consumption_floor, p.borrowing_limit
        )));
    }
    let states = Grid::uniform(lo, hi, p.wealth_points)?;
    let actions = Grid::uniform(p.borrowing_limit, p.savings_cap, p.action_points)?;
    let (ns, na) = (states.len(), actions.len());
    let mut mask = vec![false; ns * na];
    let mut reward = vec![0.0; ns * na];
    for s in 0..ns {
        let w = states.points()[s];
        for a in 0..na {
            let x = actions.points()[a];
            if x > w - p.consumption_floor {
                continue;
            }
            let c = w - x;
            let u = p.utility.utility(c).filter(|u| u.is_finite()).ok_or(Error::UtilityDomain {
                state: s,
                action: a,
                consumption: c,
            })?;
            mask[s * na + a] = true;
            reward[s * na + a] = u;
        }
    }
    let r = p.gross_return;
    let kernel = kernel_from_map_masked(&states, &actions, &mask, |_, a, y| r * a + y, &p.income)?;
    MdpModel::new(kernel, reward, p.beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use crate::orders::{convexity_preserving_check, monotone_kernel_check, nondecreasing_on_grid};
    use crate::solver::{SolvedModel, SolverOptions};
    use crate::structure::{ascending_check, assumption1_check, expanding_check};
    use crate::ORDER_TOL;

    fn solve(m: MdpModel) -> SolvedModel {
        SolvedModel::solve(m, &SolverOptions::default()).unwrap()
    }

    fn iid(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n * n]
    }

    #[test]
    fn free_capital_goes_to_the_top() {
        let k = Grid::uniform(0.0, 4.0, 5).unwrap();
        let z = Grid::new(vec![0.0, 1.0]).unwrap();
        let revenue: Vec<f64> = (0..10).map(|i| (i / 2) as f64 * (1.0 + (i % 2) as f64)).collect();
        let q = vec![1.0, 0.0, 0.0, 1.0];
        let sm = solve(build_capital(&k, &z, &revenue, &[0.0; 25], &q, None, 0.9).unwrap());
        assert!(sm.policy().indices().iter().all(|&a| a == 4));
    }

    #[test]
    fn myopic_capital_stays_put() {
        let k = Grid::uniform(0.0, 4.0, 5).unwrap();
        let z = Grid::new(vec![0.0, 1.0]).unwrap();
        let revenue: Vec<f64> = (0..10).map(|i| (i / 2) as f64).collect();
        let cost = Family2::AbsAdjustment { scale: 1.0 }.evaluate(k.points(), k.points()).unwrap();
        let sm = solve(build_capital(&k, &z, &revenue, &cost, &iid(2), None, 0.01).unwrap());
        let states = sm.model.states().clone();
        for s in 0..states.len() {
            assert_eq!(sm.policy().indices()[s], states.coords(s)[0]);
        }
    }

    #[test]
    fn capital_with_iid_demand_is_well_structured() {
        let k = Grid::uniform(0.0, 3.0, 4).unwrap();
        let z = Grid::new(vec![1.0, 2.0, 3.0]).unwrap();
        let revenue = Family2::PowerRevenue { scale: 3.0, alpha: 0.7, beta: 1.0 }.evaluate(k.points(), z.points()).unwrap();
        let cost = Family2::QuadraticAdjustment { scale: 0.1 }.evaluate(k.points(), k.points()).unwrap();
        let sm = solve(build_capital(&k, &z, &revenue, &cost, &iid(3), None, 0.9).unwrap());
        let rep = assumption1_check(&sm.model, ORDER_TOL).unwrap();
        assert!(rep.holds, "{:?}", rep.first_failure());
        assert!(nondecreasing_on_grid(sm.policy().values(), sm.model.states(), ORDER_TOL).unwrap().holds);
    }

    #[test]
    fn pricing_memory_extremes() {
        let s = Grid::uniform(0.0, 1.0, 5).unwrap();
        let d = Family2::LinearDemand { d0: 1.0, ds: 0.5, da: 1.0 }.evaluate(s.points(), s.points()).unwrap();
        let frozen = build_pricing(&s, &s, &d, &DiscreteDistribution::from_atoms(&[(1.0, 1.0)]).unwrap(), 0.9).unwrap();
        for st in 0..5 {
            for a in 0..5 {
                let row = frozen.kernel().row(st, a).unwrap();
                assert_eq!(row[st], 1.0);
            }
        }
        let forget = build_pricing(&s, &s, &d, &DiscreteDistribution::from_atoms(&[(0.0, 1.0)]).unwrap(), 0.9).unwrap();
        assert_eq!(forget.kernel().row(0, 3).unwrap()[3], 1.0);
    }

    #[test]
    fn pricing_kernel_is_monotone_and_convexity_preserving() {
        let s = Grid::uniform(0.0, 1.0, 9).unwrap();
        let d = Family2::LinearDemand { d0: 1.0, ds: 0.5, da: 1.0 }.evaluate(s.points(), s.points()).unwrap();
        let v = DiscreteDistribution::from_atoms(&[(0.25, 1.0 / 3.0), (0.5, 1.0 / 3.0), (0.75, 1.0 / 3.0)]).unwrap();
        let m = build_pricing(&s, &s, &d, &v, 0.9).unwrap();
        assert!(monotone_kernel_check(m.kernel(), ORDER_TOL).holds);
        assert!(convexity_preserving_check(m.kernel(), ORDER_TOL).unwrap().holds);
        let sm = solve(m);
        assert!(nondecreasing_on_grid(sm.policy().values(), sm.model.states(), ORDER_TOL).unwrap().holds);
    }

    #[test]
    fn randomwalk_limits() {
        let s = Grid::uniform(-3.0, 3.0, 7).unwrap();
        let a = Grid::new(vec![0.0, 1.0]).unwrap();
        let noise = DiscreteDistribution::from_atoms(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let c1: Vec<f64> = s.points().to_vec();
        let sm = solve(build_randomwalk(&s, &a, &c1, &[0.0, 0.0], &noise, 0.9).unwrap());
        assert!(sm.policy().indices().iter().all(|&i| i == 1));
        let a3 = Grid::new(vec![0.0, 1.0, 2.0]).unwrap();
        let delta = DiscreteDistribution::from_atoms(&[(0.0, 1.0)]).unwrap();
        let sm = solve(build_randomwalk(&s, &a3, &c1, &[0.5, 0.2, 0.9], &delta, 0.01).unwrap());
        assert!(sm.policy().indices().iter().all(|&i| i == 1));
        for n in [4usize, 9] {
            let s = Grid::uniform(0.0, 5.0, n).unwrap();
            let odd = DiscreteDistribution::from_atoms(&[(-0.7, 0.2), (0.3, 0.5), (1.9, 0.3)]).unwrap();
            let m = build_randomwalk(&s, &a3, &vec![0.0; n], &[0.0; 3], &odd, 0.5).unwrap();
            assert!(monotone_kernel_check(m.kernel(), ORDER_TOL).holds);
        }
    }

    fn savings(income: &[(f64, f64)], sigma: f64) -> SavingsParams {
        SavingsParams {
            utility: Hara::crra(sigma).unwrap(),
            gross_return: 1.02,
            income: DiscreteDistribution::from_atoms(income).unwrap(),
            borrowing_limit: -1.0,
            savings_cap: 4.0,
            wealth_points: 41,
            action_points: 26,
            consumption_floor: 0.05,
            beta: 0.95,
        }
    }

    #[test]
    fn savings_structure() {
        let p = savings(&[(0.5, 0.5), (1.5, 0.5)], 2.0);
        let m = build_savings(&p).unwrap();
        let (lo, hi) = p.wealth_bounds();
        assert_eq!(m.states().points()[0], lo);
        assert_eq!(*m.states().points().last().unwrap(), hi);
        assert!(ascending_check(m.states(), m.feasible(), m.n_actions()).holds);
        assert!(expanding_check(m.states(), m.feasible(), m.n_actions()).holds);
        assert!(monotone_kernel_check(m.kernel(), ORDER_TOL).holds);
        assert!(convexity_preserving_check(m.kernel(), ORDER_TOL).unwrap().holds);
        let sm = solve(m);
        assert!(nondecreasing_on_grid(sm.policy().values(), sm.model.states(), ORDER_TOL).unwrap().holds);
    }

    #[test]
    fn savings_singleton_at_the_bottom() {
        // Only the borrowing limit is affordable at the lowest wealth.
        let mut p = savings(&[(0.5, 1.0)], 2.0);
        p.consumption_floor = 0.47;
        let sm = solve(build_savings(&p).unwrap());
        assert_eq!(sm.model.feasible_actions(0).collect::<Vec<_>>(), vec![0]);
        assert_eq!(sm.policy().values()[0], p.borrowing_limit);
    }

    #[test]
    fn savings_rejections() {
        let mut p = savings(&[(0.5, 1.0)], 2.0);
        p.consumption_floor = 0.6;
        assert!(build_savings(&p).is_err());
        let mut p = savings(&[(0.5, 1.0)], 2.0);
        p.utility = Hara::quadratic(1.0).unwrap();
        assert!(matches!(build_savings(&p), Err(Error::UtilityDomain { .. })));
    }
}
