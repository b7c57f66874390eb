//! Dense transition kernels.
//!
//! Rows are stored densely; each row also records the index span of its
//! nonzero entries so expectations and propagation only touch the support.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::distribution::{validate_mass, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::grid::Grid;

fn support_span(row: &[f64]) -> (u32, u32) {
    let lo = row.iter().position(|&p| p != 0.0).unwrap_or(0);
    let hi = row.iter().rposition(|&p| p != 0.0).map_or(0, |i| i + 1);
    (lo as u32, hi.max(lo) as u32)
}

/// State-action transition kernel `p(s, a, ·)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    states: Grid,
    actions: Grid,
    feasible: Vec<bool>,
    probs: Vec<f64>,
    spans: Vec<(u32, u32)>,
}

impl Kernel {
    /// `probs` is laid out as `[(s * |A| + a) * |S| + s']`. Rows at infeasible
    /// pairs are ignored and stored as zeros.
    pub fn new(states: Grid, actions: Grid, feasible: Vec<bool>, mut probs: Vec<f64>) -> Result<Self> {
        if actions.dim() != 1 {
            return Err(Error::InvalidKernel("action grids must be 1-D".into()));
        }
        let (ns, na) = (states.len(), actions.len());
        if feasible.len() != ns * na {
            return Err(Error::InvalidKernel(format!(
                "feasibility mask has {} entries, expected {}",
                feasible.len(),
                ns * na
            )));
        }
        if probs.len() != ns * na * ns {
            return Err(Error::InvalidKernel(format!(
                "kernel has {} entries, expected {}",
                probs.len(),
                ns * na * ns
            )));
        }
        let mut spans = Vec::with_capacity(ns * na);
        for (pair, row) in probs.chunks_mut(ns).enumerate() {
            if feasible[pair] {
                validate_mass(row).map_err(|e| {
                    Error::InvalidKernel(format!("row (s={}, a={}): {e}", pair / na, pair % na))
                })?;
                spans.push(support_span(row));
            } else {
                row.iter_mut().for_each(|p| *p = 0.0);
                spans.push((0, 0));
            }
        }
        Ok(Self {
            states,
            actions,
            feasible,
            probs,
            spans,
        })
    }

    pub fn states(&self) -> &Grid {
        &self.states
    }

    pub fn actions(&self) -> &Grid {
        &self.actions
    }

    pub fn feasible(&self) -> &[bool] {
        &self.feasible
    }

    pub fn is_feasible(&self, s: usize, a: usize) -> bool {
        self.feasible[s * self.actions.len() + a]
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    /// Row `p(s, a, ·)` if the pair is feasible.
    pub fn row(&self, s: usize, a: usize) -> Option<&[f64]> {
        self.is_feasible(s, a).then(|| self.row_unchecked(s, a))
    }

    /// Row by flat pair index `s * |A| + a`.
    pub(crate) fn probs_row(&self, pair: usize) -> &[f64] {
        let n = self.states.len();
        &self.probs[pair * n..(pair + 1) * n]
    }

    pub(crate) fn row_unchecked(&self, s: usize, a: usize) -> &[f64] {
        let ns = self.states.len();
        let start = (s * self.actions.len() + a) * ns;
        &self.probs[start..start + ns]
    }

    pub fn row_distribution(&self, s: usize, a: usize) -> Option<DiscreteDistribution> {
        self.row(s, a)
            .map(|r| DiscreteDistribution::from_parts_unchecked(self.states.clone(), r.to_vec()))
    }

    /// `Σ f(s') p(s, a, s')` without a feasibility check.
    pub(crate) fn expect(&self, s: usize, a: usize, f: &[f64]) -> f64 {
        let (lo, hi) = self.spans[s * self.actions.len() + a];
        let row = self.row_unchecked(s, a);
        let (lo, hi) = (lo as usize, hi as usize);
        row[lo..hi].iter().zip(&f[lo..hi]).map(|(p, v)| p * v).sum()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Checks that two kernels are defined on the same grids and masks.
    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.states != other.states || self.actions != other.actions {
            return Err(Error::GridMismatch("kernels use different grids".into()));
        }
        if self.feasible != other.feasible {
            return Err(Error::GridMismatch("kernels use different feasibility masks".into()));
        }
        Ok(())
    }
}

/// State-indexed kernel `P(s, ·) = p(s, g(s), ·)` of the chain induced by a policy.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedKernel {
    states: Grid,
    probs: Vec<f64>,
    spans: Vec<(u32, u32)>,
}

impl InducedKernel {
    /// `probs` is row-major `|S| × |S|`.
    pub fn new(states: Grid, probs: Vec<f64>) -> Result<Self> {
        let n = states.len();
        if probs.len() != n * n {
            return Err(Error::InvalidKernel(format!(
                "chain has {} entries, expected {}",
                probs.len(),
                n * n
            )));
        }
        let mut spans = Vec::with_capacity(n);
        for (s, row) in probs.chunks(n).enumerate() {
            validate_mass(row).map_err(|e| Error::InvalidKernel(format!("row {s}: {e}")))?;
            spans.push(support_span(row));
        }
        Ok(Self { states, probs, spans })
    }

    pub(crate) fn from_rows_unchecked(states: Grid, probs: Vec<f64>) -> Self {
        let n = states.len();
        let spans = probs.chunks(n).map(support_span).collect();
        Self { states, probs, spans }
    }

    pub fn identity(states: Grid) -> Self {
        let n = states.len();
        let mut probs = vec![0.0; n * n];
        for s in 0..n {
            probs[s * n + s] = 1.0;
        }
        Self::from_rows_unchecked(states, probs)
    }

    pub fn states(&self) -> &Grid {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn row(&self, s: usize) -> &[f64] {
        let n = self.states.len();
        &self.probs[s * n..(s + 1) * n]
    }

    pub fn row_distribution(&self, s: usize) -> DiscreteDistribution {
        DiscreteDistribution::from_parts_unchecked(self.states.clone(), self.row(s).to_vec())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `(Pf)(s) = Σ f(s') P(s, s')`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|s| {
                let (lo, hi) = self.spans[s];
                let (lo, hi) = (lo as usize, hi as usize);
                self.row(s)[lo..hi].iter().zip(&f[lo..hi]).map(|(p, v)| p * v).sum()
            })
            .collect()
    }

    /// Row vector times matrix: `(μP)(s') = Σ_s μ(s) P(s, s')`.
    pub fn push_forward(&self, mass: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for (s, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let (lo, hi) = self.spans[s];
            let (lo, hi) = (lo as usize, hi as usize);
            for (o, p) in out[lo..hi].iter_mut().zip(&self.row(s)[lo..hi]) {
                *o += m * p;
            }
        }
        out
    }

    /// States reachable from `s` with positive probability in any number of steps.
    pub fn reachable_from(&self, s: usize) -> Vec<bool> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for (v, &p) in self.row(u).iter().enumerate() {
                if p > 0.0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    pub fn is_irreducible(&self) -> bool {
        let n = self.len();
        (0..n).all(|s| self.reachable_from(s).iter().all(|&r| r))
    }

    /// Number of closed communicating classes; a chain with exactly one has a
    /// unique stationary distribution.
    pub fn closed_class_count(&self) -> usize {
        let n = self.len();
        let reach: Vec<Vec<bool>> = (0..n).map(|s| self.reachable_from(s)).collect();
        let mut counted = vec![false; n];
        let mut classes = 0;
        for s in 0..n {
            if counted[s] {
                continue;
            }
            // s is in a closed class iff everything it reaches reaches back.
            let closed = (0..n).all(|t| !reach[s][t] || reach[t][s]);
            if closed {
                classes += 1;
                for t in 0..n {
                    if reach[s][t] {
                        counted[t] = true;
                    }
                }
            }
        }
        classes
    }
}
