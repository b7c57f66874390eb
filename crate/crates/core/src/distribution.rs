use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::MASS_TOL;

/// A probability vector over the points of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DiscreteDistribution {
    grid: Grid,
    mass: Vec<f64>,
}

pub(crate) fn validate_mass(mass: &[f64]) -> core::result::Result<(), alloc::string::String> {
    if let Some(i) = mass.iter().position(|m| !m.is_finite() || *m < 0.0) {
        return Err(format!("mass[{i}] = {} is not a nonnegative number", mass[i]));
    }
    let total: f64 = mass.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(format!("masses sum to {total}, not 1"));
    }
    Ok(())
}

impl DiscreteDistribution {
    pub fn new(grid: Grid, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != grid.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} masses for a grid of {} points",
                mass.len(),
                grid.len()
            )));
        }
        validate_mass(&mass).map_err(Error::InvalidDistribution)?;
        Ok(Self { grid, mass })
    }

    /// Builds a distribution from atoms `(point, probability)` on a fresh 1-D grid.
    /// Repeated points are merged.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let mut sorted: Vec<(f64, f64)> = atoms.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut mass: Vec<f64> = Vec::with_capacity(sorted.len());
        for (x, p) in sorted {
            match points.last() {
                Some(&last) if last == x => *mass.last_mut().unwrap() += p,
                _ => {
                    points.push(x);
                    mass.push(p);
                }
            }
        }
        Self::new(Grid::new(points)?, mass)
    }

    pub fn point_mass(grid: Grid, index: usize) -> Self {
        let mut mass = vec![0.0; grid.len()];
        mass[index] = 1.0;
        Self { grid, mass }
    }

    pub fn uniform(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            mass: vec![1.0 / n as f64; n],
        }
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_parts_unchecked(grid: Grid, mass: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), mass.len());
        Self { grid, mass }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn into_mass(self) -> Vec<f64> {
        self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// `Σ f(x) μ(x)` for `f` given by its values on the grid.
    pub fn expect(&self, f: &[f64]) -> f64 {
        self.mass.iter().zip(f).map(|(m, v)| m * v).sum()
    }

    /// Mean of coordinate `k`.
    pub fn mean_along(&self, k: usize) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(i, m)| m * self.grid.value(i, k))
            .sum()
    }

    /// Mean of the first coordinate.
    pub fn mean(&self) -> f64 {
        self.mean_along(0)
    }

    /// Total variation distance `½ Σ |μ − ν|` on a common grid.
    pub fn total_variation(&self, other: &Self) -> f64 {
        0.5 * self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    /// `P(X ≥ x_k)` for every index of a 1-D grid, plus a trailing 0.
    pub fn survival(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.mass.len() + 1];
        for k in (0..self.mass.len()).rev() {
            out[k] = out[k + 1] + self.mass[k];
        }
        out
    }

    /// Stop-loss transform `E[(X − x_k)⁺]` at every point of a 1-D grid.
    pub fn stop_loss(&self) -> Vec<f64> {
        stop_loss(self.grid.points(), &self.mass)
    }
}

/// `E[(X − t_k)⁺]` for each knot `t_k` of `points`, by the backward recursion
/// `π(t_k) = π(t_{k+1}) + (t_{k+1} − t_k) P(X ≥ t_{k+1})`.
pub(crate) fn stop_loss(points: &[f64], mass: &[f64]) -> Vec<f64> {
    let n = points.len();
    let mut out = vec![0.0; n];
    let mut tail = 0.0;
    for k in (0..n.saturating_sub(1)).rev() {
        tail += mass[k + 1];
        out[k] = out[k + 1] + (points[k + 1] - points[k]) * tail;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g3() -> Grid {
        Grid::new(vec![0.0, 1.0, 2.0]).unwrap()
    }

    #[test]
    fn validates_mass() {
        assert!(DiscreteDistribution::new(g3(), vec![0.5, 0.5, 0.0]).is_ok());
        assert!(DiscreteDistribution::new(g3(), vec![0.5, 0.6, -0.1]).is_err());
        assert!(DiscreteDistribution::new(g3(), vec![0.5, 0.4, 0.0]).is_err());
        assert!(DiscreteDistribution::new(g3(), vec![1.0]).is_err());
    }

    #[test]
    fn from_atoms_merges_and_sorts() {
        let d = DiscreteDistribution::from_atoms(&[(1.0, 0.25), (-1.0, 0.5), (1.0, 0.25)]).unwrap();
        assert_eq!(d.grid().points(), &[-1.0, 1.0]);
        assert_eq!(d.mass(), &[0.5, 0.5]);
        assert_eq!(d.mean(), 0.0);
    }

    #[test]
    fn stop_loss_matches_direct_sum() {
        let d = DiscreteDistribution::new(Grid::new(vec![0.0, 0.5, 2.0, 3.0]).unwrap(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let pts = d.grid().points().to_vec();
        for (k, v) in d.stop_loss().iter().enumerate() {
            let direct: f64 = pts
                .iter()
                .zip(d.mass())
                .map(|(x, m)| m * (x - pts[k]).max(0.0))
                .sum();
            assert!((v - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn total_variation_of_disjoint_point_masses() {
        let a = DiscreteDistribution::point_mass(g3(), 0);
        let b = DiscreteDistribution::point_mass(g3(), 2);
        assert_eq!(a.total_variation(&b), 1.0);
        assert_eq!(a.total_variation(&a), 0.0);
    }
}
