//! Ordered finite grids for states and actions.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest supported product dimension.
pub const MAX_DIM: usize = 2;

#[derive(Debug, PartialEq)]
struct Axes {
    axes: Vec<Vec<f64>>,
    len: usize,
}

/// A strictly increasing 1-D grid, or the lexicographic product of two of them.
///
/// Index `i` of a product grid maps to coordinates `(i / n1, i % n1)` where
/// `n1` is the length of the second axis. Cloning is cheap.
#[derive(Debug, Clone)]
pub struct Grid(Arc<Axes>);

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

fn check_axis(points: &[f64]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidGrid("axis must have at least one point".into()));
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidGrid(format!("non-finite grid point {p}")));
    }
    if let Some(w) = points.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid(format!(
            "points must be strictly increasing (index {} -> {})",
            w,
            w + 1
        )));
    }
    Ok(())
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        Self::from_axes(alloc::vec![points])
    }

    pub fn product(first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        Self::from_axes(alloc::vec![first, second])
    }

    pub fn from_axes(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "grids must have 1 to {MAX_DIM} axes, got {}",
                axes.len()
            )));
        }
        for axis in &axes {
            check_axis(axis)?;
        }
        let len = axes.iter().map(Vec::len).product();
        Ok(Grid(Arc::new(Axes { axes, len })))
    }

    /// `n` equally spaced points from `lo` to `hi` inclusive.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidGrid(format!("need lo < hi, got {lo} >= {hi}")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n}")));
        }
        Self::new(uniform_points(lo, hi, n))
    }

    pub fn dim(&self) -> usize {
        self.0.axes.len()
    }

    pub fn len(&self) -> usize {
        self.0.len
    }

    pub fn is_empty(&self) -> bool {
        self.0.len == 0
    }

    pub fn axis(&self, k: usize) -> &[f64] {
        &self.0.axes[k]
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.0.axes
    }

    /// Axis lengths.
    pub fn shape(&self) -> [usize; 2] {
        match self.dim() {
            1 => [self.0.axes[0].len(), 1],
            _ => [self.0.axes[0].len(), self.0.axes[1].len()],
        }
    }

    /// The points of a 1-D grid.
    ///
    /// # Panics
    /// If the grid is a product grid.
    pub fn points(&self) -> &[f64] {
        assert_eq!(self.dim(), 1, "points() requires a 1-D grid");
        &self.0.axes[0]
    }

    /// Coordinates of index `i`; the second entry is 0 on 1-D grids.
    pub fn coords(&self, i: usize) -> [usize; 2] {
        match self.dim() {
            1 => [i, 0],
            _ => {
                let n1 = self.0.axes[1].len();
                [i / n1, i % n1]
            }
        }
    }

    pub fn index(&self, coords: [usize; 2]) -> usize {
        match self.dim() {
            1 => coords[0],
            _ => coords[0] * self.0.axes[1].len() + coords[1],
        }
    }

    /// Value of coordinate `k` at index `i`.
    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.0.axes[k][self.coords(i)[k]]
    }

    /// Index of the neighbour one step up along axis `k`, if any.
    pub fn step_up(&self, i: usize, k: usize) -> Option<usize> {
        let mut c = self.coords(i);
        if c[k] + 1 >= self.0.axes[k].len() {
            return None;
        }
        c[k] += 1;
        Some(self.index(c))
    }

    /// Coordinatewise `a <= b`.
    pub fn leq(&self, a: usize, b: usize) -> bool {
        let (ca, cb) = (self.coords(a), self.coords(b));
        ca[0] <= cb[0] && ca[1] <= cb[1]
    }

    /// Index of a 1-D grid point equal to `x`, if present.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if self.dim() != 1 {
            return None;
        }
        self.points().iter().position(|&p| p == x)
    }

    pub fn min_index(&self) -> usize {
        0
    }

    pub fn max_index(&self) -> usize {
        self.len() - 1
    }
}

pub(crate) fn uniform_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

#[cfg(feature = "serde")]
impl serde::Serialize for Grid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        self.0.axes.serialize(s)
    }
}
