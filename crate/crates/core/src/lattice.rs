//! Real functions on finite product lattices and the shape checks run on them:
//! monotonicity, increasing differences and midpoint convexity.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::orders::{OrderVerdict, TestFunction, VerdictBuilder, Witness};

/// A table of values on the product of ordered axes, optionally masked.
///
/// Entries are stored lexicographically (last axis fastest). Masked-out
/// entries are ignored by every check.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeTable {
    axes: Vec<Vec<f64>>,
    strides: Vec<usize>,
    values: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl LatticeTable {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(Vec::is_empty) {
            return Err(Error::InvalidGrid("lattice axes must be nonempty".into()));
        }
        for axis in &axes {
            if axis.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidGrid("lattice axes must be strictly increasing".into()));
            }
        }
        let len: usize = axes.iter().map(Vec::len).product();
        if values.len() != len {
            return Err(Error::GridMismatch(format!(
                "{} values for a lattice of {} points",
                values.len(),
                len
            )));
        }
        let mut strides = vec![1; axes.len()];
        for k in (0..axes.len() - 1).rev() {
            strides[k] = strides[k + 1] * axes[k + 1].len();
        }
        Ok(Self {
            axes,
            strides,
            values,
            mask: None,
        })
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(axes: Vec<Vec<f64>>, f: F) -> Result<Self> {
        let len: usize = axes.iter().map(Vec::len).product();
        let mut t = Self::new(axes, vec![0.0; len])?;
        let mut point = vec![0.0; t.axes.len()];
        for i in 0..len {
            let c = t.coords(i);
            for (k, &ck) in c.iter().enumerate() {
                point[k] = t.axes[k][ck];
            }
            t.values[i] = f(&point);
        }
        Ok(t)
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.values.len() {
            return Err(Error::GridMismatch("mask length does not match the lattice".into()));
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, k: usize) -> &[f64] {
        &self.axes[k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coords(&self, mut i: usize) -> Vec<usize> {
        let mut c = vec![0; self.axes.len()];
        for (k, s) in self.strides.iter().enumerate() {
            c[k] = i / s;
            i %= s;
        }
        c
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.mask.as_ref().map_or(true, |m| m[i])
    }

    /// Index after moving `delta` steps along axis `k`, if inside the lattice.
    fn shift(&self, i: usize, k: usize, delta: isize) -> Option<usize> {
        let ck = (i / self.strides[k]) % self.axes[k].len();
        let target = ck as isize + delta;
        if target < 0 || target >= self.axes[k].len() as isize {
            return None;
        }
        Some((i as isize + delta * self.strides[k] as isize) as usize)
    }

    /// Next active index strictly above `i` along axis `k`.
    fn next_active(&self, i: usize, k: usize) -> Option<usize> {
        let mut j = self.shift(i, k, 1)?;
        loop {
            if self.is_active(j) {
                return Some(j);
            }
            j = self.shift(j, k, 1)?;
        }
    }

    fn point(&self, i: usize) -> Vec<f64> {
        self.coords(i)
            .iter()
            .enumerate()
            .map(|(k, &c)| self.axes[k][c])
            .collect()
    }
}

/// Nondecreasing along axis `k`, comparing each active entry with the next
/// active entry on the same line.
pub fn increasing_along(table: &LatticeTable, k: usize, tol: f64) -> OrderVerdict {
    let mut b = VerdictBuilder::new(tol);
    increasing_along_into(table, k, &mut b, &|| String::new());
    b.finish()
}

pub(crate) fn increasing_along_into(
    table: &LatticeTable,
    k: usize,
    b: &mut VerdictBuilder,
    detail: &dyn Fn() -> String,
) {
    for i in 0..table.len() {
        if !table.is_active(i) {
            continue;
        }
        if let Some(j) = table.next_active(i, k) {
            let shortfall = table.values[i] - table.values[j];
            b.record(shortfall, || Witness {
                test: TestFunction::Monotone { axis: k },
                at: [table.coords(i), table.coords(j)].concat(),
                magnitude: shortfall,
                detail: detail(),
            });
        }
    }
}

/// Nondecreasing along every axis.
pub fn increasing_check(table: &LatticeTable, tol: f64) -> OrderVerdict {
    let mut b = VerdictBuilder::new(tol);
    for k in 0..table.dims() {
        increasing_along_into(table, k, &mut b, &|| String::new());
    }
    b.finish()
}

pub(crate) fn increasing_differences_into(
    table: &LatticeTable,
    ki: usize,
    kj: usize,
    b: &mut VerdictBuilder,
    detail: &dyn Fn() -> String,
) {
    for x in 0..table.len() {
        let (Some(xi), Some(xj)) = (table.shift(x, ki, 1), table.shift(x, kj, 1)) else {
            continue;
        };
        let xij = table.shift(xi, kj, 1).expect("inside the lattice");
        if ![x, xi, xj, xij].iter().all(|&e| table.is_active(e)) {
            continue;
        }
        let v = &table.values;
        let shortfall = (v[xi] - v[x]) - (v[xij] - v[xj]);
        b.record(shortfall, || Witness {
            test: TestFunction::IncreasingDifferences { axes: [ki, kj] },
            at: table.coords(x),
            magnitude: shortfall,
            detail: detail(),
        });
    }
}

/// Increasing differences in the pair of axes `(ki, kj)` on adjacent pairs.
pub fn increasing_differences_in(table: &LatticeTable, ki: usize, kj: usize, tol: f64) -> OrderVerdict {
    let mut b = VerdictBuilder::new(tol);
    increasing_differences_into(table, ki, kj, &mut b, &|| String::new());
    b.finish()
}

/// Increasing differences in every pair of axes (supermodularity).
pub fn supermodularity_check(table: &LatticeTable, tol: f64) -> OrderVerdict {
    let mut b = VerdictBuilder::new(tol);
    for ki in 0..table.dims() {
        for kj in ki + 1..table.dims() {
            increasing_differences_into(table, ki, kj, &mut b, &|| String::new());
        }
    }
    b.finish()
}

/// Midpoint convexity along every axis and every two-axis diagonal. Triples
/// that are not collinear in value space (diagonals of nonuniform grids) are
/// skipped; the middle point is weighted by its position, so nonuniform axes
/// are handled exactly.
pub fn convexity_check(table: &LatticeTable, tol: f64) -> OrderVerdict {
    let mut b = VerdictBuilder::new(tol);
    convexity_into(table, &mut b, &|| String::new());
    b.finish()
}

pub(crate) fn convexity_into(table: &LatticeTable, b: &mut VerdictBuilder, detail: &dyn Fn() -> String) {
    let d = table.dims();
    let mut dirs: Vec<Vec<(usize, isize)>> = (0..d).map(|k| vec![(k, 1)]).collect();
    for ki in 0..d {
        for kj in ki + 1..d {
            dirs.push(vec![(ki, 1), (kj, 1)]);
            dirs.push(vec![(ki, 1), (kj, -1)]);
        }
    }
    convexity_dirs_into(table, &dirs, b, detail);
}

/// Midpoint convexity along axis `k` only.
pub fn convex_along(table: &LatticeTable, k: usize, tol: f64) -> OrderVerdict {
    let mut b = VerdictBuilder::new(tol);
    convexity_dirs_into(table, &[vec![(k, 1)]], &mut b, &|| String::new());
    b.finish()
}

fn convexity_dirs_into(
    table: &LatticeTable,
    dirs: &[Vec<(usize, isize)>],
    b: &mut VerdictBuilder,
    detail: &dyn Fn() -> String,
) {
    let step = |i: usize, dir: &[(usize, isize)], sign: isize| -> Option<usize> {
        dir.iter()
            .try_fold(i, |acc, &(k, delta)| table.shift(acc, k, delta * sign))
    };
    for mid in 0..table.len() {
        if !table.is_active(mid) {
            continue;
        }
        for dir in dirs {
            let (Some(lo), Some(hi)) = (step(mid, dir, -1), step(mid, dir, 1)) else {
                continue;
            };
            if !table.is_active(lo) || !table.is_active(hi) {
                continue;
            }
            let (pl, pm, ph) = (table.point(lo), table.point(mid), table.point(hi));
            let Some(weight_lo) = collinear_weight(&pl, &pm, &ph) else {
                continue;
            };
            let v = &table.values;
            let chord = weight_lo * v[lo] + (1.0 - weight_lo) * v[hi];
            let shortfall = v[mid] - chord;
            b.record(shortfall, || Witness {
                test: TestFunction::Convexity,
                at: [table.coords(lo), table.coords(mid), table.coords(hi)].concat(),
                magnitude: shortfall,
                detail: detail(),
            });
        }
    }
}

/// Weight `λ` with `mid = λ lo + (1 − λ) hi`, if the three points are collinear
/// with `mid` strictly between the others.
fn collinear_weight(lo: &[f64], mid: &[f64], hi: &[f64]) -> Option<f64> {
    let u: Vec<f64> = mid.iter().zip(lo).map(|(m, l)| m - l).collect();
    let w: Vec<f64> = hi.iter().zip(lo).map(|(h, l)| h - l).collect();
    let ww: f64 = w.iter().map(|x| x * x).sum();
    if ww == 0.0 {
        return None;
    }
    let t = u.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / ww;
    let off: f64 = u.iter().zip(&w).map(|(a, b)| (a - t * b) * (a - t * b)).sum();
    if off > 1e-18 * ww || !(t > 0.0 && t < 1.0) {
        return None;
    }
    Some(1.0 - t)
}
