//! Upper sets of 1-D and 2-D grids.
//!
//! A grid is viewed as `cols × rows` with index `col * rows + row`: a 1-D grid
//! of `n` points is `1 × n`, a product grid is `|axis0| × |axis1|`. An upper set
//! is a staircase: column `i` contains the rows `≥ c[i]`, with `c`
//! nonincreasing in `i`. There are `C(cols + rows, cols)` of them.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::Grid;

/// Exact enumeration is used up to this many upper sets (a 12 × 12 grid has 2 704 156).
pub(crate) const EXACT_LIMIT: u128 = 2_704_156;
/// Staircases drawn when a grid is too large to enumerate.
pub(crate) const SAMPLE_COUNT: usize = 20_000;
const SAMPLE_SEED: u64 = 0x5eed_0f_5e75;

pub(crate) fn layout(grid: &Grid) -> (usize, usize) {
    match grid.dim() {
        1 => (1, grid.len()),
        _ => (grid.axis(0).len(), grid.axis(1).len()),
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
        if acc > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    acc
}

pub(crate) fn upper_set_count(grid: &Grid) -> u128 {
    let (cols, rows) = layout(grid);
    binomial((cols + rows) as u128, cols as u128)
}

/// Visits every upper set (or a deterministic sample when there are more than
/// [`EXACT_LIMIT`]). Returns `true` when the visit was sampled.
pub(crate) fn for_each_upper_set<F: FnMut(&[usize])>(grid: &Grid, mut visit: F) -> bool {
    let (cols, rows) = layout(grid);
    if upper_set_count(grid) <= EXACT_LIMIT {
        let mut c = vec![0usize; cols];
        descend(&mut c, 0, rows, &mut visit);
        false
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
        let mut c = vec![0usize; cols];
        // Single-row thresholds and single-column sets first, then random staircases.
        for k in 0..=rows {
            c.iter_mut().for_each(|x| *x = k);
            visit(&c);
        }
        for _ in 0..SAMPLE_COUNT {
            for x in c.iter_mut() {
                *x = rng.gen_range(0..=rows);
            }
            c.sort_unstable_by(|a, b| b.cmp(a));
            visit(&c);
        }
        true
    }
}

fn descend<F: FnMut(&[usize])>(c: &mut [usize], col: usize, cap: usize, visit: &mut F) {
    if col == c.len() {
        visit(c);
        return;
    }
    for k in 0..=cap {
        c[col] = k;
        descend(c, col + 1, k, visit);
    }
}

/// Per-column suffix sums of a set of vectors over a grid, so the mass of any
/// staircase is a sum of `cols` lookups.
pub(crate) struct Suffixes {
    cols: usize,
    rows: usize,
    data: Vec<f64>,
}

impl Suffixes {
    pub(crate) fn new<'a, I: IntoIterator<Item = &'a [f64]>>(grid: &Grid, vectors: I) -> Self {
        let (cols, rows) = layout(grid);
        let mut data = Vec::new();
        for v in vectors {
            for col in 0..cols {
                let start = data.len();
                data.resize(start + rows + 1, 0.0);
                for row in (0..rows).rev() {
                    data[start + row] = data[start + row + 1] + v[col * rows + row];
                }
            }
        }
        Self { cols, rows, data }
    }

    #[inline]
    pub(crate) fn mass(&self, vector: usize, c: &[usize]) -> f64 {
        let base = vector * self.cols * (self.rows + 1);
        c.iter()
            .enumerate()
            .map(|(col, &k)| self.data[base + col * (self.rows + 1) + k])
            .sum()
    }
}
