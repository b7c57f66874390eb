//! Instance builders and brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scstat_core::orders::{StochasticOrder, TestFunction};
use scstat_core::{Grid, InducedKernel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_grid(n: usize) -> Grid {
    Grid::uniform(0.0, (n - 1) as f64, n).unwrap()
}

pub fn weights(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| r.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Probability vector where roughly half of the entries are zero.
pub fn sparse_weights(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| if r.gen_bool(0.5) { r.gen_range(0.05..1.0) } else { 0.0 }).collect();
    if w.iter().all(|&x| x == 0.0) {
        w[r.gen_range(0..n)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

fn survival(row: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; row.len() + 1];
    for k in (0..row.len()).rev() {
        s[k] = s[k + 1] + row[k];
    }
    s
}

fn from_survival(s: &[f64]) -> Vec<f64> {
    (0..s.len() - 1).map(|k| s[k] - s[k + 1]).collect()
}

/// Row-stochastic `n × n` matrix whose rows increase in first-order dominance.
pub fn monotone_chain(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * n);
    let mut run = vec![0.0; n + 1];
    for _ in 0..n {
        let s = survival(&sparse_weights(r, n));
        for k in 0..=n {
            run[k] = f64::max(run[k], s[k]);
        }
        out.extend(from_survival(&run));
    }
    out
}

/// A monotone chain whose rows dominate the rows of `base`.
pub fn dominating_chain(r: &mut ChaCha8Rng, base: &[f64], n: usize) -> Vec<f64> {
    let other = monotone_chain(r, n);
    let mut out = Vec::with_capacity(n * n);
    for s in 0..n {
        let a = survival(&base[s * n..(s + 1) * n]);
        let b = survival(&other[s * n..(s + 1) * n]);
        let m: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect();
        out.extend(from_survival(&m));
    }
    out
}

/// `μ¹ = δ_s, …, μᵀ` by explicit vector-matrix products.
pub fn forward(p: &InducedKernel, s: usize, horizon: usize) -> Vec<Vec<f64>> {
    let n = p.len();
    let mut mu = vec![0.0; n];
    mu[s] = 1.0;
    let mut out = vec![mu.clone()];
    for _ in 1..horizon {
        let mut next = vec![0.0; n];
        for i in 0..n {
            if mu[i] != 0.0 {
                for (j, q) in p.row(i).iter().enumerate() {
                    next[j] += mu[i] * q;
                }
            }
        }
        mu = next;
        out.push(mu.clone());
    }
    out
}

pub fn dot(f: &[f64], mu: &[f64]) -> f64 {
    f.iter().zip(mu).map(|(a, b)| a * b).sum()
}

/// `𝔼ᵗ` of `g` from every initial state, indexed `[start][t]`.
pub fn expected_oracle(p: &InducedKernel, g: &[f64], horizon: usize) -> Vec<Vec<f64>> {
    (0..p.len()).map(|s| forward(p, s, horizon).iter().map(|mu| dot(g, mu)).collect()).collect()
}

/// Largest `μ₁(U) − μ₂(U)` over sets `{x ≥ x_k}`.
pub fn st_shortfall(mu2: &[f64], mu1: &[f64]) -> f64 {
    (0..mu2.len())
        .map(|k| mu1[k..].iter().sum::<f64>() - mu2[k..].iter().sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

fn hinge_mean(points: &[f64], mu: &[f64], k: f64) -> f64 {
    points.iter().zip(mu).map(|(x, p)| p * (x - k).max(0.0)).sum()
}

/// Largest shortfall of `μ₂` against `μ₁` over the mean and all grid hinges.
pub fn icx_shortfall(points: &[f64], mu2: &[f64], mu1: &[f64]) -> f64 {
    let mean = dot(points, mu1) - dot(points, mu2);
    points.iter().map(|&k| hinge_mean(points, mu1, k) - hinge_mean(points, mu2, k)).fold(mean, f64::max)
}

fn upper_sets(n1: usize, n2: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n1: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n1 {
            out.push(cur.clone());
            return;
        }
        for t in 0..=cap {
            cur.push(t);
            rec(i + 1, n1, t, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n1, n2, &mut Vec::new(), &mut out);
    out
}

fn indicator(grid: &Grid, thresholds: &[usize]) -> Vec<f64> {
    (0..grid.len())
        .map(|s| {
            let c = grid.coords(s);
            let hit = if grid.dim() == 1 { c[0] >= thresholds[0] } else { c[1] >= thresholds[c[0]] };
            if hit {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Exhaustive comparison over the extreme rays of the order's test cone.
pub fn brute_force_shortfall(grid: &Grid, order: StochasticOrder, mu2: &[f64], mu1: &[f64]) -> f64 {
    if grid.dim() == 2 {
        assert_eq!(order, StochasticOrder::St);
        return upper_sets(grid.axis(0).len(), grid.axis(1).len())
            .iter()
            .map(|t| {
                let f = indicator(grid, t);
                dot(&f, mu1) - dot(&f, mu2)
            })
            .fold(f64::NEG_INFINITY, f64::max);
    }
    let pts = grid.points();
    match order {
        StochasticOrder::St => st_shortfall(mu2, mu1),
        StochasticOrder::Cx => {
            let gap = (dot(pts, mu2) - dot(pts, mu1)).abs();
            pts.iter().map(|&k| hinge_mean(pts, mu1, k) - hinge_mean(pts, mu2, k)).fold(gap, f64::max)
        }
        StochasticOrder::Icx => icx_shortfall(pts, mu2, mu1),
    }
}

/// The function a witness names, tabulated on the grid.
pub fn witness_function(grid: &Grid, test: &TestFunction) -> Vec<f64> {
    if let TestFunction::UpperSet { thresholds } = test {
        return indicator(grid, thresholds);
    }
    let pts = grid.points();
    match test {
        TestFunction::Hinge { knot } => pts.iter().map(|x| (x - pts[*knot]).max(0.0)).collect(),
        TestFunction::Mean | TestFunction::Identity => pts.to_vec(),
        TestFunction::NegatedIdentity => pts.iter().map(|x| -x).collect(),
        other => panic!("unexpected witness {other:?}"),
    }
}

fn random_upper_set(r: &mut ChaCha8Rng, n1: usize, n2: usize) -> Vec<usize> {
    let mut cap = n2;
    (0..n1)
        .map(|_| {
            cap = r.gen_range(0..=cap);
            cap
        })
        .collect()
}

/// A random member of the order's test family.
pub fn random_test_function(r: &mut ChaCha8Rng, grid: &Grid, order: StochasticOrder) -> Vec<f64> {
    let n = grid.len();
    if grid.dim() == 2 {
        let (n1, n2) = (grid.axis(0).len(), grid.axis(1).len());
        let mut f = vec![r.gen_range(-1.0..1.0); n];
        for _ in 0..r.gen_range(1..=4) {
            let w = r.gen_range(0.0..1.0);
            let u = indicator(grid, &random_upper_set(r, n1, n2));
            f.iter_mut().zip(&u).for_each(|(x, y)| *x += w * y);
        }
        return f;
    }
    let pts = grid.points();
    match order {
        StochasticOrder::St => {
            let mut x = r.gen_range(-1.0..1.0);
            (0..n)
                .map(|_| {
                    if r.gen_bool(0.5) {
                        x += r.gen_range(0.0..1.0);
                    }
                    x
                })
                .collect()
        }
        StochasticOrder::Cx | StochasticOrder::Icx => {
            let increasing = order == StochasticOrder::Icx;
            if r.gen_bool(0.5) {
                let b = if increasing { r.gen_range(0.0..1.0) } else { r.gen_range(-2.0..2.0) };
                let a = r.gen_range(-1.0..1.0);
                let knots: Vec<(f64, f64)> =
                    pts.iter().filter_map(|&k| r.gen_bool(0.3).then(|| k)).collect::<Vec<_>>().into_iter().map(|k| (k, r.gen_range(0.0..1.0))).collect();
                pts.iter().map(|&x| a + b * x + knots.iter().map(|&(k, c)| c * (x - k).max(0.0)).sum::<f64>()).collect()
            } else {
                let lines: Vec<(f64, f64)> = (0..r.gen_range(1..=5))
                    .map(|_| (r.gen_range(-1.0..1.0), if increasing { r.gen_range(0.0..2.0) } else { r.gen_range(-2.0..2.0) }))
                    .collect();
                pts.iter().map(|&x| lines.iter().map(|&(a, b)| a + b * x).fold(f64::NEG_INFINITY, f64::max)).collect()
            }
        }
    }
}

fn push_up_1d(r: &mut ChaCha8Rng, mu: &[f64]) -> Vec<f64> {
    let n = mu.len();
    let mut out = vec![0.0; n];
    for (i, &m) in mu.iter().enumerate() {
        if r.gen_bool(0.5) {
            out[r.gen_range(i..n)] += m;
        } else {
            out[i] += m;
        }
    }
    out
}

/// Seeded pairs `(grid, μ₂, μ₁)` cycling through dominating, spread,
/// unrelated and 2-D cases.
pub fn distribution_pair(r: &mut ChaCha8Rng, case: u64) -> (Grid, Vec<f64>, Vec<f64>) {
    match case % 4 {
        0 => {
            let n = r.gen_range(2..=50);
            let grid = if r.gen_bool(0.5) {
                uniform_grid(n)
            } else {
                let mut x = 0.0;
                Grid::new((0..n).map(|_| {
                    x += r.gen_range(0.1..2.0);
                    x
                }).collect())
                .unwrap()
            };
            let mu1 = sparse_weights(r, n);
            let mu2 = push_up_1d(r, &mu1);
            (grid, mu2, mu1)
        }
        1 => {
            let n = r.gen_range(3..=50);
            let grid = uniform_grid(n);
            let mut mu1 = weights(r, n);
            mu1[0] = 0.0;
            mu1[n - 1] = 0.0;
            let total: f64 = mu1.iter().sum();
            mu1.iter_mut().for_each(|x| *x /= total);
            let mut mu2 = mu1.clone();
            for _ in 0..r.gen_range(1..=5) {
                let j = r.gen_range(1..n - 1);
                let d = mu2[j] * r.gen_range(0.0..1.0) / 2.0;
                mu2[j] -= 2.0 * d;
                mu2[j - 1] += d;
                mu2[j + 1] += d;
            }
            if case % 8 == 5 {
                mu2 = push_up_1d(r, &mu2);
            }
            (grid, mu2, mu1)
        }
        2 => {
            let n = r.gen_range(2..=50);
            (uniform_grid(n), sparse_weights(r, n), sparse_weights(r, n))
        }
        _ => {
            let (n1, n2) = (r.gen_range(2..=7), r.gen_range(2..=7));
            let grid = Grid::product(
                (0..n1).map(|i| i as f64).collect(),
                (0..n2).map(|j| j as f64).collect(),
            )
            .unwrap();
            let mu1 = sparse_weights(r, n1 * n2);
            let mu2 = if r.gen_bool(0.5) {
                let mut out = vec![0.0; n1 * n2];
                for (s, &m) in mu1.iter().enumerate() {
                    let c = grid.coords(s);
                    let t = grid.index([r.gen_range(c[0]..n1), r.gen_range(c[1]..n2)]);
                    out[t] += m;
                }
                out
            } else {
                sparse_weights(r, n1 * n2)
            };
            (grid, mu2, mu1)
        }
    }
}
