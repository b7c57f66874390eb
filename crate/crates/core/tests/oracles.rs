use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use scstat_core::orders::{cx_compare, fosd_compare, icx_compare};
use scstat_core::stationary::stationary_extremes;
use scstat_core::structure::assumption1_check;
use scstat_core::{DiscreteDistribution, Grid, InducedKernel, Kernel, MdpModel, SolvedModel, SolverOptions};

fn normalize(w: &mut [f64]) {
    let t: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= t);
}

fn random_model() -> impl Strategy<Value = MdpModel> {
    (2usize..6, 1usize..4, 0.1f64..0.95).prop_flat_map(|(ns, na, beta)| {
        (
            proptest::collection::vec(-5.0f64..5.0, ns * na),
            proptest::collection::vec(0.01f64..1.0, ns * na * ns),
        )
            .prop_map(move |(r, mut probs)| {
                probs.chunks_mut(ns).for_each(normalize);
                let s = Grid::uniform(0.0, 1.0, ns).unwrap();
                let a = if na == 1 { Grid::new(vec![0.0]).unwrap() } else { Grid::uniform(0.0, 1.0, na).unwrap() };
                let k = Kernel::new(s, a, vec![true; ns * na], probs).unwrap();
                MdpModel::new(k, r, beta).unwrap()
            })
    })
}

fn policy_value(m: &MdpModel, policy: &[usize]) -> DVector<f64> {
    let ns = m.n_states();
    let mut a = DMatrix::<f64>::identity(ns, ns);
    let mut b = DVector::<f64>::zeros(ns);
    for s in 0..ns {
        let row = m.kernel().row(s, policy[s]).unwrap();
        for t in 0..ns {
            a[(s, t)] -= m.beta() * row[t];
        }
        b[s] = m.reward(s, policy[s]);
    }
    a.lu().solve(&b).unwrap()
}

fn best_over_policies(m: &MdpModel) -> Vec<f64> {
    let (ns, na) = (m.n_states(), m.n_actions());
    let mut best = vec![f64::NEG_INFINITY; ns];
    let mut policy = vec![0usize; ns];
    'outer: loop {
        let v = policy_value(m, &policy);
        for s in 0..ns {
            best[s] = best[s].max(v[s]);
        }
        for k in 0..ns {
            policy[k] += 1;
            if policy[k] < na {
                continue 'outer;
            }
            policy[k] = 0;
        }
        return best;
    }
}

fn stationary_by_lu(p: &InducedKernel) -> Vec<f64> {
    let n = p.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(j, i)] = p.row(i)[j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    a.lu().solve(&b).unwrap().iter().copied().collect()
}

/// Rows that rise in the first-order sense as the action index grows.
fn rising_rows(base: &[f64], ns: usize, na: usize, push: &[f64]) -> Vec<f64> {
    let mut rows = Vec::with_capacity(na * ns);
    let mut cur = base.to_vec();
    for a in 0..na {
        if a > 0 {
            for t in 0..ns - 1 {
                let moved = cur[t] * push[(a * ns + t) % push.len()];
                cur[t] -= moved;
                cur[t + 1] += moved;
            }
        }
        rows.extend_from_slice(&cur);
    }
    rows
}

fn structured_model() -> impl Strategy<Value = MdpModel> {
    (3usize..8, 2usize..5, 0.2f64..0.95).prop_flat_map(|(ns, na, beta)| {
        (
            proptest::collection::vec(0.0f64..1.0, ns),
            proptest::collection::vec(0.0f64..1.0, na),
            proptest::collection::vec(0.0f64..1.0, ns),
            proptest::collection::vec(0.0f64..1.0, na),
            proptest::collection::vec(0.05f64..1.0, ns),
            proptest::collection::vec(0.0f64..0.9, ns * na),
        )
            .prop_map(move |(df, dh, du, dc, mut base, push)| {
                let cum = |d: &[f64]| d.iter().scan(0.0, |acc, x| { *acc += x; Some(*acc) }).collect::<Vec<f64>>();
                let (f, h, u, c) = (cum(&df), cum(&dh), cum(&du), cum(&dc));
                normalize(&mut base);
                let rows = rising_rows(&base, ns, na, &push);
                let mut probs = Vec::with_capacity(ns * na * ns);
                for _ in 0..ns {
                    probs.extend_from_slice(&rows);
                }
                let reward: Vec<f64> = (0..ns)
                    .flat_map(|s| (0..na).map(move |a| (s, a)))
                    .map(|(s, a)| f[s] * h[a] + u[s] - 0.5 * c[a])
                    .collect();
                let s = Grid::uniform(0.0, 1.0, ns).unwrap();
                let a = Grid::uniform(0.0, 1.0, na).unwrap();
                let k = Kernel::new(s, a, vec![true; ns * na], probs).unwrap();
                MdpModel::new(k, reward, beta).unwrap()
            })
    })
}

fn distribution(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..1.0, n).prop_map(|mut w| {
        w[0] += 1e-3;
        normalize(&mut w);
        w
    })
}

fn expect(points: &[f64], mass: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    points.iter().zip(mass).map(|(x, p)| f(*x) * p).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn value_matches_policy_enumeration(m in random_model()) {
        let sol = SolvedModel::solve(m.clone(), &SolverOptions::default()).unwrap();
        let oracle = best_over_policies(&m);
        for (v, o) in sol.solution.value.values().iter().zip(&oracle) {
            prop_assert!((v - o).abs() < 1e-8, "{v} vs {o}");
        }
    }

    #[test]
    fn stationary_matches_eigenvector(n in 2usize..9, w in proptest::collection::vec(0.01f64..1.0, 64)) {
        let mut probs: Vec<f64> = w[..n * n].to_vec();
        probs.chunks_mut(n).for_each(normalize);
        let p = InducedKernel::new(Grid::uniform(0.0, 1.0, n).unwrap(), probs).unwrap();
        let pair = stationary_extremes(&p, 1e-13, 100_000).unwrap();
        let lam = stationary_by_lu(&p);
        for x in [&pair.least, &pair.greatest] {
            for (a, b) in x.mass().iter().zip(&lam) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn structured_models_have_nondecreasing_policies(m in structured_model()) {
        let report = assumption1_check(&m, 1e-9).unwrap();
        prop_assert!(report.first_failure().is_none(), "{:?}", report.first_failure());
        let sol = SolvedModel::solve(m, &SolverOptions::default()).unwrap();
        let g = sol.policy().values();
        prop_assert!(g.windows(2).all(|w| w[1] >= w[0]), "{g:?}");
    }

    #[test]
    fn order_verdicts_agree_with_sampled_functions(
        n in 2usize..8,
        m1 in distribution(8),
        m2 in distribution(8),
        coeffs in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 40),
    ) {
        let grid = Grid::uniform(0.0, 1.0, n).unwrap();
        let trim = |m: &[f64]| { let mut v = m[..n].to_vec(); v[0] += 1e-3; normalize(&mut v); v };
        let (w1, w2) = (trim(&m1), trim(&m2));
        let mu1 = DiscreteDistribution::new(grid.clone(), w1.clone()).unwrap();
        let mu2 = DiscreteDistribution::new(grid.clone(), w2.clone()).unwrap();
        let x = grid.points();
        let st = fosd_compare(&mu2, &mu1, 1e-9).unwrap().holds;
        let cx = cx_compare(&mu2, &mu1, 1e-9).unwrap().holds;
        let icx = icx_compare(&mu2, &mu1, 1e-9).unwrap().holds;
        for (c, k) in &coeffs {
            let step = |y: f64| if y >= *k { 1.0 + c } else { *c * y };
            let hinge = |y: f64| (y - k).max(0.0) + c * y;
            let gap_step = expect(x, &w2, step) - expect(x, &w1, step);
            let gap_hinge = expect(x, &w2, hinge) - expect(x, &w1, hinge);
            if st {
                prop_assert!(gap_step >= -1e-8);
            }
            if icx || st {
                prop_assert!(gap_hinge >= -1e-8);
            }
            if cx {
                let conv = |y: f64| (y - k).abs() + c * (y - 0.5).powi(2);
                prop_assert!(expect(x, &w2, conv) - expect(x, &w1, conv) >= -1e-8);
            }
        }
        if st || cx {
            prop_assert!(icx);
        }
    }
}
