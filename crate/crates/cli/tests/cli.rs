use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scstat::config;
use scstat_core::dynamics::trajectory;
use scstat_core::models::{ModelSpec, UtilitySpec};
use scstat_core::structure::assumption1_check;
use scstat_core::{DiscreteDistribution, SolvedModel, SolverOptions};
use scstat::generate::SAVINGS_SIGMA;

fn scstat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scstat")).args(args).output().expect("binary runs")
}

fn generate(family: &str, count: usize, seed: u64, out: &Path) -> Vec<PathBuf> {
    let o = scstat(&["generate", family, &count.to_string(), "--seed", &seed.to_string(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut paths: Vec<PathBuf> = fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json") && !p.to_string_lossy().ends_with(".report.json"))
        .collect();
    paths.sort();
    paths
}

const TWO_BETAS: &str = r#"{
  "model": {
    "model": "randomwalk",
    "states": {"lo": 0, "hi": 9, "n": 10},
    "actions": {"points": [-2, -1, 0]},
    "reward": {"kind": "power", "scale": 0.2, "exponent": 2.0},
    "cost": {"kind": "linear", "slope": 1.0},
    "noise": [[-1, 0.5], [0, 0.5]],
    "beta": 0.9
  },
  "parameter": {"kind": "discount", "values": [0.9, 0.9]},
  "checks": ["parameter"]
}"#;

#[test]
fn identical_parameters_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("same.json");
    fs::write(&path, TWO_BETAS).unwrap();
    let o = scstat(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("report.json").exists());
    assert!(dir.path().join("trajectories.csv").exists());
}

#[test]
fn bad_discount_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, TWO_BETAS.replace("\"beta\": 0.9", "\"beta\": 1.5")).unwrap();
    let o = scstat(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.beta"));
}

#[test]
fn missing_file_is_a_config_error() {
    let o = scstat(&["run", "/nonexistent/scstat/config.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generation_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let pa = generate("assumption1-random", 1, 7, a.path());
    let pb = generate("assumption1-random", 1, 7, b.path());
    assert_eq!(pa.len(), 1);
    assert_eq!(fs::read(&pa[0]).unwrap(), fs::read(&pb[0]).unwrap());
}

fn without_timing(text: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn reruns_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate("savings-random", 1, 3, dir.path()).remove(0);
    let stem = path.file_stem().unwrap().to_str().unwrap().to_string();
    let csv = dir.path().join(format!("{stem}.csv"));
    let report = dir.path().join(format!("{stem}.report.json"));

    assert_eq!(scstat(&["run", path.to_str().unwrap()]).status.code(), Some(0));
    let csv1 = fs::read(&csv).unwrap();
    let rep1 = fs::read_to_string(&report).unwrap();
    assert_eq!(scstat(&["--jobs", "2", "run", path.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(csv1, fs::read(&csv).unwrap());
    assert_eq!(without_timing(&rep1), without_timing(&fs::read_to_string(&report).unwrap()));
}

fn read_rows(path: &Path) -> Vec<(usize, usize, f64, f64)> {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,param_id,expected_decision,mean_state"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}

#[test]
fn csv_matches_direct_computation() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate("randomwalk-random", 1, 11, dir.path()).remove(0);
    let o = scstat(&["--horizon", "12", "run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let stem = path.file_stem().unwrap().to_str().unwrap();
    let rows = read_rows(&dir.path().join(format!("{stem}.csv")));

    let cfg = config::load(&path).unwrap();
    let specs = cfg.variant_specs().unwrap();
    assert_eq!(rows.len(), 12 * specs.len());
    for (k, spec) in specs.iter().enumerate() {
        let options = SolverOptions {
            eps: cfg.solver.eps,
            argmax_tol: cfg.solver.argmax_tol,
            max_iter: cfg.solver.max_iter,
        };
        let m = SolvedModel::solve(spec.build().unwrap(), &options).unwrap();
        let states = m.model.states().clone();
        let mu = DiscreteDistribution::point_mass(states.clone(), states.min_index());
        let tr = trajectory(m.induced(), m.policy(), &mu, 12).unwrap();
        for (t, row) in rows.iter().filter(|r| r.1 == k).enumerate() {
            assert_eq!(row.0, t + 1);
            assert_eq!(row.2.to_bits(), tr.expected_decision[t].to_bits(), "t {} param {k}", t + 1);
            assert_eq!(row.3.to_bits(), tr.mean_state[t].to_bits());
        }
    }
}

#[test]
fn savings_parameters_stay_in_range() {
    let dir = tempfile::tempdir().unwrap();
    let paths = generate("savings-random", 5, 1, dir.path());
    assert_eq!(paths.len(), 5);
    for p in paths {
        let cfg = config::load(&p).unwrap();
        let ModelSpec::Savings(s) = &cfg.model else { panic!("not a savings model") };
        let UtilitySpec::Crra { sigma } = s.utility else { panic!("not CRRA") };
        assert!((SAVINGS_SIGMA.0..=SAVINGS_SIGMA.1).contains(&sigma));
        assert_eq!(cfg.seed, Some(1));
    }
}

#[test]
fn generated_assumption1_instance_holds() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate("assumption1-random", 1, 19, dir.path()).remove(0);
    let cfg = config::load(&path).unwrap();
    let report = assumption1_check(&cfg.model.build().unwrap(), 1e-9).unwrap();
    assert!(report.first_failure().is_none(), "{:?}", report.first_failure());
}

#[test]
fn shifted_noise_raises_expected_decisions() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate("randomwalk-random", 1, 4, dir.path()).remove(0);
    let o = scstat(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stem = path.file_stem().unwrap().to_str().unwrap();
    let rows = read_rows(&dir.path().join(format!("{stem}.csv")));
    let e1: Vec<f64> = rows.iter().filter(|r| r.1 == 0).map(|r| r.2).collect();
    let e2: Vec<f64> = rows.iter().filter(|r| r.1 == 1).map(|r| r.2).collect();
    assert_eq!(e1.len(), e2.len());
    for (a, b) in e1.iter().zip(&e2) {
        assert!(b + 1e-9 >= *a, "{b} < {a}");
    }
}
