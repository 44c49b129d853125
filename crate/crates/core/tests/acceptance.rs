//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;

use common::*;
use yieldnet::dataset::{split, split_indices, Dataset, Normalizer, SplitSpec};
use yieldnet::fixture::{default_fixture, synthetic_yield, CONDITION_RANGES};
use yieldnet::grnn::GrnnModel;
use yieldnet::harness::{repeated_trials, train_candidate, CandidateSpec, RuleChoice, SearchOptions};
use yieldnet::metrics::{rms_error, tolerance_accuracy};
use yieldnet::mlfn::{self, gradient, MlfnModel, TargetScaler, Topology, TrainConfig};
use yieldnet::persistence::{load_model, save_model, Provenance};
use yieldnet::svr::{svr_train_full, SvrConfig};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "GRNN kernel limits", budget: Some(Duration::from_secs(1)), run: grnn_kernel_limits },
        Criterion { id: 2, name: "GRNN range containment", budget: Some(Duration::from_secs(5)), run: grnn_range_containment },
        Criterion { id: 3, name: "MLFN gradient check", budget: Some(Duration::from_secs(10)), run: mlfn_gradient_check },
        Criterion { id: 4, name: "MLFN forward oracle", budget: None, run: mlfn_forward_oracle },
        Criterion { id: 5, name: "MLFN descent and determinism", budget: None, run: mlfn_descent_determinism },
        Criterion { id: 6, name: "SVR oracle equivalence", budget: Some(Duration::from_secs(10)), run: svr_oracle_equivalence },
        Criterion { id: 7, name: "SVR KKT audit", budget: None, run: svr_kkt_audit },
        Criterion { id: 8, name: "metrics exactness", budget: None, run: metrics_exactness },
        Criterion { id: 9, name: "split protocol", budget: None, run: split_protocol },
        Criterion { id: 10, name: "search end to end", budget: Some(Duration::from_secs(300)), run: search_end_to_end },
        Criterion { id: 11, name: "repeated-trials contrast", budget: None, run: repeated_trials_contrast },
        Criterion { id: 12, name: "persistence round trip", budget: None, run: persistence_round_trip },
        Criterion { id: 13, name: "CLI determinism matrix", budget: None, run: cli_determinism },
    ];

    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = match catch_unwind(AssertUnwindSafe(c.run)) {
            Ok(r) => r,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        let elapsed = start.elapsed();
        let result = match (result, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (r, _) => r,
        };
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} criterion {:>2} {} [{elapsed:.2?}]: {detail}", c.id, c.name);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn grnn_kernel_limits() -> Outcome {
    let mut r = rng(1);
    let rows = random_rows(&mut r, 50, 4, 0.0, 10.0);
    let ys: Vec<f64> = (0..50).map(|_| r.random_range(0.0..100.0)).collect();
    let ds = Dataset::from_rows(rows.clone(), ys.clone()).map_err(|e| e.to_string())?;

    let z = standardize(&rows);
    let mut min_sep = f64::INFINITY;
    for i in 0..50 {
        for j in 0..i {
            let d: f64 = z[i].iter().zip(&z[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            min_sep = min_sep.min(d.sqrt());
        }
    }
    ensure(min_sep > 1e-3, || format!("patterns not separated: {min_sep}"))?;

    let sharp = GrnnModel::fit(&ds, 1e-6).map_err(|e| e.to_string())?;
    let mut recall = 0.0f64;
    for (x, y) in rows.iter().zip(&ys) {
        recall = recall.max((sharp.predict(x).unwrap() - y).abs());
    }
    ensure(recall < 1e-6, || format!("recall error {recall}"))?;

    let flat = GrnnModel::fit(&ds, 1e9).map_err(|e| e.to_string())?;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut dev = 0.0f64;
    for _ in 0..20 {
        let q: Vec<f64> = (0..4).map(|_| r.random_range(-5.0..15.0)).collect();
        dev = dev.max((flat.predict(&q).unwrap() - mean).abs());
    }
    ensure(dev < 1e-6, || format!("deviation from mean {dev}"))?;
    Ok(format!("max recall error {recall:.1e}, max deviation from mean {dev:.1e}"))
}

fn grnn_range_containment() -> Outcome {
    let mut r = rng(2);
    let rows = random_rows(&mut r, 100, 4, -1.0, 1.0);
    let ys: Vec<f64> = (0..100).map(|_| r.random_range(-20.0..80.0)).collect();
    let (lo, hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &y| (l.min(y), h.max(y)));
    let ds = Dataset::from_rows(rows, ys).map_err(|e| e.to_string())?;
    let model = GrnnModel::fit(&ds, r.random_range(0.05..2.0)).map_err(|e| e.to_string())?;
    for k in 0..10_000 {
        let q: Vec<f64> = (0..4).map(|_| r.random_range(-3.0..3.0)).collect();
        let p = model.predict(&q).unwrap();
        ensure(p >= lo && p <= hi, || format!("query {k}: {p} outside [{lo}, {hi}]"))?;
    }
    Ok(format!("10000 queries within [{lo:.3}, {hi:.3}]"))
}

fn mlfn_gradient_check() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for case in 0..20u64 {
        let hidden = [2, 4, 10][case as usize % 3];
        let rows = random_rows(&mut r, 10, 4, 0.0, 10.0);
        let ys: Vec<f64> = (0..10).map(|_| r.random_range(0.0..100.0)).collect();
        let ds = Dataset::from_rows(rows, ys).unwrap();
        let model = MlfnModel::initialize(
            Topology::single_hidden(4, hidden).unwrap(),
            Normalizer::fit(&ds).unwrap(),
            TargetScaler::fit(ds.targets()).unwrap(),
            0.5,
            1000 + case,
        )
        .unwrap();
        let analytic = gradient(&model, &ds).unwrap();
        let numeric = finite_difference_gradient(&model, &ds, 1e-5);
        let err = max_relative_error(&analytic, &numeric, 1e-8);
        ensure(err < 1e-4, || format!("4-{hidden}-1 seed {}: relative error {err:e}", 1000 + case))?;
        worst = worst.max(err);
    }
    Ok(format!("worst relative error {worst:.2e} over 20 pairs"))
}

fn mlfn_forward_oracle() -> Outcome {
    let topo = Topology::single_hidden(4, 2).unwrap();
    let scaler = TargetScaler::from_parts(0.0, 100.0).unwrap();
    let mut m = MlfnModel::zeros(topo, Normalizer::identity(4), scaler).unwrap();
    m.set_params(&[0.1, -0.2, 0.3, -0.4, 0.5, 0.25, -0.125, 0.2, 0.05, -0.1, 0.7, -0.6, 0.15])
        .unwrap();
    let x = [1.0, 2.0, -1.0, 0.5];
    let f = |z: f64| 1.0 / (1.0 + (-z).exp());
    let h1 = f(0.05 + 0.1 * 1.0 - 0.2 * 2.0 + 0.3 * -1.0 - 0.4 * 0.5);
    let h2 = f(-0.1 + 0.5 * 1.0 + 0.25 * 2.0 - 0.125 * -1.0 + 0.2 * 0.5);
    let o = f(0.15 + 0.7 * h1 - 0.6 * h2);
    let expected = 100.0 * (o - 0.1) / 0.8;

    let fwd = m.forward(&x).map_err(|e| e.to_string())?;
    let errs = [
        (fwd.activations[1][0] - h1).abs(),
        (fwd.activations[1][1] - h2).abs(),
        (fwd.raw_output - o).abs(),
        (fwd.raw_output - 0.480_416_502_885_206_43).abs(),
        (fwd.output - expected).abs(),
        (fwd.output - 47.552_062_860_650_81).abs(),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    ensure(worst < 1e-12, || format!("deviation {worst:e}"))?;
    Ok(format!("output {:.15}, max deviation {worst:.1e}", fwd.output))
}

fn mlfn_descent_determinism() -> Outcome {
    let ds = default_fixture();
    let (train, _) = split(&ds, &SplitSpec::new(0.65, 42)).unwrap();
    for nodes in 2..=25 {
        let cfg = TrainConfig { seed: 7 + nodes as u64, ..TrainConfig::default() };
        let topo = Topology::single_hidden(4, nodes).unwrap();
        let a = mlfn::train(&topo, &train, &cfg).map_err(|e| e.to_string())?;
        ensure(a.final_objective <= a.initial_objective, || {
            format!("4-{nodes}-1: E went from {} to {}", a.initial_objective, a.final_objective)
        })?;
        let b = mlfn::train(&topo, &train, &cfg).map_err(|e| e.to_string())?;
        let same = a
            .model
            .params()
            .iter()
            .zip(b.model.params())
            .all(|(x, y)| x.to_bits() == y.to_bits());
        ensure(same && a.history.len() == b.history.len(), || format!("4-{nodes}-1: reruns differ"))?;
    }
    Ok("24 topologies descend; reruns bit-identical".into())
}

fn svr_oracle_equivalence() -> Outcome {
    let ds = svr_fixture_30();
    let cfg = SvrConfig { c: 10.0, epsilon: 0.1, gamma: 1.0, tol: 1e-6, ..SvrConfig::default() };
    let (model, sol) = svr_train_full(&ds, &cfg).map_err(|e| e.to_string())?;
    ensure(sol.converged, || "SMO did not converge".into())?;
    let oracle = svr_projected_gradient(ds.features(), ds.targets(), 10.0, 0.1, 1.0);
    let rel = (sol.objective - oracle.objective).abs() / oracle.objective.abs();
    ensure(rel < 1e-4, || format!("objective {} vs oracle {} (rel {rel:e})", sol.objective, oracle.objective))?;
    let z = standardize(ds.features());
    let mut worst = 0.0f64;
    for (x, zx) in ds.features().iter().zip(&z) {
        worst = worst.max((model.predict(x).unwrap() - oracle.predict_standardized(zx)).abs());
    }
    ensure(worst < 1e-3, || format!("prediction gap {worst:e}"))?;
    Ok(format!("objective rel gap {rel:.1e}, prediction gap {worst:.1e}"))
}

fn svr_kkt_audit() -> Outcome {
    let tol = 1e-3;
    let mut r = rng(7);
    let mut summary = Vec::new();
    for k in 0..5u64 {
        let n = r.random_range(30..80);
        let ds = synthetic_yield(n, 500 + k, 3.0).unwrap();
        let cfg = SvrConfig {
            c: [1.0, 10.0, 100.0][k as usize % 3],
            epsilon: r.random_range(0.05..2.0),
            gamma: r.random_range(0.05..1.0),
            ..SvrConfig::default()
        };
        let (model, sol) = svr_train_full(&ds, &cfg).map_err(|e| e.to_string())?;
        ensure(sol.converged, || format!("fixture {k}: not converged"))?;
        let c = cfg.c;
        let sum: f64 = sol.beta.iter().sum();
        ensure(sum.abs() < 1e-6, || format!("fixture {k}: sum of beta {sum:e}"))?;
        let mut violations = 0;
        for ((x, y), b) in ds.features().iter().zip(ds.targets()).zip(&sol.beta) {
            ensure(b.abs() <= c, || format!("fixture {k}: |beta| {} > C", b.abs()))?;
            let res = y - model.predict(x).unwrap();
            let eps = cfg.epsilon;
            let at_bound = b.abs() >= c * (1.0 - 1e-9);
            let ok = if b.abs() <= 1e-12 {
                res.abs() <= eps + tol
            } else if at_bound {
                res * b.signum() >= eps - tol
            } else {
                (res - eps * b.signum()).abs() <= tol
            };
            if !ok {
                violations += 1;
            }
        }
        ensure(violations == 0, || format!("fixture {k}: {violations} KKT violations"))?;
        summary.push(format!("n={n}"));
    }
    Ok(format!("no violations on 5 fixtures ({})", summary.join(", ")))
}

fn metrics_exactness() -> Outcome {
    let actual = [50.0, 10.0, 10.0, 12.0, 8.0];
    let predicted = [47.0, 6.0, 10.0, 17.0, 7.0];
    let rms = rms_error(&actual, &predicted).unwrap();
    let hand = (51.0f64 / 5.0).sqrt();
    ensure(rms == hand, || format!("rms {rms} vs {hand}"))?;
    // |e| <= 0.3|a|: 3<=15 yes, 4<=3 no, 0<=3 yes, 5<=3.6 no, 1<=2.4 yes
    let acc = tolerance_accuracy(&actual, &predicted, 0.30).unwrap();
    ensure(acc == 0.6, || format!("accuracy {acc}"))?;

    let mut r = rng(8);
    let a: Vec<f64> = (0..40).map(|_| r.random_range(1.0..100.0)).collect();
    let p: Vec<f64> = a.iter().map(|x| x + r.random_range(-30.0..30.0)).collect();
    let mut prev = -1.0;
    for i in 0..100 {
        let t = (i + 1) as f64 * 0.01;
        let v = tolerance_accuracy(&a, &p, t).unwrap();
        ensure(v >= prev, || format!("accuracy drops at tolerance {t}"))?;
        prev = v;
    }
    Ok(format!("rms {rms}, accuracy {acc}, monotone over 100 tolerances"))
}

fn split_protocol() -> Outcome {
    let spec = SplitSpec::new(0.65, 11);
    let s = split_indices(100, &spec).map_err(|e| e.to_string())?;
    ensure(s.train.len() == 65 && s.test.len() == 35, || format!("{}/{}", s.train.len(), s.test.len()))?;
    let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
    all.sort_unstable();
    ensure(all == (0..100).collect::<Vec<_>>(), || "not a disjoint cover of 0..100".into())?;
    ensure(split_indices(100, &spec).unwrap() == s, || "same seed gave another split".into())?;
    ensure(split_indices(100, &SplitSpec::new(0.65, 12)).unwrap() != s, || "seed ignored".into())?;
    Ok("65/35, disjoint, exhaustive, seed-deterministic".into())
}

fn cli(dir: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_yieldnet"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("yieldnet {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn search_end_to_end() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    cli(d, &["gen-fixture", "--out", "fixture.csv", "-q"])?;
    cli(d, &["search", "--data", "fixture.csv", "--mlfn-trials", "3", "-q"])?;
    let mut reader = csv::Reader::from_path(d.join("report.csv")).map_err(|e| e.to_string())?;
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (kind, rmse, status) = (col("kind"), col("mean_rmse"), col("status"));
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    ensure(rows.len() == 26, || format!("{} rows", rows.len()))?;
    ensure(rows.iter().all(|r| &r[status] == "ok"), || "some candidates failed".into())?;
    let values: Vec<f64> = rows.iter().map(|r| r[rmse].parse().unwrap()).collect();
    ensure(values.windows(2).all(|w| w[0] <= w[1]), || "report not sorted by mean RMSE".into())?;
    let of = |k: &str| -> Vec<f64> {
        rows.iter().zip(&values).filter(|(r, _)| &r[kind] == k).map(|(_, v)| *v).collect()
    };
    let worst_mlfn = of("MLFN").into_iter().fold(f64::NEG_INFINITY, f64::max);
    let (grnn, svr) = (of("GRNN")[0], of("SVR")[0]);
    ensure(of("MLFN").len() == 24, || "expected 24 MLFN rows".into())?;
    ensure(grnn < worst_mlfn && svr < worst_mlfn, || {
        format!("GRNN {grnn}, SVR {svr}, worst MLFN {worst_mlfn}")
    })?;
    Ok(format!("GRNN {grnn:.3}, SVR {svr:.3}, worst MLFN {worst_mlfn:.3}, leader {}", &rows[0][col("candidate")]))
}

fn repeated_trials_contrast() -> Outcome {
    let ds = default_fixture();
    let spec = SplitSpec::new(0.65, 42);
    let opts = SearchOptions { record_time: false, rule: RuleChoice::Relative, ..SearchOptions::default() };
    let g = repeated_trials(&ds, &CandidateSpec::grnn(), &spec, 10, &opts).map_err(|e| e.to_string())?;
    ensure(g.std == 0.0, || format!("GRNN std {}", g.std))?;
    let m = repeated_trials(&ds, &CandidateSpec::mlfn(4), &spec, 10, &opts).map_err(|e| e.to_string())?;
    let ratio = m.std / m.mean;
    ensure(ratio < 0.5, || format!("MLFN(4) std/mean {ratio}"))?;
    Ok(format!("GRNN std 0, MLFN(4) mean {:.3} std {:.3} (ratio {ratio:.3})", m.mean, m.std))
}

fn persistence_round_trip() -> Outcome {
    let ds = default_fixture();
    let (train, _) = split(&ds, &SplitSpec::new(0.65, 42)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(12);
    let queries: Vec<Vec<f64>> = (0..100)
        .map(|_| CONDITION_RANGES.iter().map(|&(lo, hi)| r.random_range(lo..=hi)).collect())
        .collect();
    for cand in [CandidateSpec::grnn(), CandidateSpec::svr(), CandidateSpec::mlfn(6)] {
        let model = train_candidate(&cand, &train, 99).map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("{}.model", cand.id()));
        save_model(&model, &Provenance::default(), &path).map_err(|e| e.to_string())?;
        let back = load_model(&path).map_err(|e| e.to_string())?.model;
        for q in &queries {
            let (a, b) = (model.predict(q).unwrap(), back.predict(q).unwrap());
            ensure(a.to_bits() == b.to_bits(), || format!("{}: {a} vs {b} at {q:?}", cand.id()))?;
        }
    }
    Ok("GRNN, SVR and MLFN bit-identical on 100 queries".into())
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().unwrap().is_file())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect()
}

/// Every subcommand once, writing into `dir`.
fn cli_session(dir: &Path, jobs: &str) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let run = |args: &[&str]| -> Result<(), String> {
        let mut all = vec!["--jobs", jobs, "-q"];
        all.extend_from_slice(args);
        let stdout = cli(dir, &all)?;
        let name = format!("stdout-{}.txt", args[0]);
        let mut prev = std::fs::read(dir.join(&name)).unwrap_or_default();
        prev.extend_from_slice(stdout.as_bytes());
        std::fs::write(dir.join(name), prev).map_err(|e| e.to_string())
    };
    run(&["gen-fixture", "--samples", "60", "--out", "fx.csv"])?;
    run(&["search", "--data", "fx.csv", "--nodes", "2..4", "--mlfn-trials", "2", "--epochs", "300"])?;
    run(&["train", "--data", "fx.csv", "--kind", "mlfn", "--nodes", "3", "--epochs", "300", "--out", "mlfn.model"])?;
    run(&["train", "--data", "fx.csv", "--kind", "svr", "--out", "svr.model"])?;
    run(&["train", "--data", "fx.csv", "--kind", "grnn", "--out", "grnn.model"])?;
    run(&["predict", "--model", "mlfn.model", "--data", "fx.csv", "--out", "pred_mlfn.csv"])?;
    run(&["predict", "--model", "svr.model", "--data", "fx.csv", "--out", "pred_svr.csv"])?;
    run(&["predict", "--model", "grnn.model", "--time-h", "6", "--temperature-c", "45", "--enzyme-mg", "30", "--molar-ratio", "3"])?;
    run(&["eval", "--model", "svr.model", "--data", "fx.csv", "--out", "eval_svr.csv"])?;
    run(&["sweep", "--data", "fx.csv", "--nodes", "2..4", "--trials", "2", "--epochs", "300"])?;
    run(&["trials", "--data", "fx.csv", "--kind", "mlfn", "--nodes", "3", "-n", "3", "--epochs", "300"])?;
    Ok(snapshot(dir))
}

fn cli_determinism() -> Outcome {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let first = cli_session(dirs[0].path(), "1")?;
    let again = cli_session(dirs[1].path(), "1")?;
    let wide = cli_session(dirs[2].path(), "4")?;
    for (label, other) in [("rerun", &again), ("--jobs 4", &wide)] {
        ensure(first.keys().eq(other.keys()), || format!("{label}: different file sets"))?;
        for (name, bytes) in &first {
            ensure(other[name] == *bytes, || format!("{label}: {name} differs"))?;
        }
    }
    Ok(format!("{} files byte-identical across reruns and job counts", first.len()))
}
