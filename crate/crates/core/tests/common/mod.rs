//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the solver or trainer under test; the oracles are
//! written from the defining formulas so they can disagree with it.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use yieldnet::dataset::Dataset;
use yieldnet::mlfn::MlfnModel;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Population z-score of every column, computed from scratch.
pub fn standardize(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n).collect();
    let std: Vec<f64> = (0..d)
        .map(|k| (rows.iter().map(|r| (r[k] - mean[k]).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    rows.iter()
        .map(|r| (0..d).map(|k| (r[k] - mean[k]) / std[k]).collect())
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Result of the projected-gradient dual solve.
pub struct OracleSvr {
    pub beta: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
    pub patterns: Vec<Vec<f64>>,
    pub gamma: f64,
}

impl OracleSvr {
    /// Prediction at an already standardized point.
    pub fn predict_standardized(&self, z: &[f64]) -> f64 {
        self.patterns
            .iter()
            .zip(&self.beta)
            .map(|(p, b)| b * (-self.gamma * sq_dist(p, z)).exp())
            .sum::<f64>()
            + self.bias
    }
}

/// Euclidean projection of `v` onto `{0 <= a <= c, sum z_i a_i = 0}` by
/// bisection on the multiplier of the equality constraint.
fn project(v: &[f64], z: &[f64], c: f64) -> Vec<f64> {
    let at = |lam: f64| -> Vec<f64> {
        v.iter()
            .zip(z)
            .map(|(vi, zi)| (vi - lam * zi).clamp(0.0, c))
            .collect()
    };
    let h = |lam: f64| -> f64 { at(lam).iter().zip(z).map(|(a, zi)| a * zi).sum() };
    let span = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    // h is non-increasing in lam
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Accelerated projected gradient on the doubled epsilon-SVR dual
/// `min 1/2 a'Qa + p'a` over the same feasible set SMO uses, run until
/// successive objectives differ by less than `1e-8` (relative).
pub fn svr_projected_gradient(
    raw_x: &[Vec<f64>],
    y: &[f64],
    c: f64,
    eps: f64,
    gamma: f64,
) -> OracleSvr {
    let pats = standardize(raw_x);
    let n = pats.len();
    let k: Vec<Vec<f64>> = pats
        .iter()
        .map(|a| pats.iter().map(|b| (-gamma * sq_dist(a, b)).exp()).collect())
        .collect();
    let l = 2 * n;
    let z: Vec<f64> = (0..l).map(|s| if s < n { 1.0 } else { -1.0 }).collect();
    let p: Vec<f64> = (0..l)
        .map(|s| if s < n { eps - y[s] } else { eps + y[s - n] })
        .collect();
    let kb = |a: &[f64]| -> Vec<f64> {
        let beta: Vec<f64> = (0..n).map(|i| a[i] - a[n + i]).collect();
        (0..n).map(|i| (0..n).map(|j| k[i][j] * beta[j]).sum()).collect()
    };
    let grad = |a: &[f64]| -> Vec<f64> {
        let kbeta = kb(a);
        (0..l).map(|s| z[s] * kbeta[s % n] + p[s]).collect()
    };
    let objective = |a: &[f64]| -> f64 {
        let kbeta = kb(a);
        let beta: Vec<f64> = (0..n).map(|i| a[i] - a[n + i]).collect();
        0.5 * beta.iter().zip(&kbeta).map(|(b, kb)| b * kb).sum::<f64>()
            + a.iter().zip(&p).map(|(a, p)| a * p).sum::<f64>()
    };

    // Lipschitz constant of the doubled Hessian: 2 * largest eigenvalue of K
    let mut v = vec![1.0; n];
    let mut lam = 0.0;
    for _ in 0..500 {
        let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| k[i][j] * v[j]).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        lam = norm;
        v = w.iter().map(|x| x / norm).collect();
    }
    let step = 1.0 / (2.0 * lam * 1.01);

    let mut a = vec![0.0; l];
    let mut yk = a.clone();
    let mut t = 1.0f64;
    let mut prev = objective(&a);
    let mut quiet = 0;
    for _ in 0..500_000 {
        let g = grad(&yk);
        let v: Vec<f64> = yk.iter().zip(&g).map(|(y, g)| y - step * g).collect();
        let next = project(&v, &z, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let f = objective(&next);
        // restart momentum when the objective goes up
        if f > prev {
            yk = a.clone();
            t = 1.0;
            continue;
        }
        yk = next
            .iter()
            .zip(&a)
            .map(|(x, xo)| x + (t - 1.0) / t_next * (x - xo))
            .collect();
        a = next;
        t = t_next;
        if (prev - f).abs() <= 1e-8 * f.abs().max(1e-12) {
            quiet += 1;
            if quiet >= 200 {
                prev = f;
                break;
            }
        } else {
            quiet = 0;
        }
        prev = f;
    }

    // bias from the free variables of the final point
    let g = grad(&a);
    let tiny = 1e-6 * c;
    let mut free = Vec::new();
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in 0..l {
        let yg = z[s] * g[s];
        if a[s] > tiny && a[s] < c - tiny {
            free.push(yg);
        } else {
            let at_upper = a[s] >= c - tiny;
            if (at_upper && z[s] < 0.0) || (!at_upper && z[s] > 0.0) {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        }
    }
    let rho = if free.is_empty() {
        0.5 * (ub + lb)
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    };
    OracleSvr {
        beta: (0..n).map(|i| a[i] - a[n + i]).collect(),
        bias: -rho,
        objective: prev,
        patterns: pats,
        gamma,
    }
}

/// The one-feature smooth set used for the SVR oracle comparison.
pub fn svr_fixture_30() -> Dataset {
    let xs: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 * 0.2]).collect();
    let ys = xs
        .iter()
        .map(|x| (1.3 * x[0]).sin() + 0.25 * x[0])
        .collect();
    Dataset::from_rows(xs, ys).unwrap()
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Network output in scaled units, evaluated neuron by neuron from the
/// weight and threshold lists with no shared code path.
pub fn mlfn_scaled_output(model: &MlfnModel, x_std: &[f64]) -> f64 {
    let mut act = x_std.to_vec();
    for (w, t) in model.weights().iter().zip(model.thresholds()) {
        let inputs = act.len();
        act = (0..t.len())
            .map(|i| {
                let mut xi = t[i];
                for j in 0..inputs {
                    xi += w[i * inputs + j] * act[j];
                }
                logistic(xi)
            })
            .collect();
    }
    act[0]
}

/// `sum 1/2 (target - output)^2` in scaled units, recomputed from scratch.
pub fn mlfn_objective(model: &MlfnModel, data: &Dataset) -> f64 {
    let norm = model.normalizer();
    let scaler = model.scaler();
    data.features()
        .iter()
        .zip(data.targets())
        .map(|(x, y)| {
            let z: Vec<f64> = x
                .iter()
                .zip(norm.mean().iter().zip(norm.std()))
                .map(|(v, (m, s))| (v - m) / s)
                .collect();
            let r = scaler.scale(*y) - mlfn_scaled_output(model, &z);
            0.5 * r * r
        })
        .sum()
}

/// Central-difference gradient of [`mlfn_objective`] with step `h`.
pub fn finite_difference_gradient(model: &MlfnModel, data: &Dataset, h: f64) -> Vec<f64> {
    let base = model.params();
    let mut m = model.clone();
    (0..base.len())
        .map(|k| {
            let mut p = base.clone();
            p[k] = base[k] + h;
            m.set_params(&p).unwrap();
            let up = mlfn_objective(&m, data);
            p[k] = base[k] - h;
            m.set_params(&p).unwrap();
            let down = mlfn_objective(&m, data);
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Max over entries of `|a - n| / max(|a|, |n|, floor)`.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

pub fn population_std(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}
