//! Epsilon-insensitive support vector regression with an RBF kernel, solved
//! by sequential minimal optimization.
//!
//! The dual is solved in the doubled form over `a = (alpha, alpha*)`:
//!
//! ```text
//! min 1/2 a^T Q a + p^T a   s.t.  z^T a = 0,  0 <= a <= C
//! Q_st = z_s z_t K(x_s, x_t),  z = (+1.., -1..),  p = (eps - y, eps + y)
//! ```
//!
//! and reported through the per-sample coefficients `beta = alpha - alpha*`.
//! Working pairs are chosen by maximal violation for the first index and
//! largest guaranteed objective decrease for the second; ties go to the
//! lowest index so training is fully deterministic.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, Normalizer};
use crate::error::{Error, Result};
use crate::metrics::rms_error;

/// Largest training set for which the full Gram matrix is cached.
pub const GRAM_CACHE_LIMIT: usize = 2000;

/// Coefficients at or below this magnitude are not kept as support vectors.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

const TAU: f64 = 1e-12;

/// `exp(-gamma * |x - z|^2)`.
pub fn rbf_kernel(x: &[f64], z: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: z.len(),
        });
    }
    Ok(rbf(x, z, gamma))
}

#[inline]
fn rbf(x: &[f64], z: &[f64], gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrConfig {
    /// Box constraint.
    pub c: f64,
    /// Half-width of the insensitive tube, in target units.
    pub epsilon: f64,
    pub gamma: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// Iteration budget, in multiples of the number of dual variables.
    pub max_passes: usize,
}

impl Default for SvrConfig {
    fn default() -> Self {
        SvrConfig {
            c: 10.0,
            epsilon: 0.1,
            gamma: 0.1,
            tol: 1e-3,
            max_passes: 1000,
        }
    }
}

impl SvrConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("C must be positive and finite, got {}", self.c));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be nonnegative and finite, got {}", self.epsilon));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive and finite, got {}", self.gamma));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be positive and finite, got {}", self.tol));
        }
        if self.max_passes == 0 {
            return bad("max_passes must be positive".into());
        }
        Ok(())
    }
}

/// Full dual solution for one training set.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    /// `alpha_i - alpha*_i` for every training sample.
    pub beta: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Value of `1/2 a^T Q a + p^T a` at the solution.
    pub objective: f64,
}

enum Gram<'a> {
    Full { n: usize, k: Vec<f64> },
    OnDemand { points: &'a [Vec<f64>], gamma: f64 },
}

impl<'a> Gram<'a> {
    fn new(points: &'a [Vec<f64>], gamma: f64) -> Self {
        let n = points.len();
        if n <= GRAM_CACHE_LIMIT {
            let mut k = vec![0.0; n * n];
            for i in 0..n {
                k[i * n + i] = 1.0;
                for j in 0..i {
                    let v = rbf(&points[i], &points[j], gamma);
                    k[i * n + j] = v;
                    k[j * n + i] = v;
                }
            }
            Gram::Full { n, k }
        } else {
            Gram::OnDemand { points, gamma }
        }
    }

    fn row_into(&self, i: usize, out: &mut [f64]) {
        match self {
            Gram::Full { n, k } => out.copy_from_slice(&k[i * n..(i + 1) * n]),
            Gram::OnDemand { points, gamma } => {
                for (o, p) in out.iter_mut().zip(points.iter()) {
                    *o = rbf(&points[i], p, *gamma);
                }
            }
        }
    }
}

/// Solves the dual on standardized `patterns`. `observer` sees `beta` after
/// every pair update.
pub fn solve_dual_observed(
    patterns: &[Vec<f64>],
    targets: &[f64],
    cfg: &SvrConfig,
    mut observer: Option<&mut dyn FnMut(&[f64])>,
) -> Result<DualSolution> {
    cfg.validate()?;
    let n = patterns.len();
    if n == 0 {
        return Err(Error::TooFewSamples { needed: 1, found: 0 });
    }
    if targets.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{n} patterns but {} targets",
            targets.len()
        )));
    }
    let gram = Gram::new(patterns, cfg.gamma);
    let l = 2 * n;
    let c = cfg.c;
    let z = |s: usize| if s < n { 1.0 } else { -1.0 };
    let base = |s: usize| if s < n { s } else { s - n };

    let mut a = vec![0.0; l];
    let mut grad: Vec<f64> = (0..l)
        .map(|s| {
            if s < n {
                cfg.epsilon - targets[s]
            } else {
                cfg.epsilon + targets[s - n]
            }
        })
        .collect();
    let p = grad.clone();
    let mut row_i = vec![0.0; n];
    let mut row_j = vec![0.0; n];

    let max_iter = cfg.max_passes.saturating_mul(l.max(100));
    let mut iterations = 0;
    let mut converged = false;
    let betas = |a: &[f64]| -> Vec<f64> { (0..n).map(|i| a[i] - a[n + i]).collect() };

    while iterations < max_iter {
        // first index: maximal violation over I_up
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for s in 0..l {
            let in_up = if s < n { a[s] < c } else { a[s] > 0.0 };
            if in_up {
                let v = -z(s) * grad[s];
                if v > g_max {
                    g_max = v;
                    i_sel = s;
                }
            }
        }
        // most violated value on the I_low side, for the stopping test
        let mut g_max2 = f64::NEG_INFINITY;
        for s in 0..l {
            let in_low = if s < n { a[s] > 0.0 } else { a[s] < c };
            if in_low {
                g_max2 = g_max2.max(z(s) * grad[s]);
            }
        }
        if i_sel == usize::MAX || g_max + g_max2 < cfg.tol {
            converged = true;
            break;
        }

        let i = i_sel;
        gram.row_into(base(i), &mut row_i);
        let k_ii = 1.0;
        // second index: largest decrease of the second-order model
        let mut j_sel = usize::MAX;
        let mut best_obj = f64::INFINITY;
        for t in 0..l {
            let in_low = if t < n { a[t] > 0.0 } else { a[t] < c };
            if !in_low {
                continue;
            }
            let grad_diff = g_max + z(t) * grad[t];
            if grad_diff > 0.0 {
                let k_it = row_i[base(t)];
                let mut quad = k_ii + 1.0 - 2.0 * k_it;
                if quad <= 0.0 {
                    quad = TAU;
                }
                let obj = -(grad_diff * grad_diff) / quad;
                if obj < best_obj {
                    best_obj = obj;
                    j_sel = t;
                }
            }
        }
        if j_sel == usize::MAX {
            converged = true;
            break;
        }
        let j = j_sel;
        gram.row_into(base(j), &mut row_j);

        let (zi, zj) = (z(i), z(j));
        let q_ij = zi * zj * row_i[base(j)];
        let (old_ai, old_aj) = (a[i], a[j]);
        if zi != zj {
            let mut quad = 2.0 + 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if diff > 0.0 {
                if a[j] < 0.0 {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = -diff;
            }
            if diff > 0.0 {
                if a[i] > c {
                    a[i] = c;
                    a[j] = c - diff;
                }
            } else if a[j] > c {
                a[j] = c;
                a[i] = c + diff;
            }
        } else {
            let mut quad = 2.0 - 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if sum > c {
                if a[i] > c {
                    a[i] = c;
                    a[j] = sum - c;
                }
            } else if a[j] < 0.0 {
                a[j] = 0.0;
                a[i] = sum;
            }
            if sum > c {
                if a[j] > c {
                    a[j] = c;
                    a[i] = sum - c;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = sum;
            }
        }

        let (di, dj) = (a[i] - old_ai, a[j] - old_aj);
        for t in 0..l {
            let zt = z(t);
            let bt = base(t);
            grad[t] += zi * zt * row_i[bt] * di + zj * zt * row_j[bt] * dj;
        }
        iterations += 1;
        if let Some(obs) = observer.as_mut() {
            obs(&betas(&a));
        }
    }

    // bias from free variables, or the midpoint of the feasible interval
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for s in 0..l {
        let yg = z(s) * grad[s];
        if a[s] >= c {
            if z(s) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if a[s] <= 0.0 {
            if z(s) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };

    // 1/2 a^T Q a + p^T a = 1/2 (a^T (G - p)) + p^T a
    let objective = a
        .iter()
        .zip(&grad)
        .zip(&p)
        .map(|((a, g), p)| 0.5 * a * (g - p) + p * a)
        .sum();

    Ok(DualSolution {
        beta: betas(&a),
        bias: -rho,
        converged,
        iterations,
        objective,
    })
}

pub fn solve_dual(patterns: &[Vec<f64>], targets: &[f64], cfg: &SvrConfig) -> Result<DualSolution> {
    solve_dual_observed(patterns, targets, cfg, None)
}

/// Trained support-vector expansion `f(x) = sum_j beta_j K(x, x_j) + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    support: Vec<Vec<f64>>,
    coef: Vec<f64>,
    bias: f64,
    config: SvrConfig,
    normalizer: Normalizer,
    converged: bool,
    iterations: usize,
    objective: f64,
}

impl SvrModel {
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        support: Vec<Vec<f64>>,
        coef: Vec<f64>,
        bias: f64,
        config: SvrConfig,
        normalizer: Normalizer,
        converged: bool,
        iterations: usize,
        objective: f64,
    ) -> Result<Self> {
        config.validate()?;
        if support.len() != coef.len() {
            return Err(Error::InvalidParameter(format!(
                "{} support vectors but {} coefficients",
                support.len(),
                coef.len()
            )));
        }
        for s in &support {
            if s.len() != normalizer.dim() {
                return Err(Error::DimensionMismatch {
                    expected: normalizer.dim(),
                    found: s.len(),
                });
            }
        }
        if !bias.is_finite() || coef.iter().any(|b| !b.is_finite() || b.abs() > config.c + 1e-12) {
            return Err(Error::InvalidParameter(
                "coefficients must be finite with |beta| <= C".into(),
            ));
        }
        Ok(SvrModel {
            support,
            coef,
            bias,
            config,
            normalizer,
            converged,
            iterations,
            objective,
        })
    }

    pub fn support_vectors(&self) -> &[Vec<f64>] {
        &self.support
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn config(&self) -> &SvrConfig {
        &self.config
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn dual_objective(&self) -> f64 {
        self.objective
    }

    pub fn dim(&self) -> usize {
        self.normalizer.dim()
    }

    /// Prediction for a raw (unstandardized) input, in target units.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let z = self.normalizer.transform(x)?;
        Ok(self.predict_normalized(&z))
    }

    fn predict_normalized(&self, z: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(s, b)| b * rbf(z, s, self.config.gamma))
            .sum::<f64>()
            + self.bias
    }

    /// Same model with every coefficient and the bias multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> SvrModel {
        let mut m = self.clone();
        m.coef.iter_mut().for_each(|b| *b *= factor);
        m.bias *= factor;
        m
    }
}

/// Trains on `train`, standardizing inputs with statistics of `train`.
pub fn svr_train(train: &Dataset, cfg: &SvrConfig) -> Result<SvrModel> {
    Ok(svr_train_full(train, cfg)?.0)
}

/// As [`svr_train`], also returning the full per-sample dual solution.
pub fn svr_train_full(train: &Dataset, cfg: &SvrConfig) -> Result<(SvrModel, DualSolution)> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, found: 0 });
    }
    let normalizer = if train.len() == 1 {
        // a single point has no spread; any centring works
        Normalizer::from_parts(train.features()[0].clone(), vec![1.0; train.dim()])?
    } else {
        Normalizer::fit(train)?
    };
    let patterns = normalizer.transform_all(train)?;
    let sol = solve_dual(&patterns, train.targets(), cfg)?;
    let (support, coef): (Vec<Vec<f64>>, Vec<f64>) = patterns
        .into_iter()
        .zip(&sol.beta)
        .filter(|(_, b)| b.abs() > SUPPORT_THRESHOLD)
        .map(|(p, b)| (p, *b))
        .unzip();
    let model = SvrModel {
        support,
        coef,
        bias: sol.bias,
        config: *cfg,
        normalizer,
        converged: sol.converged,
        iterations: sol.iterations,
        objective: sol.objective,
    };
    Ok((model, sol))
}

pub fn svr_predict(model: &SvrModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

/// Candidate values for [`svr_grid_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct SvrGrid {
    pub c: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Default for SvrGrid {
    fn default() -> Self {
        SvrGrid {
            c: vec![0.1, 1.0, 10.0, 100.0],
            epsilon: vec![0.01, 0.1, 1.0],
            gamma: vec![0.01, 0.1, 1.0, 10.0],
        }
    }
}

impl SvrGrid {
    pub fn single(c: f64, epsilon: f64, gamma: f64) -> Self {
        SvrGrid {
            c: vec![c],
            epsilon: vec![epsilon],
            gamma: vec![gamma],
        }
    }
}

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub config: SvrConfig,
    /// Mean k-fold RMS error of the winning cell.
    pub score: f64,
}

/// Fold index of every sample: a seeded shuffle, then round-robin.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % folds;
    }
    fold
}

/// Mean over folds of the held-out RMS error for one configuration.
pub fn cross_validate(train: &Dataset, cfg: &SvrConfig, folds: usize, seed: u64) -> Result<f64> {
    if folds < 2 {
        return Err(Error::InvalidParameter("at least 2 folds are required".into()));
    }
    if train.len() < folds {
        return Err(Error::TooFewSamples {
            needed: folds,
            found: train.len(),
        });
    }
    let assignment = fold_assignment(train.len(), folds, seed);
    let mut total = 0.0;
    for k in 0..folds {
        let fit_idx: Vec<usize> = (0..train.len()).filter(|&i| assignment[i] != k).collect();
        let hold_idx: Vec<usize> = (0..train.len()).filter(|&i| assignment[i] == k).collect();
        let model = svr_train(&train.subset(&fit_idx), cfg)?;
        let held = train.subset(&hold_idx);
        let predicted: Vec<f64> = held
            .features()
            .iter()
            .map(|x| model.predict(x))
            .collect::<Result<_>>()?;
        total += rms_error(held.targets(), &predicted)?;
    }
    Ok(total / folds as f64)
}

/// Exhaustive k-fold search; ties go to the lexicographically smallest
/// `(C, epsilon, gamma)`. `base` supplies `tol` and `max_passes`.
pub fn svr_grid_search(
    train: &Dataset,
    grid: &SvrGrid,
    folds: usize,
    seed: u64,
    base: &SvrConfig,
) -> Result<GridSearchResult> {
    if grid.c.is_empty() || grid.epsilon.is_empty() || grid.gamma.is_empty() {
        return Err(Error::InvalidParameter("every SVR grid needs at least one value".into()));
    }
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (cs, es, gs) = (sorted(&grid.c), sorted(&grid.epsilon), sorted(&grid.gamma));
    let mut best: Option<GridSearchResult> = None;
    for &c in &cs {
        for &epsilon in &es {
            for &gamma in &gs {
                let cfg = SvrConfig {
                    c,
                    epsilon,
                    gamma,
                    ..*base
                };
                cfg.validate()?;
                let score = cross_validate(train, &cfg, folds, seed)?;
                if best.as_ref().map_or(true, |b| score < b.score) {
                    best = Some(GridSearchResult { config: cfg, score });
                }
            }
        }
    }
    Ok(best.expect("grids are nonempty"))
}
