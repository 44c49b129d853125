//! Multilayer feed-forward network with sigmoid neurons, trained by
//! full-batch backpropagation with momentum on the half sum of squared errors.
//!
//! Every non-input neuron `i` computes the potential
//! `xi_i = theta_i + sum_j w_ij x_j` over all neurons `j` of the previous
//! layer and emits `x_i = sigmoid(xi_i)`. The output neuron is sigmoid too, so
//! targets are mapped affinely into `[0.1, 0.9]` before training and mapped
//! back on prediction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, Normalizer};
use crate::error::{Error, Result};

/// Smallest hidden-layer size in the node search.
pub const MIN_HIDDEN_NODES: usize = 2;
/// Largest hidden-layer size in the node search.
pub const MAX_HIDDEN_NODES: usize = 25;

/// Minimum objective decrease that counts as progress for early stopping.
const MIN_IMPROVEMENT: f64 = 1e-10;

const SCALED_LO: f64 = 0.1;
const SCALED_HI: f64 = 0.9;

/// Logistic transfer `1 / (1 + exp(-z))`, evaluated without overflow.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Layer sizes `[d_in, h_1, ..., d_out]`, fully connected between
/// consecutive layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    layer_sizes: Vec<usize>,
}

impl Topology {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidParameter(
                "a network needs at least an input and an output layer".into(),
            ));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidParameter("every layer needs at least one neuron".into()));
        }
        if *layer_sizes.last().unwrap() != 1 {
            return Err(Error::InvalidParameter("only single-output networks are supported".into()));
        }
        Ok(Topology { layer_sizes })
    }

    /// `d_in - hidden - 1`.
    pub fn single_hidden(inputs: usize, hidden: usize) -> Result<Self> {
        Topology::new(vec![inputs, hidden, 1])
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn weight_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1]).sum()
    }

    pub fn threshold_count(&self) -> usize {
        self.layer_sizes[1..].iter().sum()
    }

    pub fn param_count(&self) -> usize {
        self.weight_count() + self.threshold_count()
    }
}

/// Affine map from target units into `[0.1, 0.9]` and back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetScaler {
    min: f64,
    span: f64,
}

impl TargetScaler {
    /// Maps `[min(y), max(y)]` onto `[0.1, 0.9]`. A constant target maps to 0.5.
    pub fn fit(targets: &[f64]) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, found: 0 });
        }
        let lo = targets.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidParameter("non-finite target".into()));
        }
        if hi > lo {
            Ok(TargetScaler { min: lo, span: hi - lo })
        } else {
            Ok(TargetScaler { min: lo - 0.5, span: 1.0 })
        }
    }

    pub fn from_parts(min: f64, span: f64) -> Result<Self> {
        if !(min.is_finite() && span.is_finite() && span > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "target scaler needs finite min and positive span, got ({min}, {span})"
            )));
        }
        Ok(TargetScaler { min, span })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn scale(&self, y: f64) -> f64 {
        SCALED_LO + (SCALED_HI - SCALED_LO) * (y - self.min) / self.span
    }

    pub fn unscale(&self, s: f64) -> f64 {
        self.min + (s - SCALED_LO) / (SCALED_HI - SCALED_LO) * self.span
    }
}

/// Result of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    /// Output in target units.
    pub output: f64,
    /// Output neuron activation in `(0, 1)`, before inverse scaling.
    pub raw_output: f64,
    /// Activations per layer; `activations[0]` is the standardized input.
    pub activations: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlfnModel {
    topology: Topology,
    /// `weights[l]` is row-major `(sizes[l+1], sizes[l])`: row `i` holds
    /// the incoming weights of neuron `i` in layer `l+1`.
    weights: Vec<Vec<f64>>,
    thresholds: Vec<Vec<f64>>,
    normalizer: Normalizer,
    scaler: TargetScaler,
}

impl MlfnModel {
    /// All weights and thresholds zero.
    pub fn zeros(topology: Topology, normalizer: Normalizer, scaler: TargetScaler) -> Result<Self> {
        if normalizer.dim() != topology.inputs() {
            return Err(Error::DimensionMismatch {
                expected: topology.inputs(),
                found: normalizer.dim(),
            });
        }
        let sizes = topology.layer_sizes();
        let weights = sizes.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect();
        let thresholds = sizes[1..].iter().map(|&s| vec![0.0; s]).collect();
        Ok(MlfnModel {
            topology,
            weights,
            thresholds,
            normalizer,
            scaler,
        })
    }

    /// Parameters drawn uniformly from `[-half_width, half_width]`.
    pub fn initialize(
        topology: Topology,
        normalizer: Normalizer,
        scaler: TargetScaler,
        half_width: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "init half-width must be positive, got {half_width}"
            )));
        }
        let mut model = MlfnModel::zeros(topology, normalizer, scaler)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params: Vec<f64> = (0..model.topology.param_count())
            .map(|_| rng.random_range(-half_width..=half_width))
            .collect();
        model.set_params(&params)?;
        Ok(model)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn scaler(&self) -> &TargetScaler {
        &self.scaler
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn thresholds(&self) -> &[Vec<f64>] {
        &self.thresholds
    }

    pub fn dim(&self) -> usize {
        self.topology.inputs()
    }

    /// Flat parameter vector: for each layer, its weights then its thresholds.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.topology.param_count());
        for (w, t) in self.weights.iter().zip(&self.thresholds) {
            out.extend_from_slice(w);
            out.extend_from_slice(t);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.topology.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.topology.param_count(),
                found: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("non-finite network parameter".into()));
        }
        let mut at = 0;
        for (w, t) in self.weights.iter_mut().zip(self.thresholds.iter_mut()) {
            let (nw, nt) = (w.len(), t.len());
            w.copy_from_slice(&params[at..at + nw]);
            at += nw;
            t.copy_from_slice(&params[at..at + nt]);
            at += nt;
        }
        Ok(())
    }

    /// Forward pass on a raw (unstandardized) input.
    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        let z = self.normalizer.transform(x)?;
        Ok(self.forward_normalized(z))
    }

    fn forward_normalized(&self, z: Vec<f64>) -> Forward {
        let activations = self.activations(z);
        let raw_output = activations.last().unwrap()[0];
        Forward {
            output: self.scaler.unscale(raw_output),
            raw_output,
            activations,
        }
    }

    fn activations(&self, z: Vec<f64>) -> Vec<Vec<f64>> {
        let mut layers = Vec::with_capacity(self.weights.len() + 1);
        layers.push(z);
        for (w, theta) in self.weights.iter().zip(&self.thresholds) {
            let prev = layers.last().unwrap();
            let next: Vec<f64> = theta
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let row = &w[i * prev.len()..(i + 1) * prev.len()];
                    let potential = t + row.iter().zip(prev).map(|(a, b)| a * b).sum::<f64>();
                    sigmoid(potential)
                })
                .collect();
            layers.push(next);
        }
        layers
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?.output)
    }

    fn check_data(&self, data: &Dataset) -> Result<()> {
        if data.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, found: 0 });
        }
        if data.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: data.dim(),
            });
        }
        Ok(())
    }

    /// Objective and its gradient over standardized inputs and scaled targets.
    fn objective_and_gradient(&self, inputs: &[Vec<f64>], targets: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let offsets = self.layer_offsets();
        let mut e = 0.0;
        for (z, &t) in inputs.iter().zip(targets) {
            let acts = self.activations(z.clone());
            let out = acts.last().unwrap()[0];
            let r = out - t;
            e += 0.5 * r * r;

            // delta of the output neuron: dE/dxi = (x - t) f'(xi), f' = f(1 - f)
            let mut delta = vec![r * out * (1.0 - out)];
            for l in (0..self.weights.len()).rev() {
                let prev = &acts[l];
                let (w_at, t_at) = offsets[l];
                let n_in = prev.len();
                for (i, d) in delta.iter().enumerate() {
                    let row = &mut grad[w_at + i * n_in..w_at + (i + 1) * n_in];
                    for (g, a) in row.iter_mut().zip(prev) {
                        *g += d * a;
                    }
                    grad[t_at + i] += d;
                }
                if l > 0 {
                    let w = &self.weights[l];
                    delta = (0..n_in)
                        .map(|j| {
                            let back: f64 = delta
                                .iter()
                                .enumerate()
                                .map(|(i, d)| d * w[i * n_in + j])
                                .sum();
                            back * prev[j] * (1.0 - prev[j])
                        })
                        .collect();
                }
            }
        }
        e
    }

    /// Start of (weights, thresholds) for every layer in the flat parameter vector.
    fn layer_offsets(&self) -> Vec<(usize, usize)> {
        let mut at = 0;
        self.weights
            .iter()
            .zip(&self.thresholds)
            .map(|(w, t)| {
                let o = (at, at + w.len());
                at += w.len() + t.len();
                o
            })
            .collect()
    }

    fn prepare(&self, data: &Dataset) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        self.check_data(data)?;
        let inputs = self.normalizer.transform_all(data)?;
        let targets = data.targets().iter().map(|&y| self.scaler.scale(y)).collect();
        Ok((inputs, targets))
    }
}

/// `E = sum over cases of 1/2 (t - x_out)^2`, in scaled target units.
pub fn objective(model: &MlfnModel, data: &Dataset) -> Result<f64> {
    let (inputs, targets) = model.prepare(data)?;
    Ok(inputs
        .into_iter()
        .zip(targets)
        .map(|(z, t)| {
            let out = model.forward_normalized(z).raw_output;
            0.5 * (t - out) * (t - out)
        })
        .sum())
}

/// Analytic `dE/dparam` in the layout of [`MlfnModel::params`].
pub fn gradient(model: &MlfnModel, data: &Dataset) -> Result<Vec<f64>> {
    let (inputs, targets) = model.prepare(data)?;
    let mut grad = vec![0.0; model.topology.param_count()];
    model.objective_and_gradient(&inputs, &targets, &mut grad);
    Ok(grad)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub init_half_width: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            momentum: 0.9,
            max_epochs: 5000,
            patience: 200,
            seed: 0,
            init_half_width: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive and finite");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be positive");
        }
        if self.patience == 0 {
            return bad("patience must be positive");
        }
        if !(self.init_half_width > 0.0 && self.init_half_width.is_finite()) {
            return bad("init half-width must be positive and finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters with the lowest objective seen.
    pub model: MlfnModel,
    /// Number of parameter updates applied.
    pub epochs_run: usize,
    pub initial_objective: f64,
    pub final_objective: f64,
    /// Objective at the parameters in effect at the start of each epoch, plus
    /// one final entry after the last update.
    pub history: Vec<f64>,
}

/// Trains a network on `train`.
///
/// Each epoch applies `v <- momentum * v - learning_rate * grad` and
/// `w <- w + v`, with `grad` the gradient of the objective summed over all
/// cases. Stops after `max_epochs` or `patience` epochs without a
/// decrease of at least `1e-10`, and returns the best parameters seen.
pub fn train(topology: &Topology, train: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, found: 0 });
    }
    let normalizer = Normalizer::fit(train)?;
    let scaler = TargetScaler::fit(train.targets())?;
    let mut model = MlfnModel::initialize(
        topology.clone(),
        normalizer,
        scaler,
        cfg.init_half_width,
        cfg.seed,
    )?;
    let (inputs, targets) = model.prepare(train)?;
    let step = cfg.learning_rate;

    let mut params = model.params();
    let mut velocity = vec![0.0; params.len()];
    let mut grad = vec![0.0; params.len()];
    let mut history = Vec::new();
    let mut best_params = params.clone();
    let mut best_e = f64::INFINITY;
    let mut stall = 0usize;
    let mut epochs_run = 0usize;

    for epoch in 0..=cfg.max_epochs {
        let e = model.objective_and_gradient(&inputs, &targets, &mut grad);
        if !e.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        history.push(e);
        if e < best_e {
            if best_e - e >= MIN_IMPROVEMENT {
                stall = 0;
            } else {
                stall += 1;
            }
            best_e = e;
            best_params.copy_from_slice(&params);
        } else {
            stall += 1;
        }
        if epoch == cfg.max_epochs || stall >= cfg.patience {
            break;
        }
        for ((p, v), g) in params.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
            *v = cfg.momentum * *v - step * g;
            *p += *v;
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Diverged { epoch: epoch + 1 });
        }
        model.set_params(&params)?;
        epochs_run += 1;
    }

    model.set_params(&best_params)?;
    Ok(TrainOutcome {
        model,
        epochs_run,
        initial_objective: history[0],
        final_objective: best_e,
        history,
    })
}

/// Per-epoch objective log as CSV: `epoch,objective`, epochs from 0.
pub fn history_csv(history: &[f64]) -> String {
    let mut out = String::from("epoch,objective\n");
    for (epoch, e) in history.iter().enumerate() {
        out.push_str(&format!("{epoch},{e}\n"));
    }
    out
}
