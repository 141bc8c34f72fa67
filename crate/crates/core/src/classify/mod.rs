//! One-vs-rest linear hinge-loss classifiers.
//!
//! Each binary problem minimizes
//!
//! ```text
//! J(w, b) = C/2 · (‖w‖² + b²) + 1/n · Σ max(0, 1 − y·(w·x + b))
//! ```
//!
//! by full-batch subgradient descent with step `1/(C·t)` and projection onto
//! the ball of radius `1/√C`. The iterate with the lowest objective is kept,
//! so the result never scores worse than the zero initialization. The loss is
//! a mean over samples, which makes duplicated training sets produce the same
//! decision function.

mod cv;

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, FeatureStream, LabelSpace, Result, StateSequence};

pub use cv::{
    cross_validate, select_cell, CrossValPlan, CvCell, CvOutcome, Hyperparameters, LabeledVideo,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Regularization strength.
    pub c: f64,
    pub epochs: usize,
    /// Recorded with the model; consumed by fold assignment during cross-validation.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 0.01,
            epochs: 200,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.c <= 0.0 || !self.c.is_finite() {
            return Err(Error::InvalidParameter(
                "regularization C must be positive".into(),
            ));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// What a model's outputs mean.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelTarget {
    /// One score per state of the label space.
    States(LabelSpace),
    /// A single change-vs-no-change margin.
    Change,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    target: ModelTarget,
    dim: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
    config: TrainConfig,
}

impl LinearModel {
    pub fn new(
        target: ModelTarget,
        dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        config: TrainConfig,
    ) -> Result<Self> {
        let k = match &target {
            ModelTarget::States(space) => space.len(),
            ModelTarget::Change => 1,
        };
        if biases.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                found: biases.len(),
            });
        }
        if weights.len() != k * dim {
            return Err(Error::LengthMismatch {
                expected: k * dim,
                found: weights.len(),
            });
        }
        if weights.iter().chain(&biases).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(LinearModel {
            target,
            dim,
            weights,
            biases,
            config,
        })
    }

    pub fn target(&self) -> &ModelTarget {
        &self.target
    }

    pub fn label_space(&self) -> Option<&LabelSpace> {
        match &self.target {
            ModelTarget::States(s) => Some(s),
            ModelTarget::Change => None,
        }
    }

    /// Number of outputs.
    pub fn classes(&self) -> usize {
        self.biases.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major `classes × dim` weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// Raw margins `w_k·f + b_k`.
    pub fn score(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: f.len(),
            });
        }
        Ok(self.score_unchecked(f))
    }

    fn score_unchecked(&self, f: &[f64]) -> Vec<f64> {
        self.biases
            .iter()
            .enumerate()
            .map(|(k, b)| dot(&self.weights[k * self.dim..(k + 1) * self.dim], f) + b)
            .collect()
    }

    /// Scores of every frame, row-major `len × classes`.
    pub fn score_stream(&self, stream: &FeatureStream) -> Result<Vec<f64>> {
        if stream.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: stream.dim(),
            });
        }
        Ok(stream
            .rows()
            .flat_map(|r| self.score_unchecked(r))
            .collect())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Index of the largest value; ties go to the lower index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Per-frame argmax of the state scores.
pub fn predict_frames(model: &LinearModel, stream: &FeatureStream) -> Result<StateSequence> {
    let space = model
        .label_space()
        .ok_or_else(|| Error::InvalidParameter("change model cannot label states".into()))?;
    let scores = model.score_stream(stream)?;
    let k = model.classes();
    let states = scores.chunks_exact(k.max(1)).map(argmax).collect();
    StateSequence::new(space.clone(), states)
}

/// Trains a one-vs-rest state model on labelled streams.
pub fn train(
    samples: &[(&FeatureStream, &StateSequence)],
    config: &TrainConfig,
) -> Result<LinearModel> {
    let (first_stream, first_truth) = samples
        .first()
        .ok_or_else(|| Error::InvalidParameter("no training data".into()))?;
    let space = first_truth.label_space().clone();
    let dim = first_stream.dim();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (stream, truth) in samples {
        if truth.label_space() != &space {
            return Err(Error::InvalidParameter(
                "training videos use different label spaces".into(),
            ));
        }
        if stream.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: stream.dim(),
            });
        }
        if stream.len() != truth.len() {
            return Err(Error::LengthMismatch {
                expected: stream.len(),
                found: truth.len(),
            });
        }
        rows.extend_from_slice(stream.data());
        labels.extend_from_slice(truth.states());
    }
    train_matrix(&rows, dim, &labels, space, config)
}

/// Trains a one-vs-rest state model from a row-major sample matrix.
pub fn train_matrix(
    rows: &[f64],
    dim: usize,
    labels: &[usize],
    space: LabelSpace,
    config: &TrainConfig,
) -> Result<LinearModel> {
    config.validate()?;
    check_matrix(rows, dim, labels.len())?;
    let k = space.len();
    if let Some(&index) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::InvalidLabel { index, count: k });
    }
    let first = labels.first().ok_or(Error::SingleClass)?;
    if labels.iter().all(|l| l == first) {
        return Err(Error::SingleClass);
    }
    let mut weights = Vec::with_capacity(k * dim);
    let mut biases = Vec::with_capacity(k);
    for class in 0..k {
        let y: Vec<f64> = labels
            .iter()
            .map(|&l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let fit = fit_binary(rows, dim, &y, config);
        weights.extend_from_slice(&fit.weights);
        biases.push(fit.bias);
    }
    LinearModel::new(ModelTarget::States(space), dim, weights, biases, *config)
}

/// Trains a single-output change model; `positive[i]` marks change samples.
pub fn train_binary(
    rows: &[f64],
    dim: usize,
    positive: &[bool],
    config: &TrainConfig,
) -> Result<LinearModel> {
    config.validate()?;
    check_matrix(rows, dim, positive.len())?;
    let first = positive.first().ok_or(Error::SingleClass)?;
    if positive.iter().all(|p| p == first) {
        return Err(Error::SingleClass);
    }
    let y: Vec<f64> = positive
        .iter()
        .map(|&p| if p { 1.0 } else { -1.0 })
        .collect();
    let fit = fit_binary(rows, dim, &y, config);
    LinearModel::new(
        ModelTarget::Change,
        dim,
        fit.weights,
        vec![fit.bias],
        *config,
    )
}

fn check_matrix(rows: &[f64], dim: usize, n: usize) -> Result<()> {
    if rows.len() != n * dim {
        return Err(Error::LengthMismatch {
            expected: n * dim,
            found: rows.len(),
        });
    }
    if rows.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Result of one binary fit, with the objective at the zero start and at the kept iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryFit {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub initial_objective: f64,
    pub objective: f64,
}

/// Full-batch projected subgradient descent on the regularized mean hinge loss.
pub fn fit_binary(rows: &[f64], dim: usize, y: &[f64], config: &TrainConfig) -> BinaryFit {
    let n = y.len();
    let c = config.c;
    let radius = 1.0 / libm::sqrt(c);
    // theta = [w, b]
    let mut theta = vec![0.0; dim + 1];
    let mut grad = vec![0.0; dim + 1];
    let mut best = theta.clone();
    let mut best_objective = f64::INFINITY;
    let mut initial_objective = f64::NAN;
    for t in 1..=config.epochs + 1 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut hinge = 0.0;
        for (i, &yi) in y.iter().enumerate() {
            let x = &rows[i * dim..(i + 1) * dim];
            let margin = yi * (dot(&theta[..dim], x) + theta[dim]);
            if margin < 1.0 {
                hinge += 1.0 - margin;
                for (g, xv) in grad[..dim].iter_mut().zip(x) {
                    *g -= yi * xv;
                }
                grad[dim] -= yi;
            }
        }
        let norm2: f64 = theta.iter().map(|v| v * v).sum();
        let objective = 0.5 * c * norm2 + hinge / n as f64;
        if t == 1 {
            initial_objective = objective;
        }
        if objective < best_objective {
            best_objective = objective;
            best.copy_from_slice(&theta);
        }
        if t == config.epochs + 1 {
            break;
        }
        let step = 1.0 / (c * t as f64);
        for (th, g) in theta.iter_mut().zip(&grad) {
            *th -= step * (c * *th + g / n as f64);
        }
        let norm = libm::sqrt(theta.iter().map(|v| v * v).sum::<f64>());
        if norm > radius {
            let shrink = radius / norm;
            theta.iter_mut().for_each(|v| *v *= shrink);
        }
    }
    let bias = best[dim];
    best.truncate(dim);
    BinaryFit {
        weights: best,
        bias,
        initial_objective,
        objective: best_objective,
    }
}
