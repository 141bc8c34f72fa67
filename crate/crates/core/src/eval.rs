//! Per-frame accuracy and confusion matrices.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, StateSequence, Task};

fn check_pair(pred: &StateSequence, truth: &StateSequence) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if pred.label_space() != truth.label_space() {
        return Err(Error::InvalidParameter(
            "prediction and truth use different label spaces".into(),
        ));
    }
    Ok(())
}

/// Fraction of frames where the prediction equals the truth.
pub fn accuracy(pred: &StateSequence, truth: &StateSequence) -> Result<f64> {
    check_pair(pred, truth)?;
    if truth.is_empty() {
        return Err(Error::MetricUndefined("empty sequence"));
    }
    let hits = pred
        .states()
        .iter()
        .zip(truth.states())
        .filter(|(p, t)| p == t)
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Accuracy gain of `full` over `baseline` on the same truth, in [-1, 1].
pub fn improvement(
    full: &StateSequence,
    baseline: &StateSequence,
    truth: &StateSequence,
) -> Result<f64> {
    Ok(accuracy(full, truth)? - accuracy(baseline, truth)?)
}

/// `K × K` counts; row = truth, column = prediction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(k: usize) -> Self {
        ConfusionMatrix {
            k,
            counts: vec![0; k * k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.k + pred]
    }

    pub fn row(&self, truth: usize) -> &[u64] {
        &self.counts[truth * self.k..(truth + 1) * self.k]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|i| self.get(i, i)).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }
}

pub fn confusion(pred: &StateSequence, truth: &StateSequence) -> Result<ConfusionMatrix> {
    check_pair(pred, truth)?;
    let mut m = ConfusionMatrix::zeros(truth.label_space().len());
    for (&p, &t) in pred.states().iter().zip(truth.states()) {
        m.counts[t * m.k + p] += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoScore {
    pub video_id: String,
    pub frames: usize,
    pub accuracy: f64,
}

/// Accuracy per video and over all frames.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub task: Task,
    pub labels: Vec<String>,
    pub videos: Vec<VideoScore>,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub frames: u64,
}

impl EvalReport {
    /// Aggregates `(video_id, prediction, truth)` triples.
    pub fn build(items: &[(&str, &StateSequence, &StateSequence)]) -> Result<EvalReport> {
        let (_, _, first) = items
            .first()
            .ok_or(Error::MetricUndefined("nothing to evaluate"))?;
        let space = first.label_space().clone();
        let mut total = ConfusionMatrix::zeros(space.len());
        let mut videos = Vec::with_capacity(items.len());
        for (id, pred, truth) in items {
            if truth.label_space() != &space {
                return Err(Error::InvalidParameter(
                    "videos use different label spaces".into(),
                ));
            }
            let m = confusion(pred, truth)?;
            videos.push(VideoScore {
                video_id: String::from(*id),
                frames: truth.len(),
                accuracy: accuracy(pred, truth)?,
            });
            total.add(&m);
        }
        Ok(EvalReport {
            task: space.task(),
            labels: space.labels().to_vec(),
            videos,
            accuracy: total.accuracy(),
            frames: total.total(),
            confusion: total,
        })
    }
}
