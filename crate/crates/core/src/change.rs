//! State-change candidates.
//!
//! The change feature of frame `i` is `|f_{i−d} − f_{i+d}|`, defined for
//! `d ≤ i ≤ N−1−d`. A binary linear model scores it, and non-maximum
//! suppression keeps well-separated local maxima of the score track. There is
//! no confidence floor: recall matters more than precision here, since the
//! decoder prunes spurious candidates.

use alloc::vec;
use alloc::vec::Vec;

use crate::classify::{train_binary, LinearModel, ModelTarget, TrainConfig};
use crate::{Error, FeatureStream, Result, StateSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChangeParams {
    /// Half-width of the change feature, in frames.
    pub d: usize,
    /// Minimum separation enforced between retained candidates.
    pub suppression_radius: usize,
}

impl ChangeParams {
    /// `d` with the suppression radius tied to it.
    pub fn new(d: usize) -> Self {
        ChangeParams {
            d,
            suppression_radius: d,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParameter("d must be at least 1".into()));
        }
        if self.suppression_radius == 0 {
            return Err(Error::InvalidParameter(
                "suppression radius must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Frames of a stream that carry a change feature.
pub fn change_band(len: usize, d: usize) -> core::ops::Range<usize> {
    if len < 2 * d + 1 {
        0..0
    } else {
        d..len - d
    }
}

/// Elementwise `|f_{i−d} − f_{i+d}|`.
pub fn change_feature(stream: &FeatureStream, i: usize, d: usize) -> Result<Vec<f64>> {
    if !change_band(stream.len(), d).contains(&i) {
        return Err(Error::OutOfBand {
            index: i,
            d,
            len: stream.len(),
        });
    }
    Ok(stream
        .row(i - d)
        .iter()
        .zip(stream.row(i + d))
        .map(|(a, b)| (a - b).abs())
        .collect())
}

/// Change features of every in-band frame, row-major, with their frame indices.
pub fn change_features(stream: &FeatureStream, d: usize) -> (Vec<usize>, Vec<f64>) {
    let band = change_band(stream.len(), d);
    let mut data = Vec::with_capacity(band.len() * stream.dim());
    for i in band.clone() {
        for (a, b) in stream.row(i - d).iter().zip(stream.row(i + d)) {
            data.push((a - b).abs());
        }
    }
    (band.collect(), data)
}

/// Change-classifier labels: `Some(true)` within `d` frames of a transition,
/// `Some(false)` elsewhere, `None` outside the change-feature band.
///
/// A transition sits at the first frame of the new state.
pub fn label_change_frames(truth: &StateSequence, d: usize) -> Vec<Option<bool>> {
    let n = truth.len();
    let mut near = vec![false; n];
    for t in truth.transitions() {
        let lo = t.saturating_sub(d);
        let hi = (t + d).min(n - 1);
        near[lo..=hi].iter_mut().for_each(|v| *v = true);
    }
    let band = change_band(n, d);
    (0..n)
        .map(|i| band.contains(&i).then_some(near[i]))
        .collect()
}

/// Trains the binary change model on in-band frames of labelled streams.
pub fn train_change_model(
    samples: &[(&FeatureStream, &StateSequence)],
    params: &ChangeParams,
    config: &TrainConfig,
) -> Result<LinearModel> {
    params.validate()?;
    let dim = samples.first().map_or(0, |(s, _)| s.dim());
    let mut rows = Vec::new();
    let mut positive = Vec::new();
    for (stream, truth) in samples {
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
        let (_, feats) = change_features(stream, params.d);
        rows.extend_from_slice(&feats);
        positive.extend(label_change_frames(truth, params.d).into_iter().flatten());
    }
    train_binary(&rows, dim, &positive, config)
}

/// Retained change candidates, in increasing frame order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateSet {
    entries: Vec<(usize, f64)>,
}

impl CandidateSet {
    pub fn from_entries(mut entries: Vec<(usize, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        entries.dedup_by_key(|e| e.0);
        CandidateSet { entries }
    }

    /// `(frame_index, confidence)` pairs.
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Change-model confidence of every in-band frame.
pub fn change_confidences(
    stream: &FeatureStream,
    model: &LinearModel,
    d: usize,
) -> Result<Vec<(usize, f64)>> {
    if model.target() != &ModelTarget::Change {
        return Err(Error::InvalidParameter("expected a change model".into()));
    }
    if model.dim() != stream.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: stream.dim(),
        });
    }
    let (frames, feats) = change_features(stream, d);
    let dim = stream.dim();
    Ok(frames
        .into_iter()
        .enumerate()
        .map(|(k, i)| {
            let f = &feats[k * dim..(k + 1) * dim];
            (i, model.score(f).expect("dimension checked")[0])
        })
        .collect())
}

/// Greedy non-maximum suppression over a confidence track.
///
/// Only frames whose confidence is at least every other confidence within
/// `radius` frames are eligible. Eligible frames are taken in decreasing
/// confidence (earlier frame first on ties) and each suppresses every frame
/// within `radius`.
pub fn non_maximum_suppression(track: &[(usize, f64)], radius: usize) -> CandidateSet {
    let mut sorted: Vec<(usize, f64)> = track.to_vec();
    sorted.sort_by_key(|e| e.0);
    let within = |a: usize, b: usize| a.abs_diff(b) <= radius;

    let mut eligible: Vec<usize> = Vec::new();
    for (k, &(i, c)) in sorted.iter().enumerate() {
        let left = sorted[..k].iter().rev().take_while(|e| within(e.0, i));
        let right = sorted[k + 1..].iter().take_while(|e| within(e.0, i));
        if left.chain(right).all(|e| e.1 <= c) {
            eligible.push(k);
        }
    }
    eligible.sort_by(|&a, &b| {
        sorted[b]
            .1
            .partial_cmp(&sorted[a].1)
            .expect("finite confidences")
            .then(sorted[a].0.cmp(&sorted[b].0))
    });

    let mut kept: Vec<(usize, f64)> = Vec::new();
    for k in eligible {
        let (i, c) = sorted[k];
        if kept.iter().all(|&(j, _)| !within(i, j)) {
            kept.push((i, c));
        }
    }
    CandidateSet::from_entries(kept)
}

/// Scores every in-band frame and suppresses non-maxima.
///
/// Streams shorter than `2d + 1` frames have no candidates.
pub fn detect_candidates(
    stream: &FeatureStream,
    model: &LinearModel,
    params: &ChangeParams,
) -> Result<CandidateSet> {
    params.validate()?;
    if stream.len() < 2 * params.d + 1 {
        log::warn!(
            "stream {} has {} frames, fewer than 2d+1 = {}; no change candidates",
            stream.meta().video_id,
            stream.len(),
            2 * params.d + 1
        );
        return Ok(CandidateSet::default());
    }
    let track = change_confidences(stream, model, params.d)?;
    Ok(non_maximum_suppression(&track, params.suppression_radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Camera, LabelSpace, StreamMeta, Task};

    fn stream(rows: &[Vec<f64>]) -> FeatureStream {
        FeatureStream::from_rows(
            StreamMeta {
                video_id: "v".into(),
                camera: Camera::RightHand,
                fps: 6.0,
            },
            rows,
        )
        .unwrap()
    }

    fn track(values: &[f64]) -> Vec<(usize, f64)> {
        values.iter().copied().enumerate().collect()
    }

    #[test]
    fn change_feature_hand_computed() {
        let s = stream(&[vec![1.0, 4.0], vec![0.0, 0.0], vec![3.0, 1.0]]);
        assert_eq!(change_feature(&s, 1, 1).unwrap(), vec![2.0, 3.0]);
        let same = stream(&[vec![1.0, 4.0], vec![9.0, 9.0], vec![1.0, 4.0]]);
        assert_eq!(change_feature(&same, 1, 1).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn border_frames_have_no_change_feature() {
        let s = stream(&[vec![1.0], vec![2.0], vec![3.0], vec![4.0]]);
        assert!(matches!(
            change_feature(&s, 0, 1),
            Err(Error::OutOfBand { .. })
        ));
        assert!(matches!(
            change_feature(&s, 3, 1),
            Err(Error::OutOfBand { .. })
        ));
        assert!(change_feature(&s, 2, 1).is_ok());
        assert_eq!(change_band(4, 2), 0..0);
    }

    #[test]
    fn labels_around_single_transition() {
        let space = LabelSpace::standard(Task::FreeActive);
        let mut states = vec![0; 50];
        states.extend(vec![1; 50]);
        let truth = StateSequence::new(space.clone(), states).unwrap();
        let labels = label_change_frames(&truth, 3);
        let positives: Vec<usize> = (0..100).filter(|&i| labels[i] == Some(true)).collect();
        assert_eq!(positives, (47..=53).collect::<Vec<_>>());
        assert_eq!(labels[2], None);
        assert_eq!(labels[97], None);
        assert_eq!(labels[3], Some(false));

        let flat = StateSequence::new(space, vec![1; 30]).unwrap();
        assert!(label_change_frames(&flat, 3)
            .iter()
            .all(|l| *l != Some(true)));
    }

    #[test]
    fn close_transitions_merge_bands() {
        let space = LabelSpace::standard(Task::FreeActive);
        let mut states = vec![0; 40];
        states[20..24].iter_mut().for_each(|s| *s = 1);
        let truth = StateSequence::new(space, states).unwrap();
        let labels = label_change_frames(&truth, 3);
        let positives: Vec<usize> = (0..40).filter(|&i| labels[i] == Some(true)).collect();
        assert_eq!(positives, (17..=27).collect::<Vec<_>>());
    }

    #[test]
    fn nms_hand_run() {
        let c = non_maximum_suppression(&track(&[0.0, 5.0, 0.0, 0.0, 0.0, 7.0, 0.0]), 2);
        assert_eq!(c.entries(), &[(1, 5.0), (5, 7.0)]);
    }

    #[test]
    fn nms_monotone_keeps_last() {
        let values: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let c = non_maximum_suppression(&track(&values), 3);
        assert_eq!(c.indices(), vec![19]);
    }

    #[test]
    fn nms_equal_peaks() {
        let c = non_maximum_suppression(&track(&[0.0, 4.0, 0.0, 0.0, 0.0, 4.0, 0.0]), 2);
        assert_eq!(c.indices(), vec![1, 5]);
        // a plateau keeps its first frame only
        let c = non_maximum_suppression(&track(&[0.0, 4.0, 4.0, 4.0, 0.0]), 1);
        assert_eq!(c.indices(), vec![1, 3]);
        let c = non_maximum_suppression(&track(&[0.0, 4.0, 4.0, 4.0, 0.0]), 2);
        assert_eq!(c.indices(), vec![1]);
    }

    #[test]
    fn nms_skips_frames_dominated_by_a_suppressed_neighbour() {
        // 2 suppresses 1; 0 is not a local maximum because 1 > 0's confidence.
        let c = non_maximum_suppression(&track(&[5.0, 6.0, 7.0, 0.0]), 1);
        assert_eq!(c.indices(), vec![2]);
    }

    #[test]
    fn short_stream_has_no_candidates() {
        let s = stream(&[vec![1.0], vec![2.0], vec![3.0]]);
        let model = LinearModel::new(
            ModelTarget::Change,
            1,
            vec![1.0],
            vec![0.0],
            TrainConfig::default(),
        )
        .unwrap();
        assert!(detect_candidates(&s, &model, &ChangeParams::new(2))
            .unwrap()
            .is_empty());
        assert_eq!(
            detect_candidates(&s, &model, &ChangeParams::new(1))
                .unwrap()
                .indices(),
            vec![1]
        );
    }
}
