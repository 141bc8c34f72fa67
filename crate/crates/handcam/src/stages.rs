//! Stage bodies shared by the subcommands and the pipeline runner.

use std::fs;
use std::path::{Path, PathBuf};

use handcam_core::alignment::{
    align_video, compute_pixel_stats, plan_alignment, stable_mask, AlignmentParams,
};
use handcam_core::change::CandidateSet;
use handcam_core::classify::{predict_frames, LabeledVideo, LinearModel};
use handcam_core::discovery::{active_segments, purity_curve, Segment};
use handcam_core::features::color_histogram;
use handcam_core::inference::{decode, InferenceProblem};
use handcam_core::media::{hflip, Image};
use handcam_core::{Camera, FeatureStream, LabelSpace, StateSequence, StreamMeta};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::featfile::read_features;
use crate::ppm::{load_video, save_video};
use crate::report::{write_json, AlignmentReport};
use crate::textfmt::read_labels;
use crate::{Error, Result};

/// Reads paired feature and label files; label counts must match frame counts.
pub fn load_labeled(pairs: &[(PathBuf, PathBuf)], space: &LabelSpace) -> Result<Vec<LabeledVideo>> {
    pairs
        .par_iter()
        .map(|(f, l)| {
            let stream = read_features(f)?;
            let truth = read_labels(l, space)?;
            if truth.len() != stream.len() {
                return Err(Error::parse(
                    l,
                    0,
                    format!(
                        "{} labels for {} frames in {}",
                        truth.len(),
                        stream.len(),
                        f.display()
                    ),
                ));
            }
            Ok(LabeledVideo { stream, truth })
        })
        .collect()
}

/// Per-frame argmax of the state model.
pub fn infer_unary(model: &LinearModel, stream: &FeatureStream) -> Result<StateSequence> {
    Ok(predict_frames(model, stream)?)
}

/// Exact decoding of the pairwise model over the change candidates.
pub fn infer_full(
    model: &LinearModel,
    stream: &FeatureStream,
    candidates: &CandidateSet,
    lambda: f64,
) -> Result<StateSequence> {
    let space = model
        .label_space()
        .ok_or_else(|| Error::Usage("infer needs a state model".into()))?;
    let scores = model.score_stream(stream)?;
    let problem =
        InferenceProblem::from_stream(scores, model.classes(), candidates, stream, lambda)?;
    Ok(StateSequence::new(space.clone(), decode(&problem)?)?)
}

/// Color-histogram features of a frame sequence. Left-hand frames are
/// mirrored first so both hands share one orientation.
pub fn extract_features(
    frames: &[Image],
    video_id: &str,
    camera: Camera,
    bins: usize,
    fps: f32,
) -> Result<FeatureStream> {
    let rows = frames
        .par_iter()
        .map(|f| {
            if camera == Camera::LeftHand {
                color_histogram(&hflip(f), bins)
            } else {
                color_histogram(f, bins)
            }
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(FeatureStream::from_rows(
        StreamMeta {
            video_id: video_id.to_string(),
            camera,
            fps,
        },
        &rows,
    )?)
}

/// Aligns every listed video directory into `out/<id>/` and writes
/// `out/alignment.json`.
pub fn align_dirs(
    videos: &[(String, PathBuf)],
    params: &AlignmentParams,
    out: &Path,
) -> Result<AlignmentReport> {
    params.validate()?;
    let loaded = videos
        .par_iter()
        .map(|(id, dir)| {
            let frames = load_video(dir)?;
            let stats = compute_pixel_stats(&frames).map_err(|e| Error::file(dir, e))?;
            let mask = stable_mask(&stats, params)?;
            Ok((id.as_str(), frames, stats, mask))
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<_> = loaded.iter().map(|(id, _, s, m)| (*id, s, m)).collect();
    let result = plan_alignment(&refs, params)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    result
        .entries
        .par_iter()
        .zip(&loaded)
        .try_for_each(|(entry, (id, frames, _, _))| {
            let aligned = align_video(frames, entry, result.frame_size)?;
            save_video(&out.join(id), &aligned)
        })?;
    let report = AlignmentReport::new(&result, params);
    write_json(&out.join("alignment.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityJson {
    pub k: usize,
    pub purity: f64,
}

/// Contents of `discovery.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryJson {
    pub segments: usize,
    pub curve: Vec<PurityJson>,
}

/// Active segments of every decoded video.
pub fn collect_segments(items: &[(&FeatureStream, &StateSequence)]) -> Result<Vec<Segment>> {
    let mut out = Vec::new();
    for (stream, decoded) in items {
        out.extend(active_segments(decoded, stream)?);
    }
    Ok(out)
}

/// Purity of the segment clustering at each `k`; `k` beyond the segment
/// count is dropped with a warning.
pub fn discover(
    segments: &[Segment],
    truth: &[(&str, &StateSequence)],
    ks: &[usize],
) -> Result<DiscoveryJson> {
    let usable: Vec<usize> = ks
        .iter()
        .copied()
        .filter(|&k| {
            let ok = k >= 1 && k <= segments.len();
            if !ok {
                log::warn!("skipping k = {k}: {} active segments", segments.len());
            }
            ok
        })
        .collect();
    let curve = if usable.is_empty() {
        Vec::new()
    } else {
        purity_curve(segments, truth, &usable)?
    };
    Ok(DiscoveryJson {
        segments: segments.len(),
        curve: curve
            .into_iter()
            .map(|(k, purity)| PurityJson { k, purity })
            .collect(),
    })
}
