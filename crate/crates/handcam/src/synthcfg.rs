//! JSON configurations for `synth features` and `synth videos`.

use std::fs;
use std::path::{Path, PathBuf};

use handcam_core::synth::{
    gen_feature_stream, gen_video_set, random_centers, synthetic_hand, SynthConfig, VideoPlan,
    VideoSetConfig,
};
use handcam_core::DEFAULT_FPS;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::featfile::write_features;
use crate::ppm::save_video;
use crate::report::{write_json, RectJson};
use crate::textfmt::{format_label_space, format_labels, write_text};
use crate::{Error, Result};

fn default_min_dwell() -> usize {
    20
}
fn default_max_dwell() -> usize {
    40
}
fn default_sigma() -> f64 {
    1.0
}
fn default_fps() -> f32 {
    DEFAULT_FPS
}

/// Labelled feature streams drawn around random per-state centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSynth {
    pub seed: u64,
    pub videos: usize,
    pub states: usize,
    pub dim: usize,
    pub frames: usize,
    /// Standard deviation of center entries.
    pub spread: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_min_dwell")]
    pub min_dwell: usize,
    #[serde(default = "default_max_dwell")]
    pub max_dwell: usize,
    #[serde(default)]
    pub ramp_half_width: usize,
    #[serde(default = "default_fps")]
    pub fps: f32,
}

impl FeatureSynth {
    pub fn to_config(&self) -> SynthConfig {
        SynthConfig {
            seed: self.seed,
            frames: self.frames,
            min_dwell: self.min_dwell,
            max_dwell: self.max_dwell,
            centers: random_centers(self.seed, self.states, self.dim, self.spread),
            sigma: self.sigma,
            free_label_index: 0,
            ramp_half_width: self.ramp_half_width,
            fps: self.fps,
        }
    }
}

/// Writes `<id>.hcft`, `<id>.labels` and `label_space.txt` into `out`.
/// Returns the video ids in order.
pub fn write_feature_set(spec: &FeatureSynth, out: &Path) -> Result<Vec<String>> {
    if spec.videos == 0 {
        return Err(Error::Config("synth: videos must be at least 1".into()));
    }
    let config = spec.to_config();
    config.validate()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_text(
        &out.join("label_space.txt"),
        &format_label_space(&config.label_space()),
    )?;
    (0..spec.videos as u64)
        .into_par_iter()
        .map(|v| {
            let (stream, truth) = gen_feature_stream(&config, v)?;
            let id = stream.meta().video_id.clone();
            write_features(&out.join(format!("{id}.hcft")), &stream)?;
            write_text(&out.join(format!("{id}.labels")), &format_labels(&truth))?;
            Ok(id)
        })
        .collect()
}

fn default_size() -> usize {
    128
}
fn default_frames() -> usize {
    9
}
fn default_origin() -> [usize; 2] {
    [44, 44]
}
fn default_noise() -> u8 {
    120
}
fn default_jitter() -> usize {
    1
}
fn default_hand() -> usize {
    36
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanJson {
    pub video_id: String,
    pub dx: i64,
    pub dy: i64,
    pub scale: f64,
}

/// Frame sets with a fixed textured hand over a noisy background.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VideoSynth {
    pub seed: u64,
    #[serde(default = "default_size")]
    pub width: usize,
    #[serde(default = "default_size")]
    pub height: usize,
    #[serde(default = "default_frames")]
    pub frames: usize,
    #[serde(default = "default_origin")]
    pub origin: [usize; 2],
    #[serde(default = "default_noise")]
    pub noise: u8,
    #[serde(default = "default_jitter")]
    pub jitter: usize,
    /// Side of the square hand at registration scale 1.
    #[serde(default = "default_hand")]
    pub hand_size: usize,
    pub videos: Vec<PlanJson>,
}

/// Contents of `truth.json`: where every hand was planted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoTruth {
    pub video_id: String,
    pub dx: i64,
    pub dy: i64,
    pub scale: f64,
    pub hand_rect: RectJson,
}

/// Writes `<id>/frame_*.ppm`, `manifest.txt` and `truth.json` into `out`.
pub fn write_video_set(spec: &VideoSynth, out: &Path) -> Result<Vec<PathBuf>> {
    if spec.videos.is_empty() {
        return Err(Error::Config("synth: no videos planned".into()));
    }
    let hand = synthetic_hand(spec.seed, spec.hand_size, spec.hand_size)?;
    let config = VideoSetConfig {
        seed: spec.seed,
        width: spec.width,
        height: spec.height,
        frames: spec.frames,
        origin: (spec.origin[0], spec.origin[1]),
        noise: spec.noise,
        jitter: spec.jitter,
    };
    let plans: Vec<VideoPlan> = spec
        .videos
        .iter()
        .map(|p| VideoPlan {
            video_id: p.video_id.clone(),
            dx: p.dx,
            dy: p.dy,
            scale: p.scale,
        })
        .collect();
    let videos = gen_video_set(&hand, &config, &plans)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut dirs = Vec::new();
    let mut manifest = String::new();
    let mut truth = Vec::new();
    for v in &videos {
        let dir = out.join(&v.plan.video_id);
        save_video(&dir, &v.frames)?;
        manifest.push_str(&v.plan.video_id);
        manifest.push('\n');
        truth.push(VideoTruth {
            video_id: v.plan.video_id.clone(),
            dx: v.plan.dx,
            dy: v.plan.dy,
            scale: v.plan.scale,
            hand_rect: v.hand_rect.into(),
        });
        dirs.push(dir);
    }
    write_text(&out.join("manifest.txt"), &manifest)?;
    write_json(&out.join("truth.json"), &truth)?;
    Ok(dirs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let spec: VideoSynth = serde_json::from_str(
            r#"{"seed": 3, "videos": [{"video_id": "a", "dx": 0, "dy": 0, "scale": 1.0}]}"#,
        )
        .unwrap();
        assert_eq!(
            (spec.width, spec.hand_size, spec.origin),
            (128, 36, [44, 44])
        );
        assert!(
            serde_json::from_str::<VideoSynth>(r#"{"seed": 1, "videos": [], "x": 1}"#).is_err()
        );

        let f: FeatureSynth = serde_json::from_str(
            r#"{"seed": 1, "videos": 2, "states": 3, "dim": 4, "frames": 100, "spread": 2.0}"#,
        )
        .unwrap();
        let cfg = f.to_config();
        assert_eq!((cfg.states(), cfg.dim(), cfg.min_dwell), (3, 4, 20));
    }
}
