//! Pipeline configuration: a JSON object whose paths are relative to the
//! config file. Unknown keys are rejected.
//!
//! ```json
//! {
//!   "out": "run",
//!   "synth": { "features": { "seed": 7, "videos": 10, "states": 3, "dim": 8,
//!                            "frames": 200, "spread": 1.0, "sigma": 1.6 },
//!              "train_videos": 6 },
//!   "hyperparameters": "auto",
//!   "seed": 7,
//!   "discover": { "k": [2, 3, 4] }
//! }
//! ```
//!
//! Instead of `synth`, real data is given as `label_space` plus `train` and
//! `test` lists of `{ "features": ..., "labels": ... }`. An optional `align`
//! section runs frame alignment on a manifest or on synthetic frame sets.

use std::path::{Path, PathBuf};

use handcam_core::alignment::{DEFAULT_BETA_THRESHOLD, DEFAULT_SCALES};
use handcam_core::classify::{CrossValPlan, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::report::{read_json, HyperJson};
use crate::synthcfg::{FeatureSynth, VideoSynth};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPair {
    pub features: PathBuf,
    pub labels: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub features: FeatureSynth,
    /// The first `train_videos` generated videos train; the rest test.
    pub train_videos: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperChoice {
    Auto(AutoTag),
    Fixed(HyperJson),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

fn default_beta() -> f64 {
    DEFAULT_BETA_THRESHOLD
}
fn default_scales() -> Vec<f64> {
    DEFAULT_SCALES.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignSection {
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    #[serde(default)]
    pub synth: Option<VideoSynth>,
    #[serde(default = "default_beta")]
    pub beta_threshold: f64,
    #[serde(default = "default_scales")]
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscoverSection {
    pub k: Vec<usize>,
}

fn default_epochs() -> usize {
    TrainConfig::default().epochs
}
fn default_folds() -> usize {
    CrossValPlan::default().folds
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub out: PathBuf,
    #[serde(default)]
    pub label_space: Option<PathBuf>,
    #[serde(default)]
    pub synth: Option<SynthSection>,
    #[serde(default)]
    pub train: Vec<DataPair>,
    #[serde(default)]
    pub test: Vec<DataPair>,
    pub hyperparameters: HyperChoice,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub align: Option<AlignSection>,
    #[serde(default)]
    pub discover: Option<DiscoverSection>,
    /// Folder the relative paths were resolved against.
    #[serde(skip)]
    pub base: PathBuf,
}

impl PipelineConfig {
    /// Reads the file, resolves every path against its folder and checks
    /// that every referenced input exists.
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let mut cfg: PipelineConfig = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.check()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        self.base = base.to_path_buf();
        let fix = |p: &mut PathBuf| *p = base.join(&*p);
        fix(&mut self.out);
        if let Some(p) = &mut self.label_space {
            fix(p);
        }
        for pair in self.train.iter_mut().chain(&mut self.test) {
            fix(&mut pair.features);
            fix(&mut pair.labels);
        }
        if let Some(p) = self.align.as_mut().and_then(|a| a.manifest.as_mut()) {
            fix(p);
        }
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        match &self.synth {
            Some(s) => {
                if self.label_space.is_some() || !self.train.is_empty() || !self.test.is_empty() {
                    return bad("`synth` excludes `label_space`, `train` and `test`");
                }
                if s.train_videos == 0 || s.train_videos >= s.features.videos {
                    return bad("`synth.train_videos` must leave at least one video on each side");
                }
            }
            None => {
                if self.label_space.is_none() {
                    return bad("`label_space` is required without `synth`");
                }
                if self.train.is_empty() || self.test.is_empty() {
                    return bad("`train` and `test` must both list videos");
                }
            }
        }
        if self.epochs == 0 {
            return bad("`epochs` must be at least 1");
        }
        if let HyperChoice::Fixed(h) = self.hyperparameters {
            if h.c.is_nan() || h.c <= 0.0 || h.d == 0 || h.lambda.is_nan() || h.lambda < 0.0 {
                return bad("hyperparameters need c > 0, d >= 1 and lambda >= 0");
            }
        }
        if let Some(a) = &self.align {
            if a.manifest.is_some() == a.synth.is_some() {
                return bad("`align` needs exactly one of `manifest` and `synth`");
            }
        }
        if self.discover.as_ref().is_some_and(|d| d.k.is_empty()) {
            return bad("`discover.k` is empty");
        }
        for p in self.inputs() {
            if !p.is_file() {
                return Err(Error::Config(format!("input not found: {}", p.display())));
            }
        }
        Ok(())
    }

    /// External input files in a fixed order.
    pub fn inputs(&self) -> Vec<PathBuf> {
        let mut out: Vec<PathBuf> = self.label_space.iter().cloned().collect();
        for pair in self.train.iter().chain(&self.test) {
            out.push(pair.features.clone());
            out.push(pair.labels.clone());
        }
        if let Some(p) = self.align.as_ref().and_then(|a| a.manifest.clone()) {
            out.push(p);
        }
        out
    }
}
