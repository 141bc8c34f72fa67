//! End-to-end runner: synth, align, cv, training, detection, inference,
//! evaluation and discovery, driven by one [`PipelineConfig`].
//!
//! Output layout under `out`:
//!
//! ```text
//! data/               synthetic features, labels and label space
//! align/              aligned frames and alignment.json
//! cv.json             cross-validation table (hyperparameters "auto")
//! models/             state.hclm, change.hclm
//! candidates/<id>.tsv
//! pred/unary/<id>.labels, pred/full/<id>.labels
//! eval/               report.json, report.csv, unary.json, timeline.svg
//! discovery.json
//! manifest.json       digests of inputs and outputs, parameters, seed, version
//! ```
//!
//! A failing stage leaves an `INCOMPLETE` file naming it.

use std::fs;
use std::path::{Path, PathBuf};

use handcam_core::alignment::AlignmentParams;
use handcam_core::change::{detect_candidates, train_change_model, ChangeParams};
use handcam_core::classify::{
    cross_validate, train, CrossValPlan, Hyperparameters, LabeledVideo, TrainConfig,
};
use handcam_core::eval::EvalReport;
use handcam_core::{FeatureStream, StateSequence};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{HyperChoice, PipelineConfig, SynthSection};
use crate::modelfile::write_model;
use crate::report::{eval_csv, timeline_svg, write_json, CvReport, EvalJson, HyperJson};
use crate::stages::{
    align_dirs, collect_segments, discover, infer_full, infer_unary, load_labeled,
};
use crate::synthcfg::{write_feature_set, write_video_set};
use crate::textfmt::{
    format_candidates, format_labels, read_label_space, read_manifest, write_text,
};
use crate::{Error, Result};

pub const INCOMPLETE: &str = "INCOMPLETE";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunParams {
    pub hyperparameters: HyperJson,
    pub cross_validated: bool,
    pub epochs: usize,
    pub folds: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discover_k: Option<Vec<usize>>,
}

/// Contents of `manifest.json`. Paths are relative to the config folder
/// (inputs) or the output folder (outputs).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub params: RunParams,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

/// Headline numbers of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub chosen: Hyperparameters,
    pub unary_accuracy: f64,
    pub full_accuracy: f64,
    pub manifest: RunManifest,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn rel(path: &Path, base: &Path) -> String {
    path.strip_prefix(base)
        .unwrap_or(path)
        .to_string_lossy()
        .replace('\\', "/")
}

fn files_under(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            files_under(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

fn eval_items<'a>(
    videos: &'a [LabeledVideo],
    preds: &'a [StateSequence],
) -> Vec<(&'a str, &'a StateSequence, &'a StateSequence)> {
    videos
        .iter()
        .zip(preds)
        .map(|(v, p)| (v.stream.meta().video_id.as_str(), p, &v.truth))
        .collect()
}

fn mkdir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn stage<T>(name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    log::info!("stage {name}");
    f().map_err(|e| Error::Stage {
        stage: name.to_string(),
        source: Box::new(e),
    })
}

/// Runs every configured stage in order and writes `manifest.json` last.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunSummary> {
    let out = &cfg.out;
    mkdir(out)?;
    for stale in [INCOMPLETE, MANIFEST] {
        let p = out.join(stale);
        if p.exists() {
            fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
        }
    }
    match run_stages(cfg) {
        Ok(summary) => Ok(summary),
        Err(e) => {
            let stage = match &e {
                Error::Stage { stage, .. } => stage.as_str(),
                _ => "setup",
            };
            let marker = out.join(INCOMPLETE);
            let _ = fs::write(&marker, format!("stage: {stage}\nerror: {e}\n"));
            Err(e)
        }
    }
}

fn run_stages(cfg: &PipelineConfig) -> Result<RunSummary> {
    let out = cfg.out.as_path();
    let mut outputs: Vec<PathBuf> = Vec::new();

    // Data: synthetic sets land in out/data and are outputs, not inputs.
    let (space_path, train_pairs, test_pairs) = match &cfg.synth {
        Some(s) => stage("synth", || {
            let dir = out.join("data");
            let ids = write_feature_set(&s.features, &dir)?;
            let pair = |id: &String| {
                (
                    dir.join(format!("{id}.hcft")),
                    dir.join(format!("{id}.labels")),
                )
            };
            let pairs: Vec<_> = ids.iter().map(pair).collect();
            outputs.push(dir.join("label_space.txt"));
            for (f, l) in &pairs {
                outputs.push(f.clone());
                outputs.push(l.clone());
            }
            let (tr, te) = pairs.split_at(s.train_videos);
            Ok((dir.join("label_space.txt"), tr.to_vec(), te.to_vec()))
        })?,
        None => (
            cfg.label_space.clone().expect("checked by config"),
            cfg.train
                .iter()
                .map(|p| (p.features.clone(), p.labels.clone()))
                .collect(),
            cfg.test
                .iter()
                .map(|p| (p.features.clone(), p.labels.clone()))
                .collect(),
        ),
    };

    if let Some(a) = &cfg.align {
        stage("align", || {
            let videos = match (&a.manifest, &a.synth) {
                (Some(m), _) => read_manifest(m)?,
                (None, Some(spec)) => {
                    let dir = out.join("videos");
                    let dirs = write_video_set(spec, &dir)?;
                    files_under(&dir, &mut outputs)?;
                    spec.videos
                        .iter()
                        .map(|p| p.video_id.clone())
                        .zip(dirs)
                        .collect()
                }
                (None, None) => unreachable!("checked by config"),
            };
            let params = AlignmentParams {
                beta_threshold: a.beta_threshold,
                scales: a.scales.clone(),
            };
            let dir = out.join("align");
            align_dirs(&videos, &params, &dir)?;
            files_under(&dir, &mut outputs)
        })?;
    }

    let (train_set, test_set) = stage("load", || {
        let space = read_label_space(&space_path)?;
        Ok((
            load_labeled(&train_pairs, &space)?,
            load_labeled(&test_pairs, &space)?,
        ))
    })?;

    let chosen = match cfg.hyperparameters {
        HyperChoice::Fixed(h) => h.into(),
        HyperChoice::Auto(_) => stage("cv", || {
            let plan = CrossValPlan {
                folds: cfg.folds,
                epochs: cfg.epochs,
                seed: cfg.seed,
                ..CrossValPlan::default()
            };
            let outcome = cross_validate(&train_set, &plan)?;
            let path = out.join("cv.json");
            write_json(&path, &CvReport::new(&outcome, plan.folds, plan.seed))?;
            outputs.push(path);
            Ok(outcome.chosen)
        })?,
    };
    let train_cfg = TrainConfig {
        c: chosen.c,
        epochs: cfg.epochs,
        seed: cfg.seed,
    };
    let samples: Vec<(&FeatureStream, &StateSequence)> =
        train_set.iter().map(|v| (&v.stream, &v.truth)).collect();
    let models = out.join("models");

    let state_model = stage("train-state", || {
        mkdir(&models)?;
        let m = train(&samples, &train_cfg)?;
        let path = models.join("state.hclm");
        write_model(&path, &m)?;
        outputs.push(path);
        Ok(m)
    })?;
    let change_params = ChangeParams::new(chosen.d);
    let change_model = stage("train-change", || {
        let m = train_change_model(&samples, &change_params, &train_cfg)?;
        let path = models.join("change.hclm");
        write_model(&path, &m)?;
        outputs.push(path);
        Ok(m)
    })?;

    let candidates = stage("detect", || {
        let dir = out.join("candidates");
        mkdir(&dir)?;
        let sets = test_set
            .par_iter()
            .map(|v| {
                detect_candidates(&v.stream, &change_model, &change_params).map_err(Error::from)
            })
            .collect::<Result<Vec<_>>>()?;
        for (v, set) in test_set.iter().zip(&sets) {
            let path = dir.join(format!("{}.tsv", v.stream.meta().video_id));
            write_text(&path, &format_candidates(set))?;
            outputs.push(path);
        }
        Ok(sets)
    })?;

    let (unary, full) = stage("infer", || {
        let results = test_set
            .par_iter()
            .zip(&candidates)
            .map(|(v, c)| {
                Ok((
                    infer_unary(&state_model, &v.stream)?,
                    infer_full(&state_model, &v.stream, c, chosen.lambda)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let (unary, full): (Vec<_>, Vec<_>) = results.into_iter().unzip();
        for (mode, preds) in [("unary", &unary), ("full", &full)] {
            let dir = out.join("pred").join(mode);
            mkdir(&dir)?;
            for (v, p) in test_set.iter().zip(preds) {
                let path = dir.join(format!("{}.labels", v.stream.meta().video_id));
                write_text(&path, &format_labels(p))?;
                outputs.push(path);
            }
        }
        Ok((unary, full))
    })?;

    let (unary_report, full_report) = stage("eval", || {
        let unary_report = EvalReport::build(&eval_items(&test_set, &unary))?;
        let full_report = EvalReport::build(&eval_items(&test_set, &full))?;
        let dir = out.join("eval");
        mkdir(&dir)?;
        let json = [
            ("unary.json", EvalJson::new(&unary_report, None)),
            (
                "report.json",
                EvalJson::new(&full_report, Some(&unary_report)),
            ),
        ];
        for (name, value) in json {
            let path = dir.join(name);
            write_json(&path, &value)?;
            outputs.push(path);
        }
        let text = [
            ("report.csv", eval_csv(&full_report)),
            ("timeline.svg", timeline_svg(&eval_items(&test_set, &full))),
        ];
        for (name, value) in text {
            let path = dir.join(name);
            write_text(&path, &value)?;
            outputs.push(path);
        }
        Ok((unary_report, full_report))
    })?;

    if let Some(d) = &cfg.discover {
        stage("discover", || {
            let items: Vec<_> = test_set
                .iter()
                .zip(&full)
                .map(|(v, p)| (&v.stream, p))
                .collect();
            let segments = collect_segments(&items)?;
            let truth: Vec<_> = test_set
                .iter()
                .map(|v| (v.stream.meta().video_id.as_str(), &v.truth))
                .collect();
            let result = discover(&segments, &truth, &d.k)?;
            let path = out.join("discovery.json");
            write_json(&path, &result)?;
            outputs.push(path);
            Ok(())
        })?;
    }

    stage("manifest", || {
        let digest = |paths: &[PathBuf], base: &Path| -> Result<Vec<FileDigest>> {
            paths
                .iter()
                .map(|p| {
                    Ok(FileDigest {
                        path: rel(p, base),
                        sha256: sha256_file(p)?,
                    })
                })
                .collect()
        };
        outputs.sort();
        outputs.dedup();
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.seed,
            params: RunParams {
                hyperparameters: chosen.into(),
                cross_validated: matches!(cfg.hyperparameters, HyperChoice::Auto(_)),
                epochs: cfg.epochs,
                folds: cfg.folds,
                synth: cfg.synth.clone(),
                beta_threshold: cfg.align.as_ref().map(|a| a.beta_threshold),
                scales: cfg.align.as_ref().map(|a| a.scales.clone()),
                discover_k: cfg.discover.as_ref().map(|d| d.k.clone()),
            },
            inputs: digest(&cfg.inputs(), &cfg.base)?,
            outputs: digest(&outputs, out)?,
        };
        write_json(&out.join(MANIFEST), &manifest)?;
        Ok(RunSummary {
            chosen,
            unary_accuracy: unary_report.accuracy,
            full_accuracy: full_report.accuracy,
            manifest,
        })
    })
}
