//! JSON, CSV and SVG artifacts: alignment reports, cross-validation tables
//! and evaluation reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use handcam_core::alignment::{AlignmentParams, AlignmentResult, Rect};
use handcam_core::classify::{CvOutcome, Hyperparameters};
use handcam_core::eval::EvalReport;
use handcam_core::StateSequence;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::{Error, Result};

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectJson {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl From<Rect> for RectJson {
    fn from(r: Rect) -> Self {
        RectJson {
            x: r.x,
            y: r.y,
            width: r.width,
            height: r.height,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedVideo {
    pub video_id: String,
    pub scale: f64,
    pub dx: i64,
    pub dy: i64,
    pub peak: f64,
    pub crop: RectJson,
}

/// Contents of `alignment.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignmentReport {
    pub reference_video_id: String,
    pub template_rect: RectJson,
    pub frame_size: [usize; 2],
    pub beta_threshold: f64,
    pub scales: Vec<f64>,
    pub videos: Vec<AlignedVideo>,
}

impl AlignmentReport {
    pub fn new(result: &AlignmentResult, params: &AlignmentParams) -> Self {
        AlignmentReport {
            reference_video_id: result.reference_video_id.clone(),
            template_rect: result.template_rect.into(),
            frame_size: [result.frame_size.0, result.frame_size.1],
            beta_threshold: params.beta_threshold,
            scales: params.scales.clone(),
            videos: result
                .entries
                .iter()
                .map(|e| AlignedVideo {
                    video_id: e.video_id.clone(),
                    scale: e.scale,
                    dx: e.dx,
                    dy: e.dy,
                    peak: e.peak,
                    crop: e.crop.into(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperJson {
    pub c: f64,
    pub d: usize,
    pub lambda: f64,
}

impl From<Hyperparameters> for HyperJson {
    fn from(h: Hyperparameters) -> Self {
        HyperJson {
            c: h.c,
            d: h.d,
            lambda: h.lambda,
        }
    }
}

impl From<HyperJson> for Hyperparameters {
    fn from(h: HyperJson) -> Self {
        Hyperparameters {
            c: h.c,
            d: h.d,
            lambda: h.lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvCellJson {
    pub c: f64,
    pub d: usize,
    pub lambda: f64,
    pub score: f64,
}

/// Contents of `cv.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub chosen: HyperJson,
    pub folds: usize,
    pub seed: u64,
    pub table: Vec<CvCellJson>,
}

impl CvReport {
    pub fn new(outcome: &CvOutcome, folds: usize, seed: u64) -> Self {
        CvReport {
            chosen: outcome.chosen.into(),
            folds,
            seed,
            table: outcome
                .table
                .iter()
                .map(|c| CvCellJson {
                    c: c.params.c,
                    d: c.params.d,
                    lambda: c.params.lambda,
                    score: c.score,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoScoreJson {
    pub video_id: String,
    pub frames: usize,
    pub accuracy: f64,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalJson {
    pub task: String,
    pub labels: Vec<String>,
    pub frames: u64,
    pub accuracy: f64,
    /// Accuracy of the baseline predictions, when one was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_accuracy: Option<f64>,
    /// `accuracy - baseline_accuracy`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub improvement: Option<f64>,
    pub videos: Vec<VideoScoreJson>,
    /// Rows are ground truth, columns predictions.
    pub confusion: Vec<Vec<u64>>,
}

impl EvalJson {
    pub fn new(report: &EvalReport, baseline: Option<&EvalReport>) -> Self {
        let k = report.confusion.k();
        EvalJson {
            task: report.task.name().to_string(),
            labels: report.labels.clone(),
            frames: report.frames,
            accuracy: report.accuracy,
            baseline_accuracy: baseline.map(|b| b.accuracy),
            improvement: baseline.map(|b| report.accuracy - b.accuracy),
            videos: report
                .videos
                .iter()
                .map(|v| VideoScoreJson {
                    video_id: v.video_id.clone(),
                    frames: v.frames,
                    accuracy: v.accuracy,
                })
                .collect(),
            confusion: (0..k).map(|t| report.confusion.row(t).to_vec()).collect(),
        }
    }
}

/// Flat per-video table with a final `ALL` row.
pub fn eval_csv(report: &EvalReport) -> String {
    let mut out = String::from("video_id,frames,accuracy\n");
    for v in &report.videos {
        let _ = writeln!(out, "{},{},{:?}", v.video_id, v.frames, v.accuracy);
    }
    let _ = writeln!(out, "ALL,{},{:?}", report.frames, report.accuracy);
    out
}

const ROW_HEIGHT: usize = 90;
const WIDTH: usize = 800;

/// Step plot of truth (gray) and prediction (red) per video, one band each.
pub fn timeline_svg(items: &[(&str, &StateSequence, &StateSequence)]) -> String {
    let height = ROW_HEIGHT * items.len().max(1) + 10;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" \
         font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    for (row, (id, pred, truth)) in items.iter().enumerate() {
        let top = row * ROW_HEIGHT + 20;
        let k = truth.label_space().len().max(2) - 1;
        let n = truth.len().max(1);
        let _ = writeln!(out, "<text x=\"4\" y=\"{}\">{}</text>", top - 6, escape(id));
        for (seq, color) in [(truth, "#888888"), (pred, "#d62728")] {
            let _ = write!(
                out,
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\""
            );
            for (i, &s) in seq.states().iter().enumerate() {
                let y = top + 60 - 60 * s / k;
                let x0 = 4.0 + (WIDTH - 8) as f64 * i as f64 / n as f64;
                let x1 = 4.0 + (WIDTH - 8) as f64 * (i + 1) as f64 / n as f64;
                let _ = write!(out, "{x0:.2},{y} {x1:.2},{y} ");
            }
            out.push_str("\"/>\n");
        }
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use handcam_core::{LabelSpace, Task};

    #[test]
    fn csv_and_svg_shapes() {
        let space = LabelSpace::standard(Task::FreeActive);
        let t = StateSequence::new(space.clone(), vec![0, 1, 1, 0]).unwrap();
        let p = StateSequence::new(space, vec![0, 1, 0, 0]).unwrap();
        let r = EvalReport::build(&[("a<b", &p, &t)]).unwrap();
        assert_eq!(
            eval_csv(&r),
            "video_id,frames,accuracy\na<b,4,0.75\nALL,4,0.75\n"
        );
        let svg = timeline_svg(&[("a<b", &p, &t)]);
        assert!(svg.contains("a&lt;b"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        let json = EvalJson::new(&r, Some(&r));
        assert_eq!(json.improvement, Some(0.0));
        assert_eq!(json.confusion, vec![vec![2, 0], vec![1, 1]]);
    }
}
