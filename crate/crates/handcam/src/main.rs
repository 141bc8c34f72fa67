use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use handcam::config::PipelineConfig;
use handcam::featfile::{read_features, write_features};
use handcam::modelfile::{read_model, write_model};
use handcam::pipeline::run_pipeline;
use handcam::ppm::load_video;
use handcam::report::{eval_csv, read_json, timeline_svg, write_json, CvReport, EvalJson};
use handcam::stages::{
    align_dirs, collect_segments, discover, extract_features, infer_full, infer_unary, load_labeled,
};
use handcam::synthcfg::{write_feature_set, write_video_set, FeatureSynth, VideoSynth};
use handcam::textfmt::{
    format_candidates, format_labels, read_candidates, read_label_space, read_labels,
    read_manifest, write_text,
};
use handcam::{Error, Result};
use handcam_core::alignment::{AlignmentParams, DEFAULT_BETA_THRESHOLD};
use handcam_core::change::{detect_candidates, train_change_model, ChangeParams};
use handcam_core::classify::{cross_validate, train, CrossValPlan, TrainConfig};
use handcam_core::eval::EvalReport;
use handcam_core::features::{fuse_all, DEFAULT_HISTOGRAM_BINS};
use handcam_core::{Camera, StateSequence, DEFAULT_FPS};

/// Hand-state recognition from wrist-mounted camera streams.
#[derive(Debug, Parser)]
#[command(name = "handcam", version, about)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic feature streams or frame sets.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Align video frame directories to a common reference.
    Align(AlignArgs),
    /// Compute color-histogram features of a frame directory.
    Extract(ExtractArgs),
    /// Concatenate per-frame features of several streams.
    Fuse(FuseArgs),
    /// Train the frame-state model.
    TrainState(TrainArgs),
    /// Train the state-change model.
    TrainChange(TrainChangeArgs),
    /// Choose C, d and lambda by cross-validation.
    Cv(CvArgs),
    /// Score change candidates of one stream.
    DetectChanges(DetectArgs),
    /// Predict the state of every frame.
    Infer(InferArgs),
    /// Cluster predicted active segments and report purity.
    Discover(DiscoverArgs),
    /// Compare predictions with ground truth.
    Eval(EvalArgs),
    /// Run every stage from one config file.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Subcommand)]
enum SynthCommand {
    /// Labelled feature streams: <id>.hcft, <id>.labels and label_space.txt.
    Features {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Frame sets with a planted hand: <id>/frame_*.ppm, manifest.txt and truth.json.
    Videos {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct AlignArgs {
    /// Text file listing one video directory per line.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BETA_THRESHOLD)]
    beta_threshold: f64,
    /// Comma-separated scales tried by the matcher.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.9,1.0,1.1,1.2,1.3,1.4,1.5"
    )]
    scales: Vec<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CameraArg {
    Left,
    Right,
    Head,
}

impl From<CameraArg> for Camera {
    fn from(c: CameraArg) -> Camera {
        match c {
            CameraArg::Left => Camera::LeftHand,
            CameraArg::Right => Camera::RightHand,
            CameraArg::Head => Camera::Head,
        }
    }
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Directory of frame_NNNNNN.ppm files.
    #[arg(long)]
    video: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Left-hand frames are mirrored before feature extraction.
    #[arg(long, value_enum, default_value = "right")]
    camera: CameraArg,
    #[arg(long, default_value_t = DEFAULT_HISTOGRAM_BINS)]
    bins: usize,
    #[arg(long, default_value_t = DEFAULT_FPS)]
    fps: f32,
    /// Video id; defaults to the directory name.
    #[arg(long)]
    id: Option<String>,
}

#[derive(Debug, Args)]
struct FuseArgs {
    /// Streams in concatenation order; metadata comes from the first.
    #[arg(long, num_args = 2.., required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct LabeledArgs {
    /// Feature files, paired in order with --labels.
    #[arg(long, num_args = 1.., required = true)]
    features: Vec<PathBuf>,
    #[arg(long, num_args = 1.., required = true)]
    labels: Vec<PathBuf>,
    #[arg(long)]
    label_space: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: LabeledArgs,
    /// Regularization strength.
    #[arg(long, default_value_t = 0.01)]
    c: f64,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainChangeArgs {
    #[command(flatten)]
    train: TrainArgs,
    /// Half-width of the change feature.
    #[arg(long, default_value_t = 3)]
    d: usize,
}

#[derive(Debug, Args)]
struct CvArgs {
    #[command(flatten)]
    data: LabeledArgs,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    /// Seeds the fold assignment.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long)]
    features: PathBuf,
    /// Change model from train-change.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Suppression radius; defaults to d.
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Unary,
    Full,
}

#[derive(Debug, Args)]
struct InferArgs {
    #[arg(long)]
    features: PathBuf,
    /// State model from train-state.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value = "full")]
    mode: Mode,
    /// Candidate table from detect-changes (full mode).
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// Pairwise weight, or `auto` to take it from --cv.
    #[arg(long, default_value = "1")]
    lambda: String,
    #[arg(long)]
    cv: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DiscoverArgs {
    #[arg(long, num_args = 1.., required = true)]
    features: Vec<PathBuf>,
    /// Decoded label files, paired in order with --features.
    #[arg(long, num_args = 1.., required = true)]
    pred: Vec<PathBuf>,
    /// Ground-truth label files, paired in order with --features.
    #[arg(long, num_args = 1.., required = true)]
    truth: Vec<PathBuf>,
    #[arg(long)]
    label_space: PathBuf,
    #[arg(long, conflicts_with = "k_range", required_unless_present = "k_range")]
    k: Option<usize>,
    /// Inclusive range `a:b`.
    #[arg(long)]
    k_range: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, num_args = 1.., required = true)]
    pred: Vec<PathBuf>,
    #[arg(long, num_args = 1.., required = true)]
    truth: Vec<PathBuf>,
    #[arg(long)]
    label_space: PathBuf,
    /// Directory for report.json, report.csv and timeline.svg.
    #[arg(long)]
    report: PathBuf,
    /// Baseline predictions, paired with --truth, for the improvement figure.
    #[arg(long, num_args = 1..)]
    baseline: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
}

fn pairs(a: &[PathBuf], b: &[PathBuf], what: &str) -> Result<Vec<(PathBuf, PathBuf)>> {
    if a.len() != b.len() {
        return Err(Error::Usage(format!(
            "{what}: {} and {} files given; they pair up in order",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().cloned().zip(b.iter().cloned()).collect())
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn mkdir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn parse_k_range(text: &str) -> Result<Vec<usize>> {
    let bad = || {
        Error::Usage(format!(
            "--k-range expects a:b with 1 <= a <= b, got {text:?}"
        ))
    };
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(SynthCommand::Features { config, out }) => {
            let spec: FeatureSynth = read_json(&config)?;
            let ids = write_feature_set(&spec, &out)?;
            println!("wrote {} videos to {}", ids.len(), out.display());
        }
        Command::Synth(SynthCommand::Videos { config, out }) => {
            let spec: VideoSynth = read_json(&config)?;
            let dirs = write_video_set(&spec, &out)?;
            println!("wrote {} videos to {}", dirs.len(), out.display());
        }
        Command::Align(a) => {
            let videos = read_manifest(&a.manifest)?;
            let params = AlignmentParams {
                beta_threshold: a.beta_threshold,
                scales: a.scales,
            };
            let report = align_dirs(&videos, &params, &a.out)?;
            println!("reference {}", report.reference_video_id);
            for v in &report.videos {
                println!(
                    "{}\tscale {}\toffset ({}, {})\tpeak {:.4}",
                    v.video_id, v.scale, v.dx, v.dy, v.peak
                );
            }
        }
        Command::Extract(a) => {
            let frames = load_video(&a.video)?;
            let id = a.id.unwrap_or_else(|| {
                a.video
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default()
            });
            let stream = extract_features(&frames, &id, a.camera.into(), a.bins, a.fps)?;
            write_features(&a.out, &stream)?;
        }
        Command::Fuse(a) => {
            let streams = a
                .inputs
                .iter()
                .map(|p| read_features(p))
                .collect::<Result<Vec<_>>>()?;
            write_features(&a.out, &fuse_all(&streams)?)?;
        }
        Command::TrainState(a) => {
            let space = read_label_space(&a.data.label_space)?;
            let videos = load_labeled(
                &pairs(&a.data.features, &a.data.labels, "train-state")?,
                &space,
            )?;
            let samples: Vec<_> = videos.iter().map(|v| (&v.stream, &v.truth)).collect();
            let config = TrainConfig {
                c: a.c,
                epochs: a.epochs,
                seed: a.seed,
            };
            write_model(&a.out, &train(&samples, &config)?)?;
        }
        Command::TrainChange(TrainChangeArgs { train: a, d }) => {
            let space = read_label_space(&a.data.label_space)?;
            let videos = load_labeled(
                &pairs(&a.data.features, &a.data.labels, "train-change")?,
                &space,
            )?;
            let samples: Vec<_> = videos.iter().map(|v| (&v.stream, &v.truth)).collect();
            let config = TrainConfig {
                c: a.c,
                epochs: a.epochs,
                seed: a.seed,
            };
            let model = train_change_model(&samples, &ChangeParams::new(d), &config)?;
            write_model(&a.out, &model)?;
        }
        Command::Cv(a) => {
            let space = read_label_space(&a.data.label_space)?;
            let videos = load_labeled(&pairs(&a.data.features, &a.data.labels, "cv")?, &space)?;
            let plan = CrossValPlan {
                folds: a.folds,
                epochs: a.epochs,
                seed: a.seed,
                ..CrossValPlan::default()
            };
            let outcome = cross_validate(&videos, &plan)?;
            write_json(&a.out, &CvReport::new(&outcome, plan.folds, plan.seed))?;
            let h = outcome.chosen;
            println!("chosen c {} d {} lambda {}", h.c, h.d, h.lambda);
        }
        Command::DetectChanges(a) => {
            let stream = read_features(&a.features)?;
            let model = read_model(&a.model)?;
            let params = ChangeParams {
                d: a.d,
                suppression_radius: a.radius.unwrap_or(a.d),
            };
            let set = detect_candidates(&stream, &model, &params)?;
            write_text(&a.out, &format_candidates(&set))?;
        }
        Command::Infer(a) => {
            let stream = read_features(&a.features)?;
            let model = read_model(&a.model)?;
            let decoded = match a.mode {
                Mode::Unary => infer_unary(&model, &stream)?,
                Mode::Full => {
                    let path = a
                        .candidates
                        .ok_or_else(|| Error::Usage("--mode full needs --candidates".into()))?;
                    let lambda = if a.lambda == "auto" {
                        let cv =
                            a.cv.ok_or_else(|| Error::Usage("--lambda auto needs --cv".into()))?;
                        read_json::<CvReport>(&cv)?.chosen.lambda
                    } else {
                        a.lambda.parse().map_err(|_| {
                            Error::Usage(format!(
                                "--lambda expects a number or auto, got {:?}",
                                a.lambda
                            ))
                        })?
                    };
                    infer_full(&model, &stream, &read_candidates(&path)?, lambda)?
                }
            };
            write_text(&a.out, &format_labels(&decoded))?;
        }
        Command::Discover(a) => {
            let space = read_label_space(&a.label_space)?;
            let ks = match (a.k, &a.k_range) {
                (Some(k), _) => vec![k],
                (None, Some(r)) => parse_k_range(r)?,
                (None, None) => unreachable!("clap requires one"),
            };
            let fp = pairs(&a.features, &a.pred, "discover")?;
            let ft = pairs(&a.features, &a.truth, "discover")?;
            let mut streams = Vec::new();
            let mut preds = Vec::new();
            let mut truths = Vec::new();
            for ((f, p), (_, t)) in fp.iter().zip(&ft) {
                streams.push(read_features(f)?);
                preds.push(read_labels(p, &space)?);
                truths.push(read_labels(t, &space)?);
            }
            let items: Vec<_> = streams.iter().zip(&preds).collect();
            let segments = collect_segments(&items)?;
            let truth: Vec<_> = streams
                .iter()
                .map(|s| s.meta().video_id.as_str())
                .zip(&truths)
                .collect();
            let result = discover(&segments, &truth, &ks)?;
            mkdir(&a.out)?;
            write_json(&a.out.join("discovery.json"), &result)?;
            for p in &result.curve {
                println!("k {}\tpurity {:.4}", p.k, p.purity);
            }
        }
        Command::Eval(a) => {
            let space = read_label_space(&a.label_space)?;
            let load = |files: &[PathBuf]| {
                files
                    .iter()
                    .map(|p| read_labels(p, &space))
                    .collect::<Result<Vec<StateSequence>>>()
            };
            pairs(&a.pred, &a.truth, "eval")?;
            let preds = load(&a.pred)?;
            let truths = load(&a.truth)?;
            let ids: Vec<String> = a.truth.iter().map(|p| stem(p)).collect();
            let items = |ps: &[StateSequence]| -> Vec<(String, StateSequence, StateSequence)> {
                ids.iter()
                    .zip(ps)
                    .zip(&truths)
                    .map(|((i, p), t)| (i.clone(), p.clone(), t.clone()))
                    .collect()
            };
            let build = |owned: &[(String, StateSequence, StateSequence)]| {
                let refs: Vec<_> = owned.iter().map(|(i, p, t)| (i.as_str(), p, t)).collect();
                EvalReport::build(&refs)
            };
            let full = items(&preds);
            let report = build(&full)?;
            let baseline = if a.baseline.is_empty() {
                None
            } else {
                pairs(&a.baseline, &a.truth, "eval --baseline")?;
                Some(build(&items(&load(&a.baseline)?))?)
            };
            mkdir(&a.report)?;
            write_json(
                &a.report.join("report.json"),
                &EvalJson::new(&report, baseline.as_ref()),
            )?;
            write_text(&a.report.join("report.csv"), &eval_csv(&report))?;
            let refs: Vec<_> = full.iter().map(|(i, p, t)| (i.as_str(), p, t)).collect();
            write_text(&a.report.join("timeline.svg"), &timeline_svg(&refs))?;
            println!(
                "accuracy {:.4} over {} frames",
                report.accuracy, report.frames
            );
            if let Some(b) = baseline {
                println!(
                    "baseline {:.4}, improvement {:+.4}",
                    b.accuracy,
                    report.accuracy - b.accuracy
                );
            }
        }
        Command::Pipeline(a) => {
            let cfg = PipelineConfig::load(&a.config)?;
            let s = run_pipeline(&cfg)?;
            println!(
                "c {} d {} lambda {}\tunary {:.4}\tfull {:.4}",
                s.chosen.c, s.chosen.d, s.chosen.lambda, s.unary_accuracy, s.full_accuracy
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let result = std::panic::catch_unwind(|| run(cli))
        .unwrap_or_else(|_| Err(Error::Internal("unexpected panic".into())));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
