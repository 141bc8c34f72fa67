//! Seeded synthetic data: feature streams with planted state dynamics and
//! frame sets with a planted hand placement.
//!
//! Every generator is a pure function of its configuration and seed.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::alignment::Rect;
use crate::media::{resize_bilinear, Image};
use crate::{Camera, Error, FeatureStream, LabelSpace, Result, StateSequence, StreamMeta, Task};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub frames: usize,
    /// Shortest run of one state, in frames.
    pub min_dwell: usize,
    /// Longest run of one state, in frames.
    pub max_dwell: usize,
    /// One center per state, all of the same dimension.
    pub centers: Vec<Vec<f64>>,
    /// Standard deviation of the isotropic Gaussian noise.
    pub sigma: f64,
    pub free_label_index: usize,
    /// Frames on each side of a transition over which features blend
    /// linearly between the two centers; 0 gives abrupt changes.
    pub ramp_half_width: usize,
    pub fps: f32,
}

impl SynthConfig {
    /// Configuration with `states` random centers drawn from `N(0, spread²)` in `dim` dimensions.
    pub fn random(seed: u64, states: usize, dim: usize, frames: usize, spread: f64) -> Self {
        SynthConfig {
            seed,
            frames,
            min_dwell: 20,
            max_dwell: 40,
            centers: random_centers(seed, states, dim, spread),
            sigma: 1.0,
            free_label_index: 0,
            ramp_half_width: 0,
            fps: crate::DEFAULT_FPS,
        }
    }

    pub fn states(&self) -> usize {
        self.centers.len()
    }

    pub fn dim(&self) -> usize {
        self.centers.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.centers.len();
        if k < 2 {
            return Err(Error::InvalidParameter(
                "at least two states are required".into(),
            ));
        }
        let dim = self.dim();
        if dim == 0 || self.centers.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidParameter(
                "centers must share one positive dimension".into(),
            ));
        }
        if self.centers.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        for a in 0..k {
            for b in a + 1..k {
                if self.centers[a] == self.centers[b] {
                    return Err(Error::InvalidParameter(format!(
                        "centers {a} and {b} coincide"
                    )));
                }
            }
        }
        if self.min_dwell == 0 || self.max_dwell < self.min_dwell {
            return Err(Error::InvalidParameter(
                "need 1 <= min_dwell <= max_dwell".into(),
            ));
        }
        if self.sigma < 0.0 || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter("sigma must be non-negative".into()));
        }
        if self.free_label_index >= k {
            return Err(Error::InvalidParameter(
                "free label index out of range".into(),
            ));
        }
        if 2 * self.ramp_half_width > self.min_dwell {
            return Err(Error::InvalidParameter(
                "ramps must fit inside the shortest run".into(),
            ));
        }
        if self.frames == 0 {
            return Err(Error::InvalidParameter("frames must be positive".into()));
        }
        Ok(())
    }

    /// Label space matching the state count: free/active for two states,
    /// otherwise the standard space of that size.
    pub fn label_space(&self) -> LabelSpace {
        let k = self.states();
        let task = match k {
            2 => Task::FreeActive,
            13 => Task::Gesture,
            24 => Task::ObjectCategory,
            k => Task::Custom(k),
        };
        let standard = LabelSpace::standard(task);
        let mut labels = standard.labels().to_vec();
        // standard spaces put the free label first
        labels.swap(0, self.free_label_index);
        LabelSpace::new(task, labels, self.free_label_index).expect("standard labels are valid")
    }
}

/// `states` centers with entries drawn from `N(0, spread²)`.
pub fn random_centers(seed: u64, states: usize, dim: usize, spread: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..states)
        .map(|_| {
            (0..dim)
                .map(|_| spread * Distribution::<f64>::sample(&StandardNormal, &mut rng))
                .collect::<Vec<f64>>()
        })
        .collect()
}

/// State runs of length in `[min_dwell, max_dwell]` (the last one truncated
/// by the stream end), each followed by a uniformly drawn different state.
fn gen_states(rng: &mut ChaCha8Rng, config: &SynthConfig) -> Vec<usize> {
    let k = config.states();
    let mut states = Vec::with_capacity(config.frames);
    let mut s = rng.random_range(0..k);
    while states.len() < config.frames {
        let run = rng.random_range(config.min_dwell..=config.max_dwell);
        let take = run.min(config.frames - states.len());
        states.extend(core::iter::repeat_n(s, take));
        let step = rng.random_range(1..k);
        s = (s + step) % k;
    }
    states
}

/// One video of the given index; videos of one configuration draw from
/// independent streams of the same seed.
pub fn gen_feature_stream(
    config: &SynthConfig,
    video: u64,
) -> Result<(FeatureStream, StateSequence)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(video);
    let states = gen_states(&mut rng, config);
    let truth = StateSequence::new(config.label_space(), states)?;
    let dim = config.dim();
    let noise =
        Normal::new(0.0, config.sigma).map_err(|_| Error::InvalidParameter("bad sigma".into()))?;

    let mut base: Vec<Vec<f64>> = truth
        .states()
        .iter()
        .map(|&s| config.centers[s].clone())
        .collect();
    let w = config.ramp_half_width;
    if w > 0 {
        let st = truth.states();
        for t in truth.transitions() {
            let (from, to) = (&config.centers[st[t - 1]], &config.centers[st[t]]);
            let lo = t.saturating_sub(w);
            let hi = (t + w).min(st.len());
            for (i, row) in base.iter_mut().enumerate().take(hi).skip(lo) {
                let alpha = (i as f64 + 0.5 - (t as f64 - w as f64)) / (2 * w) as f64;
                for (v, (a, b)) in row.iter_mut().zip(from.iter().zip(to)) {
                    *v = (1.0 - alpha) * a + alpha * b;
                }
            }
        }
    }

    let mut data = Vec::with_capacity(config.frames * dim);
    for row in &base {
        for &c in row {
            let e: f64 = if config.sigma > 0.0 {
                noise.sample(&mut rng)
            } else {
                0.0
            };
            data.push(c + e);
        }
    }
    let meta = StreamMeta {
        video_id: format!("synth{video:03}"),
        camera: Camera::RightHand,
        fps: config.fps,
    };
    let stream = FeatureStream::new(meta, config.frames, dim, data)?;
    Ok((stream, truth))
}

/// `videos` consecutive videos `0..videos`.
pub fn gen_dataset(
    config: &SynthConfig,
    videos: usize,
) -> Result<Vec<(FeatureStream, StateSequence)>> {
    (0..videos as u64)
        .map(|v| gen_feature_stream(config, v))
        .collect()
}

/// Two Gaussian blobs with unit noise whose centers sit `margin` standard
/// deviations either side of the hyperplane `x₀ = 0`. Samples falling on the
/// wrong side are redrawn, so the set is always linearly separable. Labels
/// alternate 0, 1, 0, ... (class 1 on the positive side).
pub fn gaussian_blobs(seed: u64, n: usize, dim: usize, margin: f64) -> (Vec<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % 2;
        let side = if label == 1 { 1.0 } else { -1.0 };
        let x0 = loop {
            let v = side * margin + Distribution::<f64>::sample(&StandardNormal, &mut rng);
            if v * side > 0.0 {
                break v;
            }
        };
        rows.push(x0);
        for _ in 1..dim {
            rows.push(StandardNormal.sample(&mut rng));
        }
        labels.push(label);
    }
    (rows, labels)
}

/// Smoothly textured RGB patch standing in for a hand.
pub fn synthetic_hand(seed: u64, width: usize, height: usize) -> Result<Image> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (gw, gh) = (width.div_ceil(4).max(2), height.div_ceil(4).max(2));
    let coarse: Vec<u8> = (0..gw * gh * 3)
        .map(|_| rng.random_range(40..=230))
        .collect();
    let coarse = Image::new(gw, gh, 3, coarse)?;
    let smooth = resize_bilinear(&coarse, width as f64 / gw as f64)?;
    let smooth = smooth.crop_replicate(0, 0, width, height)?;
    let mut px = smooth.into_pixels();
    for v in px.iter_mut() {
        let grain: i16 = rng.random_range(-6..=6);
        *v = (*v as i16 + grain).clamp(0, 255) as u8;
    }
    Image::new(width, height, 3, px)
}

/// Placement of the hand in one synthetic video.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoPlan {
    pub video_id: String,
    /// Offset of the hand from the configured origin, in pixels.
    pub dx: i64,
    pub dy: i64,
    /// Registration scale: the hand is drawn at `1/scale` of its base size,
    /// so resizing the frame by `scale` restores the base size.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoSetConfig {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    /// Top-left corner of the hand at zero offset.
    pub origin: (usize, usize),
    /// Background is mid-gray plus uniform noise of this amplitude.
    pub noise: u8,
    /// Per-frame hand jitter, uniform in `[-jitter, jitter]` pixels on each axis.
    pub jitter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthVideo {
    pub plan: VideoPlan,
    /// Where the hand sits at zero jitter.
    pub hand_rect: Rect,
    pub frames: Vec<Image>,
}

/// Frames made of a noisy background with the hand pasted per plan.
pub fn gen_video_set(
    hand: &Image,
    config: &VideoSetConfig,
    plans: &[VideoPlan],
) -> Result<Vec<SynthVideo>> {
    if hand.channels() != 3 {
        return Err(Error::InvalidParameter("hand image must be RGB".into()));
    }
    if config.frames == 0 || config.width == 0 || config.height == 0 {
        return Err(Error::InvalidParameter("empty video configuration".into()));
    }
    let mut out = Vec::with_capacity(plans.len());
    for (v, plan) in plans.iter().enumerate() {
        if plan.scale.is_nan() || plan.scale <= 0.0 {
            return Err(Error::InvalidParameter("scale must be positive".into()));
        }
        let drawn = resize_bilinear(hand, 1.0 / plan.scale)?;
        let x = config.origin.0 as i64 + plan.dx;
        let y = config.origin.1 as i64 + plan.dy;
        let j = config.jitter as i64;
        if x - j < 0
            || y - j < 0
            || x + j + drawn.width() as i64 > config.width as i64
            || y + j + drawn.height() as i64 > config.height as i64
        {
            return Err(Error::InvalidParameter(format!(
                "hand of video {} leaves the frame",
                plan.video_id
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(v as u64);
        let mut frames = Vec::with_capacity(config.frames);
        for _ in 0..config.frames {
            let (jx, jy) = if j > 0 {
                (rng.random_range(-j..=j), rng.random_range(-j..=j))
            } else {
                (0, 0)
            };
            let mut px: Vec<u8> = Vec::with_capacity(config.width * config.height * 3);
            let amp = config.noise as i16;
            for _ in 0..config.width * config.height * 3 {
                let n: i16 = if amp > 0 {
                    rng.random_range(-amp..=amp)
                } else {
                    0
                };
                px.push((128 + n).clamp(0, 255) as u8);
            }
            let (hx, hy) = ((x + jx) as usize, (y + jy) as usize);
            let dw = drawn.width() * 3;
            for row in 0..drawn.height() {
                let dst = ((hy + row) * config.width + hx) * 3;
                px[dst..dst + dw].copy_from_slice(&drawn.pixels()[row * dw..(row + 1) * dw]);
            }
            frames.push(Image::new(config.width, config.height, 3, px)?);
        }
        out.push(SynthVideo {
            plan: plan.clone(),
            hand_rect: Rect {
                x: x as usize,
                y: y as usize,
                width: drawn.width(),
                height: drawn.height(),
            },
            frames,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn noiseless_frames_equal_centers() {
        let mut cfg = SynthConfig::random(4, 3, 5, 150, 3.0);
        cfg.sigma = 0.0;
        let (stream, truth) = gen_feature_stream(&cfg, 0).unwrap();
        for (i, &s) in truth.states().iter().enumerate() {
            assert_eq!(stream.row(i), cfg.centers[s].as_slice());
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let cfg = SynthConfig::random(9, 3, 4, 120, 2.0);
        assert_eq!(
            gen_feature_stream(&cfg, 2).unwrap(),
            gen_feature_stream(&cfg, 2).unwrap()
        );
        assert_ne!(
            gen_feature_stream(&cfg, 2).unwrap().0,
            gen_feature_stream(&cfg, 3).unwrap().0
        );
    }

    #[test]
    fn runs_respect_minimum_dwell() {
        for seed in 0..20 {
            let mut cfg = SynthConfig::random(seed, 3, 2, 200, 1.0);
            cfg.min_dwell = 20;
            cfg.max_dwell = 35;
            let (_, truth) = gen_feature_stream(&cfg, 0).unwrap();
            let runs = truth.runs();
            let (last, inner) = runs.split_last().unwrap();
            assert!(inner.iter().all(|&(a, b, _)| b - a >= 20 && b - a <= 35));
            assert!(last.1 - last.0 <= 35);
            assert!(runs.windows(2).all(|w| w[0].2 != w[1].2));
        }
    }

    #[test]
    fn ramps_blend_between_centers() {
        let mut cfg = SynthConfig::random(1, 2, 1, 100, 1.0);
        cfg.centers = vec![vec![0.0], vec![12.0]];
        cfg.sigma = 0.0;
        cfg.ramp_half_width = 6;
        let (stream, truth) = gen_feature_stream(&cfg, 0).unwrap();
        let t = truth.transitions()[0];
        let (a, b) = (truth.states()[t - 1], truth.states()[t]);
        let (ca, cb) = (cfg.centers[a][0], cfg.centers[b][0]);
        assert_eq!(stream.row(t - 7)[0], ca);
        assert_eq!(stream.row(t + 6)[0], cb);
        let mid = stream.row(t)[0];
        assert!((mid - (ca + (cb - ca) * 6.5 / 12.0)).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = SynthConfig::random(1, 2, 2, 50, 1.0);
        cfg.centers[1] = cfg.centers[0].clone();
        assert!(cfg.validate().is_err());
        let mut cfg = SynthConfig::random(1, 2, 2, 50, 1.0);
        cfg.min_dwell = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn blobs_are_separable() {
        let (rows, labels) = gaussian_blobs(3, 200, 4, 5.0);
        for (i, &l) in labels.iter().enumerate() {
            assert_eq!(rows[i * 4] > 0.0, l == 1);
        }
    }

    fn plan(id: &str, dx: i64, dy: i64, scale: f64) -> VideoPlan {
        VideoPlan {
            video_id: id.into(),
            dx,
            dy,
            scale,
        }
    }

    #[test]
    fn quiet_set_repeats_the_composite() {
        let hand = synthetic_hand(5, 12, 10).unwrap();
        let cfg = VideoSetConfig {
            seed: 1,
            width: 40,
            height: 30,
            frames: 3,
            origin: (10, 8),
            noise: 0,
            jitter: 0,
        };
        let vids = gen_video_set(&hand, &cfg, &[plan("a", 0, 0, 1.0)]).unwrap();
        let frames = &vids[0].frames;
        assert!(frames.iter().all(|f| f == &frames[0]));
        assert_eq!(frames[0].crop(10, 8, 12, 10).unwrap(), hand);
        assert_eq!(frames[0].pixel(0, 0), &[128, 128, 128]);
    }

    #[test]
    fn video_sets_are_deterministic_and_bounded() {
        let hand = synthetic_hand(5, 12, 10).unwrap();
        let cfg = VideoSetConfig {
            seed: 1,
            width: 60,
            height: 50,
            frames: 2,
            origin: (20, 20),
            noise: 100,
            jitter: 1,
        };
        let plans = [plan("a", 12, -7, 1.2), plan("b", -3, 4, 0.9)];
        assert_eq!(
            gen_video_set(&hand, &cfg, &plans).unwrap(),
            gen_video_set(&hand, &cfg, &plans).unwrap()
        );
        assert!(gen_video_set(&hand, &cfg, &[plan("c", 40, 0, 1.0)]).is_err());
    }
}
