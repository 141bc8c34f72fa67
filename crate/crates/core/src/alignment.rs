//! Across-video hand alignment.
//!
//! Each pixel/channel of a video is modelled over time as a Laplace variable;
//! its maximum-likelihood center is the temporal median and its diversity is
//! the mean absolute deviation from that median. Pixels whose diversity stays
//! under a threshold in every channel form the stable hand mask. The video
//! with the smallest stable region provides the template, which is located
//! in every other video's median image by multiscale zero-normalized
//! cross-correlation; frames are then rescaled, cropped to the reference
//! resolution and replicate-padded.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::media::{resize_bilinear, scaled_len, to_gray, Image};
use crate::{Error, Result};

/// Scales tried by the multiscale matcher.
pub const DEFAULT_SCALES: [f64; 7] = [0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5];
/// Diversity threshold under which a pixel counts as stable.
pub const DEFAULT_BETA_THRESHOLD: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentParams {
    pub beta_threshold: f64,
    pub scales: Vec<f64>,
}

impl Default for AlignmentParams {
    fn default() -> Self {
        AlignmentParams {
            beta_threshold: DEFAULT_BETA_THRESHOLD,
            scales: DEFAULT_SCALES.to_vec(),
        }
    }
}

impl AlignmentParams {
    pub fn validate(&self) -> Result<()> {
        if self.beta_threshold.is_nan() || self.beta_threshold <= 0.0 {
            return Err(Error::InvalidParameter(
                "beta threshold must be positive".into(),
            ));
        }
        if self.scales.is_empty() || self.scales.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
            return Err(Error::InvalidParameter(
                "scales must be a non-empty list of positive values".into(),
            ));
        }
        Ok(())
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

/// Per-pixel, per-channel Laplace center (temporal median) and diversity.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelStats {
    width: usize,
    height: usize,
    channels: usize,
    median: Vec<f64>,
    diversity: Vec<f64>,
}

impl PixelStats {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Center per pixel/channel, interleaved like the source frames.
    pub fn median(&self) -> &[f64] {
        &self.median
    }

    /// Diversity per pixel/channel, interleaved like the source frames.
    pub fn diversity(&self) -> &[f64] {
        &self.diversity
    }

    /// Median image rounded to 8 bits.
    pub fn median_image(&self) -> Image {
        let px = self.median.iter().map(|&m| libm::round(m) as u8).collect();
        Image::new(self.width, self.height, self.channels, px)
            .expect("shape checked at construction")
    }
}

/// Temporal median and mean absolute deviation of every pixel/channel.
///
/// With an even frame count the median is the mean of the two middle order
/// statistics.
pub fn compute_pixel_stats(frames: &[Image]) -> Result<PixelStats> {
    let first = frames.first().ok_or(Error::EmptyVideo)?;
    let expected = first.shape();
    for (index, f) in frames.iter().enumerate() {
        if f.shape() != expected {
            return Err(Error::FrameSize {
                index,
                expected,
                found: f.shape(),
            });
        }
    }
    let samples = first.pixels().len();
    let t = frames.len();
    let mut median = Vec::with_capacity(samples);
    let mut diversity = Vec::with_capacity(samples);
    let mut series = vec![0u8; t];
    for k in 0..samples {
        for (slot, f) in series.iter_mut().zip(frames) {
            *slot = f.pixels()[k];
        }
        series.sort_unstable();
        let mu = if t % 2 == 1 {
            series[t / 2] as f64
        } else {
            (series[t / 2 - 1] as f64 + series[t / 2] as f64) / 2.0
        };
        let mad = series.iter().map(|&x| (x as f64 - mu).abs()).sum::<f64>() / t as f64;
        median.push(mu);
        diversity.push(mad);
    }
    Ok(PixelStats {
        width: expected.0,
        height: expected.1,
        channels: expected.2,
        median,
        diversity,
    })
}

/// Stable pixels and the largest 4-connected stable component.
#[derive(Debug, Clone, PartialEq)]
pub struct StableMask {
    width: usize,
    height: usize,
    mask: Vec<bool>,
    component_size: usize,
    bbox: Option<Rect>,
}

impl StableMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_stable(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    /// Pixel count of the largest stable component; 0 when the mask is empty.
    pub fn component_size(&self) -> usize {
        self.component_size
    }

    /// Bounding box of the largest stable component.
    pub fn bbox(&self) -> Option<Rect> {
        self.bbox
    }

    pub fn is_empty(&self) -> bool {
        self.component_size == 0
    }
}

/// Marks pixels with diversity below the threshold in every channel and
/// locates the largest 4-connected component (first in raster order on ties).
pub fn stable_mask(stats: &PixelStats, params: &AlignmentParams) -> Result<StableMask> {
    params.validate()?;
    let (w, h, c) = (stats.width, stats.height, stats.channels);
    let mask: Vec<bool> = stats
        .diversity
        .chunks_exact(c)
        .map(|px| px.iter().all(|&b| b < params.beta_threshold))
        .collect();
    let (component_size, bbox) = largest_component(&mask, w, h);
    Ok(StableMask {
        width: w,
        height: h,
        mask,
        component_size,
        bbox,
    })
}

fn largest_component(mask: &[bool], w: usize, h: usize) -> (usize, Option<Rect>) {
    let mut seen = vec![false; mask.len()];
    let mut best: (usize, Option<Rect>) = (0, None);
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut size, mut x0, mut y0, mut x1, mut y1) = (0, usize::MAX, usize::MAX, 0, 0);
        while let Some(p) = stack.pop() {
            let (x, y) = (p % w, p / w);
            size += 1;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            let mut visit = |q: usize| {
                if mask[q] && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
        }
        if size > best.0 {
            best = (
                size,
                Some(Rect {
                    x: x0,
                    y: y0,
                    width: x1 - x0 + 1,
                    height: y1 - y0 + 1,
                }),
            );
        }
    }
    best
}

/// The reference video and its alignment template.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub video_id: String,
    /// Median image of the reference cropped to its stable component's bounding box.
    pub template: Image,
    /// Where the template sits in the reference frame.
    pub template_rect: Rect,
    /// Reference frame size `(width, height)`.
    pub frame_size: (usize, usize),
}

/// Picks the video whose largest stable component has the fewest pixels.
///
/// Empty masks are ineligible; ties go to the lexicographically smaller id.
pub fn select_reference(videos: &[(&str, &PixelStats, &StableMask)]) -> Result<Reference> {
    let (id, stats, mask) = videos
        .iter()
        .filter(|(_, _, m)| !m.is_empty())
        .min_by(|a, b| {
            a.2.component_size
                .cmp(&b.2.component_size)
                .then_with(|| a.0.cmp(b.0))
        })
        .ok_or(Error::NoStableRegion)?;
    let rect = mask.bbox.expect("non-empty mask has a bounding box");
    let template = stats
        .median_image()
        .crop(rect.x, rect.y, rect.width, rect.height)?;
    Ok(Reference {
        video_id: String::from(*id),
        template,
        template_rect: rect,
        frame_size: (stats.width, stats.height),
    })
}

/// Best template placement found by [`ncc_match`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NccMatch {
    pub scale: f64,
    /// Template top-left column in the scaled target.
    pub x: usize,
    /// Template top-left row in the scaled target.
    pub y: usize,
    /// Zero-normalized cross-correlation at the match, in [-1, 1].
    pub peak: f64,
}

/// Exhaustive multiscale ZNCC search of `template` inside `target`.
///
/// Both images are reduced to luminance. The target is resized by each scale;
/// scales at which the template does not fit are skipped. Windows (or
/// templates) with zero variance correlate as 0. Ties go to the smaller
/// scale, then the smaller row, then the smaller column.
pub fn ncc_match(template: &Image, target: &Image, scales: &[f64]) -> Result<NccMatch> {
    let tpl = to_gray(template);
    let gray = to_gray(target);
    let mut order: Vec<f64> = scales.to_vec();
    order.sort_by(|a, b| a.partial_cmp(b).expect("finite scales"));
    order.dedup();
    let mut best: Option<NccMatch> = None;
    for &scale in &order {
        if scale.is_nan() || scale <= 0.0 {
            return Err(Error::InvalidParameter("scales must be positive".into()));
        }
        if scaled_len(gray.width(), scale) < tpl.width()
            || scaled_len(gray.height(), scale) < tpl.height()
        {
            continue;
        }
        let scaled = resize_bilinear(&gray, scale)?;
        let m = zncc_best(&tpl, &scaled, scale);
        if best.is_none_or(|b| m.peak > b.peak) {
            best = Some(m);
        }
    }
    best.ok_or(Error::NoValidScale)
}

/// ZNCC surface over every placement of `tpl` in `img` (both gray).
///
/// Row-major over placements, `(img.w - tpl.w + 1)` columns wide.
pub fn zncc_surface(tpl: &Image, img: &Image) -> Vec<f64> {
    let (tw, th) = (tpl.width(), tpl.height());
    let (iw, ih) = (img.width(), img.height());
    let (nx, ny) = (iw - tw + 1, ih - th + 1);
    let n = (tw * th) as f64;

    let tmean = tpl.pixels().iter().map(|&v| v as f64).sum::<f64>() / n;
    let centered: Vec<f64> = tpl.pixels().iter().map(|&v| v as f64 - tmean).collect();
    let tnorm = libm::sqrt(centered.iter().map(|v| v * v).sum::<f64>());

    let pixels: Vec<f64> = img.pixels().iter().map(|&v| v as f64).collect();
    let (sum, sq) = integral_images(img);
    let stride = iw + 1;
    let rect = |table: &[u64], x: usize, y: usize| {
        table[(y + th) * stride + x + tw] + table[y * stride + x]
            - table[y * stride + x + tw]
            - table[(y + th) * stride + x]
    };

    let mut out = vec![0.0; nx * ny];
    if tnorm == 0.0 {
        return out;
    }
    let mut acc = vec![0.0; nx];
    let npx = (tw * th) as u64;
    for y in 0..ny {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for v in 0..th {
            let row = &pixels[(y + v) * iw..(y + v + 1) * iw];
            for (u, &wt) in centered[v * tw..(v + 1) * tw].iter().enumerate() {
                let src = &row[u..u + nx];
                for (a, &p) in acc.iter_mut().zip(src) {
                    *a += wt * p;
                }
            }
        }
        for x in 0..nx {
            let s = rect(&sum, x, y);
            let q = rect(&sq, x, y);
            // n * var * n, exact in integers
            let spread = npx * q - s * s;
            if spread == 0 {
                continue;
            }
            let wnorm = libm::sqrt(spread as f64 / n);
            out[y * nx + x] = (acc[x] / (tnorm * wnorm)).clamp(-1.0, 1.0);
        }
    }
    out
}

fn zncc_best(tpl: &Image, img: &Image, scale: f64) -> NccMatch {
    let nx = img.width() - tpl.width() + 1;
    let surface = zncc_surface(tpl, img);
    let mut best = NccMatch {
        scale,
        x: 0,
        y: 0,
        peak: f64::NEG_INFINITY,
    };
    for (i, &v) in surface.iter().enumerate() {
        if v > best.peak {
            best.peak = v;
            best.x = i % nx;
            best.y = i / nx;
        }
    }
    best
}

fn integral_images(img: &Image) -> (Vec<u64>, Vec<u64>) {
    let (w, h) = (img.width(), img.height());
    let stride = w + 1;
    let mut sum = vec![0u64; stride * (h + 1)];
    let mut sq = vec![0u64; stride * (h + 1)];
    for y in 0..h {
        let (mut rs, mut rq) = (0u64, 0u64);
        for x in 0..w {
            let v = img.pixels()[y * w + x] as u64;
            rs += v;
            rq += v * v;
            sum[(y + 1) * stride + x + 1] = sum[y * stride + x + 1] + rs;
            sq[(y + 1) * stride + x + 1] = sq[y * stride + x + 1] + rq;
        }
    }
    (sum, sq)
}

/// Per-video registration against the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentEntry {
    pub video_id: String,
    pub scale: f64,
    /// Top-left of the reference-sized window in the scaled video frame.
    pub dx: i64,
    pub dy: i64,
    pub peak: f64,
    /// Part of the window that lies inside the scaled frame.
    pub crop: Rect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub reference_video_id: String,
    pub template_rect: Rect,
    pub frame_size: (usize, usize),
    pub entries: Vec<AlignmentEntry>,
}

/// Entry for the reference itself: identity transform.
pub fn reference_entry(reference: &Reference) -> AlignmentEntry {
    let (w, h) = reference.frame_size;
    AlignmentEntry {
        video_id: reference.video_id.clone(),
        scale: 1.0,
        dx: 0,
        dy: 0,
        peak: 1.0,
        crop: Rect {
            x: 0,
            y: 0,
            width: w,
            height: h,
        },
    }
}

/// Locates the reference template in a video's median image.
pub fn register_video(
    video_id: &str,
    median: &Image,
    reference: &Reference,
    params: &AlignmentParams,
) -> Result<AlignmentEntry> {
    params.validate()?;
    let m = ncc_match(&reference.template, median, &params.scales)?;
    let dx = m.x as i64 - reference.template_rect.x as i64;
    let dy = m.y as i64 - reference.template_rect.y as i64;
    let (sw, sh) = (
        scaled_len(median.width(), m.scale) as i64,
        scaled_len(median.height(), m.scale) as i64,
    );
    let (rw, rh) = (reference.frame_size.0 as i64, reference.frame_size.1 as i64);
    let (x0, y0) = (dx.max(0), dy.max(0));
    let (x1, y1) = ((dx + rw).min(sw), (dy + rh).min(sh));
    Ok(AlignmentEntry {
        video_id: String::from(video_id),
        scale: m.scale,
        dx,
        dy,
        peak: m.peak,
        crop: Rect {
            x: x0 as usize,
            y: y0 as usize,
            width: (x1 - x0).max(0) as usize,
            height: (y1 - y0).max(0) as usize,
        },
    })
}

/// Rescales one frame and cuts the reference-sized window, replicating edges.
pub fn align_frame(
    frame: &Image,
    entry: &AlignmentEntry,
    frame_size: (usize, usize),
) -> Result<Image> {
    let scaled = resize_bilinear(frame, entry.scale)?;
    scaled.crop_replicate(entry.dx, entry.dy, frame_size.0, frame_size.1)
}

pub fn align_video(
    frames: &[Image],
    entry: &AlignmentEntry,
    frame_size: (usize, usize),
) -> Result<Vec<Image>> {
    frames
        .iter()
        .map(|f| align_frame(f, entry, frame_size))
        .collect()
}

/// Runs the full alignment over a set of videos, sequentially.
pub fn align_videos(
    videos: &[(&str, &[Image])],
    params: &AlignmentParams,
) -> Result<AlignmentResult> {
    params.validate()?;
    let stats = videos
        .iter()
        .map(|(_, frames)| compute_pixel_stats(frames))
        .collect::<Result<Vec<_>>>()?;
    let masks = stats
        .iter()
        .map(|s| stable_mask(s, params))
        .collect::<Result<Vec<_>>>()?;
    plan_alignment(
        &videos
            .iter()
            .zip(&stats)
            .zip(&masks)
            .map(|((v, s), m)| (v.0, s, m))
            .collect::<Vec<_>>(),
        params,
    )
}

/// Reference selection plus registration of every video, from precomputed statistics.
pub fn plan_alignment(
    videos: &[(&str, &PixelStats, &StableMask)],
    params: &AlignmentParams,
) -> Result<AlignmentResult> {
    let reference = select_reference(videos)?;
    let mut entries = Vec::with_capacity(videos.len());
    for (id, stats, _) in videos {
        if *id == reference.video_id {
            entries.push(reference_entry(&reference));
        } else {
            entries.push(register_video(
                id,
                &stats.median_image(),
                &reference,
                params,
            )?);
        }
    }
    Ok(AlignmentResult {
        reference_video_id: reference.video_id.clone(),
        template_rect: reference.template_rect,
        frame_size: reference.frame_size,
        entries,
    })
}
