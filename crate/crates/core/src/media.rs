//! 8-bit raster images and the handful of pixel operations the pipeline needs.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Row-major interleaved 8-bit image with 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(
                "image dimensions must be positive".into(),
            ));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidParameter(
                "images have 1 or 3 channels".into(),
            ));
        }
        let expected = width * height * channels;
        if pixels.len() != expected {
            return Err(Error::ImageBuffer {
                expected,
                found: pixels.len(),
            });
        }
        Ok(Image {
            width,
            height,
            channels,
            pixels,
        })
    }

    /// Image filled with one pixel value; `value.len()` gives the channel count.
    pub fn filled(width: usize, height: usize, value: &[u8]) -> Result<Self> {
        let pixels = value
            .iter()
            .copied()
            .cycle()
            .take(width * height * value.len())
            .collect();
        Image::new(width, height, value.len(), pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    /// `(width, height, channels)`
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let at = (y * self.width + x) * self.channels;
        &self.pixels[at..at + self.channels]
    }

    /// Sub-image; the rectangle must lie inside the image.
    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> Result<Image> {
        if x + width > self.width || y + height > self.height {
            return Err(Error::InvalidParameter(
                "crop rectangle outside the image".into(),
            ));
        }
        let mut pixels = Vec::with_capacity(width * height * self.channels);
        for row in y..y + height {
            let at = (row * self.width + x) * self.channels;
            pixels.extend_from_slice(&self.pixels[at..at + width * self.channels]);
        }
        Image::new(width, height, self.channels, pixels)
    }

    /// Window of the given size whose top-left corner sits at `(x, y)`, possibly
    /// outside the image; out-of-bounds samples replicate the nearest edge pixel.
    pub fn crop_replicate(&self, x: i64, y: i64, width: usize, height: usize) -> Result<Image> {
        let c = self.channels;
        let mut pixels = Vec::with_capacity(width * height * c);
        for row in 0..height as i64 {
            let sy = (y + row).clamp(0, self.height as i64 - 1) as usize;
            for col in 0..width as i64 {
                let sx = (x + col).clamp(0, self.width as i64 - 1) as usize;
                pixels.extend_from_slice(self.pixel(sx, sy));
            }
        }
        Image::new(width, height, c, pixels)
    }
}

/// Mirror image: column `x` moves to `width - 1 - x`.
pub fn hflip(img: &Image) -> Image {
    let c = img.channels;
    let mut pixels = Vec::with_capacity(img.pixels.len());
    for row in img.pixels.chunks_exact(img.width * c) {
        for px in row.chunks_exact(c).rev() {
            pixels.extend_from_slice(px);
        }
    }
    Image {
        width: img.width,
        height: img.height,
        channels: c,
        pixels,
    }
}

/// ITU-R 601 luma, rounded. Gray images are returned unchanged.
pub fn to_gray(img: &Image) -> Image {
    if img.channels == 1 {
        return img.clone();
    }
    let pixels = img
        .pixels
        .chunks_exact(3)
        .map(|p| {
            let y = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
            libm::round(y).clamp(0.0, 255.0) as u8
        })
        .collect();
    Image {
        width: img.width,
        height: img.height,
        channels: 1,
        pixels,
    }
}

/// Output size of a resize by `scale`: `round(scale * len)`, at least 1.
pub fn scaled_len(len: usize, scale: f64) -> usize {
    (libm::round(scale * len as f64) as usize).max(1)
}

/// Bilinear resize with pixel-center alignment and edge clamping.
///
/// Output dimensions are `round(scale * dims)`.
pub fn resize_bilinear(img: &Image, scale: f64) -> Result<Image> {
    if scale <= 0.0 || !scale.is_finite() {
        return Err(Error::InvalidParameter(
            "resize scale must be positive".into(),
        ));
    }
    let out_w = scaled_len(img.width, scale);
    let out_h = scaled_len(img.height, scale);
    if out_w == img.width && out_h == img.height {
        return Ok(img.clone());
    }
    let xs = taps(img.width, out_w);
    let ys = taps(img.height, out_h);
    let c = img.channels;
    let mut pixels = Vec::with_capacity(out_w * out_h * c);
    for &(y0, y1, wy) in &ys {
        for &(x0, x1, wx) in &xs {
            for ch in 0..c {
                let at = |x: usize, y: usize| img.pixels[(y * img.width + x) * c + ch] as f64;
                let top = at(x0, y0) * (1.0 - wx) + at(x1, y0) * wx;
                let bottom = at(x0, y1) * (1.0 - wx) + at(x1, y1) * wx;
                let v = top * (1.0 - wy) + bottom * wy;
                pixels.push(libm::round(v).clamp(0.0, 255.0) as u8);
            }
        }
    }
    Image::new(out_w, out_h, c, pixels)
}

/// Source taps `(lo, hi, weight of hi)` for every output coordinate.
fn taps(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let ratio = src as f64 / dst as f64;
    (0..dst)
        .map(|d| {
            let s = ((d as f64 + 0.5) * ratio - 0.5).clamp(0.0, (src - 1) as f64);
            let lo = libm::floor(s) as usize;
            let hi = (lo + 1).min(src - 1);
            (lo, hi, s - lo as f64)
        })
        .collect()
}
