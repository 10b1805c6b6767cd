//! Grayscale frames, binary PGM I/O and Gaussian pyramids.
//!
//! Intensities are stored as `f64` in `[0, 255]`; quantization to bytes only
//! happens when a frame is written out.

mod pgm;
mod pyramid;

pub use pgm::{frame_file_name, load_pgm, read_frame_dir, save_pgm};
pub use pyramid::{build_pyramid, Pyramid};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImageError {
    #[error("not a binary PGM file (magic must be \"P5\")")]
    BadMagic,
    #[error("malformed PGM header: {0}")]
    BadHeader(String),
    #[error("PGM payload truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("image dimensions must be at least 1x1 (got {width}x{height})")]
    EmptyImage { width: usize, height: usize },
    #[error("pixel buffer has {found} values, expected {expected}")]
    BufferSize { expected: usize, found: usize },
    #[error("intensity {value} at index {index} outside [0, 255]")]
    OutOfRange { index: usize, value: f64 },
    #[error("pyramid needs at least one level")]
    ZeroLevels,
    #[error("frame directory: {0}")]
    FrameDir(String),
}

/// Row-major single-channel image with real-valued intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyImage { width, height });
        }
        if pixels.len() != width * height {
            return Err(ImageError::BufferSize {
                expected: width * height,
                found: pixels.len(),
            });
        }
        if let Some((index, &value)) = pixels
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=255.0).contains(*v))
        {
            return Err(ImageError::OutOfRange { index, value });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image filled with a single intensity.
    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self, ImageError> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image from a per-pixel function; values are clamped to `[0, 255]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y).clamp(0.0, 255.0));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub(crate) fn from_raw_unchecked(width: usize, height: usize, pixels: Vec<f64>) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Pixel access with clamp-to-edge for out-of-range integer coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.pixels[cy * self.width + cx]
    }

    /// Bilinear interpolation with coordinates clamped to `[0, w-1] x [0, h-1]`.
    #[inline]
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        let x = if x.is_nan() { 0.0 } else { x.clamp(0.0, max_x) };
        let y = if y.is_nan() { 0.0 } else { y.clamp(0.0, max_y) };
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let x0 = x0 as usize;
        let y0 = y0 as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let row0 = y0 * self.width;
        let row1 = y1 * self.width;
        let top = self.pixels[row0 + x0] * (1.0 - fx) + self.pixels[row0 + x1] * fx;
        let bottom = self.pixels[row1 + x0] * (1.0 - fx) + self.pixels[row1 + x1] * fx;
        top * (1.0 - fy) + bottom * fy
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Scales every intensity by `factor`, clamping to `[0, 255]`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self
                .pixels
                .iter()
                .map(|v| (v * factor).clamp(0.0, 255.0))
                .collect(),
        }
    }
}

/// Free-function form of [`GrayImage::sample_bilinear`].
pub fn sample_bilinear(img: &GrayImage, x: f64, y: f64) -> f64 {
    img.sample_bilinear(x, y)
}
