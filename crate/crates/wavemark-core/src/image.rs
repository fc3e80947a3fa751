use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;

/// 8-bit grayscale raster, row-major, `height` rows of `width` pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, fill: u8) -> Result<Self, CoreError> {
        if width == 0 || height == 0 {
            return Err(CoreError::BadDimensions { width, height });
        }
        Ok(GrayImage {
            width,
            height,
            pixels: vec![fill; width * height],
        })
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, CoreError> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(CoreError::BadDimensions { width, height });
        }
        Ok(GrayImage { width, height, pixels })
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

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn to_real(&self) -> RealImage {
        RealImage {
            width: self.width,
            height: self.height,
            samples: self.pixels.iter().map(|&p| p as f64).collect(),
        }
    }
}

/// Real-valued raster used between the inverse transform and 8-bit output.
#[derive(Debug, Clone, PartialEq)]
pub struct RealImage {
    width: usize,
    height: usize,
    samples: Vec<f64>,
}

impl RealImage {
    pub fn new(width: usize, height: usize, fill: f64) -> Result<Self, CoreError> {
        if width == 0 || height == 0 {
            return Err(CoreError::BadDimensions { width, height });
        }
        Ok(RealImage {
            width,
            height,
            samples: vec![fill; width * height],
        })
    }

    pub fn from_samples(width: usize, height: usize, samples: Vec<f64>) -> Result<Self, CoreError> {
        if width == 0 || height == 0 || samples.len() != width * height {
            return Err(CoreError::BadDimensions { width, height });
        }
        Ok(RealImage { width, height, samples })
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

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.samples[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.samples[row * self.width + col] = value;
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }
}

/// Rounds half up: 127.5 becomes 128, -0.5 becomes 0.
#[inline]
pub fn round_half_up(v: f64) -> f64 {
    libm::floor(v + 0.5)
}

/// Quantizes a real raster to 8 bits: round half up, clamp to [0, 255].
/// Non-finite samples clamp to the nearer bound (NaN to 0).
pub fn quantize_to_image(raster: &RealImage) -> GrayImage {
    let pixels = raster
        .samples
        .iter()
        .map(|&v| {
            let r = round_half_up(v);
            if r >= 255.0 {
                255
            } else if r >= 0.0 {
                r as u8
            } else {
                0
            }
        })
        .collect();
    GrayImage {
        width: raster.width,
        height: raster.height,
        pixels,
    }
}
