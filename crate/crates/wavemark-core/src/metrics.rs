//! Similarity and fidelity metrics: Pearson correlation between watermark
//! bit patterns, and MSE/PSNR between images.

use crate::codec::WatermarkBits;
use crate::error::CoreError;
use crate::image::GrayImage;

/// Pearson correlation with a degenerate-variance marker. When either
/// input is constant the coefficient is undefined; `value` is then 0.0 and
/// `degenerate` is set so pipelines stay total without hiding the case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    pub degenerate: bool,
}

/// Pearson correlation over the flattened bit arrays of two watermarks.
pub fn correlation(a: &WatermarkBits, b: &WatermarkBits) -> Result<Correlation, CoreError> {
    if a.dims() != b.dims() {
        return Err(CoreError::DimensionMismatch {
            expected: a.dims(),
            got: b.dims(),
        });
    }
    let n = a.bits().len() as f64;
    let mean = |bits: &[u8]| bits.iter().map(|&v| v as f64).sum::<f64>() / n;
    let (ma, mb) = (mean(a.bits()), mean(b.bits()));
    let (mut num, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        let (dx, dy) = (x as f64 - ma, y as f64 - mb);
        num += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(Correlation {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Correlation {
        value: num / libm::sqrt(va * vb),
        degenerate: false,
    })
}

/// Mean squared error between two images of equal dimensions.
pub fn mse(x: &GrayImage, y: &GrayImage) -> Result<f64, CoreError> {
    if x.dims() != y.dims() {
        return Err(CoreError::DimensionMismatch {
            expected: x.dims(),
            got: y.dims(),
        });
    }
    let sum: f64 = x
        .pixels()
        .iter()
        .zip(y.pixels())
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    Ok(sum / (x.width() * x.height()) as f64)
}

/// Peak signal-to-noise ratio in dB against a 255 peak; +infinity for
/// identical images.
pub fn psnr(x: &GrayImage, y: &GrayImage) -> Result<f64, CoreError> {
    let m = mse(x, y)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * libm::log10(255.0 * 255.0 / m))
}
