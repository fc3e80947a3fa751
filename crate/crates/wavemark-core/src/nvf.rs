//! Noise visibility function and per-coefficient distortion budget.
//!
//! NVF(i,j) = 1 / (1 + var(i,j)) where var is the local variance of the
//! subband over a (2L+1)^2 window centered at (i,j). Flat neighborhoods
//! give NVF near 1 (noise would be visible, embed weakly); textured ones
//! give NVF near 0 (noise is masked, embed strongly). The allowable
//! distortion blends a per-band quantization factor with the flat-region
//! strength s1:
//!
//!   delta(i,j) = (1 - NVF(i,j)) * Q(level, orientation) + NVF(i,j) * s1

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::wavelet::{Orientation, Subband};

/// Perceptual quantization factors indexed by (orientation row, level
/// column). Rows: 1 = approximation, 2 = HL, 3 = HH, 4 = LH.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantMatrix {
    factors: [[f64; 4]; 4],
}

impl Default for QuantMatrix {
    fn default() -> Self {
        QuantMatrix {
            factors: [
                [14.049, 11.106, 11.363, 14.500],
                [23.028, 14.608, 12.707, 14.156],
                [58.756, 28.408, 19.540, 17.864],
                [23.028, 14.685, 12.707, 14.156],
            ],
        }
    }
}

impl QuantMatrix {
    pub fn new(factors: [[f64; 4]; 4]) -> Result<Self, CoreError> {
        for row in &factors {
            for &v in row {
                if !(v > 0.0) {
                    return Err(CoreError::BadParameter {
                        what: "quantization factor",
                        value: v,
                        range: "(0, inf)",
                    });
                }
            }
        }
        Ok(QuantMatrix { factors })
    }

    pub fn factors(&self) -> &[[f64; 4]; 4] {
        &self.factors
    }

    /// Factor for a band; levels above 4 reuse the level-4 column.
    pub fn factor(&self, orientation: Orientation, level: u32) -> f64 {
        let row = match orientation {
            Orientation::LL => 0,
            Orientation::HL => 1,
            Orientation::HH => 2,
            Orientation::LH => 3,
        };
        let col = (level.clamp(1, 4) - 1) as usize;
        self.factors[row][col]
    }
}

/// Window half-width L and flat-region strength s1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NvfConfig {
    window_halfwidth: usize,
    flat_strength: f64,
}

impl Default for NvfConfig {
    fn default() -> Self {
        NvfConfig {
            window_halfwidth: 1,
            flat_strength: 3.0,
        }
    }
}

impl NvfConfig {
    pub fn new(window_halfwidth: usize, flat_strength: f64) -> Result<Self, CoreError> {
        if window_halfwidth < 1 {
            return Err(CoreError::BadParameter {
                what: "window halfwidth",
                value: window_halfwidth as f64,
                range: "[1, inf)",
            });
        }
        if !(flat_strength > 0.0) {
            return Err(CoreError::BadParameter {
                what: "flat-region strength",
                value: flat_strength,
                range: "(0, inf)",
            });
        }
        Ok(NvfConfig {
            window_halfwidth,
            flat_strength,
        })
    }

    pub fn window_halfwidth(&self) -> usize {
        self.window_halfwidth
    }

    pub fn flat_strength(&self) -> f64 {
        self.flat_strength
    }
}

/// Per-coefficient embedding budget for one band.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMap {
    level: u32,
    orientation: Orientation,
    rows: usize,
    cols: usize,
    delta: Vec<f64>,
}

impl DistortionMap {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.delta[row * self.cols + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.delta
    }
}

/// Local mean and population variance over the clamped window; the window
/// always holds (2L+1)^2 samples, with edge samples repeated near borders.
fn window_stats(band: &Subband, row: usize, col: usize, l: usize) -> (f64, f64) {
    let rows = band.rows() as isize;
    let cols = band.cols() as isize;
    let l = l as isize;
    let count = ((2 * l + 1) * (2 * l + 1)) as f64;
    let mut sum = 0.0;
    for dr in -l..=l {
        for dc in -l..=l {
            let r = (row as isize + dr).clamp(0, rows - 1) as usize;
            let c = (col as isize + dc).clamp(0, cols - 1) as usize;
            sum += band.get(r, c);
        }
    }
    let mean = sum / count;
    let mut var = 0.0;
    for dr in -l..=l {
        for dc in -l..=l {
            let r = (row as isize + dr).clamp(0, rows - 1) as usize;
            let c = (col as isize + dc).clamp(0, cols - 1) as usize;
            let d = band.get(r, c) - mean;
            var += d * d;
        }
    }
    (mean, var / count)
}

/// NVF at every coefficient of the band, row-major, each value in (0, 1].
pub fn compute_nvf(band: &Subband, cfg: &NvfConfig) -> Vec<f64> {
    let mut out = vec![0.0; band.rows() * band.cols()];
    for r in 0..band.rows() {
        for c in 0..band.cols() {
            let (_, var) = window_stats(band, r, c, cfg.window_halfwidth());
            out[r * band.cols() + c] = 1.0 / (1.0 + var);
        }
    }
    out
}

/// Exposed for oracle comparison: the windowed local variance alone.
pub fn local_variance(band: &Subband, row: usize, col: usize, cfg: &NvfConfig) -> f64 {
    window_stats(band, row, col, cfg.window_halfwidth()).1
}

/// Blends the band's quantization factor with s1 through the NVF field.
pub fn max_allowable_distortion(
    band: &Subband,
    nvf: &[f64],
    q: &QuantMatrix,
    cfg: &NvfConfig,
) -> Result<DistortionMap, CoreError> {
    if nvf.len() != band.rows() * band.cols() {
        return Err(CoreError::DimensionMismatch {
            expected: (band.cols(), band.rows()),
            got: (nvf.len(), 1),
        });
    }
    let factor = q.factor(band.orientation(), band.level());
    let s1 = cfg.flat_strength();
    let delta = nvf.iter().map(|&v| (1.0 - v) * factor + v * s1).collect();
    Ok(DistortionMap {
        level: band.level(),
        orientation: band.orientation(),
        rows: band.rows(),
        cols: band.cols(),
        delta,
    })
}
