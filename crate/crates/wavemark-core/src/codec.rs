//! Watermark embedding and non-blind extraction.
//!
//! Embedding: decompose the host three levels, pick the most significant
//! P*Q/2 positions in each of LH2 and HL2, map the watermark bits to
//! {-1, +1}, and add alpha * w * delta to each chosen coefficient, where
//! delta is the NVF distortion budget at that position. The first half of
//! the bipolar vector lands in LH2 (in significance order), the second in
//! HL2. Inverse transform and 8-bit quantization yield the watermarked
//! image.
//!
//! Extraction compares the suspect's pyramid against the original's at the
//! recorded positions: raw = (suspect - original) / (alpha * delta), with
//! the sign (ties toward +1) deciding each bit. The position/delta record
//! can come from a stored plan or be regenerated from the original image;
//! both routes produce the same plan because the schedule is
//! deterministic.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::image::{quantize_to_image, GrayImage, RealImage};
use crate::nvf::{compute_nvf, max_allowable_distortion, NvfConfig, QuantMatrix};
use crate::spiht::{select_significant, TreeBand};
use crate::wavelet::{dwt_forward, dwt_forward_real, dwt_inverse, FilterBank, WaveletPyramid};

/// Decomposition depth of the scheme; LH2/HL2 exist from level 2 and the
/// significance tree needs level 3 parents.
pub const LEVELS: u32 = 3;

/// Binary watermark pattern. The bit count must be even so the two halves
/// can address the two carrier bands equally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WatermarkBits {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl WatermarkBits {
    pub fn from_bits(width: usize, height: usize, bits: Vec<u8>) -> Result<Self, CoreError> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(CoreError::BadDimensions { width, height });
        }
        if bits.len() % 2 != 0 {
            return Err(CoreError::OddWatermarkLength { len: bits.len() });
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(CoreError::PlanMismatch);
        }
        Ok(WatermarkBits { width, height, bits })
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
        self.bits[row * self.width + col]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }
}

/// Row-major {-1, +1} form of a watermark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipolarVector(Vec<i8>);

impl BipolarVector {
    pub fn from_values(values: Vec<i8>) -> Result<Self, CoreError> {
        if values.iter().any(|&v| v != 1 && v != -1) {
            return Err(CoreError::PlanMismatch);
        }
        Ok(BipolarVector(values))
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Maps bits to bipolar values: 0 -> -1, 1 -> +1, row-major.
pub fn pretreat(wm: &WatermarkBits) -> BipolarVector {
    BipolarVector(wm.bits.iter().map(|&b| if b == 1 { 1 } else { -1 }).collect())
}

/// Inverse of `pretreat`, reshaping to the given dimensions.
pub fn posttreat(v: &BipolarVector, width: usize, height: usize) -> Result<WatermarkBits, CoreError> {
    let bits = v.0.iter().map(|&s| if s > 0 { 1u8 } else { 0u8 }).collect();
    WatermarkBits::from_bits(width, height, bits)
}

/// Splits a bipolar vector into its two band-bound halves.
pub fn split(v: &BipolarVector) -> Result<(BipolarVector, BipolarVector), CoreError> {
    if v.0.len() % 2 != 0 {
        return Err(CoreError::OddWatermarkLength { len: v.0.len() });
    }
    let half = v.0.len() / 2;
    Ok((
        BipolarVector(v.0[..half].to_vec()),
        BipolarVector(v.0[half..].to_vec()),
    ))
}

/// Per-band embedding strengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandAlphas {
    pub lh2: f64,
    pub hl2: f64,
}

impl Default for BandAlphas {
    fn default() -> Self {
        BandAlphas { lh2: 3.0, hl2: 1.0 }
    }
}

impl BandAlphas {
    pub fn for_band(&self, band: TreeBand) -> f64 {
        match band {
            TreeBand::LH2 | TreeBand::LH3 => self.lh2,
            TreeBand::HL2 | TreeBand::HL3 => self.hl2,
        }
    }

    // Zero is a legal embedding strength (it writes nothing) and negative
    // strengths flip every perturbation; only extraction's division
    // requires nonzero alpha.
    pub fn validate(&self) -> Result<(), CoreError> {
        for (v, what) in [(self.lh2, "alpha(LH2)"), (self.hl2, "alpha(HL2)")] {
            if !v.is_finite() {
                return Err(CoreError::BadParameter {
                    what,
                    value: v,
                    range: "finite reals",
                });
            }
        }
        Ok(())
    }
}

/// Everything the embedder needs besides host and watermark.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedConfig {
    pub alpha: BandAlphas,
    pub nvf: NvfConfig,
    pub quant: QuantMatrix,
    pub filter_bank: FilterBank,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            alpha: BandAlphas::default(),
            nvf: NvfConfig::default(),
            quant: QuantMatrix::default(),
            filter_bank: FilterBank::haar(),
        }
    }
}

/// Ordered positions and their distortion budgets for one band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPlan {
    pub positions: Vec<(usize, usize)>,
    pub deltas: Vec<f64>,
}

/// The secret side information of the scheme: where the bits went and how
/// strongly they were written. Extraction needs this plan or the original
/// image to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedPlan {
    pub image_width: usize,
    pub image_height: usize,
    pub wm_width: usize,
    pub wm_height: usize,
    pub filter_bank: String,
    pub alpha: BandAlphas,
    pub nvf: NvfConfig,
    pub quant: QuantMatrix,
    pub lh2: BandPlan,
    pub hl2: BandPlan,
}

impl EmbedPlan {
    /// Structural consistency: band position counts equal the watermark
    /// half-length, positions lie inside the level-2 bands, budgets are
    /// positive and finite.
    pub fn validate(&self) -> Result<(), CoreError> {
        let wm_len = self.wm_width * self.wm_height;
        if wm_len == 0 {
            return Err(CoreError::BadDimensions {
                width: self.wm_width,
                height: self.wm_height,
            });
        }
        if wm_len % 2 != 0 {
            return Err(CoreError::OddWatermarkLength { len: wm_len });
        }
        if self.image_width % (1 << LEVELS) != 0 || self.image_height % (1 << LEVELS) != 0 {
            return Err(CoreError::NotDivisible {
                dim: self.image_width,
                levels: LEVELS,
            });
        }
        self.alpha.validate()?;
        let band_rows = self.image_height >> 2;
        let band_cols = self.image_width >> 2;
        for band in [&self.lh2, &self.hl2] {
            if band.positions.len() != wm_len / 2 || band.deltas.len() != band.positions.len() {
                return Err(CoreError::PlanMismatch);
            }
            if band
                .positions
                .iter()
                .any(|&(r, c)| r >= band_rows || c >= band_cols)
            {
                return Err(CoreError::PlanMismatch);
            }
            if band.deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
                return Err(CoreError::PlanMismatch);
            }
        }
        Ok(())
    }
}

fn band_plan(
    pyramid: &WaveletPyramid,
    band: TreeBand,
    positions: Vec<crate::spiht::CoeffRef>,
    nvf_cfg: &NvfConfig,
    quant: &QuantMatrix,
) -> Result<BandPlan, CoreError> {
    let sb = pyramid
        .band(band.level(), band.orientation())
        .ok_or(CoreError::PlanMismatch)?;
    let nvf = compute_nvf(sb, nvf_cfg);
    let delta_map = max_allowable_distortion(sb, &nvf, quant, nvf_cfg)?;
    let deltas = positions.iter().map(|p| delta_map.get(p.row, p.col)).collect();
    Ok(BandPlan {
        positions: positions.into_iter().map(|p| (p.row, p.col)).collect(),
        deltas,
    })
}

/// Computes the full embedding plan for a host without touching it: runs
/// the decomposition, the significance selection, and the NVF budget.
/// This is also the regeneration path extraction uses when only the
/// original image is available.
pub fn regenerate_plan(
    host: &GrayImage,
    wm_width: usize,
    wm_height: usize,
    cfg: &EmbedConfig,
) -> Result<EmbedPlan, CoreError> {
    cfg.alpha.validate()?;
    let wm_len = wm_width * wm_height;
    if wm_len == 0 {
        return Err(CoreError::BadDimensions {
            width: wm_width,
            height: wm_height,
        });
    }
    if wm_len % 2 != 0 {
        return Err(CoreError::OddWatermarkLength { len: wm_len });
    }
    let pyramid = dwt_forward(host, LEVELS, &cfg.filter_bank)?;
    let selection = select_significant(&pyramid, wm_len / 2)?;
    let lh2 = band_plan(&pyramid, TreeBand::LH2, selection.lh2, &cfg.nvf, &cfg.quant)?;
    let hl2 = band_plan(&pyramid, TreeBand::HL2, selection.hl2, &cfg.nvf, &cfg.quant)?;
    Ok(EmbedPlan {
        image_width: host.width(),
        image_height: host.height(),
        wm_width,
        wm_height,
        filter_bank: String::from(cfg.filter_bank.name()),
        alpha: cfg.alpha,
        nvf: cfg.nvf,
        quant: cfg.quant.clone(),
        lh2,
        hl2,
    })
}

fn apply_bits(
    pyramid: &mut WaveletPyramid,
    band: TreeBand,
    plan: &BandPlan,
    half: &BipolarVector,
    alpha: f64,
) -> Result<(), CoreError> {
    if half.len() != plan.positions.len() {
        return Err(CoreError::PlanMismatch);
    }
    let sb = pyramid
        .band_mut(band.level(), band.orientation())
        .ok_or(CoreError::PlanMismatch)?;
    for ((&(row, col), &delta), &w) in plan.positions.iter().zip(&plan.deltas).zip(half.values()) {
        let c = sb.get(row, col);
        sb.set(row, col, c + alpha * w as f64 * delta);
    }
    Ok(())
}

/// Embedding up to the real-valued watermarked raster, before 8-bit
/// quantization. Exposed so the lossless path can be tested end to end.
pub fn embed_real(
    host: &GrayImage,
    wm: &WatermarkBits,
    cfg: &EmbedConfig,
) -> Result<(RealImage, EmbedPlan), CoreError> {
    let plan = regenerate_plan(host, wm.width(), wm.height(), cfg)?;
    let (w1, w2) = split(&pretreat(wm))?;
    let mut pyramid = dwt_forward(host, LEVELS, &cfg.filter_bank)?;
    apply_bits(&mut pyramid, TreeBand::LH2, &plan.lh2, &w1, cfg.alpha.lh2)?;
    apply_bits(&mut pyramid, TreeBand::HL2, &plan.hl2, &w2, cfg.alpha.hl2)?;
    let raster = dwt_inverse(&pyramid, &cfg.filter_bank)?;
    Ok((raster, plan))
}

/// Full embedding pipeline producing the 8-bit watermarked image and the
/// plan that extraction will need.
pub fn embed(
    host: &GrayImage,
    wm: &WatermarkBits,
    cfg: &EmbedConfig,
) -> Result<(GrayImage, EmbedPlan), CoreError> {
    let (raster, plan) = embed_real(host, wm, cfg)?;
    Ok((quantize_to_image(&raster), plan))
}

fn band_raws(
    original: &WaveletPyramid,
    suspect: &WaveletPyramid,
    band: TreeBand,
    plan: &BandPlan,
    alpha: f64,
) -> Result<Vec<f64>, CoreError> {
    let orig = original
        .band(band.level(), band.orientation())
        .ok_or(CoreError::PlanMismatch)?;
    let susp = suspect
        .band(band.level(), band.orientation())
        .ok_or(CoreError::PlanMismatch)?;
    if alpha == 0.0 {
        return Err(CoreError::BadParameter {
            what: "alpha",
            value: alpha,
            range: "(0, inf) for extraction",
        });
    }
    Ok(plan
        .positions
        .iter()
        .zip(&plan.deltas)
        .map(|(&(row, col), &delta)| (susp.get(row, col) - orig.get(row, col)) / (alpha * delta))
        .collect())
}

/// Raw per-position extraction values (LH2 half, then HL2 half), before
/// the sign decision. Positive means the bit reads as 1.
pub fn extract_raw(
    original: &GrayImage,
    suspect_pyramid: &WaveletPyramid,
    plan: &EmbedPlan,
) -> Result<(Vec<f64>, Vec<f64>), CoreError> {
    plan.validate()?;
    if original.dims() != (plan.image_width, plan.image_height) {
        return Err(CoreError::DimensionMismatch {
            expected: (plan.image_width, plan.image_height),
            got: original.dims(),
        });
    }
    if suspect_pyramid.source_dims() != original.dims() {
        return Err(CoreError::DimensionMismatch {
            expected: original.dims(),
            got: suspect_pyramid.source_dims(),
        });
    }
    let fb = FilterBank::from_name(&plan.filter_bank).ok_or(CoreError::PlanMismatch)?;
    let orig_pyr = dwt_forward(original, LEVELS, &fb)?;
    let lh2 = band_raws(&orig_pyr, suspect_pyramid, TreeBand::LH2, &plan.lh2, plan.alpha.lh2)?;
    let hl2 = band_raws(&orig_pyr, suspect_pyramid, TreeBand::HL2, &plan.hl2, plan.alpha.hl2)?;
    Ok((lh2, hl2))
}

fn decide(raws: (Vec<f64>, Vec<f64>), plan: &EmbedPlan) -> Result<WatermarkBits, CoreError> {
    // Ties (raw exactly 0) read as +1.
    let to_bipolar = |v: f64| if v >= 0.0 { 1i8 } else { -1i8 };
    let mut values: Vec<i8> = raws.0.into_iter().map(to_bipolar).collect();
    values.extend(raws.1.into_iter().map(to_bipolar));
    posttreat(&BipolarVector(values), plan.wm_width, plan.wm_height)
}

/// Non-blind extraction from an 8-bit suspect image.
pub fn extract(
    original: &GrayImage,
    suspect: &GrayImage,
    plan: &EmbedPlan,
) -> Result<WatermarkBits, CoreError> {
    let fb = FilterBank::from_name(&plan.filter_bank).ok_or(CoreError::PlanMismatch)?;
    let suspect_pyr = dwt_forward(suspect, LEVELS, &fb)?;
    let raws = extract_raw(original, &suspect_pyr, plan)?;
    decide(raws, plan)
}

/// Extraction from a real-valued suspect raster (the pre-quantization
/// output of `embed_real`), bypassing 8-bit rounding entirely.
pub fn extract_real(
    original: &GrayImage,
    suspect: &RealImage,
    plan: &EmbedPlan,
) -> Result<WatermarkBits, CoreError> {
    let fb = FilterBank::from_name(&plan.filter_bank).ok_or(CoreError::PlanMismatch)?;
    let suspect_pyr = dwt_forward_real(suspect, LEVELS, &fb)?;
    let raws = extract_raw(original, &suspect_pyr, plan)?;
    decide(raws, plan)
}
