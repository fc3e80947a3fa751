//! JSON form of embedding plans and embedding configuration. The plan
//! file is the extraction side's contract: positions, per-position
//! budgets, strengths, and enough configuration to rebuild everything
//! from the original image instead if the file is lost.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wavemark_core::codec::{BandAlphas, BandPlan, EmbedConfig, EmbedPlan};
use wavemark_core::nvf::{NvfConfig, QuantMatrix};
use wavemark_core::wavelet::FilterBank;

use crate::error::HarnessError;

pub const PLAN_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AlphaSection {
    pub lh2: f64,
    pub hl2: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NvfSection {
    pub window_halfwidth: usize,
    pub flat_strength: f64,
}

/// Embedding configuration as it appears in plan files and bench
/// manifests. Omitted fields take the library defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigSection {
    pub filter_bank: String,
    pub alpha: AlphaSection,
    pub nvf: NvfSection,
    pub quant_matrix: [[f64; 4]; 4],
}

impl Default for ConfigSection {
    fn default() -> Self {
        ConfigSection::from_config(&EmbedConfig::default())
    }
}

impl ConfigSection {
    pub fn from_config(cfg: &EmbedConfig) -> Self {
        ConfigSection {
            filter_bank: cfg.filter_bank.name().to_string(),
            alpha: AlphaSection {
                lh2: cfg.alpha.lh2,
                hl2: cfg.alpha.hl2,
            },
            nvf: NvfSection {
                window_halfwidth: cfg.nvf.window_halfwidth(),
                flat_strength: cfg.nvf.flat_strength(),
            },
            quant_matrix: *cfg.quant.factors(),
        }
    }

    pub fn to_config(&self) -> Result<EmbedConfig, HarnessError> {
        let filter_bank = FilterBank::from_name(&self.filter_bank).ok_or_else(|| {
            HarnessError::Invalid(format!("unknown filter bank {:?}", self.filter_bank))
        })?;
        let alpha = BandAlphas {
            lh2: self.alpha.lh2,
            hl2: self.alpha.hl2,
        };
        alpha.validate()?;
        Ok(EmbedConfig {
            alpha,
            nvf: NvfConfig::new(self.nvf.window_halfwidth, self.nvf.flat_strength)?,
            quant: QuantMatrix::new(self.quant_matrix)?,
            filter_bank,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandSection {
    /// [row, col] per coefficient, in significance order.
    pub positions: Vec<[usize; 2]>,
    pub deltas: Vec<f64>,
}

impl BandSection {
    fn from_band(band: &BandPlan) -> Self {
        BandSection {
            positions: band.positions.iter().map(|&(r, c)| [r, c]).collect(),
            deltas: band.deltas.clone(),
        }
    }

    fn into_band(self) -> BandPlan {
        BandPlan {
            positions: self.positions.iter().map(|&[r, c]| (r, c)).collect(),
            deltas: self.deltas,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandsSection {
    pub lh2: BandSection,
    pub hl2: BandSection,
}

/// On-disk embedding plan. Versioned so the schema can move without
/// breaking stored plans silently.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanFile {
    pub format_version: u32,
    /// [width, height] of the host image.
    pub image_dims: [usize; 2],
    /// [width, height] of the watermark.
    pub watermark_dims: [usize; 2],
    pub filter_bank: String,
    pub alpha: AlphaSection,
    pub nvf: NvfSection,
    pub quant_matrix: [[f64; 4]; 4],
    pub bands: BandsSection,
}

impl PlanFile {
    pub fn from_plan(plan: &EmbedPlan) -> Self {
        PlanFile {
            format_version: PLAN_FORMAT_VERSION,
            image_dims: [plan.image_width, plan.image_height],
            watermark_dims: [plan.wm_width, plan.wm_height],
            filter_bank: plan.filter_bank.clone(),
            alpha: AlphaSection {
                lh2: plan.alpha.lh2,
                hl2: plan.alpha.hl2,
            },
            nvf: NvfSection {
                window_halfwidth: plan.nvf.window_halfwidth(),
                flat_strength: plan.nvf.flat_strength(),
            },
            quant_matrix: *plan.quant.factors(),
            bands: BandsSection {
                lh2: BandSection::from_band(&plan.lh2),
                hl2: BandSection::from_band(&plan.hl2),
            },
        }
    }

    pub fn into_plan(self) -> Result<EmbedPlan, HarnessError> {
        if self.format_version != PLAN_FORMAT_VERSION {
            return Err(HarnessError::Invalid(format!(
                "unsupported plan format_version {} (expected {PLAN_FORMAT_VERSION})",
                self.format_version
            )));
        }
        if FilterBank::from_name(&self.filter_bank).is_none() {
            return Err(HarnessError::Invalid(format!(
                "unknown filter bank {:?}",
                self.filter_bank
            )));
        }
        let plan = EmbedPlan {
            image_width: self.image_dims[0],
            image_height: self.image_dims[1],
            wm_width: self.watermark_dims[0],
            wm_height: self.watermark_dims[1],
            filter_bank: self.filter_bank,
            alpha: BandAlphas {
                lh2: self.alpha.lh2,
                hl2: self.alpha.hl2,
            },
            nvf: NvfConfig::new(self.nvf.window_halfwidth, self.nvf.flat_strength)?,
            quant: QuantMatrix::new(self.quant_matrix)?,
            lh2: self.bands.lh2.into_band(),
            hl2: self.bands.hl2.into_band(),
        };
        plan.validate()?;
        Ok(plan)
    }
}

pub fn save_plan(plan: &EmbedPlan, path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let path = path.as_ref();
    let file = PlanFile::from_plan(plan);
    let mut body = serde_json::to_string_pretty(&file)
        .map_err(|e| HarnessError::Internal(format!("plan serialization: {e}")))?;
    body.push('\n');
    std::fs::write(path, body).map_err(|e| HarnessError::io(path, e))
}

pub fn load_plan(path: impl AsRef<Path>) -> Result<EmbedPlan, HarnessError> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    let file: PlanFile = serde_json::from_slice(&data)
        .map_err(|e| HarnessError::format(path, format!("bad plan JSON: {e}")))?;
    file.into_plan()
}
