//! Metric report JSON emitted by the `extract` and `metrics` commands
//! and reused for bench fidelity rows.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wavemark_core::metrics::Correlation;

use crate::error::HarnessError;

/// Freeform labels identifying what was compared.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReportContext {
    pub image: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<String>,
}

/// Image-vs-image fidelity. `psnr_db` is `None` exactly when the MSE is
/// zero (infinite PSNR); JSON has no representation for infinity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FidelitySection {
    pub mse: f64,
    pub psnr_db: Option<f64>,
}

impl FidelitySection {
    pub fn new(mse: f64, psnr: f64) -> Self {
        FidelitySection {
            mse,
            psnr_db: psnr.is_finite().then_some(psnr),
        }
    }
}

/// Watermark-vs-watermark similarity. `degenerate` flags a constant
/// input, where Pearson correlation is undefined and reported as 0.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CorrelationSection {
    pub correlation: f64,
    pub degenerate: bool,
}

impl From<Correlation> for CorrelationSection {
    fn from(c: Correlation) -> Self {
        CorrelationSection {
            correlation: c.value,
            degenerate: c.degenerate,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub context: ReportContext,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<FidelitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watermark: Option<CorrelationSection>,
}

impl MetricReport {
    pub fn to_json(&self) -> Result<String, HarnessError> {
        let mut body = serde_json::to_string_pretty(self)
            .map_err(|e| HarnessError::Internal(format!("report serialization: {e}")))?;
        body.push('\n');
        Ok(body)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| HarnessError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_psnr_serializes_as_null() {
        let report = MetricReport {
            context: ReportContext {
                image: "a.pgm".into(),
                reference: None,
                attack: None,
            },
            fidelity: Some(FidelitySection::new(0.0, f64::INFINITY)),
            watermark: None,
        };
        let json = report.to_json().unwrap();
        assert!(json.contains("\"psnr_db\": null"));
        let back: MetricReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.fidelity.unwrap().psnr_db, None);
    }

    #[test]
    fn finite_psnr_round_trips() {
        let section = FidelitySection::new(1.0, 48.13);
        assert_eq!(section.psnr_db, Some(48.13));
    }
}
