//! Benchmark harness: embed, attack, extract, and measure over a
//! manifest-defined grid of images, attacks, and seeds, then emit the
//! aggregate tables as CSV with a JSON sidecar carrying full per-cell
//! detail. Output is deterministic: identical manifest and seeds give
//! byte-identical files, so reports never embed timestamps.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wavemark_core::attacks::Attack;
use wavemark_core::codec::{embed, extract, EmbedPlan, WatermarkBits};
use wavemark_core::metrics::{correlation, mse, psnr};
use wavemark_core::GrayImage;

use crate::error::HarnessError;
use crate::pgm;
use crate::plan::ConfigSection;
use crate::report::{CorrelationSection, FidelitySection};

pub const REPORT_FORMAT_VERSION: u32 = 1;
/// Overrides the bench worker count (default: one per logical CPU).
pub const WORKERS_ENV: &str = "WAVEMARK_WORKERS";

/// Benchmark job description. Relative paths are resolved against the
/// manifest file's directory by `load_manifest`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchManifest {
    pub corpus: Vec<PathBuf>,
    pub watermark: PathBuf,
    #[serde(default)]
    pub config: ConfigSection,
    /// Attack grid; empty means a fidelity-only run.
    #[serde(default)]
    pub attacks: Vec<Attack>,
    /// Seeds applied per cell to the stochastic attacks; deterministic
    /// attacks run once per seed unchanged, so their aggregates repeat.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

impl BenchManifest {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.corpus.is_empty() {
            return Err(HarnessError::Invalid("manifest corpus is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Invalid("manifest seeds are empty".into()));
        }
        Ok(())
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<BenchManifest, HarnessError> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    let mut manifest: BenchManifest = serde_json::from_slice(&data)
        .map_err(|e| HarnessError::format(path, format!("bad manifest JSON: {e}")))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&p);
        }
    };
    manifest.corpus.iter_mut().for_each(&resolve);
    resolve(&mut manifest.watermark);
    resolve(&mut manifest.output_dir);
    Ok(manifest)
}

#[derive(Debug, Clone, Serialize)]
struct FidelityRecord {
    image: String,
    fidelity: Option<FidelitySection>,
    /// Extraction check with no attack applied.
    no_attack_correlation: Option<CorrelationSection>,
    error: Option<String>,
    config_hash: String,
}

#[derive(Debug, Clone, Serialize)]
struct CellRecord {
    image: String,
    /// Effective attack, seed already applied to stochastic kinds.
    attack: Attack,
    label: String,
    seed: u64,
    correlation: Option<CorrelationSection>,
    error: Option<String>,
    config_hash: String,
}

#[derive(Debug, Clone, Serialize)]
struct AggregateRecord {
    label: String,
    image: String,
    cells: usize,
    failures: usize,
    mean_correlation: Option<f64>,
    min_correlation: Option<f64>,
}

#[derive(Serialize)]
struct BenchReport<'a> {
    format_version: u32,
    config_hash: &'a str,
    config: &'a ConfigSection,
    corpus: &'a [String],
    watermark: &'a str,
    seeds: &'a [u64],
    attacks: &'a [Attack],
    fidelity: &'a [FidelityRecord],
    cells: &'a [CellRecord],
    aggregates: &'a [AggregateRecord],
}

/// What `run_bench` hands back for the status line.
#[derive(Debug)]
pub struct BenchSummary {
    pub output_dir: PathBuf,
    pub images: usize,
    pub cells: usize,
    pub failures: usize,
}

/// Everything hashed into the per-cell provenance stamp. File contents
/// are identified by name, not path, so moving a corpus directory does
/// not change the hash.
#[derive(Serialize)]
struct HashInput<'a> {
    config: &'a ConfigSection,
    attacks: &'a [Attack],
    seeds: &'a [u64],
    corpus: &'a [String],
    watermark: &'a str,
}

fn config_hash(input: &HashInput) -> Result<String, HarnessError> {
    let body = serde_json::to_string(input)
        .map_err(|e| HarnessError::Internal(format!("hash serialization: {e}")))?;
    let digest = Sha256::digest(body.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn worker_pool() -> Result<rayon::ThreadPool, HarnessError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(WORKERS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                HarnessError::Invalid(format!("{WORKERS_ENV}={raw:?} is not a positive integer"))
            })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| HarnessError::Internal(format!("worker pool: {e}")))
}

fn display_name(path: &Path, index: usize, taken: &[String]) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| format!("image-{index}"));
    if taken.iter().any(|t| t == &stem) {
        format!("{stem}#{index}")
    } else {
        stem
    }
}

struct Prepared {
    watermarked: GrayImage,
    plan: EmbedPlan,
}

fn prepare_image(
    name: &str,
    host: &GrayImage,
    wm: &WatermarkBits,
    cfg: &wavemark_core::codec::EmbedConfig,
    hash: &str,
) -> (FidelityRecord, Option<Prepared>) {
    let outcome = embed(host, wm, cfg).and_then(|(watermarked, plan)| {
        let m = mse(host, &watermarked)?;
        let p = psnr(host, &watermarked)?;
        let extracted = extract(host, &watermarked, &plan)?;
        let corr = correlation(&extracted, wm)?;
        Ok((watermarked, plan, m, p, corr))
    });
    match outcome {
        Ok((watermarked, plan, m, p, corr)) => (
            FidelityRecord {
                image: name.to_string(),
                fidelity: Some(FidelitySection::new(m, p)),
                no_attack_correlation: Some(corr.into()),
                error: None,
                config_hash: hash.to_string(),
            },
            Some(Prepared { watermarked, plan }),
        ),
        Err(e) => (
            FidelityRecord {
                image: name.to_string(),
                fidelity: None,
                no_attack_correlation: None,
                error: Some(e.to_string()),
                config_hash: hash.to_string(),
            },
            None,
        ),
    }
}

fn run_cell(
    name: &str,
    host: &GrayImage,
    prepared: Option<&Prepared>,
    wm: &WatermarkBits,
    attack: Attack,
    seed: u64,
    hash: &str,
) -> CellRecord {
    let effective = attack.with_seed(seed);
    let outcome = match prepared {
        None => Err("embedding failed upstream".to_string()),
        Some(p) => effective
            .apply(&p.watermarked)
            .and_then(|attacked| extract(host, &attacked, &p.plan))
            .and_then(|extracted| correlation(&extracted, wm))
            .map_err(|e| e.to_string()),
    };
    let (corr, error) = match outcome {
        Ok(c) => (Some(c.into()), None),
        Err(e) => (None, Some(e)),
    };
    CellRecord {
        image: name.to_string(),
        attack: effective,
        label: effective.label(),
        seed,
        correlation: corr,
        error,
        config_hash: hash.to_string(),
    }
}

fn aggregate(cells: &[CellRecord], labels: &[String], images: &[String]) -> Vec<AggregateRecord> {
    let mut out = Vec::new();
    for label in labels {
        for image in images {
            let slice: Vec<&CellRecord> = cells
                .iter()
                .filter(|c| &c.label == label && &c.image == image)
                .collect();
            let values: Vec<f64> = slice
                .iter()
                .filter_map(|c| c.correlation.as_ref().map(|s| s.correlation))
                .collect();
            out.push(AggregateRecord {
                label: label.clone(),
                image: image.clone(),
                cells: slice.len(),
                failures: slice.len() - values.len(),
                mean_correlation: (!values.is_empty())
                    .then(|| values.iter().sum::<f64>() / values.len() as f64),
                min_correlation: values.iter().copied().reduce(f64::min),
            });
        }
    }
    out
}

fn write_text(path: &Path, body: &str) -> Result<(), HarnessError> {
    std::fs::write(path, body).map_err(|e| HarnessError::io(path, e))
}

fn correlation_csv(
    aggregates: &[AggregateRecord],
    labels: &[String],
    images: &[String],
    pick: impl Fn(&AggregateRecord) -> Option<f64>,
) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["attack".to_string()];
    header.extend(images.iter().cloned());
    w.write_record(&header)
        .map_err(|e| HarnessError::Internal(format!("csv: {e}")))?;
    for label in labels {
        let mut row = vec![label.clone()];
        for image in images {
            let cell = aggregates
                .iter()
                .find(|a| &a.label == label && &a.image == image)
                .and_then(&pick);
            row.push(cell.map(|v| format!("{v:.6}")).unwrap_or_default());
        }
        w.write_record(&row)
            .map_err(|e| HarnessError::Internal(format!("csv: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::Internal(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Internal(format!("csv: {e}")))
}

fn fidelity_csv(rows: &[FidelityRecord]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["image", "mse", "psnr_db", "no_attack_correlation"])
        .map_err(|e| HarnessError::Internal(format!("csv: {e}")))?;
    for row in rows {
        let (mse, psnr) = match &row.fidelity {
            Some(f) => (
                format!("{:.6}", f.mse),
                f.psnr_db.map(|p| format!("{p:.4}")).unwrap_or("inf".into()),
            ),
            None => (String::new(), String::new()),
        };
        let corr = row
            .no_attack_correlation
            .as_ref()
            .map(|c| format!("{:.6}", c.correlation))
            .unwrap_or_default();
        w.write_record([row.image.as_str(), &mse, &psnr, &corr])
            .map_err(|e| HarnessError::Internal(format!("csv: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::Internal(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Internal(format!("csv: {e}")))
}

/// Runs the full grid. Per-cell failures (a failing attack or
/// extraction) are recorded in the report and do not stop the run; only
/// unreadable inputs or an unwritable output directory abort.
pub fn run_bench(manifest: &BenchManifest) -> Result<BenchSummary, HarnessError> {
    manifest.validate()?;
    let cfg = manifest.config.to_config()?;
    let wm = pgm::read_binary_watermark(&manifest.watermark, pgm::DEFAULT_WATERMARK_THRESHOLD)?;

    let mut names: Vec<String> = Vec::new();
    let mut hosts: Vec<GrayImage> = Vec::new();
    for (i, path) in manifest.corpus.iter().enumerate() {
        let name = display_name(path, i, &names);
        hosts.push(pgm::read_pgm(path)?);
        names.push(name);
    }
    let wm_name = display_name(&manifest.watermark, 0, &[]);

    let hash = config_hash(&HashInput {
        config: &manifest.config,
        attacks: &manifest.attacks,
        seeds: &manifest.seeds,
        corpus: &names,
        watermark: &wm_name,
    })?;

    let pool = worker_pool()?;

    // Embed once per image; everything downstream shares the result.
    let prepared: Vec<(FidelityRecord, Option<Prepared>)> = pool.install(|| {
        names
            .par_iter()
            .zip(&hosts)
            .map(|(name, host)| prepare_image(name, host, &wm, &cfg, &hash))
            .collect()
    });
    let fidelity: Vec<FidelityRecord> = prepared.iter().map(|(f, _)| f.clone()).collect();

    // Cell grid in deterministic (attack, image, seed) order; the
    // indexed parallel map preserves it.
    let mut grid: Vec<(usize, usize, usize)> = Vec::new();
    for ai in 0..manifest.attacks.len() {
        for ii in 0..names.len() {
            for si in 0..manifest.seeds.len() {
                grid.push((ai, ii, si));
            }
        }
    }
    let cells: Vec<CellRecord> = pool.install(|| {
        grid.par_iter()
            .map(|&(ai, ii, si)| {
                run_cell(
                    &names[ii],
                    &hosts[ii],
                    prepared[ii].1.as_ref(),
                    &wm,
                    manifest.attacks[ai],
                    manifest.seeds[si],
                    &hash,
                )
            })
            .collect()
    });

    // Join point: report assembly is single-threaded from here on.
    let mut labels: Vec<String> = Vec::new();
    for attack in &manifest.attacks {
        let label = attack.label();
        if !labels.contains(&label) {
            labels.push(label);
        }
    }
    let aggregates = aggregate(&cells, &labels, &names);

    let report = BenchReport {
        format_version: REPORT_FORMAT_VERSION,
        config_hash: &hash,
        config: &manifest.config,
        corpus: &names,
        watermark: &wm_name,
        seeds: &manifest.seeds,
        attacks: &manifest.attacks,
        fidelity: &fidelity,
        cells: &cells,
        aggregates: &aggregates,
    };
    let mut report_json = serde_json::to_string_pretty(&report)
        .map_err(|e| HarnessError::Internal(format!("report serialization: {e}")))?;
    report_json.push('\n');

    let dir = &manifest.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    write_text(&dir.join("report.json"), &report_json)?;
    write_text(&dir.join("fidelity.csv"), &fidelity_csv(&fidelity)?)?;
    write_text(
        &dir.join("correlation_mean.csv"),
        &correlation_csv(&aggregates, &labels, &names, |a| a.mean_correlation)?,
    )?;
    write_text(
        &dir.join("correlation_min.csv"),
        &correlation_csv(&aggregates, &labels, &names, |a| a.min_correlation)?,
    )?;

    let failures = cells.iter().filter(|c| c.error.is_some()).count()
        + fidelity.iter().filter(|f| f.error.is_some()).count();
    Ok(BenchSummary {
        output_dir: dir.clone(),
        images: names.len(),
        cells: cells.len(),
        failures,
    })
}
