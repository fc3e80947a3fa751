//! Command line front end. Exit codes: 0 success, 1 usage, 2 data error
//! (unreadable or inconsistent inputs), 3 internal error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use wavemark_core::attacks::{Attack, Corner};
use wavemark_core::codec::{self, EmbedConfig};
use wavemark_core::metrics::{correlation, mse, psnr};

use crate::bench;
use crate::error::HarnessError;
use crate::pgm::{self, DEFAULT_WATERMARK_THRESHOLD};
use crate::plan::{self, AlphaSection, ConfigSection, NvfSection};
use crate::report::{FidelitySection, MetricReport, ReportContext};
use crate::synth;

#[derive(Parser)]
#[command(
    name = "wavemark",
    version,
    about = "Wavelet-domain image watermarking: embed, extract, attack, measure"
)]
struct Cli {
    /// Report failures as JSON on stderr instead of plain text.
    #[arg(long, global = true)]
    error_json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hide a binary watermark in a host image.
    Embed(EmbedCmd),
    /// Recover a watermark from a suspect image (needs the original).
    Extract(ExtractCmd),
    /// Distort an image with one of the benchmark attacks.
    Attack(AttackCmd),
    /// Compare images and/or watermarks, printing a metric report.
    Metrics(MetricsCmd),
    /// Run a full embed/attack/extract grid from a manifest.
    Bench(BenchCmd),
    /// Generate the synthetic host corpus and a watermark pattern.
    Corpus(CorpusCmd),
}

/// Embedding configuration flags, shared by embed and the regenerating
/// form of extract. Defaults follow the library defaults.
#[derive(Args)]
struct ConfigArgs {
    /// Embedding strength for the LH2 band.
    #[arg(long, default_value_t = 3.0)]
    alpha_lh2: f64,
    /// Embedding strength for the HL2 band.
    #[arg(long, default_value_t = 1.0)]
    alpha_hl2: f64,
    /// Wavelet filter bank: haar or db4.
    #[arg(long, default_value = "haar")]
    filter_bank: String,
    /// Visibility-window half-width L; the window is (2L+1) squared.
    #[arg(long, default_value_t = 1)]
    nvf_window: usize,
    /// Distortion budget in flat regions (s1).
    #[arg(long, default_value_t = 3.0)]
    flat_strength: f64,
    /// JSON file holding a 4x4 quantization-factor matrix override.
    #[arg(long)]
    quant_file: Option<PathBuf>,
}

impl ConfigArgs {
    fn to_config(&self) -> Result<EmbedConfig, HarnessError> {
        let quant_matrix = match &self.quant_file {
            None => *EmbedConfig::default().quant.factors(),
            Some(path) => {
                let data = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
                serde_json::from_slice(&data)
                    .map_err(|e| HarnessError::format(path, format!("bad quant matrix: {e}")))?
            }
        };
        ConfigSection {
            filter_bank: self.filter_bank.clone(),
            alpha: AlphaSection {
                lh2: self.alpha_lh2,
                hl2: self.alpha_hl2,
            },
            nvf: NvfSection {
                window_halfwidth: self.nvf_window,
                flat_strength: self.flat_strength,
            },
            quant_matrix,
        }
        .to_config()
    }
}

#[derive(Args)]
struct EmbedCmd {
    /// Host image (PGM).
    #[arg(long)]
    host: PathBuf,
    /// Binary watermark image (PGM; pixels >= threshold read as 1).
    #[arg(long)]
    watermark: PathBuf,
    /// Watermark binarization threshold.
    #[arg(long, default_value_t = DEFAULT_WATERMARK_THRESHOLD)]
    threshold: u8,
    /// Output path for the watermarked image.
    #[arg(long)]
    out: PathBuf,
    /// Output path for the embedding plan JSON.
    #[arg(long)]
    plan: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("plan_source").required(true).args(["plan", "wm_width"]))]
struct ExtractCmd {
    /// The unwatermarked original image.
    #[arg(long)]
    original: PathBuf,
    /// The image to pull the watermark out of.
    #[arg(long)]
    suspect: PathBuf,
    /// Embedding plan JSON written by embed. Without it the plan is
    /// regenerated from the original, which then needs the watermark
    /// dimensions and the embedding configuration.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Watermark width, for plan regeneration without a plan file.
    #[arg(long, conflicts_with = "plan", requires = "wm_height")]
    wm_width: Option<usize>,
    /// Watermark height, for plan regeneration without a plan file.
    #[arg(long, conflicts_with = "plan", requires = "wm_width")]
    wm_height: Option<usize>,
    #[command(flatten)]
    config: ConfigArgs,
    /// Output path for the extracted watermark (PGM, bits as 0/255).
    #[arg(long)]
    out: PathBuf,
    /// Optional metric report JSON path.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Reference watermark to correlate the extraction against.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Binarization threshold for the reference watermark.
    #[arg(long, default_value_t = DEFAULT_WATERMARK_THRESHOLD)]
    threshold: u8,
}

#[derive(Args)]
struct AttackCmd {
    /// Input image (PGM).
    #[arg(long)]
    image: PathBuf,
    /// Output path for the distorted image.
    #[arg(long)]
    out: PathBuf,
    #[command(subcommand)]
    kind: AttackKind,
}

#[derive(Subcommand)]
enum AttackKind {
    /// Impulse noise: flips a fraction of pixels to black or white.
    SaltPepper {
        #[arg(long)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Additive Gaussian noise with the given normalized variance.
    GaussianNoise {
        #[arg(long)]
        variance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Mean (box) filter.
    Mean {
        #[arg(long, default_value_t = 3)]
        kernel: usize,
    },
    /// Median filter.
    Median {
        #[arg(long, default_value_t = 3)]
        kernel: usize,
    },
    /// Gaussian blur; sigma defaults to (kernel-1)/4.
    Gaussian {
        #[arg(long, default_value_t = 3)]
        kernel: usize,
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Zero out a size-by-size square at a corner.
    Crop {
        #[arg(long)]
        size: usize,
        /// top_left, top_right, bottom_left, or bottom_right.
        #[arg(long, default_value = "top_left")]
        anchor: String,
    },
    /// JPEG compress-decompress round trip.
    Jpeg {
        #[arg(long)]
        quality: u8,
    },
    /// Histogram equalization.
    HistEq,
    /// Contrast stretch clipping the given percent of the range.
    Contrast {
        #[arg(long)]
        percent: f64,
    },
    /// Read the attack description from a JSON spec file.
    FromSpec {
        #[arg(long)]
        spec: PathBuf,
    },
}

fn parse_corner(name: &str) -> Result<Corner, HarnessError> {
    match name {
        "top_left" => Ok(Corner::TopLeft),
        "top_right" => Ok(Corner::TopRight),
        "bottom_left" => Ok(Corner::BottomLeft),
        "bottom_right" => Ok(Corner::BottomRight),
        other => Err(HarnessError::Invalid(format!(
            "unknown corner {other:?} (expected top_left, top_right, bottom_left, bottom_right)"
        ))),
    }
}

impl AttackKind {
    fn to_attack(&self) -> Result<Attack, HarnessError> {
        Ok(match self {
            AttackKind::SaltPepper { density, seed } => Attack::SaltPepper {
                density: *density,
                seed: *seed,
            },
            AttackKind::GaussianNoise { variance, seed } => Attack::GaussianNoise {
                variance: *variance,
                seed: *seed,
            },
            AttackKind::Mean { kernel } => Attack::MeanFilter { kernel_size: *kernel },
            AttackKind::Median { kernel } => Attack::MedianFilter { kernel_size: *kernel },
            AttackKind::Gaussian { kernel, sigma } => Attack::GaussianFilter {
                kernel_size: *kernel,
                sigma: *sigma,
            },
            AttackKind::Crop { size, anchor } => Attack::Crop {
                size: *size,
                anchor: parse_corner(anchor)?,
            },
            AttackKind::Jpeg { quality } => Attack::Jpeg {
                quality_factor: *quality,
            },
            AttackKind::HistEq => Attack::HistEq,
            AttackKind::Contrast { percent } => Attack::Contrast { percent: *percent },
            AttackKind::FromSpec { spec } => {
                let data = std::fs::read(spec).map_err(|e| HarnessError::io(spec, e))?;
                serde_json::from_slice(&data)
                    .map_err(|e| HarnessError::format(spec, format!("bad attack spec: {e}")))?
            }
        })
    }
}

#[derive(Args)]
struct MetricsCmd {
    /// First image (PGM).
    #[arg(long)]
    a: PathBuf,
    /// Second image (PGM), compared against the first.
    #[arg(long)]
    b: PathBuf,
    /// First watermark for bit correlation.
    #[arg(long, requires = "wm_b")]
    wm_a: Option<PathBuf>,
    /// Second watermark for bit correlation.
    #[arg(long, requires = "wm_a")]
    wm_b: Option<PathBuf>,
    /// Binarization threshold for the watermark images.
    #[arg(long, default_value_t = DEFAULT_WATERMARK_THRESHOLD)]
    threshold: u8,
    /// Report JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchCmd {
    /// Benchmark manifest JSON; relative paths resolve against it.
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Args)]
struct CorpusCmd {
    /// Directory to write the corpus into (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
    /// Host image side length.
    #[arg(long, default_value_t = 512)]
    side: usize,
    /// Watermark side length.
    #[arg(long, default_value_t = 32)]
    wm_side: usize,
    /// Seed for the corpus and watermark generators.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn cmd_embed(cmd: &EmbedCmd) -> Result<(), HarnessError> {
    let cfg = cmd.config.to_config()?;
    let host = pgm::read_pgm(&cmd.host)?;
    let wm = pgm::read_binary_watermark(&cmd.watermark, cmd.threshold)?;
    let (marked, embed_plan) = codec::embed(&host, &wm, &cfg)?;
    pgm::write_pgm(&marked, &cmd.out)?;
    plan::save_plan(&embed_plan, &cmd.plan)?;
    let p = psnr(&host, &marked)?;
    println!(
        "embedded {}x{} watermark into {}x{} host, psnr {:.4} dB",
        wm.width(),
        wm.height(),
        host.width(),
        host.height(),
        p
    );
    Ok(())
}

fn cmd_extract(cmd: &ExtractCmd) -> Result<(), HarnessError> {
    let original = pgm::read_pgm(&cmd.original)?;
    let suspect = pgm::read_pgm(&cmd.suspect)?;
    let embed_plan = match (&cmd.plan, cmd.wm_width, cmd.wm_height) {
        (Some(path), _, _) => plan::load_plan(path)?,
        (None, Some(w), Some(h)) => {
            codec::regenerate_plan(&original, w, h, &cmd.config.to_config()?)?
        }
        _ => {
            return Err(HarnessError::Invalid(
                "extraction needs --plan, or --wm-width and --wm-height to regenerate".into(),
            ))
        }
    };
    let extracted = codec::extract(&original, &suspect, &embed_plan)?;
    pgm::write_pgm(&pgm::watermark_image(&extracted), &cmd.out)?;

    let reference = cmd
        .reference
        .as_ref()
        .map(|p| pgm::read_binary_watermark(p, cmd.threshold))
        .transpose()?;
    let corr = reference
        .as_ref()
        .map(|r| correlation(&extracted, r))
        .transpose()?;
    if let Some(c) = &corr {
        println!("correlation {:.6}", c.value);
    } else {
        println!("extracted {}x{} watermark", extracted.width(), extracted.height());
    }
    if let Some(path) = &cmd.metrics {
        let report = MetricReport {
            context: ReportContext {
                image: cmd.suspect.display().to_string(),
                reference: cmd.reference.as_ref().map(|p| p.display().to_string()),
                attack: None,
            },
            fidelity: Some(FidelitySection::new(
                mse(&original, &suspect)?,
                psnr(&original, &suspect)?,
            )),
            watermark: corr.map(Into::into),
        };
        report.save(path)?;
    }
    Ok(())
}

fn cmd_attack(cmd: &AttackCmd) -> Result<(), HarnessError> {
    let img = pgm::read_pgm(&cmd.image)?;
    let attack = cmd.kind.to_attack()?;
    let out = attack.apply(&img)?;
    pgm::write_pgm(&out, &cmd.out)?;
    println!("{}", attack.label());
    Ok(())
}

fn cmd_metrics(cmd: &MetricsCmd) -> Result<(), HarnessError> {
    let a = pgm::read_pgm(&cmd.a)?;
    let b = pgm::read_pgm(&cmd.b)?;
    let watermark = match (&cmd.wm_a, &cmd.wm_b) {
        (Some(pa), Some(pb)) => {
            let wa = pgm::read_binary_watermark(pa, cmd.threshold)?;
            let wb = pgm::read_binary_watermark(pb, cmd.threshold)?;
            Some(correlation(&wa, &wb)?.into())
        }
        _ => None,
    };
    let report = MetricReport {
        context: ReportContext {
            image: format!("{} vs {}", cmd.a.display(), cmd.b.display()),
            reference: None,
            attack: None,
        },
        fidelity: Some(FidelitySection::new(mse(&a, &b)?, psnr(&a, &b)?)),
        watermark,
    };
    match &cmd.out {
        Some(path) => report.save(path)?,
        None => print!("{}", report.to_json()?),
    }
    Ok(())
}

fn cmd_bench(cmd: &BenchCmd) -> Result<(), HarnessError> {
    let manifest = bench::load_manifest(&cmd.manifest)?;
    let summary = bench::run_bench(&manifest)?;
    println!(
        "bench: {} images, {} cells, {} failures -> {}",
        summary.images,
        summary.cells,
        summary.failures,
        summary.output_dir.display()
    );
    Ok(())
}

fn cmd_corpus(cmd: &CorpusCmd) -> Result<(), HarnessError> {
    std::fs::create_dir_all(&cmd.out_dir).map_err(|e| HarnessError::io(&cmd.out_dir, e))?;
    for (name, img) in synth::corpus(cmd.side, cmd.seed) {
        let path = cmd.out_dir.join(format!("{name}.pgm"));
        pgm::write_pgm(&img, &path)?;
        println!("{}", path.display());
    }
    let wm = synth::watermark_pattern(cmd.wm_side, cmd.wm_side, cmd.seed ^ 0x77);
    let wm_path = cmd.out_dir.join("watermark.pgm");
    pgm::write_pgm(&pgm::watermark_image(&wm), &wm_path)?;
    println!("{}", wm_path.display());
    Ok(())
}

fn dispatch(command: &Command) -> Result<(), HarnessError> {
    match command {
        Command::Embed(cmd) => cmd_embed(cmd),
        Command::Extract(cmd) => cmd_extract(cmd),
        Command::Attack(cmd) => cmd_attack(cmd),
        Command::Metrics(cmd) => cmd_metrics(cmd),
        Command::Bench(cmd) => cmd_bench(cmd),
        Command::Corpus(cmd) => cmd_corpus(cmd),
    }
}

fn emit_error(err: &HarnessError, as_json: bool) {
    if as_json {
        let body = serde_json::json!({
            "error": {
                "kind": err.kind(),
                "exit_code": err.exit_code(),
                "message": err.to_string(),
            }
        });
        eprintln!("{body}");
    } else {
        eprintln!("error: {err}");
    }
}

/// Parses arguments and runs one command, returning the process exit
/// code. A panic anywhere below counts as an internal error (exit 3).
pub fn run() -> i32 {
    // The flag has to work even when parsing itself fails.
    let wants_json = std::env::args().any(|a| a == "--error-json");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            if wants_json {
                let body = serde_json::json!({
                    "error": { "kind": "usage", "exit_code": 1, "message": e.to_string() }
                });
                eprintln!("{body}");
            } else {
                let _ = e.print();
            }
            return 1;
        }
    };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        dispatch(&cli.command)
    }));
    match result {
        Ok(Ok(())) => 0,
        Ok(Err(err)) => {
            emit_error(&err, cli.error_json);
            err.exit_code()
        }
        Err(_) => {
            let err = HarnessError::Internal("command panicked".into());
            emit_error(&err, cli.error_json);
            err.exit_code()
        }
    }
}
