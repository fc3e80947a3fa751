//! Attack battery: deterministic (seeded where stochastic) image
//! degradations used to probe watermark robustness. Every attack
//! preserves dimensions and returns pixels in [0, 255]; the identity
//! parameters (density 0, variance 0, size 0, percent 0) reproduce the
//! input bit for bit.

mod jpeg;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::image::{round_half_up, GrayImage};
use crate::rng::{sample_distinct, seeded, uniform_index, NormalSource};

/// Rounds and saturates a real sample into the 8-bit range.
pub(crate) fn clamp_round(v: f64) -> u8 {
    let r = round_half_up(v);
    if r >= 255.0 {
        255
    } else if r >= 0.0 {
        r as u8
    } else {
        0
    }
}

fn check_kernel(k: usize) -> Result<(), CoreError> {
    if k < 3 || k % 2 == 0 {
        return Err(CoreError::BadParameter {
            what: "kernel_size",
            value: k as f64,
            range: "odd integers >= 3",
        });
    }
    Ok(())
}

/// Replaces floor(density * M * N) distinct pixels (uniform positions,
/// drawn without replacement) with 0 or 255, each with probability 1/2.
pub fn salt_pepper(img: &GrayImage, density: f64, seed: u64) -> Result<GrayImage, CoreError> {
    if !(0.0..=1.0).contains(&density) {
        return Err(CoreError::BadParameter {
            what: "density",
            value: density,
            range: "[0, 1]",
        });
    }
    let total = img.pixels().len();
    let count = libm::floor(density * total as f64) as usize;
    let mut out = img.clone();
    if count == 0 {
        return Ok(out);
    }
    let mut rng = seeded(seed);
    let positions = sample_distinct(&mut rng, total, count);
    for pos in positions {
        out.pixels_mut()[pos] = if uniform_index(&mut rng, 2) == 0 { 0 } else { 255 };
    }
    Ok(out)
}

/// Adds zero-mean Gaussian noise with the given variance on the
/// normalized [0, 1] intensity scale, i.e. standard deviation
/// 255 * sqrt(variance) in gray levels; rounds and saturates.
pub fn gaussian_noise(img: &GrayImage, variance: f64, seed: u64) -> Result<GrayImage, CoreError> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(CoreError::BadParameter {
            what: "variance",
            value: variance,
            range: "[0, inf)",
        });
    }
    if variance == 0.0 {
        return Ok(img.clone());
    }
    let sigma = 255.0 * libm::sqrt(variance);
    let mut normal = NormalSource::new(seeded(seed));
    let mut out = img.clone();
    for p in out.pixels_mut() {
        *p = clamp_round(*p as f64 + sigma * normal.next());
    }
    Ok(out)
}

fn windowed<F>(img: &GrayImage, k: usize, mut combine: F) -> GrayImage
where
    F: FnMut(&[u8]) -> u8,
{
    let (w, h) = img.dims();
    let half = (k / 2) as isize;
    let mut window = Vec::with_capacity(k * k);
    let mut out = img.clone();
    for r in 0..h {
        for c in 0..w {
            window.clear();
            for dr in -half..=half {
                let sr = (r as isize + dr).clamp(0, h as isize - 1) as usize;
                for dc in -half..=half {
                    let sc = (c as isize + dc).clamp(0, w as isize - 1) as usize;
                    window.push(img.get(sr, sc));
                }
            }
            out.set(r, c, combine(&window));
        }
    }
    out
}

/// Windowed arithmetic mean with clamp-to-edge replication.
pub fn mean_filter(img: &GrayImage, k: usize) -> Result<GrayImage, CoreError> {
    check_kernel(k)?;
    let area = (k * k) as f64;
    Ok(windowed(img, k, |w| {
        let sum: u32 = w.iter().map(|&p| p as u32).sum();
        clamp_round(sum as f64 / area)
    }))
}

/// Windowed median with clamp-to-edge replication. The window holds an
/// odd number of samples, so the median is an actual pixel value.
pub fn median_filter(img: &GrayImage, k: usize) -> Result<GrayImage, CoreError> {
    check_kernel(k)?;
    let mut scratch = Vec::new();
    Ok(windowed(img, k, |w| {
        scratch.clear();
        scratch.extend_from_slice(w);
        scratch.sort_unstable();
        scratch[scratch.len() / 2]
    }))
}

/// Default blur width for a k-tap Gaussian: 0.5 at k = 3, 1.0 at k = 5.
pub fn default_gaussian_sigma(k: usize) -> f64 {
    (k as f64 - 1.0) / 4.0
}

/// Normalized k x k Gaussian convolution with clamp-to-edge replication.
pub fn gaussian_filter(img: &GrayImage, k: usize, sigma: f64) -> Result<GrayImage, CoreError> {
    check_kernel(k)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(CoreError::BadParameter {
            what: "sigma",
            value: sigma,
            range: "(0, inf)",
        });
    }
    let half = (k / 2) as isize;
    let taps: Vec<f64> = (-half..=half)
        .map(|d| libm::exp(-((d * d) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let mut kernel = Vec::with_capacity(k * k);
    for ty in &taps {
        for tx in &taps {
            kernel.push(ty * tx);
        }
    }
    let total: f64 = kernel.iter().sum();
    for v in &mut kernel {
        *v /= total;
    }
    Ok(windowed(img, k, |w| {
        let acc: f64 = w.iter().zip(&kernel).map(|(&p, &g)| p as f64 * g).sum();
        clamp_round(acc)
    }))
}

/// Corner anchoring the cropped-out square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Corner {
    #[default]
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

impl Corner {
    pub fn name(self) -> &'static str {
        match self {
            Corner::TopLeft => "top_left",
            Corner::TopRight => "top_right",
            Corner::BottomLeft => "bottom_left",
            Corner::BottomRight => "bottom_right",
        }
    }
}

/// Zeroes the size x size square at the given corner. Dimensions are
/// kept so coefficient-aligned extraction still applies.
pub fn crop(img: &GrayImage, size: usize, anchor: Corner) -> Result<GrayImage, CoreError> {
    let (w, h) = img.dims();
    if size > w.min(h) {
        return Err(CoreError::BadParameter {
            what: "size",
            value: size as f64,
            range: "0..=min(width, height)",
        });
    }
    let mut out = img.clone();
    if size == 0 {
        return Ok(out);
    }
    let (r0, c0) = match anchor {
        Corner::TopLeft => (0, 0),
        Corner::TopRight => (0, w - size),
        Corner::BottomLeft => (h - size, 0),
        Corner::BottomRight => (h - size, w - size),
    };
    for r in r0..r0 + size {
        for c in c0..c0 + size {
            out.set(r, c, 0);
        }
    }
    Ok(out)
}

/// Baseline JPEG encode at the given quality factor, then decode.
pub fn jpeg_roundtrip(img: &GrayImage, quality: u8) -> Result<GrayImage, CoreError> {
    if quality < 1 || quality > 100 {
        return Err(CoreError::BadParameter {
            what: "quality_factor",
            value: quality as f64,
            range: "[1, 100]",
        });
    }
    jpeg::decode(&jpeg::encode(img, quality))
}

/// 256-bin cumulative-histogram equalization: v maps to
/// round(255 * cdf(v)).
pub fn hist_eq(img: &GrayImage) -> GrayImage {
    let mut counts = [0u64; 256];
    for &p in img.pixels() {
        counts[p as usize] += 1;
    }
    let total = img.pixels().len() as f64;
    let mut lut = [0u8; 256];
    let mut cum = 0u64;
    for v in 0..256 {
        cum += counts[v];
        lut[v] = clamp_round(255.0 * cum as f64 / total);
    }
    let mut out = img.clone();
    for p in out.pixels_mut() {
        *p = lut[*p as usize];
    }
    out
}

/// Linearly maps the input range [lo, hi] to [0, 255], where
/// lo = percent/2 * 255/100 and hi = 255 - lo; values outside saturate.
/// Percent 0 is the exact identity.
pub fn contrast_adjust(img: &GrayImage, percent: f64) -> Result<GrayImage, CoreError> {
    if !(percent >= 0.0 && percent < 100.0) {
        return Err(CoreError::BadParameter {
            what: "percent",
            value: percent,
            range: "[0, 100)",
        });
    }
    let lo = percent * 255.0 / 200.0;
    let span = 255.0 - 2.0 * lo;
    let mut lut = [0u8; 256];
    for (v, slot) in lut.iter_mut().enumerate() {
        *slot = clamp_round((v as f64 - lo) * 255.0 / span);
    }
    let mut out = img.clone();
    for p in out.pixels_mut() {
        *p = lut[*p as usize];
    }
    Ok(out)
}

/// Declarative attack description; serializes as tagged JSON for bench
/// manifests when the `serde` feature is on.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Attack {
    SaltPepper {
        density: f64,
        seed: u64,
    },
    GaussianNoise {
        variance: f64,
        seed: u64,
    },
    MeanFilter {
        kernel_size: usize,
    },
    MedianFilter {
        kernel_size: usize,
    },
    GaussianFilter {
        kernel_size: usize,
        #[cfg_attr(feature = "serde", serde(default))]
        sigma: Option<f64>,
    },
    Crop {
        size: usize,
        #[cfg_attr(feature = "serde", serde(default))]
        anchor: Corner,
    },
    Jpeg {
        quality_factor: u8,
    },
    HistEq,
    Contrast {
        percent: f64,
    },
}

impl Attack {
    pub fn kind(&self) -> &'static str {
        match self {
            Attack::SaltPepper { .. } => "salt_pepper",
            Attack::GaussianNoise { .. } => "gaussian_noise",
            Attack::MeanFilter { .. } => "mean_filter",
            Attack::MedianFilter { .. } => "median_filter",
            Attack::GaussianFilter { .. } => "gaussian_filter",
            Attack::Crop { .. } => "crop",
            Attack::Jpeg { .. } => "jpeg",
            Attack::HistEq => "hist_eq",
            Attack::Contrast { .. } => "contrast",
        }
    }

    /// Stable human-readable parameterization, used as a table row key.
    /// Seeds are excluded: rows aggregate over seeds.
    pub fn label(&self) -> String {
        match self {
            Attack::SaltPepper { density, .. } => format!("salt_pepper density={density}"),
            Attack::GaussianNoise { variance, .. } => format!("gaussian_noise variance={variance}"),
            Attack::MeanFilter { kernel_size } => format!("mean_filter k={kernel_size}"),
            Attack::MedianFilter { kernel_size } => format!("median_filter k={kernel_size}"),
            Attack::GaussianFilter { kernel_size, sigma } => match sigma {
                Some(s) => format!("gaussian_filter k={kernel_size} sigma={s}"),
                None => format!("gaussian_filter k={kernel_size}"),
            },
            Attack::Crop { size, anchor } => format!("crop size={size} anchor={}", anchor.name()),
            Attack::Jpeg { quality_factor } => format!("jpeg q={quality_factor}"),
            Attack::HistEq => String::from("hist_eq"),
            Attack::Contrast { percent } => format!("contrast percent={percent}"),
        }
    }

    /// Replaces the seed on stochastic kinds; deterministic kinds are
    /// returned unchanged, letting the bench iterate one spec over many
    /// seeds.
    pub fn with_seed(self, seed: u64) -> Attack {
        match self {
            Attack::SaltPepper { density, .. } => Attack::SaltPepper { density, seed },
            Attack::GaussianNoise { variance, .. } => Attack::GaussianNoise { variance, seed },
            other => other,
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Attack::SaltPepper { .. } | Attack::GaussianNoise { .. })
    }

    pub fn apply(&self, img: &GrayImage) -> Result<GrayImage, CoreError> {
        match *self {
            Attack::SaltPepper { density, seed } => salt_pepper(img, density, seed),
            Attack::GaussianNoise { variance, seed } => gaussian_noise(img, variance, seed),
            Attack::MeanFilter { kernel_size } => mean_filter(img, kernel_size),
            Attack::MedianFilter { kernel_size } => median_filter(img, kernel_size),
            Attack::GaussianFilter { kernel_size, sigma } => {
                gaussian_filter(img, kernel_size, sigma.unwrap_or(default_gaussian_sigma(kernel_size)))
            }
            Attack::Crop { size, anchor } => crop(img, size, anchor),
            Attack::Jpeg { quality_factor } => jpeg_roundtrip(img, quality_factor),
            Attack::HistEq => Ok(hist_eq(img)),
            Attack::Contrast { percent } => contrast_adjust(img, percent),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    use crate::rng::{seeded, uniform_index};

    fn noise_image(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut rng = seeded(seed);
        let pixels = (0..w * h)
            .map(|_| (16 + uniform_index(&mut rng, 224)) as u8)
            .collect();
        GrayImage::from_pixels(w, h, pixels).unwrap()
    }

    #[test]
    fn identity_parameters_reproduce_the_input() {
        let img = noise_image(40, 24, 1);
        assert_eq!(salt_pepper(&img, 0.0, 7).unwrap(), img);
        assert_eq!(gaussian_noise(&img, 0.0, 7).unwrap(), img);
        assert_eq!(crop(&img, 0, Corner::TopLeft).unwrap(), img);
        assert_eq!(contrast_adjust(&img, 0.0).unwrap(), img);
    }

    #[test]
    fn salt_pepper_changes_the_floor_count() {
        let img = GrayImage::new(512, 512, 128).unwrap();
        let hit = salt_pepper(&img, 0.01, 3).unwrap();
        let changed = img
            .pixels()
            .iter()
            .zip(hit.pixels())
            .filter(|(a, b)| a != b)
            .count();
        // Host has no 0/255 pixels, so every selected position differs.
        assert_eq!(changed, (0.01f64 * 512.0 * 512.0) as usize);
        assert_eq!(changed, 2621);
        for (a, b) in img.pixels().iter().zip(hit.pixels()) {
            if a != b {
                assert!(*b == 0 || *b == 255);
            }
        }
    }

    #[test]
    fn salt_pepper_density_one_saturates_everything() {
        let img = noise_image(32, 32, 2);
        let hit = salt_pepper(&img, 1.0, 5).unwrap();
        assert!(hit.pixels().iter().all(|&p| p == 0 || p == 255));
    }

    #[test]
    fn stochastic_attacks_are_seed_deterministic() {
        let img = noise_image(64, 64, 3);
        assert_eq!(
            salt_pepper(&img, 0.05, 11).unwrap(),
            salt_pepper(&img, 0.05, 11).unwrap()
        );
        assert_eq!(
            gaussian_noise(&img, 0.02, 11).unwrap(),
            gaussian_noise(&img, 0.02, 11).unwrap()
        );
        assert_ne!(
            salt_pepper(&img, 0.05, 11).unwrap(),
            salt_pepper(&img, 0.05, 12).unwrap()
        );
    }

    #[test]
    fn gaussian_noise_matches_the_requested_variance() {
        let img = GrayImage::new(512, 512, 128).unwrap();
        let noisy = gaussian_noise(&img, 0.01, 9).unwrap();
        let diffs: Vec<f64> = noisy
            .pixels()
            .iter()
            .map(|&p| p as f64 - 128.0)
            .collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
        let target = 0.01 * 255.0 * 255.0;
        assert!((var - target).abs() < 0.05 * target, "var {var} vs {target}");
    }

    #[test]
    fn filters_preserve_constants() {
        let img = GrayImage::new(20, 20, 77).unwrap();
        assert_eq!(mean_filter(&img, 3).unwrap(), img);
        assert_eq!(median_filter(&img, 5).unwrap(), img);
        assert_eq!(gaussian_filter(&img, 3, 0.5).unwrap(), img);
    }

    #[test]
    fn mean_filter_impulse_response() {
        let mut img = GrayImage::new(9, 9, 0).unwrap();
        img.set(4, 4, 255);
        let smoothed = mean_filter(&img, 3).unwrap();
        for r in 0..9 {
            for c in 0..9 {
                let expect = if (3..=5).contains(&r) && (3..=5).contains(&c) {
                    28 // round(255 / 9)
                } else {
                    0
                };
                assert_eq!(smoothed.get(r, c), expect, "at ({r},{c})");
            }
        }
    }

    #[test]
    fn median_filter_matches_a_naive_oracle() {
        let img = salt_pepper(&GrayImage::new(48, 48, 100).unwrap(), 0.05, 21).unwrap();
        let filtered = median_filter(&img, 3).unwrap();
        let (w, h) = img.dims();
        for r in 0..h {
            for c in 0..w {
                let mut vals = Vec::new();
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        let sr = (r as i64 + dr).clamp(0, h as i64 - 1) as usize;
                        let sc = (c as i64 + dc).clamp(0, w as i64 - 1) as usize;
                        vals.push(img.get(sr, sc));
                    }
                }
                vals.sort();
                assert_eq!(filtered.get(r, c), vals[4], "at ({r},{c})");
            }
        }
        // Sparse impulses on a constant background mostly vanish.
        let survivors = filtered.pixels().iter().filter(|&&p| p != 100).count();
        assert!(survivors < 48, "{survivors} impulses survived the median");
    }

    #[test]
    fn kernel_validation() {
        let img = noise_image(16, 16, 4);
        assert!(mean_filter(&img, 4).is_err());
        assert!(mean_filter(&img, 1).is_err());
        assert!(median_filter(&img, 2).is_err());
        assert!(gaussian_filter(&img, 3, 0.0).is_err());
        assert!(gaussian_filter(&img, 3, f64::NAN).is_err());
    }

    #[test]
    fn default_sigma_values() {
        assert_eq!(default_gaussian_sigma(3), 0.5);
        assert_eq!(default_gaussian_sigma(5), 1.0);
    }

    #[test]
    fn crop_zeroes_exactly_the_square() {
        let img = noise_image(512, 512, 5); // no zero pixels
        let cut = crop(&img, 64, Corner::TopLeft).unwrap();
        let zeroed = cut.pixels().iter().filter(|&&p| p == 0).count();
        assert_eq!(zeroed, 64 * 64);
        assert_eq!(cut.get(0, 0), 0);
        assert_eq!(cut.get(63, 63), 0);
        assert_eq!(cut.get(64, 64), img.get(64, 64));

        let full = crop(&img, 512, Corner::TopLeft).unwrap();
        assert!(full.pixels().iter().all(|&p| p == 0));
        assert!(crop(&img, 513, Corner::TopLeft).is_err());
    }

    #[test]
    fn crop_anchors_land_in_their_corners() {
        let img = GrayImage::new(8, 6, 200).unwrap();
        for (anchor, probe) in [
            (Corner::TopLeft, (0usize, 0usize)),
            (Corner::TopRight, (0, 6)),
            (Corner::BottomLeft, (4, 0)),
            (Corner::BottomRight, (4, 6)),
        ] {
            let cut = crop(&img, 2, anchor).unwrap();
            assert_eq!(cut.get(probe.0, probe.1), 0, "{anchor:?}");
            assert_eq!(cut.get(2, 2), 200, "{anchor:?} center untouched");
            let zeroed = cut.pixels().iter().filter(|&&p| p == 0).count();
            assert_eq!(zeroed, 4, "{anchor:?}");
        }
    }

    #[test]
    fn hist_eq_is_near_identity_on_a_uniform_histogram() {
        // Every gray level appears equally often.
        let pixels: Vec<u8> = (0..256 * 256).map(|i| (i % 256) as u8).collect();
        let img = GrayImage::from_pixels(256, 256, pixels).unwrap();
        let eq = hist_eq(&img);
        for (a, b) in img.pixels().iter().zip(eq.pixels()) {
            assert!((*a as i32 - *b as i32).abs() <= 1, "{a} -> {b}");
        }
    }

    #[test]
    fn hist_eq_preserves_order_and_flattens_the_cdf() {
        let img = noise_image(128, 128, 6);
        let eq = hist_eq(&img);
        // Order preservation via the induced value map.
        let mut seen: [Option<u8>; 256] = [None; 256];
        for (&a, &b) in img.pixels().iter().zip(eq.pixels()) {
            match seen[a as usize] {
                None => seen[a as usize] = Some(b),
                Some(prev) => assert_eq!(prev, b),
            }
        }
        let mapped: Vec<(usize, u8)> = seen
            .iter()
            .enumerate()
            .filter_map(|(v, m)| m.map(|b| (v, b)))
            .collect();
        for pair in mapped.windows(2) {
            assert!(pair[0].1 <= pair[1].1);
        }
        // Kolmogorov distance to the uniform CDF shrinks.
        let ks = |img: &GrayImage| {
            let mut counts = [0u64; 256];
            for &p in img.pixels() {
                counts[p as usize] += 1;
            }
            let total = img.pixels().len() as f64;
            let mut cum = 0u64;
            let mut worst: f64 = 0.0;
            for v in 0..256 {
                cum += counts[v];
                let ideal = (v as f64 + 1.0) / 256.0;
                worst = worst.max((cum as f64 / total - ideal).abs());
            }
            worst
        };
        assert!(ks(&eq) < ks(&img));
    }

    #[test]
    fn contrast_endpoints_match_the_linear_map() {
        let ramp: Vec<u8> = (0..=255).collect();
        let img = GrayImage::from_pixels(256, 1, ramp).unwrap();
        let adj = contrast_adjust(&img, 20.0).unwrap();
        assert_eq!(adj.get(0, 25), 0); // below lo = 25.5 saturates
        assert_eq!(adj.get(0, 230), 255); // above hi = 229.5 saturates
        assert_eq!(adj.get(0, 0), 0);
        assert_eq!(adj.get(0, 255), 255);
        for p in [10.0, 20.0, 30.0, 60.0] {
            let a = contrast_adjust(&img, p).unwrap();
            let mid = a.get(0, 128);
            assert!((mid as i32 - 128).abs() <= 1, "percent {p}: 128 -> {mid}");
            for c in 1..256 {
                assert!(a.get(0, c - 1) <= a.get(0, c));
            }
        }
        assert!(contrast_adjust(&img, 100.0).is_err());
        assert!(contrast_adjust(&img, -1.0).is_err());
    }

    #[test]
    fn attacks_preserve_dimensions() {
        let img = noise_image(40, 24, 8);
        let specs = [
            Attack::SaltPepper { density: 0.1, seed: 1 },
            Attack::GaussianNoise { variance: 0.01, seed: 1 },
            Attack::MeanFilter { kernel_size: 3 },
            Attack::MedianFilter { kernel_size: 5 },
            Attack::GaussianFilter { kernel_size: 5, sigma: None },
            Attack::Crop { size: 10, anchor: Corner::BottomRight },
            Attack::Jpeg { quality_factor: 50 },
            Attack::HistEq,
            Attack::Contrast { percent: 15.0 },
        ];
        for spec in specs {
            let out = spec.apply(&img).unwrap();
            assert_eq!(out.dims(), img.dims(), "{}", spec.label());
        }
    }

    #[test]
    fn with_seed_touches_only_stochastic_kinds() {
        let sp = Attack::SaltPepper { density: 0.5, seed: 0 };
        assert_eq!(sp.with_seed(9), Attack::SaltPepper { density: 0.5, seed: 9 });
        assert!(sp.is_stochastic());
        let jp = Attack::Jpeg { quality_factor: 30 };
        assert_eq!(jp.with_seed(9), jp);
        assert!(!jp.is_stochastic());
        assert_eq!(sp.kind(), "salt_pepper");
        assert_eq!(jp.label(), "jpeg q=30");
    }
}
