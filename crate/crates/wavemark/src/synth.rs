//! Synthetic host images and watermark patterns. The published corpus
//! behind the scheme's evaluation is not distributable, so the harness
//! ships generators: simple structured rasters (ramp, checkerboard,
//! noise) plus "scene" stand-ins with the statistics that matter for
//! watermarking experiments: smooth shading, soft-edged objects, and
//! spatially varying texture.
//!
//! All generators keep pixels inside [16, 239]. Embedding perturbs
//! pixels by at most ~15 gray levels under default strengths, so hosts
//! with that margin survive the 8-bit round trip without clamping.

use std::f64::consts::TAU;

use wavemark_core::codec::WatermarkBits;
use wavemark_core::rng::{seeded, uniform_f64, uniform_index};
use wavemark_core::GrayImage;

/// Darkest pixel any generator emits.
pub const PIXEL_LO: u8 = 16;
/// Brightest pixel any generator emits.
pub const PIXEL_HI: u8 = 239;

/// Diagonal gradient from `PIXEL_LO` to `PIXEL_HI`.
pub fn ramp(width: usize, height: usize) -> GrayImage {
    let span = (PIXEL_HI - PIXEL_LO) as f64;
    let denom = (width + height - 2).max(1) as f64;
    let pixels = (0..width * height)
        .map(|i| {
            let (r, c) = (i / width, i % width);
            PIXEL_LO + ((r + c) as f64 / denom * span).round() as u8
        })
        .collect();
    GrayImage::from_pixels(width, height, pixels).expect("generator dims are valid")
}

/// Two-tone checkerboard with `cell`-pixel squares.
pub fn checkerboard(width: usize, height: usize, cell: usize) -> GrayImage {
    let cell = cell.max(1);
    let pixels = (0..width * height)
        .map(|i| {
            let (r, c) = (i / width, i % width);
            if (r / cell + c / cell) % 2 == 0 {
                PIXEL_LO
            } else {
                PIXEL_HI
            }
        })
        .collect();
    GrayImage::from_pixels(width, height, pixels).expect("generator dims are valid")
}

/// Seeded uniform noise over the full generator range.
pub fn noise(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = seeded(seed);
    let span = (PIXEL_HI - PIXEL_LO) as usize + 1;
    let pixels = (0..width * height)
        .map(|_| PIXEL_LO + uniform_index(&mut rng, span) as u8)
        .collect();
    GrayImage::from_pixels(width, height, pixels).expect("generator dims are valid")
}

/// Natural-image stand-in: a low-frequency shading field, a handful of
/// soft elliptical objects, and mid-frequency texture whose amplitude
/// varies smoothly across the frame. The result is rank-remapped onto a
/// uniform histogram over [PIXEL_LO, PIXEL_HI], which pins the range and
/// gives every scene the same tonal budget.
pub fn scene(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = seeded(seed);
    let scale = width.min(height) as f64;
    let n = width * height;

    // Sinusoidal plaid at a given cycle count, random orientation/phase.
    let mut wave = |cycles: (f64, f64)| {
        let f = cycles.0 + uniform_f64(&mut rng) * (cycles.1 - cycles.0);
        let theta = uniform_f64(&mut rng) * TAU;
        let phase = uniform_f64(&mut rng) * TAU;
        let (kx, ky) = (
            f * theta.cos() * TAU / scale,
            f * theta.sin() * TAU / scale,
        );
        move |r: usize, c: usize| (kx * c as f64 + ky * r as f64 + phase).sin()
    };

    let shading: Vec<_> = (0..5).map(|_| wave((1.5, 6.0))).collect();
    let grain: Vec<_> = (0..3).map(|_| wave((12.0, 40.0))).collect();
    let modulation: Vec<_> = (0..2).map(|_| wave((2.0, 5.0))).collect();

    struct Blob {
        center: (f64, f64),
        inv_radii: (f64, f64),
        weight: f64,
    }
    // Centers stay off the frame borders, the way photographic subjects
    // do; it also keeps corner crops from deleting a disproportionate
    // share of the significant detail.
    let blobs: Vec<Blob> = (0..6)
        .map(|_| Blob {
            center: (
                (0.15 + 0.7 * uniform_f64(&mut rng)) * height as f64,
                (0.15 + 0.7 * uniform_f64(&mut rng)) * width as f64,
            ),
            inv_radii: (
                1.0 / (scale * (0.06 + 0.14 * uniform_f64(&mut rng))),
                1.0 / (scale * (0.06 + 0.14 * uniform_f64(&mut rng))),
            ),
            weight: if uniform_f64(&mut rng) < 0.5 { -1.0 } else { 1.0 },
        })
        .collect();

    let mut field = Vec::with_capacity(n);
    for r in 0..height {
        for c in 0..width {
            let mut v = 0.0;
            for (i, w) in shading.iter().enumerate() {
                v += w(r, c) / (1.0 + i as f64 * 0.5);
            }
            for b in &blobs {
                let dr = (r as f64 - b.center.0) * b.inv_radii.0;
                let dc = (c as f64 - b.center.1) * b.inv_radii.1;
                v += b.weight * 1.4 * (-0.5 * (dr * dr + dc * dc)).exp();
            }
            // Texture strength stays strictly positive so significant
            // detail is never confined to one region of the frame.
            let m = 0.4 + 0.3 * (modulation[0](r, c) + modulation[1](r, c)) / 2.0;
            let g: f64 = grain.iter().map(|w| w(r, c)).sum();
            v += 0.25 * m * g;
            field.push(v);
        }
    }

    GrayImage::from_pixels(width, height, rank_remap(&field))
        .expect("generator dims are valid")
}

/// Maps samples onto an exactly uniform histogram over the generator
/// range by rank; ties break by raster position.
fn rank_remap(field: &[f64]) -> Vec<u8> {
    let n = field.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| field[a].total_cmp(&field[b]).then(a.cmp(&b)));
    let span = (PIXEL_HI - PIXEL_LO) as f64;
    let mut out = vec![0u8; n];
    let denom = (n - 1).max(1) as f64;
    for (rank, &idx) in order.iter().enumerate() {
        out[idx] = PIXEL_LO + (rank as f64 / denom * span).round() as u8;
    }
    out
}

/// The standard corpus: three scenes plus the structured stress cases.
/// Fixed names, deterministic content for a given seed.
pub fn corpus(side: usize, seed: u64) -> Vec<(String, GrayImage)> {
    vec![
        ("scene-a".into(), scene(side, side, seed)),
        ("scene-b".into(), scene(side, side, seed ^ 0x9e3779b97f4a7c15)),
        ("scene-c".into(), scene(side, side, seed.wrapping_add(1))),
        ("gradient".into(), ramp(side, side)),
        ("blocks".into(), checkerboard(side, side, (side / 8).max(1))),
        ("speckle".into(), noise(side, side, seed.wrapping_add(2))),
    ]
}

/// Seeded random binary watermark.
pub fn watermark_pattern(width: usize, height: usize, seed: u64) -> WatermarkBits {
    let mut rng = seeded(seed);
    let bits = (0..width * height)
        .map(|_| uniform_index(&mut rng, 2) as u8)
        .collect();
    WatermarkBits::from_bits(width, height, bits).expect("pattern dims are valid")
}
