//! Netpbm grayscale input and output. Binary PGM (P5, maxval 255) is the
//! canonical interchange format; ASCII PGM (P2) is read and converted.
//! Round trips are bit-exact.

use std::path::Path;

use wavemark_core::codec::WatermarkBits;
use wavemark_core::GrayImage;

use crate::error::HarnessError;

/// Pixels at or above this value read as watermark bit 1.
pub const DEFAULT_WATERMARK_THRESHOLD: u8 = 128;

/// Header scanner: yields whitespace-separated tokens, treating `#` to
/// end-of-line as whitespace, and tracks the byte offset so the binary
/// raster can start right after the maxval token.
struct Tokens<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(data: &'a [u8]) -> Self {
        Tokens { data, pos: 0 }
    }

    fn skip_filler(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => return,
            }
        }
    }

    fn next(&mut self) -> Option<&'a [u8]> {
        self.skip_filler();
        let start = self.pos;
        while self.pos < self.data.len() && !self.data[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.data[start..self.pos])
    }

    fn next_number(&mut self, what: &str) -> Result<usize, String> {
        let tok = self.next().ok_or_else(|| format!("missing {what}"))?;
        let s = std::str::from_utf8(tok).map_err(|_| format!("non-ASCII {what}"))?;
        s.parse().map_err(|_| format!("bad {what} {s:?}"))
    }
}

/// Decodes a PGM byte stream. Accepts P5 and P2, requires maxval 255 and
/// positive dimensions, and rejects truncated or oversized payloads.
pub fn parse_pgm(data: &[u8]) -> Result<GrayImage, String> {
    let mut toks = Tokens::new(data);
    let magic = toks.next().ok_or("empty file")?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => return Err("not a PGM (expected P5 or P2 magic)".into()),
    };
    let width = toks.next_number("width")?;
    let height = toks.next_number("height")?;
    let maxval = toks.next_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(format!("bad dimensions {width}x{height}"));
    }
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval} (only 255)"));
    }
    let count = width
        .checked_mul(height)
        .ok_or("dimension overflow")?;

    let pixels = if binary {
        // P5: exactly one whitespace byte separates the header from the
        // raster, then width*height raw bytes and nothing else.
        if toks.pos >= data.len() || !data[toks.pos].is_ascii_whitespace() {
            return Err("missing whitespace after maxval".into());
        }
        let raster = &data[toks.pos + 1..];
        if raster.len() < count {
            return Err(format!(
                "truncated raster: {} bytes, need {count}",
                raster.len()
            ));
        }
        if raster.len() > count {
            return Err(format!(
                "trailing data: {} bytes past the raster",
                raster.len() - count
            ));
        }
        raster.to_vec()
    } else {
        let mut pixels = Vec::with_capacity(count);
        for _ in 0..count {
            let v = toks.next_number("pixel")?;
            if v > 255 {
                return Err(format!("pixel value {v} exceeds maxval"));
            }
            pixels.push(v as u8);
        }
        if toks.next().is_some() {
            return Err("trailing tokens past the raster".into());
        }
        pixels
    };

    GrayImage::from_pixels(width, height, pixels).map_err(|e| e.to_string())
}

/// Encodes as binary PGM: `P5\n<w> <h>\n255\n` followed by the raster.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = header.into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage, HarnessError> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    parse_pgm(&data).map_err(|reason| HarnessError::format(path, reason))
}

pub fn write_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let path = path.as_ref();
    std::fs::write(path, encode_pgm(img)).map_err(|e| HarnessError::io(path, e))
}

/// Reads a grayscale raster as a binary watermark: pixel >= threshold
/// maps to 1, below to 0.
pub fn read_binary_watermark(
    path: impl AsRef<Path>,
    threshold: u8,
) -> Result<WatermarkBits, HarnessError> {
    let img = read_pgm(&path)?;
    let bits = img
        .pixels()
        .iter()
        .map(|&p| (p >= threshold) as u8)
        .collect();
    WatermarkBits::from_bits(img.width(), img.height(), bits).map_err(HarnessError::from)
}

/// Renders watermark bits as a black-and-white image (1 -> 255).
pub fn watermark_image(wm: &WatermarkBits) -> GrayImage {
    let pixels = wm.bits().iter().map(|&b| b * 255).collect();
    GrayImage::from_pixels(wm.width(), wm.height(), pixels)
        .expect("watermark dims are valid image dims")
}
