//! Minimal baseline JPEG for the compression attack: single-component
//! (grayscale) sequential encoding with the standard luminance
//! quantization table scaled by the conventional quality mapping, and a
//! matching decoder. Everything runs in-process so the attack is
//! bit-reproducible across platforms.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::image::GrayImage;

/// Standard luminance quantization table, natural (raster) order.
const QUANT_BASE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Zigzag scan: sequence position -> raster index.
const ZIGZAG: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, //
    17, 24, 32, 25, 18, 11, 4, 5, //
    12, 19, 26, 33, 40, 48, 41, 34, //
    27, 20, 13, 6, 7, 14, 21, 28, //
    35, 42, 49, 56, 57, 50, 43, 36, //
    29, 22, 15, 23, 30, 37, 44, 51, //
    58, 59, 52, 45, 38, 31, 39, 46, //
    53, 60, 61, 54, 47, 55, 62, 63,
];

/// Standard luminance DC Huffman table (code-length counts, symbols).
const DC_BITS: [u8; 16] = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
const DC_VALS: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

/// Standard luminance AC Huffman table.
const AC_BITS: [u8; 16] = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d];
const AC_VALS: [u8; 162] = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61,
    0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52,
    0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25,
    0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45,
    0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64,
    0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83,
    0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99,
    0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6,
    0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3,
    0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8,
    0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
];

/// Scales the base table by the conventional quality mapping:
/// quality < 50 stretches (5000/q), quality >= 50 compresses (200-2q),
/// entries clamped to [1, 255].
fn scaled_quant_table(quality: u8) -> [u16; 64] {
    let q = quality as i32;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut table = [0u16; 64];
    for (slot, &base) in table.iter_mut().zip(&QUANT_BASE) {
        let scaled = (base as i32 * scale + 50) / 100;
        *slot = scaled.clamp(1, 255) as u16;
    }
    table
}

/// 8x8 DCT-II basis: basis[u][x] = 0.5 * c(u) * cos((2x+1)u*pi/16).
fn dct_basis() -> [[f64; 8]; 8] {
    let mut basis = [[0.0; 8]; 8];
    for (u, row) in basis.iter_mut().enumerate() {
        let cu = if u == 0 { 1.0 / libm::sqrt(2.0) } else { 1.0 };
        for (x, slot) in row.iter_mut().enumerate() {
            *slot = 0.5
                * cu
                * libm::cos((2.0 * x as f64 + 1.0) * u as f64 * core::f64::consts::PI / 16.0);
        }
    }
    basis
}

fn forward_dct(block: &[f64; 64], basis: &[[f64; 8]; 8]) -> [f64; 64] {
    // rows: tmp[u][x] = sum_y basis[u][y] * block[y][x]
    let mut tmp = [0.0; 64];
    for u in 0..8 {
        for x in 0..8 {
            let mut acc = 0.0;
            for y in 0..8 {
                acc += basis[u][y] * block[y * 8 + x];
            }
            tmp[u * 8 + x] = acc;
        }
    }
    let mut out = [0.0; 64];
    for u in 0..8 {
        for v in 0..8 {
            let mut acc = 0.0;
            for x in 0..8 {
                acc += tmp[u * 8 + x] * basis[v][x];
            }
            out[u * 8 + v] = acc;
        }
    }
    out
}

fn inverse_dct(coeffs: &[f64; 64], basis: &[[f64; 8]; 8]) -> [f64; 64] {
    // tmp[y][v] = sum_u basis[u][y] * coeffs[u][v]
    let mut tmp = [0.0; 64];
    for y in 0..8 {
        for v in 0..8 {
            let mut acc = 0.0;
            for u in 0..8 {
                acc += basis[u][y] * coeffs[u * 8 + v];
            }
            tmp[y * 8 + v] = acc;
        }
    }
    let mut out = [0.0; 64];
    for y in 0..8 {
        for x in 0..8 {
            let mut acc = 0.0;
            for v in 0..8 {
                acc += tmp[y * 8 + v] * basis[v][x];
            }
            out[y * 8 + x] = acc;
        }
    }
    out
}

/// Number of magnitude bits the value needs (JPEG "category").
fn bit_size(v: i32) -> u8 {
    if v == 0 {
        0
    } else {
        (32 - v.unsigned_abs().leading_zeros()) as u8
    }
}

/// Magnitude bits: nonnegative values as-is, negative values offset by
/// 2^size - 1 (one's-complement style).
fn magnitude_bits(v: i32, size: u8) -> u32 {
    if v >= 0 {
        v as u32
    } else {
        (v + (1i32 << size) - 1) as u32
    }
}

/// Canonical code assignment for an encoding table.
struct HuffEncode {
    code: [u16; 256],
    len: [u8; 256],
}

impl HuffEncode {
    fn build(bits: &[u8; 16], vals: &[u8]) -> HuffEncode {
        let mut table = HuffEncode {
            code: [0; 256],
            len: [0; 256],
        };
        let mut code = 0u16;
        let mut k = 0;
        for (i, &count) in bits.iter().enumerate() {
            let length = (i + 1) as u8;
            for _ in 0..count {
                let symbol = vals[k] as usize;
                table.code[symbol] = code;
                table.len[symbol] = length;
                code += 1;
                k += 1;
            }
            code <<= 1;
        }
        table
    }
}

struct BitWriter<'a> {
    out: &'a mut Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl<'a> BitWriter<'a> {
    fn new(out: &'a mut Vec<u8>) -> Self {
        BitWriter { out, acc: 0, nbits: 0 }
    }

    fn put(&mut self, bits: u32, count: u8) {
        debug_assert!(count <= 16);
        self.acc = (self.acc << count) | (bits & ((1u32 << count) - 1));
        self.nbits += count as u32;
        while self.nbits >= 8 {
            let byte = ((self.acc >> (self.nbits - 8)) & 0xff) as u8;
            self.out.push(byte);
            if byte == 0xff {
                self.out.push(0x00); // marker-byte stuffing
            }
            self.nbits -= 8;
        }
    }

    /// Pads the tail with 1 bits, the conventional fill.
    fn flush(&mut self) {
        if self.nbits > 0 {
            let pad = 8 - self.nbits as u8;
            self.put((1u32 << pad) - 1, pad);
        }
    }
}

fn push_u16(out: &mut Vec<u8>, v: u16) {
    out.push((v >> 8) as u8);
    out.push((v & 0xff) as u8);
}

fn push_segment(out: &mut Vec<u8>, marker: u8, payload: &[u8]) {
    out.push(0xff);
    out.push(marker);
    push_u16(out, payload.len() as u16 + 2);
    out.extend_from_slice(payload);
}

/// Encodes a grayscale image as a baseline sequential JPEG stream.
/// Block edges beyond the image replicate the last row/column; the
/// frame header records the true dimensions.
pub(crate) fn encode(img: &GrayImage, quality: u8) -> Vec<u8> {
    let (w, h) = img.dims();
    let qt = scaled_quant_table(quality);
    let basis = dct_basis();
    let dc_table = HuffEncode::build(&DC_BITS, &DC_VALS);
    let ac_table = HuffEncode::build(&AC_BITS, &AC_VALS);

    let mut out = Vec::new();
    out.extend_from_slice(&[0xff, 0xd8]); // SOI

    let mut app0 = Vec::new();
    app0.extend_from_slice(b"JFIF\0");
    app0.extend_from_slice(&[1, 1, 0]); // version 1.1, no density units
    push_u16(&mut app0, 1);
    push_u16(&mut app0, 1);
    app0.extend_from_slice(&[0, 0]); // no thumbnail
    push_segment(&mut out, 0xe0, &app0);

    let mut dqt = Vec::with_capacity(65);
    dqt.push(0x00); // 8-bit precision, table 0
    for z in 0..64 {
        dqt.push(qt[ZIGZAG[z]] as u8);
    }
    push_segment(&mut out, 0xdb, &dqt);

    let mut sof = Vec::new();
    sof.push(8); // sample precision
    push_u16(&mut sof, h as u16);
    push_u16(&mut sof, w as u16);
    sof.push(1); // one component
    sof.extend_from_slice(&[1, 0x11, 0]); // id 1, 1x1 sampling, quant table 0
    push_segment(&mut out, 0xc0, &sof);

    for (class, bits, vals) in [(0u8, &DC_BITS, &DC_VALS[..]), (1, &AC_BITS, &AC_VALS[..])] {
        let mut dht = Vec::with_capacity(1 + 16 + vals.len());
        dht.push(class << 4); // table id 0
        dht.extend_from_slice(bits);
        dht.extend_from_slice(vals);
        push_segment(&mut out, 0xc4, &dht);
    }

    let sos = [1u8, 1, 0x00, 0, 63, 0]; // component 1, DC/AC tables 0, full scan
    push_segment(&mut out, 0xda, &sos);

    let blocks_x = (w + 7) / 8;
    let blocks_y = (h + 7) / 8;
    let mut writer = BitWriter::new(&mut out);
    let mut pred = 0i32;
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let mut block = [0.0f64; 64];
            for y in 0..8 {
                let sy = (by * 8 + y).min(h - 1);
                for x in 0..8 {
                    let sx = (bx * 8 + x).min(w - 1);
                    block[y * 8 + x] = img.get(sy, sx) as f64 - 128.0;
                }
            }
            let freq = forward_dct(&block, &basis);
            let mut zz = [0i32; 64];
            for (z, slot) in zz.iter_mut().enumerate() {
                let raster = ZIGZAG[z];
                *slot = libm::round(freq[raster] / qt[raster] as f64) as i32;
            }

            let diff = zz[0] - pred;
            pred = zz[0];
            let size = bit_size(diff);
            writer.put(dc_table.code[size as usize] as u32, dc_table.len[size as usize]);
            if size > 0 {
                writer.put(magnitude_bits(diff, size), size);
            }

            let mut k = 1;
            while k < 64 {
                let mut run = 0;
                while k < 64 && zz[k] == 0 {
                    run += 1;
                    k += 1;
                }
                if k == 64 {
                    writer.put(ac_table.code[0x00] as u32, ac_table.len[0x00]); // EOB
                    break;
                }
                while run >= 16 {
                    writer.put(ac_table.code[0xf0] as u32, ac_table.len[0xf0]); // ZRL
                    run -= 16;
                }
                let size = bit_size(zz[k]);
                let symbol = ((run as usize) << 4) | size as usize;
                writer.put(ac_table.code[symbol] as u32, ac_table.len[symbol]);
                writer.put(magnitude_bits(zz[k], size), size);
                k += 1;
            }
        }
    }
    writer.flush();

    out.extend_from_slice(&[0xff, 0xd9]); // EOI
    out
}

/// Decode tables in the classic mincode/maxcode/valptr form.
struct HuffDecode {
    mincode: [i32; 17],
    maxcode: [i32; 17],
    valptr: [usize; 17],
    vals: Vec<u8>,
}

impl HuffDecode {
    fn build(bits: &[u8; 16], vals: Vec<u8>) -> HuffDecode {
        let mut table = HuffDecode {
            mincode: [0; 17],
            maxcode: [-1; 17],
            valptr: [0; 17],
            vals,
        };
        let mut code = 0i32;
        let mut k = 0usize;
        for (i, &count) in bits.iter().enumerate() {
            let l = i + 1;
            if count > 0 {
                table.valptr[l] = k;
                table.mincode[l] = code;
                code += count as i32;
                k += count as usize;
                table.maxcode[l] = code - 1;
            }
            code <<= 1;
        }
        table
    }
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u32,
    nbits: u32,
}

const TRUNCATED: CoreError = CoreError::CorruptStream {
    what: "entropy data ended before the last block",
};

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        BitReader { data, pos: 0, acc: 0, nbits: 0 }
    }

    fn next_bit(&mut self) -> Result<u32, CoreError> {
        if self.nbits == 0 {
            let byte = *self.data.get(self.pos).ok_or(TRUNCATED)?;
            self.pos += 1;
            if byte == 0xff {
                match self.data.get(self.pos) {
                    Some(0x00) => self.pos += 1, // stuffed data byte
                    _ => return Err(TRUNCATED),  // a marker interrupts the scan
                }
            }
            self.acc = byte as u32;
            self.nbits = 8;
        }
        self.nbits -= 1;
        Ok((self.acc >> self.nbits) & 1)
    }

    fn receive(&mut self, count: u8) -> Result<u32, CoreError> {
        let mut v = 0;
        for _ in 0..count {
            v = (v << 1) | self.next_bit()?;
        }
        Ok(v)
    }
}

fn decode_symbol(reader: &mut BitReader, table: &HuffDecode) -> Result<u8, CoreError> {
    let mut code = 0i32;
    for l in 1..=16 {
        code = (code << 1) | reader.next_bit()? as i32;
        if code <= table.maxcode[l] {
            let idx = table.valptr[l] + (code - table.mincode[l]) as usize;
            return table.vals.get(idx).copied().ok_or(CoreError::CorruptStream {
                what: "Huffman code indexes past the value table",
            });
        }
    }
    Err(CoreError::CorruptStream {
        what: "Huffman code longer than 16 bits",
    })
}

/// Sign-extends `v` from its JPEG category encoding.
fn extend(v: u32, size: u8) -> i32 {
    if size == 0 {
        return 0;
    }
    let v = v as i32;
    if v < (1 << (size - 1)) {
        v - (1 << size) + 1
    } else {
        v
    }
}

struct Segments<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Segments<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CoreError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len());
        let end = end.ok_or(CoreError::CorruptStream {
            what: "segment exceeds the stream",
        })?;
        let slice = &self.data[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn take_u16(&mut self) -> Result<u16, CoreError> {
        let b = self.take(2)?;
        Ok(((b[0] as u16) << 8) | b[1] as u16)
    }

    /// Reads a length-prefixed segment body (length counts its own two
    /// bytes).
    fn take_segment(&mut self) -> Result<&'a [u8], CoreError> {
        let len = self.take_u16()? as usize;
        let body = len.checked_sub(2).ok_or(CoreError::CorruptStream {
            what: "segment length shorter than its own prefix",
        })?;
        self.take(body)
    }
}

/// Decodes a baseline single-component JPEG stream produced by `encode`
/// (or any equivalent grayscale baseline stream without restart markers).
pub(crate) fn decode(bytes: &[u8]) -> Result<GrayImage, CoreError> {
    let mut s = Segments { data: bytes, pos: 0 };
    if s.take(2)? != [0xff, 0xd8] {
        return Err(CoreError::CorruptStream { what: "missing SOI marker" });
    }

    let mut qt: Option<[u16; 64]> = None;
    let mut dims: Option<(usize, usize)> = None;
    let mut dc: Option<HuffDecode> = None;
    let mut ac: Option<HuffDecode> = None;

    loop {
        let marker = s.take(2)?;
        if marker[0] != 0xff {
            return Err(CoreError::CorruptStream { what: "expected a marker" });
        }
        match marker[1] {
            0xdb => {
                let mut body = Segments { data: s.take_segment()?, pos: 0 };
                while body.pos < body.data.len() {
                    let pq_tq = body.take(1)?[0];
                    if pq_tq >> 4 != 0 {
                        return Err(CoreError::CorruptStream {
                            what: "only 8-bit quantization tables are supported",
                        });
                    }
                    let entries = body.take(64)?;
                    let mut table = [0u16; 64];
                    for (z, &e) in entries.iter().enumerate() {
                        table[ZIGZAG[z]] = e as u16;
                    }
                    if pq_tq & 0x0f == 0 {
                        qt = Some(table);
                    }
                }
            }
            0xc0 => {
                let body = s.take_segment()?;
                if body.len() < 9 || body[0] != 8 || body[5] != 1 {
                    return Err(CoreError::CorruptStream {
                        what: "frame is not 8-bit single-component",
                    });
                }
                let h = ((body[1] as usize) << 8) | body[2] as usize;
                let w = ((body[3] as usize) << 8) | body[4] as usize;
                if w == 0 || h == 0 {
                    return Err(CoreError::CorruptStream { what: "zero frame dimensions" });
                }
                dims = Some((w, h));
            }
            0xc4 => {
                let mut body = Segments { data: s.take_segment()?, pos: 0 };
                while body.pos < body.data.len() {
                    let class_id = body.take(1)?[0];
                    let mut bits = [0u8; 16];
                    bits.copy_from_slice(body.take(16)?);
                    let count: usize = bits.iter().map(|&b| b as usize).sum();
                    let vals = body.take(count)?.to_vec();
                    let table = HuffDecode::build(&bits, vals);
                    match class_id >> 4 {
                        0 => dc = Some(table),
                        1 => ac = Some(table),
                        _ => {
                            return Err(CoreError::CorruptStream {
                                what: "Huffman table class out of range",
                            })
                        }
                    }
                }
            }
            0xda => {
                s.take_segment()?;
                let scan = &s.data[s.pos..];
                let (w, h) = dims.ok_or(CoreError::CorruptStream { what: "scan before frame header" })?;
                let qt = qt.ok_or(CoreError::CorruptStream { what: "scan before quantization table" })?;
                let dc = dc.as_ref().ok_or(CoreError::CorruptStream { what: "scan before DC table" })?;
                let ac = ac.as_ref().ok_or(CoreError::CorruptStream { what: "scan before AC table" })?;
                let img = decode_scan(scan, w, h, &qt, dc, ac)?;
                return Ok(img);
            }
            0xd8 => return Err(CoreError::CorruptStream { what: "unexpected second SOI" }),
            0xd9 => return Err(CoreError::CorruptStream { what: "EOI before any scan" }),
            0xe0..=0xef | 0xfe | 0xdd => {
                // Application data, comments, restart interval: not used
                // by the streams we produce.
                s.take_segment()?;
            }
            _ => return Err(CoreError::CorruptStream { what: "unrecognized or unsupported marker" }),
        }
    }
}

fn decode_scan(
    scan: &[u8],
    w: usize,
    h: usize,
    qt: &[u16; 64],
    dc: &HuffDecode,
    ac: &HuffDecode,
) -> Result<GrayImage, CoreError> {
    let basis = dct_basis();
    let blocks_x = (w + 7) / 8;
    let blocks_y = (h + 7) / 8;
    let mut pixels = vec![0u8; w * h];
    let mut reader = BitReader::new(scan);
    let mut pred = 0i32;
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let mut zz = [0i32; 64];
            let size = decode_symbol(&mut reader, dc)?;
            pred += extend(reader.receive(size)?, size);
            zz[0] = pred;
            let mut k = 1;
            while k < 64 {
                let rs = decode_symbol(&mut reader, ac)?;
                let run = (rs >> 4) as usize;
                let size = rs & 0x0f;
                if size == 0 {
                    if run == 15 {
                        k += 16;
                        continue;
                    }
                    break; // EOB
                }
                k += run;
                if k > 63 {
                    return Err(CoreError::CorruptStream {
                        what: "AC run exceeds the block",
                    });
                }
                zz[k] = extend(reader.receive(size)?, size);
                k += 1;
            }

            let mut freq = [0.0f64; 64];
            for (z, &v) in zz.iter().enumerate() {
                let raster = ZIGZAG[z];
                freq[raster] = v as f64 * qt[raster] as f64;
            }
            let block = inverse_dct(&freq, &basis);
            for y in 0..8 {
                let sy = by * 8 + y;
                if sy >= h {
                    break;
                }
                for x in 0..8 {
                    let sx = bx * 8 + x;
                    if sx >= w {
                        break;
                    }
                    pixels[sy * w + sx] = super::clamp_round(block[y * 8 + x] + 128.0);
                }
            }
        }
    }
    GrayImage::from_pixels(w, h, pixels)
}
