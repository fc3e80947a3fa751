//! Separable 2D multi-level DWT.
//!
//! A level splits the current approximation into four subbands. Band names
//! put the horizontal (row-direction) filter first: LH is lowpass along
//! rows and highpass along columns, so it holds horizontal detail; HL is
//! the opposite. A 3-level decomposition of an M x N image yields the ten
//! subbands LL3, LH3, HL3, HH3, LH2, HL2, HH2, LH1, HL1, HH1.
//!
//! Boundaries use periodic extension, which keeps the shipped orthonormal
//! banks perfect-reconstruction pairs at every even length.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::image::{GrayImage, RealImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    LL,
    LH,
    HL,
    HH,
}

impl Orientation {
    pub fn name(self) -> &'static str {
        match self {
            Orientation::LL => "LL",
            Orientation::LH => "LH",
            Orientation::HL => "HL",
            Orientation::HH => "HH",
        }
    }
}

/// One subband of the pyramid: `rows` x `cols` coefficients, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Subband {
    level: u32,
    orientation: Orientation,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Subband {
    fn new(level: u32, orientation: Orientation, rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Subband {
            level,
            orientation,
            rows,
            cols,
            data,
        }
    }

    /// Builds a band from raw coefficients (row-major).
    pub fn from_coeffs(
        level: u32,
        orientation: Orientation,
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    ) -> Result<Self, CoreError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(CoreError::BadDimensions {
                width: cols,
                height: rows,
            });
        }
        Ok(Subband::new(level, orientation, rows, cols, data))
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.data
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Analysis/synthesis filter pair. The shipped banks are orthonormal, so
/// synthesis is the adjoint of analysis with the same coefficients, but the
/// four sequences are stored separately to keep the bank pluggable.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    name: String,
    analysis_lo: Vec<f64>,
    analysis_hi: Vec<f64>,
    synthesis_lo: Vec<f64>,
    synthesis_hi: Vec<f64>,
}

impl FilterBank {
    /// Builds a bank and verifies perfect reconstruction numerically on a
    /// fixed probe vector; rejects pairs that do not invert each other.
    pub fn new(
        name: &str,
        analysis_lo: Vec<f64>,
        analysis_hi: Vec<f64>,
        synthesis_lo: Vec<f64>,
        synthesis_hi: Vec<f64>,
    ) -> Result<Self, CoreError> {
        if analysis_lo.len() < 2
            || analysis_hi.len() != analysis_lo.len()
            || synthesis_lo.len() != analysis_lo.len()
            || synthesis_hi.len() != analysis_lo.len()
        {
            return Err(CoreError::BadDimensions {
                width: analysis_lo.len(),
                height: analysis_hi.len(),
            });
        }
        let fb = FilterBank {
            name: String::from(name),
            analysis_lo,
            analysis_hi,
            synthesis_lo,
            synthesis_hi,
        };
        // Probe long enough to wrap any reasonable filter.
        let n = 32;
        let probe: Vec<f64> = (0..n)
            .map(|i| libm::sin(0.37 * i as f64) * 50.0 + (i % 7) as f64)
            .collect();
        let (lo, hi) = fb.analyze_1d(&probe);
        let back = fb.synthesize_1d(&lo, &hi);
        for (a, b) in probe.iter().zip(back.iter()) {
            if libm::fabs(a - b) > 1e-9 {
                return Err(CoreError::PlanMismatch);
            }
        }
        Ok(fb)
    }

    /// Orthonormal Haar: pairwise averages and differences scaled by 1/sqrt(2).
    pub fn haar() -> Self {
        let s = 1.0 / libm::sqrt(2.0);
        FilterBank::new(
            "haar",
            vec![s, s],
            vec![s, -s],
            vec![s, s],
            vec![s, -s],
        )
        .expect("haar bank reconstructs")
    }

    /// Orthonormal 4-tap Daubechies filter.
    pub fn daubechies4() -> Self {
        let r3 = libm::sqrt(3.0);
        let d = 4.0 * libm::sqrt(2.0);
        let lo = vec![(1.0 + r3) / d, (3.0 + r3) / d, (3.0 - r3) / d, (1.0 - r3) / d];
        let hi = vec![lo[3], -lo[2], lo[1], -lo[0]];
        FilterBank::new("db4", lo.clone(), hi.clone(), lo, hi).expect("db4 bank reconstructs")
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "haar" => Some(FilterBank::haar()),
            "db4" => Some(FilterBank::daubechies4()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// One analysis step: x (even length, periodic) -> (lowpass, highpass).
    fn analyze_1d(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = x.len();
        let half = n / 2;
        let f = self.analysis_lo.len();
        let mut lo = vec![0.0; half];
        let mut hi = vec![0.0; half];
        for k in 0..half {
            let (mut a, mut d) = (0.0, 0.0);
            for t in 0..f {
                let v = x[(2 * k + t) % n];
                a += self.analysis_lo[t] * v;
                d += self.analysis_hi[t] * v;
            }
            lo[k] = a;
            hi[k] = d;
        }
        (lo, hi)
    }

    /// Adjoint synthesis step, inverse of `analyze_1d` for a valid bank.
    fn synthesize_1d(&self, lo: &[f64], hi: &[f64]) -> Vec<f64> {
        let half = lo.len();
        let n = half * 2;
        let f = self.synthesis_lo.len();
        let mut x = vec![0.0; n];
        for k in 0..half {
            for t in 0..f {
                let idx = (2 * k + t) % n;
                x[idx] += self.synthesis_lo[t] * lo[k] + self.synthesis_hi[t] * hi[k];
            }
        }
        x
    }
}

/// Detail triple for one decomposition level.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailBands {
    pub lh: Subband,
    pub hl: Subband,
    pub hh: Subband,
}

/// Complete multi-level decomposition: one approximation band at the top
/// level plus three detail bands per level. Coefficient count equals the
/// source pixel count.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    source_width: usize,
    source_height: usize,
    levels: u32,
    filter_bank: String,
    approx: Subband,
    details: Vec<DetailBands>, // details[l - 1] holds level l
}

impl WaveletPyramid {
    /// Assembles a pyramid from explicit bands: three detail bands per level
    /// plus one approximation band at the top level, all with halving
    /// dimensions consistent with `source dims`. Band order is free.
    pub fn from_bands(
        source_width: usize,
        source_height: usize,
        levels: u32,
        filter_bank: &str,
        bands: Vec<Subband>,
    ) -> Result<Self, CoreError> {
        check_dims(source_width, source_height, levels)?;
        if bands.len() != 3 * levels as usize + 1 {
            return Err(CoreError::PlanMismatch);
        }
        let mut approx: Option<Subband> = None;
        let mut slots: Vec<[Option<Subband>; 3]> = (0..levels).map(|_| [None, None, None]).collect();
        for band in bands {
            let level = band.level();
            if level < 1 || level > levels {
                return Err(CoreError::PlanMismatch);
            }
            let expect_rows = source_height >> level;
            let expect_cols = source_width >> level;
            if band.rows() != expect_rows || band.cols() != expect_cols {
                return Err(CoreError::DimensionMismatch {
                    expected: (expect_cols, expect_rows),
                    got: (band.cols(), band.rows()),
                });
            }
            let slot = match band.orientation() {
                Orientation::LL => {
                    if level != levels || approx.is_some() {
                        return Err(CoreError::PlanMismatch);
                    }
                    approx = Some(band);
                    continue;
                }
                Orientation::LH => 0,
                Orientation::HL => 1,
                Orientation::HH => 2,
            };
            let cell = &mut slots[(level - 1) as usize][slot];
            if cell.is_some() {
                return Err(CoreError::PlanMismatch);
            }
            *cell = Some(band);
        }
        let approx = approx.ok_or(CoreError::PlanMismatch)?;
        let mut details = Vec::with_capacity(levels as usize);
        for [lh, hl, hh] in slots {
            details.push(DetailBands {
                lh: lh.ok_or(CoreError::PlanMismatch)?,
                hl: hl.ok_or(CoreError::PlanMismatch)?,
                hh: hh.ok_or(CoreError::PlanMismatch)?,
            });
        }
        Ok(WaveletPyramid {
            source_width,
            source_height,
            levels,
            filter_bank: String::from(filter_bank),
            approx,
            details,
        })
    }

    pub fn source_dims(&self) -> (usize, usize) {
        (self.source_width, self.source_height)
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn filter_bank_name(&self) -> &str {
        &self.filter_bank
    }

    pub fn approx(&self) -> &Subband {
        &self.approx
    }

    pub fn band(&self, level: u32, orientation: Orientation) -> Option<&Subband> {
        if orientation == Orientation::LL {
            return (level == self.levels).then_some(&self.approx);
        }
        let d = self.details.get(level.checked_sub(1)? as usize)?;
        Some(match orientation {
            Orientation::LH => &d.lh,
            Orientation::HL => &d.hl,
            Orientation::HH => &d.hh,
            Orientation::LL => unreachable!(),
        })
    }

    pub fn band_mut(&mut self, level: u32, orientation: Orientation) -> Option<&mut Subband> {
        if orientation == Orientation::LL {
            return (level == self.levels).then_some(&mut self.approx);
        }
        let d = self.details.get_mut(level.checked_sub(1)? as usize)?;
        Some(match orientation {
            Orientation::LH => &mut d.lh,
            Orientation::HL => &mut d.hl,
            Orientation::HH => &mut d.hh,
            Orientation::LL => unreachable!(),
        })
    }

    /// All subbands, approximation first, then details from the coarsest
    /// level down.
    pub fn subbands(&self) -> impl Iterator<Item = &Subband> {
        core::iter::once(&self.approx).chain(
            self.details
                .iter()
                .rev()
                .flat_map(|d| [&d.lh, &d.hl, &d.hh]),
        )
    }

    pub fn total_coeffs(&self) -> usize {
        self.subbands().map(|b| b.coeffs().len()).sum()
    }
}

fn check_dims(width: usize, height: usize, levels: u32) -> Result<(), CoreError> {
    if levels < 1 || levels > 16 {
        return Err(CoreError::BadLevels { levels });
    }
    let div = 1usize << levels;
    for dim in [width, height] {
        if dim == 0 || dim % div != 0 {
            return Err(CoreError::NotDivisible { dim, levels });
        }
    }
    Ok(())
}

// Row-major plane used between the row and column passes.
struct Plane {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Plane {
    fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.data[r * self.cols + c]).collect()
    }
}

fn analyze_level(plane: &Plane, fb: &FilterBank) -> (Plane, Plane, Plane, Plane) {
    let (rows, cols) = (plane.rows, plane.cols);
    let (hc, hr) = (cols / 2, rows / 2);
    // Row pass: split each row into horizontal lowpass and highpass halves.
    let mut l = Plane { rows, cols: hc, data: vec![0.0; rows * hc] };
    let mut h = Plane { rows, cols: hc, data: vec![0.0; rows * hc] };
    for r in 0..rows {
        let row = &plane.data[r * cols..(r + 1) * cols];
        let (lo, hi) = fb.analyze_1d(row);
        l.data[r * hc..(r + 1) * hc].copy_from_slice(&lo);
        h.data[r * hc..(r + 1) * hc].copy_from_slice(&hi);
    }
    // Column pass on each half.
    let mut ll = Plane { rows: hr, cols: hc, data: vec![0.0; hr * hc] };
    let mut lh = Plane { rows: hr, cols: hc, data: vec![0.0; hr * hc] };
    let mut hl = Plane { rows: hr, cols: hc, data: vec![0.0; hr * hc] };
    let mut hh = Plane { rows: hr, cols: hc, data: vec![0.0; hr * hc] };
    for c in 0..hc {
        let (lo, hi) = fb.analyze_1d(&l.column(c));
        for r in 0..hr {
            ll.data[r * hc + c] = lo[r];
            lh.data[r * hc + c] = hi[r];
        }
        let (lo, hi) = fb.analyze_1d(&h.column(c));
        for r in 0..hr {
            hl.data[r * hc + c] = lo[r];
            hh.data[r * hc + c] = hi[r];
        }
    }
    (ll, lh, hl, hh)
}

fn synthesize_level(ll: &Plane, lh: &Plane, hl: &Plane, hh: &Plane, fb: &FilterBank) -> Plane {
    let (hr, hc) = (ll.rows, ll.cols);
    let (rows, cols) = (hr * 2, hc * 2);
    // Column pass first, undoing the second analysis step.
    let mut l = Plane { rows, cols: hc, data: vec![0.0; rows * hc] };
    let mut h = Plane { rows, cols: hc, data: vec![0.0; rows * hc] };
    for c in 0..hc {
        let full = fb.synthesize_1d(&ll.column(c), &lh.column(c));
        for r in 0..rows {
            l.data[r * hc + c] = full[r];
        }
        let full = fb.synthesize_1d(&hl.column(c), &hh.column(c));
        for r in 0..rows {
            h.data[r * hc + c] = full[r];
        }
    }
    // Row pass.
    let mut out = Plane { rows, cols, data: vec![0.0; rows * cols] };
    for r in 0..rows {
        let full = fb.synthesize_1d(
            &l.data[r * hc..(r + 1) * hc],
            &h.data[r * hc..(r + 1) * hc],
        );
        out.data[r * cols..(r + 1) * cols].copy_from_slice(&full);
    }
    out
}

/// Forward transform of a real raster.
pub fn dwt_forward_real(
    image: &RealImage,
    levels: u32,
    fb: &FilterBank,
) -> Result<WaveletPyramid, CoreError> {
    let (width, height) = image.dims();
    check_dims(width, height, levels)?;
    let mut current = Plane {
        rows: height,
        cols: width,
        data: image.samples().to_vec(),
    };
    let mut details = Vec::with_capacity(levels as usize);
    for level in 1..=levels {
        let (ll, lh, hl, hh) = analyze_level(&current, fb);
        let (r, c) = (lh.rows, lh.cols);
        details.push(DetailBands {
            lh: Subband::new(level, Orientation::LH, r, c, lh.data),
            hl: Subband::new(level, Orientation::HL, r, c, hl.data),
            hh: Subband::new(level, Orientation::HH, r, c, hh.data),
        });
        current = ll;
    }
    let approx = Subband::new(
        levels,
        Orientation::LL,
        current.rows,
        current.cols,
        current.data,
    );
    Ok(WaveletPyramid {
        source_width: width,
        source_height: height,
        levels,
        filter_bank: String::from(fb.name()),
        approx,
        details,
    })
}

/// Forward transform of an 8-bit image.
pub fn dwt_forward(
    image: &GrayImage,
    levels: u32,
    fb: &FilterBank,
) -> Result<WaveletPyramid, CoreError> {
    dwt_forward_real(&image.to_real(), levels, fb)
}

/// Inverse transform back to a real raster of the source dimensions.
pub fn dwt_inverse(pyramid: &WaveletPyramid, fb: &FilterBank) -> Result<RealImage, CoreError> {
    let mut current = Plane {
        rows: pyramid.approx.rows(),
        cols: pyramid.approx.cols(),
        data: pyramid.approx.coeffs().to_vec(),
    };
    for d in pyramid.details.iter().rev() {
        let as_plane = |b: &Subband| Plane {
            rows: b.rows(),
            cols: b.cols(),
            data: b.coeffs().to_vec(),
        };
        if d.lh.rows() != current.rows || d.lh.cols() != current.cols {
            return Err(CoreError::DimensionMismatch {
                expected: (current.cols, current.rows),
                got: (d.lh.cols(), d.lh.rows()),
            });
        }
        current = synthesize_level(&current, &as_plane(&d.lh), &as_plane(&d.hl), &as_plane(&d.hh), fb);
    }
    RealImage::from_samples(current.cols, current.rows, current.data)
}
