//! Zerotree significance sort over the level-3/level-2 detail bands.
//!
//! LH3/HL3 coefficients act as parents; each has four offspring at the
//! same position scale in LH2/HL2. A sorting pass walks the list of
//! insignificant pixels (LIP), then the list of insignificant sets (LIS):
//! a set whose offspring reach the threshold is partitioned, sending each
//! child to the significant list (LSP) or the LIP. The threshold starts
//! at the largest power of two not exceeding the peak magnitude and halves
//! per pass while it stays above the smallest band floor.
//!
//! Band floor: Tlm(band) = mean(|band|) / M with M the band side length.
//! Every test is gated by T >= Tlm of the coefficient's band, so a band
//! with a higher floor stops admitting entries earlier.
//!
//! Only children ever enter the LSP; parents exist solely to route the
//! partitioning. The LSP append order is the significance order used to
//! pick embedding positions.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::wavelet::{Orientation, Subband, WaveletPyramid};

/// The four bands the sort addresses: level-3 parents, level-2 children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeBand {
    LH3,
    HL3,
    LH2,
    HL2,
}

impl TreeBand {
    pub fn level(self) -> u32 {
        match self {
            TreeBand::LH3 | TreeBand::HL3 => 3,
            TreeBand::LH2 | TreeBand::HL2 => 2,
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            TreeBand::LH3 | TreeBand::LH2 => Orientation::LH,
            TreeBand::HL3 | TreeBand::HL2 => Orientation::HL,
        }
    }

    pub fn is_parent(self) -> bool {
        self.level() == 3
    }

    /// Child band of a parent band.
    pub fn child(self) -> Option<TreeBand> {
        match self {
            TreeBand::LH3 => Some(TreeBand::LH2),
            TreeBand::HL3 => Some(TreeBand::HL2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TreeBand::LH3 => "LH3",
            TreeBand::HL3 => "HL3",
            TreeBand::LH2 => "LH2",
            TreeBand::HL2 => "HL2",
        }
    }
}

/// Position of one coefficient within a tree band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoeffRef {
    pub band: TreeBand,
    pub row: usize,
    pub col: usize,
}

impl CoeffRef {
    pub fn new(band: TreeBand, row: usize, col: usize) -> Self {
        CoeffRef { band, row, col }
    }
}

/// The four offspring of a level-3 parent, in raster order of the 2x2
/// child block.
pub fn offspring(parent: CoeffRef) -> Result<[CoeffRef; 4], CoreError> {
    let child = parent.child_band().ok_or(CoreError::NotAParent)?;
    let (r, c) = (2 * parent.row, 2 * parent.col);
    Ok([
        CoeffRef::new(child, r, c),
        CoeffRef::new(child, r, c + 1),
        CoeffRef::new(child, r + 1, c),
        CoeffRef::new(child, r + 1, c + 1),
    ])
}

impl CoeffRef {
    fn child_band(&self) -> Option<TreeBand> {
        self.band.child()
    }
}

/// Significance floors of the two child bands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandFloors {
    pub lh2: f64,
    pub hl2: f64,
}

impl BandFloors {
    pub fn for_band(&self, band: TreeBand) -> f64 {
        match band {
            TreeBand::LH2 | TreeBand::LH3 => self.lh2,
            TreeBand::HL2 | TreeBand::HL3 => self.hl2,
        }
    }

    pub fn min(&self) -> f64 {
        if self.lh2 <= self.hl2 {
            self.lh2
        } else {
            self.hl2
        }
    }
}

fn floor_of(band: &Subband) -> f64 {
    let count = (band.rows() * band.cols()) as f64;
    let sum: f64 = band.coeffs().iter().map(|c| libm::fabs(*c)).sum();
    // Side length M; non-square bands use the geometric mean of the sides.
    let m = libm::sqrt(band.rows() as f64 * band.cols() as f64);
    sum / count / m
}

/// Tlm of LH2 and HL2: mean absolute coefficient divided by the side length.
pub fn compute_band_floor(pyramid: &WaveletPyramid) -> Result<BandFloors, CoreError> {
    let bands = TreeBands::from_pyramid(pyramid)?;
    Ok(BandFloors {
        lh2: floor_of(bands.lh2),
        hl2: floor_of(bands.hl2),
    })
}

struct TreeBands<'a> {
    lh3: &'a Subband,
    hl3: &'a Subband,
    lh2: &'a Subband,
    hl2: &'a Subband,
}

impl<'a> TreeBands<'a> {
    fn from_pyramid(pyramid: &'a WaveletPyramid) -> Result<Self, CoreError> {
        if pyramid.levels() < 3 {
            return Err(CoreError::BadLevels {
                levels: pyramid.levels(),
            });
        }
        let get = |level, orientation| pyramid.band(level, orientation).ok_or(CoreError::PlanMismatch);
        Ok(TreeBands {
            lh3: get(3, Orientation::LH)?,
            hl3: get(3, Orientation::HL)?,
            lh2: get(2, Orientation::LH)?,
            hl2: get(2, Orientation::HL)?,
        })
    }

    fn coeff(&self, r: CoeffRef) -> f64 {
        match r.band {
            TreeBand::LH3 => self.lh3.get(r.row, r.col),
            TreeBand::HL3 => self.hl3.get(r.row, r.col),
            TreeBand::LH2 => self.lh2.get(r.row, r.col),
            TreeBand::HL2 => self.hl2.get(r.row, r.col),
        }
    }

    fn peak_magnitude(&self) -> f64 {
        [self.lh3, self.hl3, self.lh2, self.hl2]
            .iter()
            .flat_map(|b| b.coeffs())
            .fold(0.0, |acc, &c| {
                let a = libm::fabs(c);
                if a > acc {
                    a
                } else {
                    acc
                }
            })
    }
}

/// Exact floor(log2 x) for positive finite x, via the exponent bits.
fn floor_log2(x: f64) -> i32 {
    let (_, e) = libm::frexp(x); // x = f * 2^e with f in [0.5, 1)
    e - 1
}

/// The steppable sorting-pass engine. One `step` runs a full pass at the
/// current threshold and then halves it; `run` drives it to completion.
pub struct SpihtSort<'a> {
    bands: TreeBands<'a>,
    floors: BandFloors,
    threshold: f64,
    exponent: i32,
    lip: Vec<CoeffRef>,
    lsp: Vec<CoeffRef>,
    lis: Vec<CoeffRef>,
    done: bool,
}

impl<'a> SpihtSort<'a> {
    pub fn new(pyramid: &'a WaveletPyramid) -> Result<Self, CoreError> {
        let bands = TreeBands::from_pyramid(pyramid)?;
        let floors = BandFloors {
            lh2: floor_of(bands.lh2),
            hl2: floor_of(bands.hl2),
        };
        let peak = bands.peak_magnitude();
        // All-zero bands are degenerate: no passes run at all.
        let done = peak == 0.0;
        let (threshold, exponent) = if done {
            (0.0, 0)
        } else {
            let n = floor_log2(peak);
            (libm::exp2(n as f64), n)
        };
        let mut lis = Vec::with_capacity(2 * bands.lh3.rows() * bands.lh3.cols());
        for (band, sb) in [(TreeBand::LH3, bands.lh3), (TreeBand::HL3, bands.hl3)] {
            for row in 0..sb.rows() {
                for col in 0..sb.cols() {
                    lis.push(CoeffRef::new(band, row, col));
                }
            }
        }
        Ok(SpihtSort {
            bands,
            floors,
            threshold,
            exponent,
            lip: Vec::new(),
            lsp: Vec::new(),
            lis,
            done,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn exponent(&self) -> i32 {
        self.exponent
    }

    pub fn floors(&self) -> BandFloors {
        self.floors
    }

    pub fn lip(&self) -> &[CoeffRef] {
        &self.lip
    }

    pub fn lsp(&self) -> &[CoeffRef] {
        &self.lsp
    }

    pub fn lis(&self) -> &[CoeffRef] {
        &self.lis
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Runs one sorting pass, then halves the threshold. Returns false once
    /// the threshold has dropped below the smaller band floor (or the state
    /// can provably never change again).
    pub fn step(&mut self) -> bool {
        if self.done {
            return false;
        }
        let t = self.threshold;
        // LIP scan: entries whose magnitude reached the threshold move to
        // the LSP, provided the band's floor still admits this pass.
        let mut kept = Vec::with_capacity(self.lip.len());
        for r in self.lip.drain(..) {
            let admitted =
                libm::fabs(self.bands.coeff(r)) >= t && t >= self.floors.for_band(r.band);
            if admitted {
                self.lsp.push(r);
            } else {
                kept.push(r);
            }
        }
        self.lip = kept;
        // LIS scan: significant sets are partitioned and removed.
        let mut kept = Vec::with_capacity(self.lis.len());
        for parent in self.lis.drain(..) {
            let children = offspring(parent).expect("LIS holds only parents");
            let floor = self.floors.for_band(children[0].band);
            let set_significant = t >= floor
                && children
                    .iter()
                    .any(|c| libm::fabs(self.bands.coeff(*c)) >= t);
            if set_significant {
                for c in children {
                    if libm::fabs(self.bands.coeff(c)) >= t {
                        self.lsp.push(c);
                    } else {
                        self.lip.push(c);
                    }
                }
            } else {
                kept.push(parent);
            }
        }
        self.lis = kept;

        // No future pass can move anything once every remaining LIP entry
        // is exactly zero and every remaining LIS set has all-zero
        // offspring; stop instead of halving toward zero forever
        // (reachable when a band floor is 0).
        let frozen = self.lip.iter().all(|r| self.bands.coeff(*r) == 0.0)
            && self.lis.iter().all(|p| {
                offspring(*p)
                    .expect("LIS holds only parents")
                    .iter()
                    .all(|c| self.bands.coeff(*c) == 0.0)
            });
        let next = self.threshold / 2.0;
        if frozen || next < self.floors.min() || next <= 0.0 {
            self.done = true;
        } else {
            self.threshold = next;
            self.exponent -= 1;
        }
        !self.done
    }

    pub fn run(&mut self) {
        while self.step() {}
    }
}

/// Embedding positions chosen for each child band, in significance order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub lh2: Vec<CoeffRef>,
    pub hl2: Vec<CoeffRef>,
    /// True when the passes admitted fewer than the requested count in some
    /// band and the remainder was filled by raw magnitude order.
    pub fallback_used: bool,
}

fn fill_band(
    band: &Subband,
    band_id: TreeBand,
    mut picked: Vec<CoeffRef>,
    count: usize,
) -> (Vec<CoeffRef>, bool) {
    if picked.len() >= count {
        picked.truncate(count);
        return (picked, false);
    }
    // Shortfall: take the largest-magnitude unselected coefficients, ties
    // resolved in raster order so the result stays deterministic.
    let mut taken = vec![false; band.rows() * band.cols()];
    for r in &picked {
        taken[r.row * band.cols() + r.col] = true;
    }
    let mut rest: Vec<(f64, usize)> = band
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(i, _)| !taken[*i])
        .map(|(i, &c)| (libm::fabs(c), i))
        .collect();
    rest.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    for (_, idx) in rest.into_iter().take(count - picked.len()) {
        picked.push(CoeffRef::new(band_id, idx / band.cols(), idx % band.cols()));
    }
    (picked, true)
}

/// Runs the full pass schedule and returns the first `count_per_band`
/// significant positions of each child band, in LSP append order. Bands
/// that come up short are topped up by magnitude order (flagged).
pub fn select_significant(
    pyramid: &WaveletPyramid,
    count_per_band: usize,
) -> Result<Selection, CoreError> {
    let mut sorter = SpihtSort::new(pyramid)?;
    let capacity = sorter.bands.lh2.rows() * sorter.bands.lh2.cols();
    if count_per_band > capacity {
        return Err(CoreError::CapacityExceeded {
            requested: count_per_band,
            capacity,
        });
    }
    sorter.run();
    let mut lh2_sel = Vec::new();
    let mut hl2_sel = Vec::new();
    for r in &sorter.lsp {
        match r.band {
            TreeBand::LH2 => lh2_sel.push(*r),
            TreeBand::HL2 => hl2_sel.push(*r),
            _ => unreachable!("parents never enter the LSP"),
        }
    }
    let (lh2, fb_a) = fill_band(sorter.bands.lh2, TreeBand::LH2, lh2_sel, count_per_band);
    let (hl2, fb_b) = fill_band(sorter.bands.hl2, TreeBand::HL2, hl2_sel, count_per_band);
    Ok(Selection {
        lh2,
        hl2,
        fallback_used: fb_a || fb_b,
    })
}
