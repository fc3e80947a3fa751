use core::fmt;

/// Errors produced by the core algorithms. IO-level failures live in the
/// companion crate; everything here is a contract violation on in-memory data.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// Image or band dimensions are zero or inconsistent with the data length.
    BadDimensions { width: usize, height: usize },
    /// Two rasters that must share dimensions do not.
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// Image dimensions are not divisible by 2^levels.
    NotDivisible { dim: usize, levels: u32 },
    /// Decomposition depth outside the supported range.
    BadLevels { levels: u32 },
    /// A parent-band operation was applied to a non-parent coefficient.
    NotAParent,
    /// More coefficients requested from a band than the band holds.
    CapacityExceeded { requested: usize, capacity: usize },
    /// Watermark bit count must be even so the halves are equal.
    OddWatermarkLength { len: usize },
    /// A plan refers to positions or dimensions the image cannot satisfy.
    PlanMismatch,
    /// Attack parameter outside its documented range.
    BadParameter {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
    /// A serialized byte stream failed to parse.
    CorruptStream { what: &'static str },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::BadDimensions { width, height } => {
                write!(f, "bad image dimensions {width}x{height}")
            }
            CoreError::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            CoreError::NotDivisible { dim, levels } => write!(
                f,
                "dimension {dim} not divisible by 2^{levels} as the decomposition requires"
            ),
            CoreError::BadLevels { levels } => write!(f, "unsupported decomposition depth {levels}"),
            CoreError::NotAParent => write!(f, "offspring is defined only for level-3 detail coefficients"),
            CoreError::CapacityExceeded { requested, capacity } => write!(
                f,
                "requested {requested} coefficients from a band holding {capacity}"
            ),
            CoreError::OddWatermarkLength { len } => {
                write!(f, "watermark length {len} is odd and cannot be split in half")
            }
            CoreError::PlanMismatch => write!(f, "embedding plan does not match the image"),
            CoreError::BadParameter { what, value, range } => {
                write!(f, "parameter {what} = {value} outside {range}")
            }
            CoreError::CorruptStream { what } => write!(f, "corrupt stream: {what}"),
        }
    }
}

impl core::error::Error for CoreError {}
