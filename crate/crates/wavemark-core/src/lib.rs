//! Wavelet-domain grayscale image watermarking.
//!
//! The scheme embeds a binary watermark into the LH2/HL2 subbands of a
//! 3-level DWT. Coefficients are chosen by a zerotree significance sort
//! over the LH3/HL3 parent bands, and the embedding amplitude at each
//! position is budgeted by a noise visibility function so that textured
//! regions carry more energy than flat ones. Extraction is non-blind:
//! it compares the suspect image against the original.
//!
//! The crate is `no_std` (with `alloc`) and fully deterministic; every
//! stochastic operation takes an explicit seed.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod attacks;
pub mod codec;
pub mod error;
pub mod image;
pub mod metrics;
pub mod nvf;
pub mod rng;
pub mod spiht;
pub mod wavelet;

pub use error::CoreError;
pub use image::{GrayImage, RealImage};
