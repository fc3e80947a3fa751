//! File formats, synthetic corpus generation, benchmarking, and the
//! `wavemark` command line tool, layered over the `wavemark-core`
//! algorithms. Everything here is plumbing: images move as binary PGM,
//! embedding plans and reports as JSON, benchmark tables as CSV.

pub mod bench;
pub mod cli;
pub mod error;
pub mod pgm;
pub mod plan;
pub mod report;
pub mod synth;

pub use error::HarnessError;
pub use pgm::{read_binary_watermark, read_pgm, write_pgm};
