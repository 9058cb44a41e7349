//! Simulation library for message-passing decoding of CSS quantum LDPC
//! codes, with a check-agnosia post-processor and an analytical
//! latency/power model for the matching hardware architectures.
//!
//! The crate is organized around six pieces:
//!
//! * [`code`] — parity-check matrices, Tanner graphs, layer covers and
//!   structural validation (four-cycle freedom, stopping subsets, CSS
//!   commutation).
//! * [`gf2`] — GF(2) linear algebra, error sampling, syndrome computation
//!   and the logical-failure oracle used to score decoding trials.
//! * [`decoder`] — the bit-accurate, quantized normalized-min-sum decoder
//!   with flooded and layered schedules.
//! * [`postprocess`] — the check-agnosia post-processor: check selection
//!   by reliability, prior erasure, partial-syndrome decoding attempts and
//!   residual solving.
//! * [`hwmodel`] — analytical worst-case latency and power estimates for
//!   the sequential and parallel post-processing architectures.
//! * [`harness`] — Monte-Carlo experiment runner, reproducible seeding,
//!   statistics and result emission.
//!
//! The `qldpc` binary exposes the harness, the hardware model and the
//! structural validators as CLI subcommands.

pub mod code;
pub mod decoder;
pub mod gf2;
pub mod harness;
pub mod hwmodel;
pub mod postprocess;
pub mod seeding;

pub use code::{CssCode, ErrorType, LayerCover, ParityCheckMatrix, TannerGraph};
pub use gf2::{ErrorVector, Syndrome};

use std::path::PathBuf;

/// Crate-level error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: code::alist::ParseError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid layer cover: {0}")]
    InvalidLayerCover(String),
    #[error("layered schedule requires a layer cover")]
    MissingLayerCover,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
