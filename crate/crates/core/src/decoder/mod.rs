//! Bit-accurate quantized normalized-min-sum decoding.
//!
//! The decoder targets the syndrome-decoding problem `H * e_hat = s`: check
//! `c` aims at parity `s_c`, realized by flipping the check-node sign
//! product when `s_c = 1`. Messages and a-posteriori LLRs are saturated to
//! the configured fixed-point ranges at every step.

mod engine;
mod scale;

pub use engine::{MessageStateView, NmsDecoder};
pub use scale::{FixedPointParams, NmsScale};

use serde::{Deserialize, Serialize};

use crate::gf2::ErrorVector;
use crate::{Error, Result};

/// Message-update schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// All qubit messages, then all check messages, per iteration.
    Flooded,
    /// Checks processed layer by layer, posteriors updated after each check.
    Layered,
}

/// Order in which the layers of a cover are processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerOrder {
    Fixed,
    /// A fresh uniform permutation per pass over the cover.
    Random,
}

/// Per-check statistic captured when the reliability snapshot is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnapshotMetric {
    /// Sum of the two smallest incoming message magnitudes.
    MinPairSum,
    /// Sum of all incoming message magnitudes.
    AbsSum,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub schedule: Schedule,
    pub max_iterations: usize,
    /// Normalization factor; must be a dyadic rational in (0, 1].
    pub scale_factor: f64,
    /// Magnitude assigned to non-erased a-priori LLRs.
    pub llr_init: i32,
    pub layer_order: LayerOrder,
    /// Iteration at whose end the check-reliability snapshot is captured.
    pub snapshot_iteration: usize,
    pub fixed_point: FixedPointParams,
    pub snapshot_metric: SnapshotMetric,
}

impl DecoderConfig {
    /// Flooded-schedule parameter set tuned for 6/8-bit operation.
    pub fn flooded_defaults() -> Self {
        Self {
            schedule: Schedule::Flooded,
            max_iterations: 60,
            scale_factor: 0.875,
            llr_init: 12,
            layer_order: LayerOrder::Fixed,
            snapshot_iteration: 3,
            fixed_point: FixedPointParams::default(),
            snapshot_metric: SnapshotMetric::MinPairSum,
        }
    }

    /// Layered-schedule parameter set; random layer ordering improves
    /// convergence on degenerate codes.
    pub fn layered_defaults() -> Self {
        Self {
            schedule: Schedule::Layered,
            max_iterations: 15,
            scale_factor: 0.9375,
            llr_init: 8,
            layer_order: LayerOrder::Random,
            snapshot_iteration: 3,
            fixed_point: FixedPointParams::default(),
            snapshot_metric: SnapshotMetric::MinPairSum,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.fixed_point.validate()?;
        NmsScale::from_factor(self.scale_factor)?;
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        if !(1..=self.max_iterations).contains(&self.snapshot_iteration) {
            return Err(Error::InvalidConfig(format!(
                "snapshot_iteration must lie in 1..={}, got {}",
                self.max_iterations, self.snapshot_iteration
            )));
        }
        if !(1..=self.fixed_point.llr_max()).contains(&self.llr_init) {
            return Err(Error::InvalidConfig(format!(
                "llr_init must lie in 1..={}, got {}",
                self.fixed_point.llr_max(),
                self.llr_init
            )));
        }
        Ok(())
    }
}

/// Quantized a-priori LLRs, one per qubit. Positive means "no error
/// likely"; erased qubits carry exactly zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorVector(Vec<i32>);

impl PriorVector {
    pub fn uniform(n: usize, llr_init: i32) -> Self {
        Self(vec![llr_init; n])
    }

    /// Uniform priors with the listed qubits erased to zero.
    pub fn with_erasures(n: usize, llr_init: i32, erased: &[usize]) -> Self {
        let mut values = vec![llr_init; n];
        for &q in erased {
            values[q] = 0;
        }
        Self(values)
    }

    /// Zeroes the listed qubits of an existing prior vector.
    pub fn erase(&self, erased: &[usize]) -> Self {
        let mut values = self.0.clone();
        for &q in erased {
            values[q] = 0;
        }
        Self(values)
    }

    /// Channel-derived magnitude `round(ln((1-p)/p))`, clamped to the LLR
    /// range. Min-sum decoding is insensitive to a constant scaling of the
    /// inputs, so the explicit `llr_init` constructors are preferred.
    pub fn from_error_probability(n: usize, p: f64, fixed_point: &FixedPointParams) -> Self {
        let raw = ((1.0 - p) / p).ln().round() as i32;
        Self::uniform(n, raw.clamp(1, fixed_point.llr_max()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[i32] {
        &self.0
    }
}

/// Stopping criterion of a decode call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopRule {
    /// Stop when every check matches the syndrome.
    FullSyndrome,
    /// Stop when every check flagged `true` matches the syndrome; the
    /// remaining checks are ignored.
    PartialSyndrome(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub error_estimate: ErrorVector,
    pub converged: bool,
    /// Iterations consumed; layered passes count in layer units rounded up
    /// to whole iterations.
    pub iterations_used: usize,
    /// Per-check reliability values captured at the end of the configured
    /// snapshot iteration; `None` when the decoder stopped earlier.
    pub reliability_snapshot: Option<Vec<u32>>,
    /// Final a-posteriori LLRs.
    pub posteriors: Vec<i32>,
}
