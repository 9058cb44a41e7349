//! Analytical worst-case latency and power model for check-agnosia
//! decoder architectures.
//!
//! A flooded decoder spends two clock cycles per iteration (qubit-node
//! cycle, check-node cycle); a layered decoder spends one cycle per layer,
//! i.e. `layers_per_iteration` cycles per iteration. Every decoder pass
//! additionally loads data for one cycle. The sorting unit that ranks the
//! check reliabilities contributes `ceil(a/2) * ceil(log2 c)` cycles for
//! `a` attempts over `c` checks; its power is excluded by default.

use serde::{Deserialize, Serialize};

use crate::decoder::Schedule;
use crate::{Error, Result};

/// How post-processing attempts are mapped onto hardware.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PostProcessingStyle {
    /// The attempts reuse the initial decoder sequentially.
    HwReuse,
    /// One dedicated decoder per attempt, all running in parallel, started
    /// from an early reliability snapshot.
    Dedicated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub schedule: Schedule,
    pub pp_style: PostProcessingStyle,
    /// Clock frequency in hertz.
    pub clock_hz: f64,
    pub max_iterations: u32,
    /// Iteration at which the check reliabilities are consumed; only the
    /// dedicated style benefits from an early snapshot.
    pub snapshot_iteration: u32,
    /// Layers per iteration; used by the layered schedule, may be
    /// fractional.
    pub layers_per_iteration: f64,
    /// Number of post-processing attempts.
    pub max_attempts: u32,
    pub n_checks: u32,
    /// Nominal power of one message-passing decoder, in watts.
    pub unit_power_w: f64,
    /// Optional additive sorter power, in watts. Excluded when `None`.
    pub sorter_power_w: Option<f64>,
}

impl ArchitectureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.clock_hz > 0.0) {
            return Err(Error::InvalidConfig("clock frequency must be positive".into()));
        }
        if self.max_iterations == 0 || self.snapshot_iteration == 0 {
            return Err(Error::InvalidConfig("iteration counts must be positive".into()));
        }
        if self.snapshot_iteration > self.max_iterations {
            return Err(Error::InvalidConfig(
                "snapshot_iteration must not exceed max_iterations".into(),
            ));
        }
        if matches!(self.schedule, Schedule::Layered) && !(self.layers_per_iteration > 0.0) {
            return Err(Error::InvalidConfig(
                "layers_per_iteration must be positive for the layered schedule".into(),
            ));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidConfig("max_attempts must be at least 1".into()));
        }
        if self.n_checks == 0 {
            return Err(Error::InvalidConfig("n_checks must be positive".into()));
        }
        if !(self.unit_power_w >= 0.0) {
            return Err(Error::InvalidConfig("unit power must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleBreakdown {
    pub initial_mp: f64,
    pub sorter: f64,
    pub post_processing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyPowerEstimate {
    /// Total worst-case clock cycles; fractional layer counts are kept raw.
    pub cycles: f64,
    /// Total cycles rounded up to whole cycles.
    pub cycles_ceil: u64,
    pub latency_s: f64,
    pub power_w: f64,
    pub breakdown: CycleBreakdown,
}

/// Clock cycles for the pipelined sorting tree to deliver the requested
/// number of least reliable checks.
pub fn sorter_cycles(max_attempts: u32, n_checks: u32) -> u64 {
    u64::from(max_attempts.div_ceil(2)) * u64::from(ceil_log2(n_checks))
}

fn ceil_log2(n: u32) -> u32 {
    if n <= 1 {
        0
    } else {
        32 - (n - 1).leading_zeros()
    }
}

/// Worst-case latency and power of one architecture.
pub fn estimate(spec: &ArchitectureSpec) -> Result<LatencyPowerEstimate> {
    spec.validate()?;
    let cycles_per_iteration = match spec.schedule {
        Schedule::Flooded => 2.0,
        Schedule::Layered => spec.layers_per_iteration,
    };
    // One decoder pass: one loading cycle plus the iteration cycles.
    let pass = |iterations: u32| 1.0 + cycles_per_iteration * f64::from(iterations);
    let sorter = sorter_cycles(spec.max_attempts, spec.n_checks) as f64;
    let (initial_mp, post_processing, power_w) = match spec.pp_style {
        PostProcessingStyle::HwReuse => (
            pass(spec.max_iterations),
            f64::from(spec.max_attempts) * pass(spec.max_iterations),
            spec.unit_power_w,
        ),
        PostProcessingStyle::Dedicated => (
            pass(spec.snapshot_iteration),
            pass(spec.max_iterations),
            f64::from(spec.max_attempts + 1) * spec.unit_power_w,
        ),
    };
    let cycles = initial_mp + sorter + post_processing;
    Ok(LatencyPowerEstimate {
        cycles,
        cycles_ceil: cycles.ceil() as u64,
        latency_s: cycles / spec.clock_hz,
        power_w: power_w + spec.sorter_power_w.unwrap_or(0.0),
        breakdown: CycleBreakdown {
            initial_mp,
            sorter,
            post_processing,
        },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub spec: ArchitectureSpec,
    pub estimate: LatencyPowerEstimate,
    /// True iff no other point has both lower-or-equal latency and power
    /// with at least one strict improvement.
    pub pareto: bool,
}

/// Evaluates a set of architectures and flags the Pareto front in the
/// latency-power plane.
pub fn pareto_sweep(specs: &[ArchitectureSpec]) -> Result<Vec<SweepPoint>> {
    let estimates: Result<Vec<LatencyPowerEstimate>> = specs.iter().map(estimate).collect();
    let estimates = estimates?;
    let dominates = |a: &LatencyPowerEstimate, b: &LatencyPowerEstimate| {
        a.latency_s <= b.latency_s
            && a.power_w <= b.power_w
            && (a.latency_s < b.latency_s || a.power_w < b.power_w)
    };
    Ok(specs
        .iter()
        .zip(&estimates)
        .map(|(spec, est)| SweepPoint {
            spec: spec.clone(),
            estimate: *est,
            pareto: !estimates.iter().any(|other| dominates(other, est)),
        })
        .collect())
}
