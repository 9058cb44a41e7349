//! Monte-Carlo experiment runner: configuration, reproducible seeding,
//! trial execution over a worker pool, statistics and result emission.
//!
//! Every trial derives its random streams from `(master seed, sweep-point
//! index, trial index)`, so aggregated results are a pure function of the
//! configuration and seed, independent of worker count and completion
//! order.

mod emit;

pub use emit::{csv_string, rows_from_json, write_csv, write_json};

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{
    build_layer_cover, no_stopping_subset_check, validate_css, CssCode, ErrorType, LayerCover,
    ParityCheckMatrix, TannerGraph,
};
use crate::decoder::{DecoderConfig, LayerOrder, PriorVector, Schedule};
use crate::gf2::{self, ChannelConfig, LogicalFailureOracle, Syndrome};
use crate::postprocess::{
    CheckAgnosiaDecoder, ExecutionContract, PostProcessConfig, PostProcessMode, ReliabilityMetric,
};
use crate::seeding::{self, STREAM_ERROR};
use crate::{Error, Result};

/// Flat experiment configuration; mirrors the config-file keys one to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Path to the X-type parity-check matrix (alist).
    pub hx: PathBuf,
    /// Path to the Z-type parity-check matrix (alist).
    pub hz: PathBuf,
    /// Optional layer-cover file; a greedy single cover is built when the
    /// layered schedule runs without one.
    pub layer_cover: Option<PathBuf>,
    pub error_type: ErrorType,
    /// Physical error probabilities to sweep.
    pub p: Vec<f64>,
    /// Trials per sweep point.
    pub trials: u64,
    /// Master seed; all trial randomness derives from it.
    pub seed: u64,
    /// Worker threads; 0 picks the machine default. Does not affect
    /// results.
    pub workers: usize,

    pub schedule: Schedule,
    pub max_iterations: usize,
    pub snapshot_iteration: usize,
    pub llr_init: i32,
    pub scale_factor: f64,
    pub layer_order: LayerOrder,
    pub msg_bits: u32,
    pub llr_bits: u32,

    /// Run the plain decoder without post-processing.
    pub baseline: bool,
    pub max_attempts: usize,
    pub metric: ReliabilityMetric,
    pub mode: PostProcessMode,
    pub execution: ExecutionContract,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let decoder = DecoderConfig::flooded_defaults();
        let pp = PostProcessConfig::default();
        Self {
            hx: PathBuf::new(),
            hz: PathBuf::new(),
            layer_cover: None,
            error_type: ErrorType::X,
            p: vec![0.01],
            trials: 1000,
            seed: 0,
            workers: 0,
            schedule: decoder.schedule,
            max_iterations: decoder.max_iterations,
            snapshot_iteration: pp.snapshot_iteration,
            llr_init: decoder.llr_init,
            scale_factor: decoder.scale_factor,
            layer_order: decoder.layer_order,
            msg_bits: decoder.fixed_point.msg_bits,
            llr_bits: decoder.fixed_point.llr_bits,
            baseline: false,
            max_attempts: pp.max_attempts,
            metric: pp.metric,
            mode: pp.mode,
            execution: pp.execution,
        }
    }
}

impl ExperimentConfig {
    pub fn decoder_config(&self) -> DecoderConfig {
        DecoderConfig {
            schedule: self.schedule,
            max_iterations: self.max_iterations,
            scale_factor: self.scale_factor,
            llr_init: self.llr_init,
            layer_order: self.layer_order,
            snapshot_iteration: self.snapshot_iteration,
            fixed_point: crate::decoder::FixedPointParams {
                msg_bits: self.msg_bits,
                llr_bits: self.llr_bits,
            },
            snapshot_metric: self.metric.snapshot_metric(),
        }
    }

    pub fn postprocess_config(&self) -> PostProcessConfig {
        PostProcessConfig {
            max_attempts: self.max_attempts,
            metric: self.metric,
            mode: self.mode,
            execution: self.execution,
            snapshot_iteration: self.snapshot_iteration,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.p.is_empty() {
            return Err(Error::InvalidConfig("at least one p value is required".into()));
        }
        for &p in &self.p {
            ChannelConfig::new(p, self.error_type)?;
        }
        self.decoder_config().validate()?;
        self.postprocess_config().validate()?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }
}

/// One row of aggregated results per sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub p: f64,
    pub trials: u64,
    /// Trials whose initial decode did not converge.
    pub mp_failures: u64,
    /// Initially failing trials rescued by post-processing.
    pub pp_rescues: u64,
    /// Trials that ended in an explicit decoding failure.
    pub decoding_failures: u64,
    /// Trials whose residual is not a same-type stabilizer (explicit
    /// failures included).
    pub logical_failures: u64,
    pub ler: f64,
    pub ler_ci_low: f64,
    pub ler_ci_high: f64,
    /// Mean iteration count of the initial decode.
    pub mean_iters: f64,
    /// Mean winning attempt index over rescued trials (0 when none).
    pub mean_win_k: f64,
}

/// 95% Wilson score interval for `k` failures out of `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    const Z: f64 = 1.959963984540054;
    debug_assert!(n > 0 && k <= n);
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let margin = Z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    // The extreme counts have exact bounds; rounding must not blur them.
    let lo = if k == 0 { 0.0 } else { (center - margin).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + margin).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, Default)]
struct PointAccumulator {
    trials: u64,
    mp_failures: u64,
    pp_rescues: u64,
    decoding_failures: u64,
    logical_failures: u64,
    iterations_sum: u64,
    win_k_sum: u64,
    win_count: u64,
    soundness_violations: u64,
}

impl PointAccumulator {
    fn merge(self, other: Self) -> Self {
        Self {
            trials: self.trials + other.trials,
            mp_failures: self.mp_failures + other.mp_failures,
            pp_rescues: self.pp_rescues + other.pp_rescues,
            decoding_failures: self.decoding_failures + other.decoding_failures,
            logical_failures: self.logical_failures + other.logical_failures,
            iterations_sum: self.iterations_sum + other.iterations_sum,
            win_k_sum: self.win_k_sum + other.win_k_sum,
            win_count: self.win_count + other.win_count,
            soundness_violations: self.soundness_violations + other.soundness_violations,
        }
    }

    fn into_row(self, p: f64) -> ResultRow {
        assert_eq!(
            self.soundness_violations, 0,
            "accepted estimate violated its syndrome; this is a decoder bug"
        );
        let trials = self.trials;
        let (lo, hi) = wilson_interval(self.logical_failures, trials);
        ResultRow {
            p,
            trials,
            mp_failures: self.mp_failures,
            pp_rescues: self.pp_rescues,
            decoding_failures: self.decoding_failures,
            logical_failures: self.logical_failures,
            ler: self.logical_failures as f64 / trials as f64,
            ler_ci_low: lo,
            ler_ci_high: hi,
            mean_iters: self.iterations_sum as f64 / trials as f64,
            mean_win_k: if self.win_count > 0 {
                self.win_k_sum as f64 / self.win_count as f64
            } else {
                0.0
            },
        }
    }
}

/// Paired comparison of the baseline decoder against check-agnosia on
/// shared error samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedRow {
    pub trials: u64,
    pub baseline_failures: u64,
    pub ca_failures: u64,
    /// Trials failing under the baseline only (post-processing helped).
    pub baseline_only_failures: u64,
    /// Trials failing under check-agnosia only (post-processing hurt).
    pub ca_only_failures: u64,
}

/// A validated, loaded experiment ready to run.
pub struct Experiment {
    cfg: ExperimentConfig,
    code: CssCode,
    graph: TannerGraph,
    cover: Option<LayerCover>,
    priors: PriorVector,
    warnings: Vec<String>,
}

impl Experiment {
    pub fn prepare(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let code = CssCode::from_alist_files(&cfg.hx, &cfg.hz)?;
        Self::with_code(cfg, code)
    }

    /// Builds an experiment over an in-memory code (used by tests; file
    /// paths in the configuration are ignored).
    pub fn with_code(cfg: ExperimentConfig, code: CssCode) -> Result<Self> {
        cfg.validate()?;
        if !validate_css(&code) {
            return Err(Error::InvalidMatrix(
                "CSS commutation violated: some X and Z checks overlap oddly".into(),
            ));
        }
        let h = code.decoding_matrix(cfg.error_type);
        let graph = TannerGraph::new(h);
        let mut warnings = Vec::new();
        let isolated = graph.isolated_qubits();
        if !isolated.is_empty() {
            warnings.push(format!(
                "{} isolated qubit(s) carry no checks (first: {})",
                isolated.len(),
                isolated[0]
            ));
        }
        if cfg.mode == PostProcessMode::MpOnly && !cfg.baseline {
            let violating = (0..graph.n_checks())
                .filter(|&c| !no_stopping_subset_check(&graph, c).no_stopping_subset)
                .count();
            if violating > 0 {
                warnings.push(format!(
                    "mp-only post-processing: {violating} check neighborhood(s) contain a \
                     stopping subset; the solver mode is sound there"
                ));
            }
        }
        let cover = match cfg.schedule {
            Schedule::Flooded => None,
            Schedule::Layered => Some(match &cfg.layer_cover {
                Some(path) => LayerCover::from_file(h, path)?,
                None => build_layer_cover(h, 1)?,
            }),
        };
        let priors = PriorVector::uniform(h.n_qubits(), cfg.llr_init);
        Ok(Self {
            cfg,
            code,
            graph,
            cover,
            priors,
            warnings,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn code(&self) -> &CssCode {
        &self.code
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn decoding_matrix(&self) -> &ParityCheckMatrix {
        self.code.decoding_matrix(self.cfg.error_type)
    }

    fn make_decoder(&self) -> CheckAgnosiaDecoder<'_> {
        CheckAgnosiaDecoder::new(
            self.decoding_matrix(),
            &self.graph,
            self.cover.as_ref(),
            self.cfg.decoder_config(),
            self.cfg.postprocess_config(),
        )
        .expect("configuration validated in prepare")
    }

    fn thread_pool(&self) -> rayon::ThreadPool {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.workers)
            .build()
            .expect("thread pool")
    }

    /// Runs the full sweep and aggregates one row per p value.
    pub fn run(&self) -> Vec<ResultRow> {
        let oracle = LogicalFailureOracle::new(&self.code, self.cfg.error_type);
        self.thread_pool().install(|| {
            self.cfg
                .p
                .iter()
                .enumerate()
                .map(|(point, &p)| self.run_point(point, p, &oracle))
                .collect()
        })
    }

    fn run_point(&self, point: usize, p: f64, oracle: &LogicalFailureOracle) -> ResultRow {
        let channel = ChannelConfig::new(p, self.cfg.error_type).expect("validated");
        let acc = (0..self.cfg.trials)
            .into_par_iter()
            .map_init(
                || self.make_decoder(),
                |decoder, trial| self.run_trial(decoder, &channel, point, trial, oracle),
            )
            .reduce(PointAccumulator::default, PointAccumulator::merge);
        acc.into_row(p)
    }

    fn run_trial(
        &self,
        decoder: &mut CheckAgnosiaDecoder,
        channel: &ChannelConfig,
        point: usize,
        trial: u64,
        oracle: &LogicalFailureOracle,
    ) -> PointAccumulator {
        let trial_seed = seeding::trial_seed(self.cfg.seed, point, trial);
        let mut error_rng = seeding::rng(seeding::mix(trial_seed, &[STREAM_ERROR]));
        let error = gf2::sample_error(channel, self.code.n_qubits(), &mut error_rng);
        let syndrome = gf2::syndrome(self.decoding_matrix(), &error).expect("dimensions match");

        let mut acc = PointAccumulator {
            trials: 1,
            ..PointAccumulator::default()
        };
        if self.cfg.baseline {
            let out = decoder.decode_baseline(&syndrome, &self.priors, trial_seed);
            acc.iterations_sum = out.iterations_used as u64;
            if !out.converged {
                acc.mp_failures = 1;
                acc.decoding_failures = 1;
            } else if !self.matches(&out.error_estimate, &syndrome) {
                acc.soundness_violations = 1;
            }
            if oracle.is_failure(&error, &out.error_estimate) {
                acc.logical_failures = 1;
            }
        } else {
            let out = decoder.decode(&syndrome, &self.priors, trial_seed);
            acc.iterations_sum = out.diagnostics.initial_iterations as u64;
            if !out.diagnostics.initial_converged {
                acc.mp_failures = 1;
            }
            if out.decoded {
                if !self.matches(&out.estimate, &syndrome) {
                    acc.soundness_violations = 1;
                }
                if let Some(k) = out.diagnostics.winning_attempt {
                    acc.pp_rescues = 1;
                    acc.win_k_sum = k as u64;
                    acc.win_count = 1;
                }
            } else {
                acc.decoding_failures = 1;
            }
            if oracle.is_failure(&error, &out.estimate) {
                acc.logical_failures = 1;
            }
        }
        acc
    }

    fn matches(&self, estimate: &gf2::ErrorVector, syndrome: &Syndrome) -> bool {
        gf2::syndrome(self.decoding_matrix(), estimate)
            .map(|s| &s == syndrome)
            .unwrap_or(false)
    }

    /// Paired baseline/check-agnosia comparison at one p value over shared
    /// error samples; the initial decode is computed once per trial and
    /// reused by both arms.
    pub fn run_paired(&self, p: f64) -> Result<PairedRow> {
        let channel = ChannelConfig::new(p, self.cfg.error_type)?;
        let oracle = LogicalFailureOracle::new(&self.code, self.cfg.error_type);
        let point = self
            .cfg
            .p
            .iter()
            .position(|&x| x == p)
            .unwrap_or(self.cfg.p.len());
        let row = self.thread_pool().install(|| {
            (0..self.cfg.trials)
                .into_par_iter()
                .map_init(
                    || self.make_decoder(),
                    |decoder, trial| {
                        let trial_seed = seeding::trial_seed(self.cfg.seed, point, trial);
                        let mut error_rng =
                            seeding::rng(seeding::mix(trial_seed, &[STREAM_ERROR]));
                        let error =
                            gf2::sample_error(&channel, self.code.n_qubits(), &mut error_rng);
                        let syndrome =
                            gf2::syndrome(self.decoding_matrix(), &error).expect("dimensions");
                        let initial = decoder.decode_baseline(&syndrome, &self.priors, trial_seed);
                        let baseline_failed = oracle.is_failure(&error, &initial.error_estimate);
                        let ca = decoder.postprocess(initial, &syndrome, &self.priors, trial_seed);
                        let ca_failed = !ca.decoded || oracle.is_failure(&error, &ca.estimate);
                        PairedRow {
                            trials: 1,
                            baseline_failures: baseline_failed as u64,
                            ca_failures: ca_failed as u64,
                            baseline_only_failures: (baseline_failed && !ca_failed) as u64,
                            ca_only_failures: (ca_failed && !baseline_failed) as u64,
                        }
                    },
                )
                .reduce(
                    || PairedRow {
                        trials: 0,
                        baseline_failures: 0,
                        ca_failures: 0,
                        baseline_only_failures: 0,
                        ca_only_failures: 0,
                    },
                    |a, b| PairedRow {
                        trials: a.trials + b.trials,
                        baseline_failures: a.baseline_failures + b.baseline_failures,
                        ca_failures: a.ca_failures + b.ca_failures,
                        baseline_only_failures: a.baseline_only_failures
                            + b.baseline_only_failures,
                        ca_only_failures: a.ca_only_failures + b.ca_only_failures,
                    },
                )
        });
        Ok(row)
    }
}

/// Loads, validates and runs an experiment, returning the rows.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Ok(Experiment::prepare(cfg.clone())?.run())
}
