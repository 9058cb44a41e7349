//! Check-agnosia post-processing.
//!
//! When the initial decode fails, the checks are ranked by a reliability
//! metric and, for each of the least reliable ones, the decoder is rerun
//! with the a-priori reliabilities of that check's neighborhood erased.
//! In solver mode the rerun only has to match the partial syndrome (checks
//! that share no qubit with the erased neighborhood) and the erased qubits
//! are then recovered by solving the small residual system; in mp-only
//! mode the rerun must match the full syndrome on its own.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::code::{no_stopping_subset_check, ParityCheckMatrix, TannerGraph};
use crate::decoder::{
    DecodeOutcome, DecoderConfig, NmsDecoder, PriorVector, SnapshotMetric, StopRule,
};
use crate::gf2::{ErrorVector, Syndrome};
use crate::seeding::{self, STREAM_ATTEMPT_BASE, STREAM_INITIAL, STREAM_SELECT};
use crate::{Error, Result};

/// How the least reliable checks are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReliabilityMetric {
    /// Sum of the two smallest incoming message magnitudes.
    MinPairSum,
    /// Sum of all incoming message magnitudes.
    AbsSum,
    /// Uniform random distinct checks (control experiment).
    Random,
}

impl ReliabilityMetric {
    pub fn snapshot_metric(self) -> SnapshotMetric {
        match self {
            ReliabilityMetric::AbsSum => SnapshotMetric::AbsSum,
            // Random selection ignores the snapshot.
            ReliabilityMetric::MinPairSum | ReliabilityMetric::Random => SnapshotMetric::MinPairSum,
        }
    }
}

/// Post-processing variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PostProcessMode {
    /// Partial-syndrome reruns plus a residual brute-force solver.
    Solver,
    /// Full-syndrome reruns only; sound whenever erased neighborhoods
    /// contain no stopping subset.
    MpOnly,
}

/// Execution contract of the attempt loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecutionContract {
    /// Attempts run in order on shared hardware; first success wins.
    Sequential,
    /// All attempts run on dedicated hardware; the success with the
    /// smallest attempt index wins, independent of completion timing.
    Parallel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PostProcessConfig {
    /// Number of least-reliable checks to try.
    pub max_attempts: usize,
    pub metric: ReliabilityMetric,
    pub mode: PostProcessMode,
    pub execution: ExecutionContract,
    /// Iteration of the initial decode whose state feeds the metric;
    /// forwarded to the decoder configuration.
    pub snapshot_iteration: usize,
}

impl Default for PostProcessConfig {
    fn default() -> Self {
        Self {
            max_attempts: 10,
            metric: ReliabilityMetric::MinPairSum,
            mode: PostProcessMode::MpOnly,
            execution: ExecutionContract::Sequential,
            snapshot_iteration: 3,
        }
    }
}

impl PostProcessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_attempts == 0 {
            return Err(Error::InvalidConfig("max_attempts must be at least 1".into()));
        }
        Ok(())
    }
}

/// The index sets induced by erasing the neighborhood of a target check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodSets {
    pub target: usize,
    /// Qubits whose priors are erased: the neighborhood of the target.
    pub erased_qubits: Vec<usize>,
    /// Checks sharing at least one qubit with the erased set (the target
    /// itself included).
    pub frontier_checks: Vec<usize>,
    /// Mask over all checks: true for checks outside the frontier, i.e.
    /// the partial-syndrome set.
    pub active_mask: Vec<bool>,
}

impl NeighborhoodSets {
    pub fn active_checks(&self) -> Vec<usize> {
        self.active_mask
            .iter()
            .enumerate()
            .filter_map(|(c, &a)| a.then_some(c))
            .collect()
    }
}

pub fn neighborhood_sets(graph: &TannerGraph, target: usize) -> NeighborhoodSets {
    let erased_qubits = graph.check_neighbors(target).to_vec();
    let mut frontier = vec![false; graph.n_checks()];
    for &q in &erased_qubits {
        for &c in graph.qubit_neighbors(q) {
            frontier[c] = true;
        }
    }
    let frontier_checks = (0..graph.n_checks()).filter(|&c| frontier[c]).collect();
    let active_mask = frontier.iter().map(|&f| !f).collect();
    NeighborhoodSets {
        target,
        erased_qubits,
        frontier_checks,
        active_mask,
    }
}

/// Result of ranking checks by reliability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    /// Selected checks, least reliable first.
    pub checks: Vec<usize>,
    /// True when the requested count exceeded the number of checks.
    pub clamped: bool,
}

/// Picks the `count` checks of smallest metric value in ascending order,
/// ties broken by lowest index. The random metric instead draws `count`
/// distinct uniform checks.
pub fn select_least_reliable(
    values: &[u32],
    count: usize,
    metric: ReliabilityMetric,
    rng: &mut impl Rng,
) -> Selection {
    let n = values.len();
    let clamped = count > n;
    let count = count.min(n);
    let mut indices: Vec<usize> = (0..n).collect();
    match metric {
        ReliabilityMetric::Random => {
            // Partial Fisher-Yates: the first `count` slots end up uniform
            // and distinct.
            for i in 0..count {
                let j = rng.random_range(i..n);
                indices.swap(i, j);
            }
        }
        ReliabilityMetric::MinPairSum | ReliabilityMetric::AbsSum => {
            indices.sort_by_key(|&c| (values[c], c));
        }
    }
    indices.truncate(count);
    Selection {
        checks: indices,
        clamped,
    }
}

/// Result of solving the residual system on an erased neighborhood.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualSolve {
    /// Bit per erased qubit (in `erased_qubits` order), or `None` when the
    /// system is unsatisfiable.
    pub assignment: Option<Vec<u8>>,
    /// Variables fixed by peeling degree-one frontier rows.
    pub pinned: usize,
    /// Variables left to exhaustive enumeration.
    pub free_bits: usize,
    /// Assignments evaluated during enumeration.
    pub candidates_tried: u64,
}

/// Solves `H|frontier * e_hat = s|frontier` for the erased qubits, keeping
/// `outside` fixed elsewhere: first peels frontier rows with a single
/// unknown (each pins its qubit), then enumerates the remaining free bits
/// in qubit-index order, returning the first satisfying assignment.
pub fn solve_residual(
    h: &ParityCheckMatrix,
    sets: &NeighborhoodSets,
    outside: &ErrorVector,
    syndrome: &Syndrome,
) -> ResidualSolve {
    let n_unknowns = sets.erased_qubits.len();
    let position_of = |q: usize| sets.erased_qubits.binary_search(&q).ok();

    // Frontier rows restricted to the unknowns, with the fixed outside
    // contribution folded into the targets.
    let mut rows: Vec<(Vec<usize>, u8)> = Vec::with_capacity(sets.frontier_checks.len());
    for &c in &sets.frontier_checks {
        let mut positions = Vec::new();
        let mut target = syndrome.bit(c);
        for &q in h.row(c) {
            match position_of(q) {
                Some(pos) => positions.push(pos),
                None => target ^= outside.bit(q),
            }
        }
        rows.push((positions, target));
    }

    let mut assigned: Vec<Option<u8>> = vec![None; n_unknowns];
    let mut pinned = 0usize;

    // Peeling: substitute known values, then pin unique unknowns.
    loop {
        let mut progressed = false;
        for (positions, target) in rows.iter_mut() {
            positions.retain(|&pos| match assigned[pos] {
                Some(v) => {
                    *target ^= v;
                    false
                }
                None => true,
            });
            match positions.len() {
                0 if *target != 0 => {
                    return ResidualSolve {
                        assignment: None,
                        pinned,
                        free_bits: 0,
                        candidates_tried: 0,
                    };
                }
                1 => {
                    assigned[positions[0]] = Some(*target);
                    pinned += 1;
                    positions.clear();
                    *target = 0;
                    progressed = true;
                }
                _ => {}
            }
        }
        if !progressed {
            break;
        }
    }

    let free: Vec<usize> = (0..n_unknowns).filter(|&p| assigned[p].is_none()).collect();
    let live_rows: Vec<&(Vec<usize>, u8)> = rows.iter().filter(|(p, _)| !p.is_empty()).collect();
    let free_bits = free.len();
    debug_assert!(free_bits < 30, "residual system unexpectedly large");

    let mut candidates_tried = 0u64;
    let mut solution_mask: Option<u64> = if free_bits == 0 { Some(0) } else { None };
    if solution_mask.is_none() {
        'candidates: for mask in 0u64..(1u64 << free_bits) {
            candidates_tried += 1;
            for (positions, target) in &live_rows {
                let mut parity = 0u8;
                for &pos in positions {
                    let j = free.binary_search(&pos).expect("live rows hold free vars");
                    parity ^= ((mask >> j) & 1) as u8;
                }
                if parity != *target {
                    continue 'candidates;
                }
            }
            solution_mask = Some(mask);
            break;
        }
    }

    let assignment = solution_mask.map(|mask| {
        (0..n_unknowns)
            .map(|pos| match assigned[pos] {
                Some(v) => v,
                None => {
                    let j = free.binary_search(&pos).unwrap();
                    ((mask >> j) & 1) as u8
                }
            })
            .collect()
    });
    ResidualSolve {
        assignment,
        pinned,
        free_bits,
        candidates_tried,
    }
}

/// Runs up to `n_attempts` prepared attempts under the execution contract.
/// Returns the winning `(attempt index, payload)` — the smallest-index
/// success — and the number of attempts actually evaluated.
pub fn execute_postprocess<T>(
    contract: ExecutionContract,
    n_attempts: usize,
    mut run_attempt: impl FnMut(usize) -> Option<T>,
) -> (Option<(usize, T)>, usize) {
    match contract {
        ExecutionContract::Sequential => {
            for k in 1..=n_attempts {
                if let Some(result) = run_attempt(k) {
                    return (Some((k, result)), k);
                }
            }
            (None, n_attempts)
        }
        ExecutionContract::Parallel => {
            // All attempts run; arbitration keeps the smallest index so the
            // result is independent of completion timing.
            let mut winner: Option<(usize, T)> = None;
            for k in 1..=n_attempts {
                if let Some(result) = run_attempt(k) {
                    if winner.is_none() {
                        winner = Some((k, result));
                    }
                }
            }
            (winner, n_attempts)
        }
    }
}

/// Per-trial bookkeeping of the post-processing pipeline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialDiagnostics {
    pub initial_converged: bool,
    pub initial_iterations: usize,
    /// Attempt index that produced the returned estimate, if any.
    pub winning_attempt: Option<usize>,
    pub attempts_run: usize,
    pub solver_calls: usize,
    pub solver_unsat: usize,
    pub selection_clamped: bool,
    /// Selected checks whose erased neighborhood contains a stopping
    /// subset (advisory for mp-only mode).
    pub stopping_subset_warnings: usize,
}

/// Outcome of a full check-agnosia decode.
#[derive(Debug, Clone, PartialEq)]
pub struct CaOutcome {
    /// Final estimate. When `decoded` is false this is the initial
    /// decoder's best effort and does not match the syndrome.
    pub estimate: ErrorVector,
    /// True iff the estimate satisfies the full syndrome.
    pub decoded: bool,
    pub diagnostics: TrialDiagnostics,
}

/// A decoder plus post-processor bound to one decoding matrix.
pub struct CheckAgnosiaDecoder<'g> {
    h: &'g ParityCheckMatrix,
    graph: &'g TannerGraph,
    decoder: NmsDecoder<'g>,
    pp: PostProcessConfig,
}

impl<'g> CheckAgnosiaDecoder<'g> {
    /// The snapshot iteration and metric of `decoder_cfg` are overridden
    /// from the post-processing configuration.
    pub fn new(
        h: &'g ParityCheckMatrix,
        graph: &'g TannerGraph,
        cover: Option<&'g crate::code::LayerCover>,
        mut decoder_cfg: DecoderConfig,
        pp: PostProcessConfig,
    ) -> Result<Self> {
        pp.validate()?;
        decoder_cfg.snapshot_iteration = pp.snapshot_iteration;
        decoder_cfg.snapshot_metric = pp.metric.snapshot_metric();
        let decoder = NmsDecoder::new(graph, cover, decoder_cfg)?;
        debug_assert_eq!(h.n_checks(), graph.n_checks());
        debug_assert_eq!(h.n_qubits(), graph.n_qubits());
        Ok(Self {
            h,
            graph,
            decoder,
            pp,
        })
    }

    pub fn postprocess_config(&self) -> &PostProcessConfig {
        &self.pp
    }

    pub fn decoder_config(&self) -> &DecoderConfig {
        self.decoder.config()
    }

    /// Plain decode without post-processing (the baseline decoder).
    pub fn decode_baseline(&mut self, syndrome: &Syndrome, priors: &PriorVector, trial_seed: u64) -> DecodeOutcome {
        let mut rng = seeding::rng(seeding::mix(trial_seed, &[STREAM_INITIAL]));
        self.decoder
            .decode(syndrome, priors, &StopRule::FullSyndrome, &mut rng)
    }

    /// Full check-agnosia decode. All random streams are derived from
    /// `trial_seed`, so outcomes are reproducible and independent of the
    /// execution contract.
    pub fn decode(
        &mut self,
        syndrome: &Syndrome,
        priors: &PriorVector,
        trial_seed: u64,
    ) -> CaOutcome {
        let initial = self.decode_baseline(syndrome, priors, trial_seed);
        self.postprocess(initial, syndrome, priors, trial_seed)
    }

    /// Post-processing stage, reusing an already computed initial decode
    /// (shared with the baseline in paired experiments).
    pub fn postprocess(
        &mut self,
        initial: DecodeOutcome,
        syndrome: &Syndrome,
        priors: &PriorVector,
        trial_seed: u64,
    ) -> CaOutcome {
        let mut diag = TrialDiagnostics {
            initial_converged: initial.converged,
            initial_iterations: initial.iterations_used,
            ..TrialDiagnostics::default()
        };
        if initial.converged {
            debug_assert!(self.matches_syndrome(&initial.error_estimate, syndrome));
            return CaOutcome {
                estimate: initial.error_estimate,
                decoded: true,
                diagnostics: diag,
            };
        }

        // An unconverged run exhausted its budget, which is at least the
        // snapshot iteration.
        let snapshot = initial
            .reliability_snapshot
            .as_ref()
            .expect("unconverged decode reaches the snapshot iteration");
        let mut select_rng = seeding::rng(seeding::mix(trial_seed, &[STREAM_SELECT]));
        let selection =
            select_least_reliable(snapshot, self.pp.max_attempts, self.pp.metric, &mut select_rng);
        diag.selection_clamped = selection.clamped;

        if self.pp.mode == PostProcessMode::MpOnly {
            for &c in &selection.checks {
                if !no_stopping_subset_check(self.graph, c).no_stopping_subset {
                    diag.stopping_subset_warnings += 1;
                }
            }
        }

        let h = self.h;
        let graph = self.graph;
        let pp_mode = self.pp.mode;
        let decoder = &mut self.decoder;
        let solver_calls = &mut diag.solver_calls;
        let solver_unsat = &mut diag.solver_unsat;
        let (winner, attempts_run) = execute_postprocess(
            self.pp.execution,
            selection.checks.len(),
            |k| {
                let target = selection.checks[k - 1];
                let mut rng =
                    seeding::rng(seeding::mix(trial_seed, &[STREAM_ATTEMPT_BASE + k as u64]));
                let sets = neighborhood_sets(graph, target);
                let attempt_priors = priors.erase(&sets.erased_qubits);
                match pp_mode {
                    PostProcessMode::MpOnly => {
                        let out = decoder.decode(
                            syndrome,
                            &attempt_priors,
                            &StopRule::FullSyndrome,
                            &mut rng,
                        );
                        out.converged.then_some(out.error_estimate)
                    }
                    PostProcessMode::Solver => {
                        let stop = StopRule::PartialSyndrome(sets.active_mask.clone());
                        let out = decoder.decode(syndrome, &attempt_priors, &stop, &mut rng);
                        if !out.converged {
                            return None;
                        }
                        *solver_calls += 1;
                        let solve = solve_residual(h, &sets, &out.error_estimate, syndrome);
                        match solve.assignment {
                            Some(bits) => {
                                let mut estimate = out.error_estimate;
                                for (&q, &b) in sets.erased_qubits.iter().zip(&bits) {
                                    estimate.set(q, b);
                                }
                                Some(estimate)
                            }
                            None => {
                                *solver_unsat += 1;
                                None
                            }
                        }
                    }
                }
            },
        );
        diag.attempts_run = attempts_run;

        match winner {
            Some((k, estimate)) => {
                diag.winning_attempt = Some(k);
                debug_assert!(self.matches_syndrome(&estimate, syndrome));
                CaOutcome {
                    estimate,
                    decoded: true,
                    diagnostics: diag,
                }
            }
            None => CaOutcome {
                estimate: initial.error_estimate,
                decoded: false,
                diagnostics: diag,
            },
        }
    }

    fn matches_syndrome(&self, estimate: &ErrorVector, syndrome: &Syndrome) -> bool {
        crate::gf2::syndrome(self.h, estimate)
            .map(|s| &s == syndrome)
            .unwrap_or(false)
    }
}
