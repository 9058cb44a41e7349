//! The message-passing engine.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::code::{LayerCover, TannerGraph};
use crate::gf2::{ErrorVector, Syndrome};
use crate::{Error, Result};

use super::scale::NmsScale;
use super::{DecodeOutcome, DecoderConfig, PriorVector, Schedule, SnapshotMetric, StopRule};

/// Compressed check-node state: outgoing magnitudes are reconstructed from
/// the two smallest incoming magnitudes, and outgoing signs from the sign
/// product together with the stored per-edge signs.
#[derive(Debug, Clone, Copy, Default)]
struct CheckNodeState {
    min1: i32,
    min2: i32,
    min1_edge: usize,
    sign_neg: bool,
    abs_sum: u32,
}

/// Exchanged-message storage: per-edge qubit-to-check values and signs,
/// the compressed per-check state, and the materialized check-to-qubit
/// values reconstructed from it.
#[derive(Debug, Clone)]
struct MessageState {
    v2c: Vec<i32>,
    v2c_sign_neg: Vec<bool>,
    c2v: Vec<i32>,
    checks: Vec<CheckNodeState>,
}

impl MessageState {
    fn new(n_edges: usize, n_checks: usize) -> Self {
        Self {
            v2c: vec![0; n_edges],
            v2c_sign_neg: vec![false; n_edges],
            c2v: vec![0; n_edges],
            checks: vec![CheckNodeState::default(); n_checks],
        }
    }

    fn reset(&mut self) {
        self.v2c.fill(0);
        self.v2c_sign_neg.fill(false);
        self.c2v.fill(0);
        self.checks.fill(CheckNodeState::default());
    }
}

/// Read-only view of one check's compressed state, for inspection and
/// tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageStateView {
    pub min1: i32,
    pub min2: i32,
    pub min1_edge: usize,
    pub sign_negative: bool,
    pub abs_sum: u32,
}

/// A quantized NMS decoder instance bound to one Tanner graph. Instances
/// own their mutable state; several instances over the same graph may run
/// concurrently.
pub struct NmsDecoder<'g> {
    graph: &'g TannerGraph,
    cover: Option<&'g LayerCover>,
    cfg: DecoderConfig,
    scale: NmsScale,
    msg_max: i32,
    llr_max: i32,
    state: MessageState,
    posteriors: Vec<i32>,
    hard: Vec<u8>,
    snapshot: Option<Vec<u32>>,
    layer_order: Vec<usize>,
}

impl<'g> NmsDecoder<'g> {
    pub fn new(
        graph: &'g TannerGraph,
        cover: Option<&'g LayerCover>,
        cfg: DecoderConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if matches!(cfg.schedule, Schedule::Layered) && cover.is_none() {
            return Err(Error::MissingLayerCover);
        }
        let scale = NmsScale::from_factor(cfg.scale_factor)?;
        let msg_max = cfg.fixed_point.msg_max();
        let llr_max = cfg.fixed_point.llr_max();
        Ok(Self {
            graph,
            cover,
            cfg,
            scale,
            msg_max,
            llr_max,
            state: MessageState::new(graph.n_edges(), graph.n_checks()),
            posteriors: vec![0; graph.n_qubits()],
            hard: vec![0; graph.n_qubits()],
            snapshot: None,
            layer_order: Vec::new(),
        })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &TannerGraph {
        self.graph
    }

    /// Current reliability of check `c`: sum of the two smallest incoming
    /// message magnitudes (zero before the check's first update).
    pub fn check_reliability(&self, c: usize) -> u32 {
        let st = &self.state.checks[c];
        (st.min1 + st.min2) as u32
    }

    /// Compressed state of check `c`.
    pub fn check_state(&self, c: usize) -> MessageStateView {
        let st = &self.state.checks[c];
        MessageStateView {
            min1: st.min1,
            min2: st.min2,
            min1_edge: st.min1_edge,
            sign_negative: st.sign_neg,
            abs_sum: st.abs_sum,
        }
    }

    /// Runs the configured schedule until the stop rule holds or the
    /// iteration budget is exhausted.
    pub fn decode(
        &mut self,
        syndrome: &Syndrome,
        priors: &PriorVector,
        stop: &StopRule,
        rng: &mut impl Rng,
    ) -> DecodeOutcome {
        debug_assert_eq!(syndrome.len(), self.graph.n_checks());
        debug_assert_eq!(priors.len(), self.graph.n_qubits());
        if let StopRule::PartialSyndrome(active) = stop {
            debug_assert_eq!(active.len(), self.graph.n_checks());
        }

        self.state.reset();
        self.snapshot = None;
        for q in 0..self.graph.n_qubits() {
            let p = priors.values()[q].clamp(-self.llr_max, self.llr_max);
            self.posteriors[q] = p;
            self.hard[q] = (p <= 0) as u8;
        }

        let (converged, iterations_used) = match self.cfg.schedule {
            Schedule::Flooded => self.run_flooded(syndrome, priors, stop),
            Schedule::Layered => self.run_layered(syndrome, stop, rng),
        };

        DecodeOutcome {
            error_estimate: ErrorVector::from_bits(self.hard.clone()),
            converged,
            iterations_used,
            reliability_snapshot: self.snapshot.take(),
            posteriors: self.posteriors.clone(),
        }
    }

    fn run_flooded(
        &mut self,
        syndrome: &Syndrome,
        priors: &PriorVector,
        stop: &StopRule,
    ) -> (bool, usize) {
        for iteration in 1..=self.cfg.max_iterations {
            self.update_qubit_messages(priors);
            for c in 0..self.graph.n_checks() {
                self.scan_check(c);
                self.emit_check(c, syndrome.bit(c) == 1);
            }
            self.update_posteriors(priors);
            if iteration == self.cfg.snapshot_iteration {
                self.capture_snapshot();
            }
            if self.stop_satisfied(syndrome, stop) {
                return (true, iteration);
            }
        }
        (false, self.cfg.max_iterations)
    }

    fn run_layered(
        &mut self,
        syndrome: &Syndrome,
        stop: &StopRule,
        rng: &mut impl Rng,
    ) -> (bool, usize) {
        let cover = self.cover.expect("checked at construction");
        let n_layers = cover.n_layers();
        let covered = cover.iterations_covered();
        // Iteration counts convert to layer units at the cover's rate;
        // fractional boundaries round up to whole layers.
        let total_layers = (self.cfg.max_iterations * n_layers).div_ceil(covered);
        let snapshot_layer = (self.cfg.snapshot_iteration * n_layers).div_ceil(covered);

        let mut done = 0;
        while done < total_layers {
            self.layer_order.clear();
            self.layer_order.extend(0..n_layers);
            if matches!(self.cfg.layer_order, super::LayerOrder::Random) {
                self.layer_order.shuffle(rng);
            }
            for slot in 0..n_layers {
                if done >= total_layers {
                    break;
                }
                let layer = self.layer_order[slot];
                self.process_layer(cover, layer, syndrome);
                done += 1;
                if done == snapshot_layer {
                    self.capture_snapshot();
                }
                if self.stop_satisfied(syndrome, stop) {
                    return (true, (done * covered).div_ceil(n_layers));
                }
            }
        }
        (false, self.cfg.max_iterations)
    }

    /// One layered check update: strip the check's previous messages from
    /// the posteriors, rebuild its incoming messages from the stripped
    /// posteriors, then add the fresh outgoing messages back.
    fn process_layer(&mut self, cover: &LayerCover, layer: usize, syndrome: &Syndrome) {
        for &c in &cover.layers()[layer] {
            let qubits = self.graph.check_neighbors(c);
            let edges = self.graph.check_edge_ids(c);
            for (&q, &e) in qubits.iter().zip(edges) {
                let stripped =
                    (self.posteriors[q] - self.state.c2v[e]).clamp(-self.llr_max, self.llr_max);
                self.posteriors[q] = stripped;
                self.state.v2c[e] = stripped.clamp(-self.msg_max, self.msg_max);
            }
            self.scan_check(c);
            self.emit_check(c, syndrome.bit(c) == 1);
            let qubits = self.graph.check_neighbors(c);
            let edges = self.graph.check_edge_ids(c);
            for (&q, &e) in qubits.iter().zip(edges) {
                let p = (self.posteriors[q] + self.state.c2v[e]).clamp(-self.llr_max, self.llr_max);
                self.posteriors[q] = p;
                self.hard[q] = (p <= 0) as u8;
            }
        }
    }

    /// Qubit-node update: extrinsic sums of priors and previous
    /// check-to-qubit messages, saturated to the message range.
    fn update_qubit_messages(&mut self, priors: &PriorVector) {
        for q in 0..self.graph.n_qubits() {
            let edges = self.graph.qubit_edge_ids(q);
            let total: i32 = priors.values()[q] + edges.iter().map(|&e| self.state.c2v[e]).sum::<i32>();
            for &e in edges {
                self.state.v2c[e] = (total - self.state.c2v[e]).clamp(-self.msg_max, self.msg_max);
            }
        }
    }

    /// Rebuilds the compressed state of check `c` from its incoming
    /// messages.
    fn scan_check(&mut self, c: usize) {
        let mut min1 = i32::MAX;
        let mut min2 = i32::MAX;
        let mut min1_edge = usize::MAX;
        let mut sign_neg = false;
        let mut abs_sum = 0u32;
        for &e in self.graph.check_edge_ids(c) {
            let m = self.state.v2c[e];
            let neg = m < 0;
            self.state.v2c_sign_neg[e] = neg;
            sign_neg ^= neg;
            let a = m.abs();
            debug_assert!(a <= self.msg_max);
            abs_sum += a as u32;
            if a < min1 {
                min2 = min1;
                min1 = a;
                min1_edge = e;
            } else if a < min2 {
                min2 = a;
            }
        }
        // A degree-one check has no second input; it sends full scale.
        min2 = min2.min(self.msg_max);
        self.state.checks[c] = CheckNodeState {
            min1,
            min2,
            min1_edge,
            sign_neg,
            abs_sum,
        };
    }

    /// Decompresses check `c` into its outgoing messages. `flip` encodes
    /// the check's target parity.
    fn emit_check(&mut self, c: usize, flip: bool) {
        let st = self.state.checks[c];
        for &e in self.graph.check_edge_ids(c) {
            let mag = self
                .scale
                .apply(if e == st.min1_edge { st.min2 } else { st.min1 });
            let neg = st.sign_neg ^ self.state.v2c_sign_neg[e] ^ flip;
            self.state.c2v[e] = if neg { -mag } else { mag };
        }
    }

    fn update_posteriors(&mut self, priors: &PriorVector) {
        for q in 0..self.graph.n_qubits() {
            let sum: i32 = self
                .graph
                .qubit_edge_ids(q)
                .iter()
                .map(|&e| self.state.c2v[e])
                .sum();
            let p = (priors.values()[q] + sum).clamp(-self.llr_max, self.llr_max);
            self.posteriors[q] = p;
            self.hard[q] = (p <= 0) as u8;
        }
    }

    fn stop_satisfied(&self, syndrome: &Syndrome, stop: &StopRule) -> bool {
        let active = match stop {
            StopRule::FullSyndrome => None,
            StopRule::PartialSyndrome(active) => Some(active),
        };
        for c in 0..self.graph.n_checks() {
            if let Some(active) = active {
                if !active[c] {
                    continue;
                }
            }
            let parity = self
                .graph
                .check_neighbors(c)
                .iter()
                .fold(0u8, |acc, &q| acc ^ self.hard[q]);
            if parity != syndrome.bit(c) {
                return false;
            }
        }
        true
    }

    fn capture_snapshot(&mut self) {
        let values = self
            .state
            .checks
            .iter()
            .map(|st| match self.cfg.snapshot_metric {
                SnapshotMetric::MinPairSum => (st.min1 + st.min2) as u32,
                SnapshotMetric::AbsSum => st.abs_sum,
            })
            .collect();
        self.snapshot = Some(values);
    }
}
