//! Shared test infrastructure: reference codes, random code generators,
//! an unquantized floating-point NMS reference decoder, and exhaustive
//! GF(2) oracles. Everything here is independent of the library's decoder
//! implementation paths it is used to check.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

use qldpc::code::{CssCode, LayerCover, ParityCheckMatrix, TannerGraph};
use qldpc::decoder::{LayerOrder, Schedule};
use qldpc::gf2::{ErrorVector, Syndrome};

/// Toric code on an `l x l` torus: `2*l*l` edge qubits, star checks in
/// `h_x`, plaquette checks in `h_z`. Four-cycle free for `l >= 3`.
pub fn toric_code(l: usize) -> CssCode {
    assert!(l >= 3);
    let n = 2 * l * l;
    let horizontal = |r: usize, c: usize| (r % l) * l + (c % l);
    let vertical = |r: usize, c: usize| l * l + (r % l) * l + (c % l);
    let mut hx_rows = Vec::new();
    let mut hz_rows = Vec::new();
    for r in 0..l {
        for c in 0..l {
            // Star at vertex (r, c): the four incident edges.
            hx_rows.push(vec![
                horizontal(r, c),
                horizontal(r, c + l - 1),
                vertical(r, c),
                vertical(r + l - 1, c),
            ]);
            // Plaquette with top-left corner (r, c).
            hz_rows.push(vec![
                horizontal(r, c),
                horizontal(r + 1, c),
                vertical(r, c),
                vertical(r, c + 1),
            ]);
        }
    }
    CssCode::new(
        ParityCheckMatrix::new(n, hx_rows).unwrap(),
        ParityCheckMatrix::new(n, hz_rows).unwrap(),
    )
    .unwrap()
}

/// Random four-cycle-free matrix with the given row weight and a minimum
/// qubit degree of two (so erased neighborhoods peel in one round).
pub fn random_four_cycle_free(
    n_checks: usize,
    n_qubits: usize,
    row_weight: usize,
    rng: &mut ChaCha8Rng,
) -> ParityCheckMatrix {
    'restart: loop {
        let mut pair_used: HashSet<(usize, usize)> = HashSet::new();
        let mut rows: Vec<Vec<usize>> = Vec::with_capacity(n_checks);
        let mut degree = vec![0usize; n_qubits];
        let pair = |a: usize, b: usize| (a.min(b), a.max(b));

        for _ in 0..n_checks {
            let mut row: Vec<usize> = Vec::with_capacity(row_weight);
            let mut attempts = 0;
            while row.len() < row_weight {
                attempts += 1;
                if attempts > 500 {
                    continue 'restart;
                }
                let q = rng.random_range(0..n_qubits);
                if row.contains(&q) {
                    continue;
                }
                if row.iter().any(|&m| pair_used.contains(&pair(q, m))) {
                    continue;
                }
                row.push(q);
            }
            for i in 0..row.len() {
                for j in (i + 1)..row.len() {
                    pair_used.insert(pair(row[i], row[j]));
                }
                degree[row[i]] += 1;
            }
            rows.push(row);
        }

        // Lift qubits below degree two by inserting them into rows that
        // accept them without creating a shared pair.
        for q in 0..n_qubits {
            while degree[q] < 2 {
                let mut placed = false;
                let mut order: Vec<usize> = (0..n_checks).collect();
                order.shuffle(rng);
                for &r in &order {
                    if rows[r].contains(&q) || rows[r].len() >= row_weight + 2 {
                        continue;
                    }
                    if rows[r].iter().any(|&m| pair_used.contains(&pair(q, m))) {
                        continue;
                    }
                    for &m in &rows[r] {
                        pair_used.insert(pair(q, m));
                    }
                    rows[r].push(q);
                    degree[q] += 1;
                    placed = true;
                    break;
                }
                if !placed {
                    continue 'restart;
                }
            }
        }

        let h = ParityCheckMatrix::new(n_qubits, rows).unwrap();
        debug_assert!(!h.has_four_cycles());
        return h;
    }
}

/// Exhaustive GF(2) row-space membership: tries every subset of rows.
/// Only usable for matrices with few rows.
pub fn exhaustive_membership(m: &ParityCheckMatrix, v: &ErrorVector) -> bool {
    assert!(m.n_checks() <= 20);
    let rows: Vec<&[usize]> = m.rows().collect();
    for mask in 0u64..(1u64 << m.n_checks()) {
        let mut acc = vec![0u8; m.n_qubits()];
        for (i, row) in rows.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                for &q in *row {
                    acc[q] ^= 1;
                }
            }
        }
        if acc == v.bits() {
            return true;
        }
    }
    false
}

/// One-sided binomial tail `P(X <= k)` for `X ~ Binomial(n, 1/2)`,
/// computed in log space.
pub fn binomial_le_half_pvalue(k: u64, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    assert!(k <= n);
    let ln2 = std::f64::consts::LN_2;
    let mut log_term = -(n as f64) * ln2; // log of P(X = 0)
    let mut log_acc = f64::NEG_INFINITY;
    for i in 0..=k {
        if i > 0 {
            log_term += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        log_acc = log_add_exp(log_acc, log_term);
    }
    log_acc.exp().min(1.0)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Unquantized floating-point NMS reference: identical update rules,
/// schedules and tie-breaking as the fixed-point decoder, with unbounded
/// `f64` messages and exact multiplicative scaling.
pub struct FloatNmsConfig {
    pub schedule: Schedule,
    pub max_iterations: usize,
    pub scale: f64,
    pub layer_order: LayerOrder,
}

pub struct FloatOutcome {
    pub estimate: ErrorVector,
    pub converged: bool,
    pub iterations_used: usize,
}

pub fn float_nms_decode(
    graph: &TannerGraph,
    cover: Option<&LayerCover>,
    cfg: &FloatNmsConfig,
    syndrome: &Syndrome,
    priors: &[f64],
    rng: &mut ChaCha8Rng,
) -> FloatOutcome {
    let n_edges = graph.n_edges();
    let n_qubits = graph.n_qubits();
    let n_checks = graph.n_checks();
    let mut v2c = vec![0.0f64; n_edges];
    let mut c2v = vec![0.0f64; n_edges];
    let mut posteriors: Vec<f64> = priors.to_vec();
    let mut hard: Vec<u8> = posteriors.iter().map(|&p| (p <= 0.0) as u8).collect();

    let update_check = |c: usize, v2c: &[f64], c2v: &mut [f64]| {
        let edges = graph.check_edge_ids(c);
        let mut min1 = f64::INFINITY;
        let mut min2 = f64::INFINITY;
        let mut min1_edge = usize::MAX;
        let mut sign_neg = false;
        for &e in edges {
            let a = v2c[e].abs();
            sign_neg ^= v2c[e] < 0.0;
            if a < min1 {
                min2 = min1;
                min1 = a;
                min1_edge = e;
            } else if a < min2 {
                min2 = a;
            }
        }
        let flip = syndrome.bit(c) == 1;
        for &e in edges {
            let mag = cfg.scale * if e == min1_edge { min2 } else { min1 };
            let neg = sign_neg ^ (v2c[e] < 0.0) ^ flip;
            c2v[e] = if neg { -mag } else { mag };
        }
    };

    let stop_satisfied = |hard: &[u8]| {
        (0..n_checks).all(|c| {
            let parity = graph
                .check_neighbors(c)
                .iter()
                .fold(0u8, |acc, &q| acc ^ hard[q]);
            parity == syndrome.bit(c)
        })
    };

    match cfg.schedule {
        Schedule::Flooded => {
            for iteration in 1..=cfg.max_iterations {
                for q in 0..n_qubits {
                    let edges = graph.qubit_edge_ids(q);
                    let total: f64 = priors[q] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
                    for &e in edges {
                        v2c[e] = total - c2v[e];
                    }
                }
                for c in 0..n_checks {
                    update_check(c, &v2c, &mut c2v);
                }
                for q in 0..n_qubits {
                    let sum: f64 = graph.qubit_edge_ids(q).iter().map(|&e| c2v[e]).sum();
                    posteriors[q] = priors[q] + sum;
                    hard[q] = (posteriors[q] <= 0.0) as u8;
                }
                if stop_satisfied(&hard) {
                    return FloatOutcome {
                        estimate: ErrorVector::from_bits(hard),
                        converged: true,
                        iterations_used: iteration,
                    };
                }
            }
        }
        Schedule::Layered => {
            let cover = cover.expect("layered schedule needs a cover");
            let n_layers = cover.n_layers();
            let covered = cover.iterations_covered();
            let total_layers = (cfg.max_iterations * n_layers).div_ceil(covered);
            let mut done = 0;
            let mut order: Vec<usize> = Vec::new();
            while done < total_layers {
                order.clear();
                order.extend(0..n_layers);
                if matches!(cfg.layer_order, LayerOrder::Random) {
                    order.shuffle(rng);
                }
                for slot in 0..n_layers {
                    if done >= total_layers {
                        break;
                    }
                    for &c in &cover.layers()[order[slot]] {
                        let qubits = graph.check_neighbors(c);
                        let edges = graph.check_edge_ids(c);
                        for (&q, &e) in qubits.iter().zip(edges) {
                            let stripped = posteriors[q] - c2v[e];
                            posteriors[q] = stripped;
                            v2c[e] = stripped;
                        }
                        update_check(c, &v2c, &mut c2v);
                        for (&q, &e) in qubits.iter().zip(edges) {
                            posteriors[q] += c2v[e];
                            hard[q] = (posteriors[q] <= 0.0) as u8;
                        }
                    }
                    done += 1;
                    if stop_satisfied(&hard) {
                        return FloatOutcome {
                            estimate: ErrorVector::from_bits(hard),
                            converged: true,
                            iterations_used: (done * covered).div_ceil(n_layers),
                        };
                    }
                }
            }
        }
    }
    FloatOutcome {
        estimate: ErrorVector::from_bits(hard),
        converged: false,
        iterations_used: cfg.max_iterations,
    }
}

/// Error vector with `weight` distinct flipped qubits.
pub fn random_error_of_weight(n: usize, weight: usize, rng: &mut ChaCha8Rng) -> ErrorVector {
    let mut e = ErrorVector::zeros(n);
    let mut placed = 0;
    while placed < weight {
        let q = rng.random_range(0..n);
        if e.bit(q) == 0 {
            e.set(q, 1);
            placed += 1;
        }
    }
    e
}
