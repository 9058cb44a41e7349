//! Cross-module property tests backed by independent oracles.

mod common;

use proptest::prelude::*;

use qldpc::code::{
    alist, build_layer_cover, no_stopping_subset_check, validate_css, ParityCheckMatrix,
    TannerGraph,
};
use qldpc::decoder::{
    DecoderConfig, LayerOrder, NmsDecoder, PriorVector, Schedule, StopRule,
};
use qldpc::gf2::{self, gf2_rowspace_membership, ErrorVector, Syndrome};
use qldpc::postprocess::{
    CheckAgnosiaDecoder, PostProcessConfig, PostProcessMode, ReliabilityMetric,
};
use qldpc::seeding;

use common::{float_nms_decode, toric_code, FloatNmsConfig};

/// Strategy: a small random matrix as (n_qubits, rows).
fn small_matrix(max_checks: usize, max_qubits: usize) -> impl Strategy<Value = ParityCheckMatrix> {
    (2usize..=max_qubits)
        .prop_flat_map(move |n_qubits| {
            let row = proptest::collection::btree_set(0..n_qubits, 1..=n_qubits.min(5))
                .prop_map(|s| s.into_iter().collect::<Vec<_>>());
            proptest::collection::vec(row, 1..=max_checks)
                .prop_map(move |rows| ParityCheckMatrix::new(n_qubits, rows).unwrap())
        })
        .no_shrink()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alist_round_trip(h in small_matrix(8, 12)) {
        let text = alist::write_alist(&h);
        let back = alist::parse_alist(&text).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn membership_matches_exhaustive_search(
        h in small_matrix(10, 12),
        bits in proptest::collection::vec(0u8..=1, 12),
    ) {
        let v = ErrorVector::from_bits(bits[..h.n_qubits()].to_vec());
        let fast = gf2_rowspace_membership(&h, &v);
        let slow = common::exhaustive_membership(&h, &v);
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn membership_accepts_row_sums(
        h in small_matrix(10, 12),
        mask in 0u64..1024,
    ) {
        let mut bits = vec![0u8; h.n_qubits()];
        for (i, row) in h.rows().enumerate() {
            if (mask >> i) & 1 == 1 {
                for &q in row {
                    bits[q] ^= 1;
                }
            }
        }
        prop_assert!(gf2_rowspace_membership(&h, &ErrorVector::from_bits(bits)));
    }

    #[test]
    fn greedy_layer_cover_invariants(h in small_matrix(8, 10), t in 1usize..=3) {
        let cover = build_layer_cover(&h, t).unwrap();
        let mut counts = vec![0usize; h.n_checks()];
        for layer in cover.layers() {
            let mut used = vec![false; h.n_qubits()];
            for &c in layer {
                counts[c] += 1;
                for &q in h.row(c) {
                    prop_assert!(!used[q], "layer members must be qubit-disjoint");
                    used[q] = true;
                }
            }
        }
        prop_assert!(counts.iter().all(|&n| n == t));
        let eta = cover.layers_per_iteration();
        prop_assert!((eta - cover.n_layers() as f64 / t as f64).abs() < 1e-12);
    }

    #[test]
    fn peeling_agrees_with_subset_enumeration(h in small_matrix(6, 10)) {
        let graph = TannerGraph::new(&h);
        for target in 0..h.n_checks() {
            let neighborhood = graph.check_neighbors(target);
            if neighborhood.len() > 8 {
                continue;
            }
            // Stopping subset: a non-empty subset of the neighborhood whose
            // induced subgraph has no degree-one check.
            let mut has_stopping_subset = false;
            'subsets: for mask in 1u32..(1 << neighborhood.len()) {
                let subset: Vec<usize> = neighborhood
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (mask >> i) & 1 == 1)
                    .map(|(_, &q)| q)
                    .collect();
                for c in 0..h.n_checks() {
                    let deg = h.row(c).iter().filter(|q| subset.contains(q)).count();
                    if deg == 1 {
                        continue 'subsets;
                    }
                }
                has_stopping_subset = true;
                break;
            }
            let report = no_stopping_subset_check(&graph, target);
            prop_assert_eq!(report.no_stopping_subset, !has_stopping_subset);
        }
    }
}

#[test]
fn toric_codes_are_valid_and_four_cycle_free() {
    for l in [3usize, 4, 5] {
        let code = toric_code(l);
        assert!(validate_css(&code), "toric l={l} must commute");
        assert!(!code.h_x.has_four_cycles());
        assert!(!code.h_z.has_four_cycles());
        for h in [&code.h_x, &code.h_z] {
            let graph = TannerGraph::new(h);
            for c in 0..h.n_checks() {
                let report = no_stopping_subset_check(&graph, c);
                assert!(report.no_stopping_subset);
                assert_eq!(report.rounds, 1);
            }
        }
    }
}

#[test]
fn quantized_decoder_matches_float_reference_on_single_qubit_errors() {
    let code = toric_code(4);
    let h = &code.h_z;
    let graph = TannerGraph::new(h);
    let mut cfg = DecoderConfig::flooded_defaults();
    cfg.max_iterations = 10;
    let mut dec = NmsDecoder::new(&graph, None, cfg).unwrap();
    let float_cfg = FloatNmsConfig {
        schedule: Schedule::Flooded,
        max_iterations: 10,
        scale: 0.875,
        layer_order: LayerOrder::Fixed,
    };
    let float_priors = vec![12.0; h.n_qubits()];
    for q in 0..h.n_qubits() {
        let mut e = ErrorVector::zeros(h.n_qubits());
        e.set(q, 1);
        let s = gf2::syndrome(h, &e).unwrap();
        let out = dec.decode(
            &s,
            &PriorVector::uniform(h.n_qubits(), 12),
            &StopRule::FullSyndrome,
            &mut seeding::rng(0),
        );
        let float_out = float_nms_decode(
            &graph,
            None,
            &float_cfg,
            &s,
            &float_priors,
            &mut seeding::rng(0),
        );
        assert!(out.converged && out.iterations_used <= 2);
        assert!(float_out.converged);
        assert_eq!(out.error_estimate, e);
        assert_eq!(float_out.estimate, e);
    }
}

/// Paired run of the two post-processing modes on identical trials: both
/// must be sound everywhere, and on a four-cycle-free code the rescues
/// should overlap heavily (reported, not asserted).
#[test]
fn solver_and_mp_only_modes_are_both_sound_on_shared_trials() {
    let code = toric_code(4);
    let h = code.decoding_matrix(qldpc::ErrorType::X);
    let graph = TannerGraph::new(h);
    let mut decoder_cfg = DecoderConfig::flooded_defaults();
    decoder_cfg.max_iterations = 20;

    let make = |mode: PostProcessMode| {
        CheckAgnosiaDecoder::new(
            h,
            &graph,
            None,
            decoder_cfg.clone(),
            PostProcessConfig {
                mode,
                ..PostProcessConfig::default()
            },
        )
        .unwrap()
    };
    let mut solver = make(PostProcessMode::Solver);
    let mut mp_only = make(PostProcessMode::MpOnly);

    let channel = qldpc::gf2::ChannelConfig::new(0.08, qldpc::ErrorType::X).unwrap();
    let mut initial_failures = 0u32;
    let mut rescues = [0u32; 2];
    let mut agree = 0u32;
    let mut disagree = 0u32;
    for trial in 0..2000u64 {
        let trial_seed = seeding::trial_seed(41, 0, trial);
        let mut rng = seeding::rng(seeding::mix(trial_seed, &[seeding::STREAM_ERROR]));
        let e = qldpc::gf2::sample_error(&channel, h.n_qubits(), &mut rng);
        let s = gf2::syndrome(h, &e).unwrap();
        let a = solver.decode(&s, &PriorVector::uniform(h.n_qubits(), 12), trial_seed);
        let b = mp_only.decode(&s, &PriorVector::uniform(h.n_qubits(), 12), trial_seed);
        for out in [&a, &b] {
            if out.decoded {
                assert_eq!(gf2::syndrome(h, &out.estimate).unwrap(), s, "soundness");
            }
        }
        assert_eq!(a.diagnostics.initial_converged, b.diagnostics.initial_converged);
        if !a.diagnostics.initial_converged {
            initial_failures += 1;
            rescues[0] += a.decoded as u32;
            rescues[1] += b.decoded as u32;
            if a.decoded == b.decoded {
                agree += 1;
            } else {
                disagree += 1;
            }
        }
    }
    assert!(initial_failures > 0, "p=0.08 must produce initial failures");
    assert!(
        rescues[0] > 0 && rescues[1] > 0,
        "both modes must rescue some initially failing trials"
    );
    println!(
        "paired modes: {initial_failures} initial failures, solver rescued {}, mp-only rescued {}, \
         agreement {agree}/{}",
        rescues[0],
        rescues[1],
        agree + disagree
    );
}

/// A layered random-order decoder must produce bit-identical experiment
/// rows when rerun with the same seed.
#[test]
fn repeated_runs_are_bit_identical() {
    let code = toric_code(3);
    let cfg = qldpc::harness::ExperimentConfig {
        p: vec![0.02, 0.05],
        trials: 500,
        seed: 9,
        schedule: Schedule::Layered,
        max_iterations: 15,
        llr_init: 8,
        scale_factor: 0.9375,
        layer_order: LayerOrder::Random,
        ..qldpc::harness::ExperimentConfig::default()
    };
    let a = qldpc::harness::Experiment::with_code(cfg.clone(), code.clone())
        .unwrap()
        .run();
    let b = qldpc::harness::Experiment::with_code(cfg, code).unwrap().run();
    assert_eq!(a, b);
    assert_eq!(
        qldpc::harness::csv_string(&a),
        qldpc::harness::csv_string(&b)
    );
}

/// Tiny channel: no failures expected over a thousand trials.
#[test]
fn near_zero_channel_has_zero_failures() {
    let code = toric_code(3);
    let cfg = qldpc::harness::ExperimentConfig {
        p: vec![1e-6],
        trials: 1000,
        seed: 5,
        max_iterations: 20,
        ..qldpc::harness::ExperimentConfig::default()
    };
    let rows = qldpc::harness::Experiment::with_code(cfg, code).unwrap().run();
    assert_eq!(rows[0].logical_failures, 0);
    assert_eq!(rows[0].ler, 0.0);
    // Wilson upper bound for a zero count stays closed-form.
    assert!(rows[0].ler_ci_high > 0.0);
}

/// The harness rejects syndromes of non-commuting matrices.
#[test]
fn harness_rejects_non_css_pairs() {
    let hx = ParityCheckMatrix::new(3, vec![vec![0, 1]]).unwrap();
    let hz = ParityCheckMatrix::new(3, vec![vec![1, 2]]).unwrap();
    let code = qldpc::code::CssCode::new(hx, hz).unwrap();
    let cfg = qldpc::harness::ExperimentConfig::default();
    assert!(qldpc::harness::Experiment::with_code(cfg, code).is_err());
}

/// Metric variants produce valid (possibly different) selections and the
/// random metric is seed-reproducible end to end.
#[test]
fn metric_variants_run_end_to_end() {
    let code = toric_code(3);
    for metric in [
        ReliabilityMetric::MinPairSum,
        ReliabilityMetric::AbsSum,
        ReliabilityMetric::Random,
    ] {
        let cfg = qldpc::harness::ExperimentConfig {
            p: vec![0.06],
            trials: 300,
            seed: 17,
            max_iterations: 12,
            metric,
            ..qldpc::harness::ExperimentConfig::default()
        };
        let a = qldpc::harness::Experiment::with_code(cfg.clone(), code.clone())
            .unwrap()
            .run();
        let b = qldpc::harness::Experiment::with_code(cfg, code.clone())
            .unwrap()
            .run();
        assert_eq!(a, b);
        assert_eq!(a[0].trials, 300);
    }
}

/// Syndrome of a hand-built two-qubit error (keeps the GF(2) plumbing
/// honest against the toric geometry).
#[test]
fn toric_syndrome_weight_matches_defect_count() {
    let code = toric_code(4);
    let h = &code.h_z;
    let mut e = ErrorVector::zeros(h.n_qubits());
    e.set(0, 1);
    let s = gf2::syndrome(h, &e).unwrap();
    // A single qubit error lights exactly the two plaquettes it touches.
    assert_eq!(s.weight(), 2);
    let zero = gf2::syndrome(h, &ErrorVector::zeros(h.n_qubits())).unwrap();
    assert_eq!(zero, Syndrome::zeros(h.n_checks()));
}
