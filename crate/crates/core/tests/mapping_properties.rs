use std::collections::HashMap;

use proptest::prelude::*;

use ccsim::mapping::{
    build_frame, deinterleave, interleave, FrameSpec, PairingMode, QamConstellation, QamFrame,
};
use ccsim::shaping::AmplitudeAlphabet;

fn frame(n: usize, mode: PairingMode, total: usize, fec: usize, interleave: bool, seed: u64) -> QamFrame {
    let alphabet = AmplitudeAlphabet::pas64();
    let spec = FrameSpec {
        block_length_n: n,
        pairing_mode: mode,
        total_symbols: total,
        interleave,
        fec_block_len: fec,
    };
    build_frame(&alphabet, &QamConstellation::new(&alphabet), &spec, seed).unwrap()
}

/// Amplitude index of an unscaled level ±1, ±3, ±5, ±7.
fn amp(level: f64) -> usize {
    ((level.abs() - 1.0) / 2.0).round() as usize
}

#[test]
fn amplitude_marginals_match_composition_exactly() {
    let c = QamConstellation::new(&AmplitudeAlphabet::pas64());
    for mode in [PairingMode::Intra, PairingMode::Inter] {
        for n in [10, 20, 100] {
            // 1000 symbols use 2000 amplitudes per polarization: whole blocks for both modes.
            let f = frame(n, mode, 1000, 1000, false, 5);
            for labels in [&f.labels_x, &f.labels_y] {
                let mut hist = [0usize; 4];
                for &l in labels.iter() {
                    let (i, q) = c.unscaled(l);
                    hist[amp(i)] += 1;
                    hist[amp(q)] += 1;
                }
                assert_eq!(hist, [800, 600, 400, 200], "{mode} n={n}");
            }
        }
    }
}

#[test]
fn intra_pairing_never_repeats_a_single_count_amplitude() {
    let c = QamConstellation::new(&AmplitudeAlphabet::pas64());
    for seed in 0..5 {
        let f = frame(10, PairingMode::Intra, 10_800, 10_800, false, seed);
        for &l in f.labels_x.iter().chain(&f.labels_y) {
            let (i, q) = c.unscaled(l);
            assert!(!(amp(i) == 3 && amp(q) == 3));
        }
    }
}

#[test]
fn quadrants_are_uniform_within_three_sigma() {
    let f = frame(100, PairingMode::Intra, 108_000, 10_800, false, 9);
    let c = QamConstellation::new(&AmplitudeAlphabet::pas64());
    let mut counts = [0usize; 4];
    for &l in &f.labels_x {
        let (i, q) = c.unscaled(l);
        counts[usize::from(i < 0.0) * 2 + usize::from(q < 0.0)] += 1;
    }
    let n = f.labels_x.len() as f64;
    let sigma = (n * 0.25 * 0.75).sqrt();
    for k in counts {
        assert!((k as f64 - n / 4.0).abs() < 3.0 * sigma, "{counts:?}");
    }
}

#[test]
fn unit_energy_for_long_blocks() {
    let f = frame(10_000, PairingMode::Intra, 540_000, 10_800, false, 2);
    let e: f64 = f
        .symbols_x
        .iter()
        .chain(&f.symbols_y)
        .map(|s| s.norm_sqr())
        .sum::<f64>()
        / (2.0 * f.len() as f64);
    assert!((e - 1.0).abs() < 0.005, "{e}");
}

fn block_multisets(labels: &[u16], fec: usize) -> Vec<HashMap<u16, usize>> {
    labels
        .chunks(fec)
        .map(|b| {
            let mut m = HashMap::new();
            for &l in b {
                *m.entry(l).or_insert(0) += 1;
            }
            m
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn interleaver_preserves_block_multisets(seed in any::<u64>(), key in any::<u64>(), blocks in 1usize..4) {
        let f = frame(20, PairingMode::Intra, 60 * blocks, 60, false, seed);
        let g = interleave(&f, key).unwrap();
        prop_assert_eq!(block_multisets(&g.labels_x, 60), block_multisets(&f.labels_x, 60));
        prop_assert_eq!(block_multisets(&g.labels_y, 60), block_multisets(&f.labels_y, 60));
        let back = deinterleave(&g, key).unwrap();
        prop_assert_eq!(back.labels_x, f.labels_x);
        prop_assert_eq!(back.symbols_y, f.symbols_y);
    }

    #[test]
    fn frames_are_deterministic_in_seed(seed in any::<u64>(), inter in any::<bool>()) {
        let mode = if inter { PairingMode::Inter } else { PairingMode::Intra };
        prop_assert_eq!(frame(10, mode, 200, 100, true, seed), frame(10, mode, 200, 100, true, seed));
    }
}
