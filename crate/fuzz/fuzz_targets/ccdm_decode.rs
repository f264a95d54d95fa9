#![no_main]

use libfuzzer_sys::fuzz_target;

use ccsim::shaping::{AmplitudeSequence, Ccdm, Composition};

// First byte picks the composition; the rest is the amplitude sequence.
fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else {
        return;
    };
    let counts = match pick % 4 {
        0 => vec![4, 3, 2, 1],
        1 => vec![40, 30, 20, 10],
        2 => vec![6, 6],
        _ => vec![1, 1, 1, 1, 1],
    };
    let ccdm = Ccdm::new(Composition::new(counts).unwrap());
    let seq = AmplitudeSequence::new(rest.iter().take(256).map(|b| b % 6).collect());
    if let Ok(bits) = ccdm.decode(&seq) {
        assert_eq!(bits.len() as u64, ccdm.input_bits());
        if let Ok(back) = ccdm.encode(&bits) {
            assert_eq!(back, seq);
        }
    }
});
