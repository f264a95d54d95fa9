#![no_main]

use libfuzzer_sys::fuzz_target;

use ccsim::channel::parse_power_dbm;
use ccsim::shaping::{format_bits, parse_bits, AmplitudeSequence, Composition};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(c) = text.parse::<Composition>() {
        assert_eq!(c.counts().iter().map(|&v| v as usize).sum::<usize>(), c.n());
    }
    if let Ok(bits) = parse_bits(text) {
        assert_eq!(parse_bits(&format_bits(&bits)).unwrap(), bits);
    }
    if let Ok(seq) = AmplitudeSequence::parse(text) {
        assert_eq!(AmplitudeSequence::parse(&seq.to_string()).unwrap(), seq);
    }
    let _ = parse_power_dbm(text);
});
