#![no_main]

use libfuzzer_sys::fuzz_target;

use ccsim::formats::{decode_symbol_file, encode_symbol_file};

fuzz_target!(|data: &[u8]| {
    if let Ok(file) = decode_symbol_file(data) {
        let again = decode_symbol_file(&encode_symbol_file(&file)).expect("re-encoded file must decode");
        assert_eq!(again.header, file.header);
        assert_eq!(again.x.len(), file.x.len());
    }
});
