#![no_main]

use libfuzzer_sys::fuzz_target;

use ccsim::formats::{decode_field_file, encode_field_file};

fuzz_target!(|data: &[u8]| {
    if let Ok(field) = decode_field_file(data) {
        let bytes = encode_field_file(&field);
        assert_eq!(bytes.len(), data.len());
        decode_field_file(&bytes).expect("re-encoded field must decode");
    }
});
