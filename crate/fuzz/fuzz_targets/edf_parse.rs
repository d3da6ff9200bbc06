#![no_main]

use libfuzzer_sys::fuzz_target;
use ssvep_core::edf::{parse_edf, write_edf};

fuzz_target!(|data: &[u8]| {
    let Ok(rec) = parse_edf(data) else {
        return;
    };
    for s in rec.signals() {
        let _ = ssvep_core::edf::extract_channel(&rec, &s.label);
    }
    // Numbers can come back longer than their field, so writing may fail;
    // when it succeeds the bytes must parse back to the same recording.
    if let Ok(bytes) = write_edf(&rec) {
        assert_eq!(parse_edf(&bytes).unwrap(), rec);
    }
});
