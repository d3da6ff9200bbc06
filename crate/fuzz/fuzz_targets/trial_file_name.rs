#![no_main]

use libfuzzer_sys::fuzz_target;
use ssvep_core::TrialId;

fuzz_target!(|data: &[u8]| {
    let Ok(name) = std::str::from_utf8(data) else {
        return;
    };
    if let Some(id) = TrialId::parse_file_name(name) {
        assert_eq!(TrialId::parse_file_name(&id.file_name()), Some(id));
    }
});
