#![no_main]

use libfuzzer_sys::fuzz_target;
use ssvep_core::io::{read_amplitudes_csv, rows_to_sets};
use ssvep_core::protocol::{build_report, Provenance};

fuzz_target!(|data: &[u8]| {
    if data.len() > 64 * 1024 {
        return;
    }
    let Ok(rows) = read_amplitudes_csv(data) else {
        return;
    };
    let sets = rows_to_sets(&rows);
    assert_eq!(sets.iter().map(|s| s.len()).sum::<usize>(), rows.len());
    let _ = build_report(&sets, None, Provenance::default());
});
