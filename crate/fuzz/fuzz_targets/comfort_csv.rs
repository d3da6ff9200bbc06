#![no_main]

use libfuzzer_sys::fuzz_target;
use ssvep_core::protocol::{aggregate_comfort, ComfortRatings};

fuzz_target!(|data: &[u8]| {
    if let Ok(ratings) = ComfortRatings::from_csv(data) {
        let summary = aggregate_comfort(&ratings);
        for d in &summary.per_duty {
            assert!((1.0..=10.0).contains(&d.mean_rating));
        }
    }
});
