#![no_main]

use libfuzzer_sys::fuzz_target;
use ssvep_core::simulate::ResponseModel;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = ResponseModel::from_csv(data) {
        let again =
            ResponseModel::from_csv(model.to_csv().as_bytes()).expect("written model parses");
        assert_eq!(again, model);
    }
});
