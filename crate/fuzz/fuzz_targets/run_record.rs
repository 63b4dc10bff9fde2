#![no_main]

use libfuzzer_sys::fuzz_target;
use pencil_bec::cli::RunRecord;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(record) = RunRecord::from_json(text) {
        let again = RunRecord::from_json(&record.to_json()).expect("re-encoded record must decode");
        assert_eq!(record, again);
    }
});
