#![no_main]

use libfuzzer_sys::fuzz_target;
use pencil_bec::cli::parse_list;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(items) = parse_list::<f64>(text) {
        assert_eq!(items.len(), text.split(',').count());
    }
    if let Ok(items) = parse_list::<usize>(text) {
        let joined = items.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",");
        assert_eq!(parse_list::<usize>(&joined).unwrap(), items);
    }
});
