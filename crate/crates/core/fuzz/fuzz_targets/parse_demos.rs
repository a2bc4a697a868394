#![no_main]

use frame_importance::formats::{parse_demos, write_demos};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(demos) = parse_demos(text) {
        assert_eq!(parse_demos(&write_demos(&demos)).expect("round trip"), demos);
    }
});
