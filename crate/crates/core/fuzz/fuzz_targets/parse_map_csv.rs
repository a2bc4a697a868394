#![no_main]

use frame_importance::formats::{parse_map_csv, write_map_csv, write_pgm};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(map) = parse_map_csv(text) {
        let back = parse_map_csv(&write_map_csv(map.rows(), map.cols(), map.values())).expect("round trip");
        assert_eq!(back.values(), map.values());
        write_pgm(map.rows(), map.cols(), map.values()).expect("finite maps render");
    }
});
