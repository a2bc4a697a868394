#![no_main]

use frame_importance::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = RunConfig::parse(text) else { return };
    // The canonical rendering must parse back to the same config.
    let again = RunConfig::parse(&cfg.to_text()).expect("canonical text parses");
    assert_eq!(again.to_text(), cfg.to_text());
    let _ = cfg.validate();
    let mut cfg = cfg;
    for line in text.lines() {
        let _ = cfg.apply_override(line);
    }
});
