#![no_main]

use frame_importance::grid::MaskGrid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|input: (u8, u8, &str)| {
    let (rows, cols, bits) = (input.0 as usize % 16, input.1 as usize % 16, input.2);
    if let Ok(mask) = MaskGrid::from_bits(rows, cols, bits) {
        assert_eq!(mask.to_bits(), bits);
        assert_eq!(mask.kept_count() + mask.masked_count(), rows * cols);
    }
});
