#![no_main]

use libfuzzer_sys::fuzz_target;
use pdmp::value::Grid1d;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(grid) = text.parse::<Grid1d>() {
        assert!(grid.n >= 2 && grid.lo < grid.hi);
        assert_eq!(grid.node(0), grid.lo);
    }
});
