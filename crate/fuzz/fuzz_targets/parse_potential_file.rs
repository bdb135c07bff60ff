#![no_main]

use hillgap::parse::parse_potential_file;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_potential_file(text);
    }
});
