#![no_main]

use hillgap::parse::parse_range;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(ns) = parse_range(data) {
        let mut seen = std::collections::HashSet::new();
        assert!(ns.iter().all(|n| seen.insert(*n)), "duplicates in {ns:?}");
    }
});
