#![no_main]

use hillgap::parse::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = parse_config(text) {
            for (name, section) in &cfg.sections {
                for key in section.keys() {
                    assert!(cfg.get(name, key).is_some());
                }
            }
        }
    }
});
