#![no_main]

use hillgap::parse::parse_bc;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(bc) = parse_bc(data) {
        assert_eq!(parse_bc(&bc.to_string()).expect("display form parses"), bc);
    }
});
