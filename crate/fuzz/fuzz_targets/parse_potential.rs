#![no_main]

use hillgap::parse::parse_potential;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(v) = parse_potential(data) {
        let _ = v.max_exponent();
        let _ = v.is_self_adjoint();
    }
});
