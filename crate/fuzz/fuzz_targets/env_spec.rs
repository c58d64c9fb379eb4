#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(input) = std::str::from_utf8(data) {
        if let Ok(spec) = kmlab::textspec::parse_env_spec(input) {
            // Building may reject (bad parameters) but must not panic.
            let _ = spec.build(8, 64);
        }
    }
});
