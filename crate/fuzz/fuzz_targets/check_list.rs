#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(input) = std::str::from_utf8(data) {
        if let Ok(checks) = kmlab::textspec::parse_check_list(input) {
            assert!(!checks.is_empty());
        }
    }
});
