#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(input) = std::str::from_utf8(data) {
        let alphabet = kmlab::Alphabet::binary();
        if let Ok(set) = kmlab::textspec::parse_string_set(input, alphabet) {
            assert!(!set.is_empty());
            for x in set {
                assert!(x.symbols().iter().all(|s| alphabet.contains(*s)));
            }
        }
    }
});
