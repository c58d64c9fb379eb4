#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(input) = std::str::from_utf8(data) {
        if let Ok(cache) = kmlab::cache::EstimateCache::parse(input) {
            // Accepted caches round-trip through their textual form.
            let text = cache.to_text();
            let again = kmlab::cache::EstimateCache::parse(&text).expect("round-trip");
            assert_eq!(cache, again);
        }
    }
});
