#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(input) = std::str::from_utf8(data) {
        let alphabet = kmlab::Alphabet::binary();
        if let Ok(loss) = kmlab::textspec::parse_loss_spec(input, alphabet) {
            assert!(loss.num_actions() >= 1);
            assert!(kmlab::decision::is_nondegenerate(&loss) || true);
        }
    }
});
