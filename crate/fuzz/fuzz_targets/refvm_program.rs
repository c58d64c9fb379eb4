#![no_main]

use libfuzzer_sys::fuzz_target;

use kmlab::machine::{MonotoneMachine, RefVm, RunStatus};
use kmlab::BitString;

// The reference machine decodes arbitrary bit strings; drive it with raw
// fuzz bytes and assert the monotone-machine contract.
fuzz_target!(|data: &[u8]| {
    let mut bits = Vec::with_capacity(data.len().min(64) * 8);
    for byte in data.iter().take(64) {
        for i in 0..8 {
            bits.push((byte >> i) & 1);
        }
    }
    let program = BitString::from_bits(&bits);
    let budget = 1 + (data.first().copied().unwrap_or(0) as u64) * 4;

    let machine = RefVm::new();
    let outcome = machine.run(&program, budget);
    assert_eq!(outcome, machine.run(&program, budget), "determinism");
    assert!(outcome.consumed <= program.len());
    assert!(outcome.steps_used <= budget);

    // Output never shrinks as the budget grows.
    let half = machine.run(&program, budget / 2);
    assert!(outcome.output.starts_with(&half.output), "output monotone in budget");

    // Runs that never requested more input are stable under extension.
    if outcome.status != RunStatus::NeedsInput {
        let extended = machine.run(&program.child(1), budget);
        assert_eq!(outcome, extended, "prefix monotonicity");
    }
});
