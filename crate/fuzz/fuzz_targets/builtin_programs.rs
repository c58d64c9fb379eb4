#![no_main]

use std::sync::Arc;

use libfuzzer_sys::fuzz_target;

use kmlab::machine::{
    BlockMachine, CopyMachine, MachineHandle, RefVm, RunStatus, V5Machine,
};
use kmlab::BitString;

fn machine(selector: u8) -> MachineHandle {
    let refvm = || Arc::new(RefVm::new()) as MachineHandle;
    match selector % 6 {
        0 => refvm(),
        1 => Arc::new(V5Machine::new(3, None).unwrap()),
        2 => Arc::new(V5Machine::new(2, Some(refvm())).unwrap()),
        3 => Arc::new(CopyMachine::new()),
        4 => Arc::new(CopyMachine::with_uprime(2, refvm()).unwrap()),
        _ => Arc::new(BlockMachine::binary_single(2, None).unwrap()),
    }
}

// Every builtin machine must satisfy the same evaluation contract on
// arbitrary program text.
fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let m = machine(data[0]);
    let budget = 1 + (data[1] as u64) * 2;
    let mut bits = Vec::new();
    for byte in data[2..].iter().take(48) {
        for i in 0..8 {
            bits.push((byte >> i) & 1);
        }
    }
    let program = BitString::from_bits(&bits);

    let outcome = m.run(&program, budget);
    assert!(outcome.consumed <= program.len(), "{}", m.tag());
    assert!(outcome.steps_used <= budget, "{}", m.tag());
    assert_ne!(outcome.status, RunStatus::Running);

    let half = m.run(&program, budget / 2);
    assert!(outcome.output.starts_with(&half.output), "{}", m.tag());

    if outcome.status != RunStatus::NeedsInput {
        let extended = m.run(&program.child(0), budget);
        assert_eq!(outcome, extended, "{}", m.tag());
    }
});
