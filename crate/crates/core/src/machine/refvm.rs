//! The reference virtual machine: a fixed, binary-coded monotone machine.
//!
//! The program tape is interpreted directly as a stream of prefix-free
//! instructions over the output alphabet {0,1}:
//!
//! | bits          | instruction | effect                                              |
//! |---------------|-------------|-----------------------------------------------------|
//! | `0b`          | `out b`     | emit symbol `b`                                     |
//! | `10`          | `out1!`     | emit symbol `1`, then halt                          |
//! | `110`         | `halt`      | halt                                                |
//! | `1110`        | `inb`       | read one tape bit; 1 skips the next instruction     |
//! | `1111 1^k 0`  | `jmp k`     | jump back `k+1` instructions (clamped at the start) |
//!
//! One step is one executed instruction. Decoding is charged to the step of
//! the instruction it fetches; `inb` reads its data bit from the current tape
//! head, so loop bodies containing `inb` consume fresh input on every pass.
//! Decoded instructions are cached, which is what makes backward jumps on a
//! one-way input tape possible.
//!
//! Every finite string is emittable by chaining `out` instructions, so the
//! machine is universal for finite outputs; simulating an enumerated machine
//! family is not attempted. The asymmetric `out1!` makes halting after a `1`
//! one bit cheaper than halting after anything else, which gives the halting
//! complexity a non-monotone landscape already at tiny budgets (for example
//! the shortest halting program for `1` is `10`, two bits, while the shortest
//! halting program for the empty string is `110`, three bits).

use crate::alphabet::{Alphabet, SymbolString};
use crate::bits::BitString;

use super::{MonotoneMachine, RunStatus, StepOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Instr {
    Out(u8),
    Out1Halt,
    Halt,
    InBranch,
    JumpBack(usize),
}

/// The reference universal machine. Stateless; see the module docs for the
/// opcode table.
#[derive(Debug, Clone, Copy, Default)]
pub struct RefVm;

impl RefVm {
    pub fn new() -> Self {
        RefVm
    }
}

enum Fetch {
    Decoded(Instr),
    NeedsInput,
}

fn decode(p: &BitString, head: &mut usize) -> Fetch {
    let read = |head: &mut usize| -> Option<u8> {
        let b = p.get(*head)?;
        *head += 1;
        Some(b)
    };
    macro_rules! bit {
        () => {
            match read(head) {
                Some(b) => b,
                None => return Fetch::NeedsInput,
            }
        };
    }
    if bit!() == 0 {
        return Fetch::Decoded(Instr::Out(bit!()));
    }
    if bit!() == 0 {
        return Fetch::Decoded(Instr::Out1Halt);
    }
    if bit!() == 0 {
        return Fetch::Decoded(Instr::Halt);
    }
    if bit!() == 0 {
        return Fetch::Decoded(Instr::InBranch);
    }
    let mut k = 0usize;
    while bit!() == 1 {
        k += 1;
    }
    Fetch::Decoded(Instr::JumpBack(k))
}

impl MonotoneMachine for RefVm {
    fn tag(&self) -> String {
        "refvm".to_string()
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::binary()
    }

    fn run(&self, program: &BitString, max_steps: u64) -> StepOutcome {
        let mut head = 0usize;
        let mut instrs: Vec<Instr> = Vec::new();
        let mut pc = 0usize;
        let mut out: Vec<u8> = Vec::new();
        let mut steps = 0u64;

        let finish = |out: Vec<u8>, head: usize, steps: u64, status: RunStatus| StepOutcome {
            output: SymbolString::new(Alphabet::binary(), out).expect("binary output"),
            consumed: head,
            steps_used: steps,
            status,
        };

        loop {
            if steps == max_steps {
                return finish(out, head, steps, RunStatus::BudgetExhausted);
            }
            while pc >= instrs.len() {
                match decode(program, &mut head) {
                    Fetch::Decoded(i) => instrs.push(i),
                    Fetch::NeedsInput => return finish(out, head, steps, RunStatus::NeedsInput),
                }
            }
            steps += 1;
            match instrs[pc] {
                Instr::Out(b) => {
                    out.push(b);
                    pc += 1;
                }
                Instr::Out1Halt => {
                    out.push(1);
                    return finish(out, head, steps, RunStatus::Halted);
                }
                Instr::Halt => {
                    return finish(out, head, steps, RunStatus::Halted);
                }
                Instr::InBranch => {
                    match program.get(head) {
                        None => return finish(out, head, steps, RunStatus::NeedsInput),
                        Some(b) => {
                            head += 1;
                            if b == 1 {
                                // Skip the next instruction; it must still be
                                // decoded so later jumps see a stable listing.
                                pc += 1;
                                while pc >= instrs.len() {
                                    match decode(program, &mut head) {
                                        Fetch::Decoded(i) => instrs.push(i),
                                        Fetch::NeedsInput => {
                                            return finish(out, head, steps, RunStatus::NeedsInput)
                                        }
                                    }
                                }
                                pc += 1;
                            } else {
                                pc += 1;
                            }
                        }
                    }
                }
                Instr::JumpBack(k) => {
                    pc = pc.saturating_sub(k + 1);
                }
            }
        }
    }
}
