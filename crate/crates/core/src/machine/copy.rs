//! The copy machine: leading bit 1 copies the input tape to the output tape,
//! withholding everything emitted since the last flush until a 0 arrives.
//!
//! So `1 x 0` yields output `x0` for every binary `x`, and a run of trailing
//! 1s stays pending. Without an embedded machine the complexity is in closed
//! form: a string ending in 0 costs its length plus one (the leading 1), a
//! string ending in 1 costs one more (the flushing 0), which pins the
//! relation `Km(x1) = Km(x0) + 1`. With an embedded machine, programs
//! starting `0^(s+1)` delegate instead.

use crate::alphabet::{Alphabet, SymbolString};
use crate::bits::BitString;

use super::{CodeLen, MachineError, MachineHandle, MonotoneMachine, RunStatus, StepOutcome};

pub struct CopyMachine {
    uprime: Option<(u32, MachineHandle)>,
}

impl CopyMachine {
    pub fn new() -> Self {
        CopyMachine { uprime: None }
    }

    /// Embeds `inner` behind the prefix `0^(s+1)`.
    pub fn with_uprime(s: u32, inner: MachineHandle) -> Result<Self, MachineError> {
        if s < 2 {
            return Err(MachineError::STooSmall(s));
        }
        if s > 24 {
            return Err(MachineError::STooLarge { got: s, max: 24 });
        }
        Ok(CopyMachine { uprime: Some((s, inner)) })
    }

    fn empty_outcome(&self, consumed: usize, steps: u64, status: RunStatus) -> StepOutcome {
        StepOutcome {
            output: SymbolString::empty(self.alphabet()),
            consumed,
            steps_used: steps,
            status,
        }
    }
}

impl Default for CopyMachine {
    fn default() -> Self {
        Self::new()
    }
}

impl MonotoneMachine for CopyMachine {
    fn tag(&self) -> String {
        match &self.uprime {
            None => "builtin:copy uprime=off".to_string(),
            Some((s, u)) => format!("builtin:copy s={s} uprime=on({})", u.tag()),
        }
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::binary()
    }

    fn run(&self, program: &BitString, max_steps: u64) -> StepOutcome {
        if max_steps == 0 {
            return self.empty_outcome(0, 0, RunStatus::BudgetExhausted);
        }
        if program.is_empty() {
            return self.empty_outcome(0, 0, RunStatus::NeedsInput);
        }
        if program.bit(0) == 1 {
            // Copy mode. Emissions cost one step each; reads are free.
            let mut out: Vec<u8> = Vec::new();
            let mut emitted = 0usize; // symbols of program[1..] already written
            for i in 1..program.len() {
                if program.bit(i) == 0 {
                    // Flush everything up to and including this 0.
                    while emitted < i {
                        if (out.len() as u64) == max_steps {
                            return StepOutcome {
                                output: SymbolString::new(self.alphabet(), out).expect("binary"),
                                consumed: i + 1,
                                steps_used: max_steps,
                                status: RunStatus::BudgetExhausted,
                            };
                        }
                        out.push(program.bit(1 + emitted));
                        emitted += 1;
                    }
                }
            }
            let steps = out.len() as u64;
            return StepOutcome {
                output: SymbolString::new(self.alphabet(), out).expect("binary"),
                consumed: program.len(),
                steps_used: steps,
                status: RunStatus::NeedsInput,
            };
        }

        // Leading 0.
        match &self.uprime {
            None => self.empty_outcome(1, max_steps, RunStatus::BudgetExhausted),
            Some((s, inner)) => {
                let s = *s as usize;
                // Expect s further zeros, read one at a time.
                for i in 1..=s {
                    match program.get(i) {
                        None => return self.empty_outcome(program.len(), 0, RunStatus::NeedsInput),
                        Some(0) => {}
                        Some(_) => {
                            // Not the delegation prefix: silent loop.
                            return self.empty_outcome(i + 1, max_steps, RunStatus::BudgetExhausted);
                        }
                    }
                }
                let rest = program.suffix(s + 1);
                let mut outcome = inner.run(&rest, max_steps);
                outcome.consumed += s + 1;
                outcome
            }
        }
    }

    fn km_oracle(&self, x: &SymbolString) -> Option<CodeLen> {
        if self.uprime.is_some() {
            return None;
        }
        if x.is_empty() {
            return Some(CodeLen::Finite(0));
        }
        let n = x.len() as u64;
        match x.symbol(x.len() - 1) {
            0 => Some(CodeLen::Finite(n + 1)),
            _ => Some(CodeLen::Finite(n + 2)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::outputs_prefix;
    use std::sync::Arc;

    fn copy() -> CopyMachine {
        CopyMachine::new()
    }

    #[test]
    fn copies_with_withheld_tail() {
        let o = copy().run(&BitString::parse("1010").unwrap(), 100);
        assert_eq!(o.output.to_string(), "010");
        assert_eq!(o.status, RunStatus::NeedsInput);
        assert_eq!(o.consumed, 4);

        // Trailing ones stay pending.
        let o = copy().run(&BitString::parse("111").unwrap(), 100);
        assert!(o.output.is_empty());
        let o = copy().run(&BitString::parse("1110").unwrap(), 100);
        assert_eq!(o.output.to_string(), "110");
    }

    #[test]
    fn membership_examples() {
        let m = copy();
        assert!(outputs_prefix(&m, &BitString::parse("10").unwrap(), &SymbolString::bits("0"), 100));
        assert!(!outputs_prefix(&m, &BitString::parse("11").unwrap(), &SymbolString::bits("0"), 100));
        // 1 x 0 emits x0 for all short x.
        for xlen in 0..=8usize {
            for x in SymbolString::all_of_length(Alphabet::binary(), xlen) {
                let mut p = BitString::parse("1").unwrap();
                for s in x.symbols() {
                    p.push(*s);
                }
                p.push(0);
                let want = x.child(0);
                assert!(outputs_prefix(&m, &p, &want, 1000), "x={x}");
            }
        }
    }

    #[test]
    fn budget_cuts_flush() {
        let o = copy().run(&BitString::parse("10100").unwrap(), 2);
        assert_eq!(o.output.to_string(), "01");
        assert_eq!(o.status, RunStatus::BudgetExhausted);
    }

    #[test]
    fn closed_form_relation() {
        let m = copy();
        for n in 0..=6usize {
            for x in SymbolString::all_of_length(Alphabet::binary(), n) {
                let k0 = m.km_oracle(&x.child(0)).unwrap();
                let k1 = m.km_oracle(&x.child(1)).unwrap();
                assert_eq!(k1, k0.plus(1), "Km(x1) = Km(x0) + 1 at x={x}");
            }
        }
        assert_eq!(m.km_oracle(&SymbolString::bits("0")), Some(CodeLen::Finite(2)));
    }

    #[test]
    fn zero_branch_silent_without_uprime() {
        let o = copy().run(&BitString::parse("0101").unwrap(), 10);
        assert!(o.output.is_empty());
        assert_eq!(o.consumed, 1);
        assert_eq!(o.status, RunStatus::BudgetExhausted);
    }

    #[test]
    fn uprime_behind_zero_prefix() {
        let m = CopyMachine::with_uprime(2, Arc::new(super::super::RefVm::new())).unwrap();
        assert!(!m.has_km_oracle());
        // 000 then refvm `10` (out1, halt).
        let o = m.run(&BitString::parse("00010").unwrap(), 100);
        assert_eq!(o.output.to_string(), "1");
        assert_eq!(o.status, RunStatus::Halted);
        assert_eq!(o.consumed, 5);
        // 01... is not the delegation prefix.
        let o = m.run(&BitString::parse("01").unwrap(), 10);
        assert!(o.output.is_empty());
        assert_eq!(o.status, RunStatus::BudgetExhausted);
    }
}
