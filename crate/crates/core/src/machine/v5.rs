//! The s-block machine: a native evaluator whose first `s` input bits select
//! the whole behaviour.
//!
//! * `0^s` emits the all-zero sequence forever;
//! * any other s-bit block `q` except `1^s` encodes `t = int(q)` (big-endian,
//!   so `t` ranges over `1..=2^s-2`) and emits `0^(t-1) 1`, then loops
//!   silently consuming nothing;
//! * `1^s p` delegates to an embedded machine when one is configured, and
//!   otherwise loops silently.
//!
//! Without an embedded machine the monotone complexity has a closed form:
//! every nonempty prefix of the all-zero sequence, and every string
//! `0^(t-1) 1` with `t <= 2^s - 2`, costs exactly `s` bits; everything else
//! is unreachable. Reading input is free; emitting one symbol (or idling in
//! a silent loop) is one step.

use crate::alphabet::{Alphabet, SymbolString};
use crate::bits::BitString;

use super::{CodeLen, MachineError, MachineHandle, MonotoneMachine, RunStatus, StepOutcome};

pub struct V5Machine {
    s: u32,
    uprime: Option<MachineHandle>,
}

impl V5Machine {
    pub fn new(s: u32, uprime: Option<MachineHandle>) -> Result<Self, MachineError> {
        if s < 2 {
            return Err(MachineError::STooSmall(s));
        }
        if s > 24 {
            return Err(MachineError::STooLarge { got: s, max: 24 });
        }
        Ok(V5Machine { s, uprime })
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// Number of length-s programs that emit `0^(t-1) 1`, i.e. the usable
    /// codes `1..=2^s-2`.
    pub fn code_count(&self) -> u64 {
        (1u64 << self.s) - 2
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

impl MonotoneMachine for V5Machine {
    fn tag(&self) -> String {
        match &self.uprime {
            None => format!("builtin:v5 s={} uprime=off", self.s),
            Some(u) => format!("builtin:v5 s={} uprime=on({})", self.s, u.tag()),
        }
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::binary()
    }

    fn run(&self, program: &BitString, max_steps: u64) -> StepOutcome {
        if max_steps == 0 {
            return self.empty_outcome(0, 0, RunStatus::BudgetExhausted);
        }
        let s = self.s as usize;
        if program.len() < s {
            return self.empty_outcome(program.len(), 0, RunStatus::NeedsInput);
        }
        let q: u64 = (0..s).fold(0, |acc, i| (acc << 1) | program.bit(i) as u64);
        let all_ones = (1u64 << self.s) - 1;

        if q == 0 {
            // 0^s -> the all-zero sequence, one symbol per step.
            let n = max_steps as usize;
            let output = SymbolString::repeated(self.alphabet(), 0, n).expect("zeros");
            return StepOutcome {
                output,
                consumed: s,
                steps_used: max_steps,
                status: RunStatus::BudgetExhausted,
            };
        }
        if q == all_ones {
            return match &self.uprime {
                Some(inner) => {
                    let rest = program.suffix(s);
                    let mut outcome = inner.run(&rest, max_steps);
                    outcome.consumed += s;
                    outcome
                }
                // Silent loop: burns budget, consumes and emits nothing.
                None => self.empty_outcome(s, max_steps, RunStatus::BudgetExhausted),
            };
        }

        // q encodes t; emit 0^(t-1) 1 and then idle.
        let t = q;
        let emitted = t.min(max_steps);
        let mut syms = vec![0u8; emitted as usize];
        if emitted == t {
            *syms.last_mut().expect("t >= 1") = 1;
        }
        StepOutcome {
            output: SymbolString::new(self.alphabet(), syms).expect("binary"),
            consumed: s,
            steps_used: max_steps,
            status: RunStatus::BudgetExhausted,
        }
    }

    fn km_oracle(&self, x: &SymbolString) -> Option<CodeLen> {
        if self.uprime.is_some() {
            return None;
        }
        if x.is_empty() {
            return Some(CodeLen::Finite(0));
        }
        let n = x.len();
        let zeros = x.symbols().iter().take_while(|s| **s == 0).count();
        if zeros == n {
            // Prefix of the all-zero sequence.
            return Some(CodeLen::Finite(self.s as u64));
        }
        if zeros == n - 1 && x.symbol(n - 1) == 1 {
            // 0^(t-1) 1 with t = n; representable while t <= 2^s - 2.
            if (n as u64) <= self.code_count() {
                return Some(CodeLen::Finite(self.s as u64));
            }
        }
        Some(CodeLen::Infinite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn v5(s: u32) -> V5Machine {
        V5Machine::new(s, None).unwrap()
    }

    #[test]
    fn rejects_small_s() {
        assert!(matches!(V5Machine::new(1, None), Err(MachineError::STooSmall(1))));
        assert!(matches!(V5Machine::new(0, None), Err(MachineError::STooSmall(0))));
        assert!(V5Machine::new(2, None).is_ok());
    }

    #[test]
    fn zero_block_emits_zeros_to_budget() {
        let m = v5(3);
        let o = m.run(&BitString::parse("000").unwrap(), 8);
        assert_eq!(o.output.to_string(), "00000000");
        assert_eq!(o.status, RunStatus::BudgetExhausted);
        assert_eq!(o.consumed, 3);
    }

    #[test]
    fn coded_block_emits_zeros_then_one() {
        let m = v5(4);
        // q = 0100 encodes t = 4 -> output 0001 then silence.
        let o = m.run(&BitString::parse("0100").unwrap(), 100);
        assert_eq!(o.output.to_string(), "0001");
        assert_eq!(o.consumed, 4);
        assert_eq!(o.status, RunStatus::BudgetExhausted);

        // Budget cuts the emission short.
        let o = m.run(&BitString::parse("0100").unwrap(), 2);
        assert_eq!(o.output.to_string(), "00");
    }

    #[test]
    fn short_program_needs_input() {
        let m = v5(4);
        let o = m.run(&BitString::parse("01").unwrap(), 100);
        assert_eq!(o.status, RunStatus::NeedsInput);
        assert_eq!(o.consumed, 2);
        assert!(o.output.is_empty());
    }

    #[test]
    fn all_ones_is_silent_without_uprime() {
        let m = v5(3);
        let o = m.run(&BitString::parse("111010").unwrap(), 50);
        assert!(o.output.is_empty());
        assert_eq!(o.consumed, 3);
        assert_eq!(o.status, RunStatus::BudgetExhausted);
    }

    #[test]
    fn uprime_embedding_delegates() {
        let m = V5Machine::new(3, Some(Arc::new(super::super::RefVm::new()))).unwrap();
        // 111 then refvm program `0010` (out 0, halt... decode: 00=out0, 10=out1!).
        let o = m.run(&BitString::parse("1110010").unwrap(), 100);
        assert_eq!(o.output.to_string(), "01");
        assert_eq!(o.status, RunStatus::Halted);
        assert_eq!(o.consumed, 7);
        assert!(!m.has_km_oracle());
    }

    #[test]
    fn closed_form_km() {
        let m = v5(4);
        // Km(0^(t-1)) = Km(0^(t-1) 1) = s for all t <= 2^s - 2.
        for t in 1..=14usize {
            let zeros = SymbolString::repeated(Alphabet::binary(), 0, t - 1).unwrap();
            if t > 1 {
                assert_eq!(m.km_oracle(&zeros), Some(CodeLen::Finite(4)));
            }
            let with_one = zeros.child(1);
            assert_eq!(m.km_oracle(&with_one), Some(CodeLen::Finite(4)), "t={t}");
        }
        // t = 2^s - 1 is not representable.
        let too_long = SymbolString::repeated(Alphabet::binary(), 0, 14).unwrap().child(1);
        assert_eq!(m.km_oracle(&too_long), Some(CodeLen::Infinite));
        // Anything with an interior 1 is unreachable.
        assert_eq!(m.km_oracle(&SymbolString::bits("010")), Some(CodeLen::Infinite));
        assert_eq!(m.km_oracle(&SymbolString::bits("11")), Some(CodeLen::Infinite));
        // Long zero prefixes stay reachable via 0^s.
        let long_zeros = SymbolString::repeated(Alphabet::binary(), 0, 500).unwrap();
        assert_eq!(m.km_oracle(&long_zeros), Some(CodeLen::Finite(4)));
        assert_eq!(m.km_oracle(&SymbolString::empty(Alphabet::binary())), Some(CodeLen::Finite(0)));
    }

    #[test]
    fn smallest_machine_code_range() {
        let m = v5(2);
        assert_eq!(m.code_count(), 2);
        // q-range is {01, 10}, t in {1, 2}.
        let o = m.run(&BitString::parse("01").unwrap(), 10);
        assert_eq!(o.output.to_string(), "1");
        let o = m.run(&BitString::parse("10").unwrap(), 10);
        assert_eq!(o.output.to_string(), "01");
    }
}
