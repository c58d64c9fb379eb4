//! The block-coding machine behind the general self-optimization
//! counterexample.
//!
//! With a leading 1 the machine decodes successive s-bit input blocks. A
//! reserved set `Q` of `|X0|` blocks (the lexicographically first ones) maps
//! one-to-one onto the outcome symbols `X0`; such a block decodes to
//! `b(q) 1^s` and flushes all withheld output. Every other block `z` decodes
//! to the symbol 1 followed by the bits of `z`, and stays withheld until the
//! next flushing block. The reachable (s+1)-symbol output blocks form
//! `A = X0 1^s ∪ 1 (B^s \ Q)` of size exactly `2^s`.
//!
//! Without an embedded machine the monotone complexity is in closed form for
//! every string (infinite off the reachable set); with one, programs starting
//! `0 z` for any 3s-bit `z` delegate.

use crate::alphabet::{Alphabet, Symbol, SymbolString};
use crate::bits::BitString;

use super::{CodeLen, MachineError, MachineHandle, MonotoneMachine, RunStatus, StepOutcome};

pub struct BlockMachine {
    alphabet: Alphabet,
    s: u32,
    /// Sorted designated outcome symbols; never contains symbol 1.
    x0: Vec<Symbol>,
    uprime: Option<MachineHandle>,
}

impl BlockMachine {
    pub fn new(
        alphabet: Alphabet,
        mut x0: Vec<Symbol>,
        s: u32,
        uprime: Option<MachineHandle>,
    ) -> Result<Self, MachineError> {
        if s < 1 {
            return Err(MachineError::STooSmall(s));
        }
        if s > 16 {
            return Err(MachineError::STooLarge { got: s, max: 16 });
        }
        x0.sort_unstable();
        x0.dedup();
        if x0.is_empty() || x0.iter().any(|sym| !alphabet.contains(*sym)) {
            return Err(MachineError::BadOutcomeSet);
        }
        if x0.contains(&1) {
            return Err(MachineError::OutcomeSetContainsOne);
        }
        let max = (1u64 << s) - 1;
        if x0.len() as u64 > max {
            return Err(MachineError::OutcomeSetTooLarge { x0: x0.len(), max });
        }
        Ok(BlockMachine { alphabet, s, x0, uprime })
    }

    /// Binary-alphabet machine with `X0 = {0}`.
    pub fn binary_single(s: u32, uprime: Option<MachineHandle>) -> Result<Self, MachineError> {
        Self::new(Alphabet::binary(), vec![0], s, uprime)
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn outcome_symbols(&self) -> &[Symbol] {
        &self.x0
    }

    pub fn block_len(&self) -> usize {
        self.s as usize + 1
    }

    /// Is the s-bit block with big-endian value `z` reserved (in Q)?
    fn in_q(&self, z: u64) -> bool {
        z < self.x0.len() as u64
    }

    /// Decoded output block for the s-bit input block `z`.
    fn decode_block(&self, z: u64) -> (Vec<Symbol>, bool) {
        let s = self.s as usize;
        if self.in_q(z) {
            let mut syms = vec![self.x0[z as usize]];
            syms.extend(std::iter::repeat_n(1, s));
            (syms, true)
        } else {
            let mut syms = vec![1u8];
            for i in (0..s).rev() {
                syms.push(((z >> i) & 1) as Symbol);
            }
            (syms, false)
        }
    }

    /// The reachable output blocks `A`, in input-block order.
    pub fn reachable_blocks(&self) -> Vec<SymbolString> {
        (0..(1u64 << self.s))
            .map(|z| {
                SymbolString::new(self.alphabet, self.decode_block(z).0).expect("valid block")
            })
            .collect()
    }

    /// Classifies an (s+1)-symbol output block: `Some(true)` when it is a
    /// flushing block `x0 1^s`, `Some(false)` for a withheld block `1 z`,
    /// `None` when it is not in `A`.
    fn classify_block(&self, block: &[Symbol]) -> Option<bool> {
        let s = self.s as usize;
        debug_assert_eq!(block.len(), s + 1);
        if self.x0.contains(&block[0]) {
            if block[1..].iter().all(|b| *b == 1) {
                return Some(true);
            }
            return None;
        }
        if block[0] == 1 {
            if block[1..].iter().any(|b| *b > 1) {
                return None;
            }
            let z = block[1..].iter().fold(0u64, |acc, b| (acc << 1) | *b as u64);
            if !self.in_q(z) {
                return Some(false);
            }
        }
        None
    }

    fn empty_outcome(&self, consumed: usize, steps: u64, status: RunStatus) -> StepOutcome {
        StepOutcome {
            output: SymbolString::empty(self.alphabet),
            consumed,
            steps_used: steps,
            status,
        }
    }
}

impl MonotoneMachine for BlockMachine {
    fn tag(&self) -> String {
        let x0: String = self.x0.iter().map(|s| crate::alphabet::symbol_char(*s)).collect();
        match &self.uprime {
            None => format!("builtin:block s={} x0={}", self.s, x0),
            Some(u) => format!("builtin:block s={} x0={} uprime=on({})", self.s, x0, u.tag()),
        }
    }

    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn run(&self, program: &BitString, max_steps: u64) -> StepOutcome {
        if max_steps == 0 {
            return self.empty_outcome(0, 0, RunStatus::BudgetExhausted);
        }
        if program.is_empty() {
            return self.empty_outcome(0, 0, RunStatus::NeedsInput);
        }
        let s = self.s as usize;

        if program.bit(0) == 0 {
            return match &self.uprime {
                None => self.empty_outcome(1, max_steps, RunStatus::BudgetExhausted),
                Some(inner) => {
                    // Skip any 3s filler bits, then delegate.
                    if program.len() < 1 + 3 * s {
                        return self.empty_outcome(program.len(), 0, RunStatus::NeedsInput);
                    }
                    let rest = program.suffix(1 + 3 * s);
                    let mut outcome = inner.run(&rest, max_steps);
                    outcome.consumed += 1 + 3 * s;
                    outcome
                }
            };
        }

        let mut out: Vec<Symbol> = Vec::new();
        let mut pending: Vec<Symbol> = Vec::new();
        let mut head = 1usize;
        loop {
            if program.len() < head + s {
                let steps = out.len() as u64;
                return StepOutcome {
                    output: SymbolString::new(self.alphabet, out).expect("valid"),
                    consumed: program.len(),
                    steps_used: steps,
                    status: RunStatus::NeedsInput,
                };
            }
            let z = (0..s).fold(0u64, |acc, i| (acc << 1) | program.bit(head + i) as u64);
            head += s;
            let (syms, flush) = self.decode_block(z);
            pending.extend_from_slice(&syms);
            if flush {
                for &sym in &pending {
                    if (out.len() as u64) == max_steps {
                        return StepOutcome {
                            output: SymbolString::new(self.alphabet, out).expect("valid"),
                            consumed: head,
                            steps_used: max_steps,
                            status: RunStatus::BudgetExhausted,
                        };
                    }
                    out.push(sym);
                }
                pending.clear();
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
        let s = self.s as usize;
        let blen = s + 1;
        let syms = x.symbols();
        let complete = syms.len() / blen;
        let mut last_withheld = false;
        for i in 0..complete {
            match self.classify_block(&syms[i * blen..(i + 1) * blen]) {
                Some(flushing) => last_withheld = !flushing,
                None => return Some(CodeLen::Infinite),
            }
        }
        let w = &syms[complete * blen..];
        let base = 1 + (s * complete) as u64;
        if w.is_empty() {
            let extra = if last_withheld { s as u64 } else { 0 };
            return Some(CodeLen::Finite(base + extra));
        }
        // A partial block: the cheapest completion decides.
        let mut best = CodeLen::Infinite;
        if self.x0.contains(&w[0]) && w[1..].iter().all(|b| *b == 1) {
            best = best.min(CodeLen::Finite(base + s as u64));
        }
        if w[0] == 1 && w[1..].iter().all(|b| *b <= 1) {
            // Need some non-reserved s-bit extension of the partial bits.
            let fixed = w.len() - 1;
            let prefix = w[1..].iter().fold(0u64, |acc, b| (acc << 1) | *b as u64);
            let free = (s - fixed) as u32;
            let lo = prefix << free;
            let hi = lo + (1u64 << free);
            let q_count = (self.x0.len() as u64).clamp(lo, hi) - lo;
            if (hi - lo) > q_count {
                best = best.min(CodeLen::Finite(base + 2 * s as u64));
            }
        }
        Some(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn machine() -> BlockMachine {
        BlockMachine::binary_single(3, None).unwrap()
    }

    #[test]
    fn validation() {
        assert!(matches!(
            BlockMachine::new(Alphabet::binary(), vec![1], 3, None),
            Err(MachineError::OutcomeSetContainsOne)
        ));
        assert!(matches!(
            BlockMachine::new(Alphabet::new(4).unwrap(), vec![0, 2, 3], 1, None),
            Err(MachineError::OutcomeSetTooLarge { .. })
        ));
        assert!(matches!(
            BlockMachine::new(Alphabet::binary(), vec![], 3, None),
            Err(MachineError::BadOutcomeSet)
        ));
        assert!(matches!(
            BlockMachine::new(Alphabet::binary(), vec![5], 3, None),
            Err(MachineError::BadOutcomeSet)
        ));
    }

    #[test]
    fn reachable_block_set() {
        let m = machine();
        let blocks = m.reachable_blocks();
        assert_eq!(blocks.len(), 8);
        assert_eq!(blocks[0].to_string(), "0111"); // q = 000 in Q, b(q) = 0
        assert_eq!(blocks[1].to_string(), "1001"); // z = 001
        assert_eq!(blocks[7].to_string(), "1111"); // z = 111
    }

    #[test]
    fn flush_semantics() {
        let m = machine();
        // One reserved block: flushes immediately.
        let o = m.run(&BitString::parse("1000").unwrap(), 100);
        assert_eq!(o.output.to_string(), "0111");
        assert_eq!(o.status, RunStatus::NeedsInput);

        // A withheld block stays pending until a reserved block arrives.
        let o = m.run(&BitString::parse("1101").unwrap(), 100);
        assert!(o.output.is_empty());
        let o = m.run(&BitString::parse("1101000").unwrap(), 100);
        assert_eq!(o.output.to_string(), "11010111");
    }

    #[test]
    fn budget_limits_flush() {
        let m = machine();
        let o = m.run(&BitString::parse("1000").unwrap(), 2);
        assert_eq!(o.output.to_string(), "01");
        assert_eq!(o.status, RunStatus::BudgetExhausted);
    }

    #[test]
    fn closed_form_matches_construction() {
        let m = machine();
        // Km(d(z) x0) = l(c(d(z))) + s + 1 for all z in B^3.
        for block in m.reachable_blocks() {
            let x = block.child(0);
            assert_eq!(m.km_oracle(&x), Some(CodeLen::Finite(3 + 3 + 1)), "block {block}");
            // And continuing with the withheld symbol 1 costs s more.
            let y = block.child(1);
            assert_eq!(m.km_oracle(&y), Some(CodeLen::Finite(3 + 2 * 3 + 1)), "block {block}");
        }
        // Boundary costs depend on whether the last block flushed.
        assert_eq!(m.km_oracle(&SymbolString::bits("0111")), Some(CodeLen::Finite(4)));
        assert_eq!(m.km_oracle(&SymbolString::bits("1001")), Some(CodeLen::Finite(7)));
        // Unreachable strings are infinite.
        assert_eq!(m.km_oracle(&SymbolString::bits("00")), Some(CodeLen::Infinite));
        assert_eq!(m.km_oracle(&SymbolString::bits("1000")), Some(CodeLen::Infinite));
    }

    #[test]
    fn zero_branch() {
        let m = machine();
        let o = m.run(&BitString::parse("0111").unwrap(), 10);
        assert!(o.output.is_empty());
        assert_eq!(o.consumed, 1);
        assert_eq!(o.status, RunStatus::BudgetExhausted);

        let with_up = BlockMachine::binary_single(2, Some(std::sync::Arc::new(super::super::RefVm::new()))).unwrap();
        // 0 + 6 filler bits + refvm `10`.
        let o = with_up.run(&BitString::parse("000000010").unwrap(), 100);
        assert_eq!(o.output.to_string(), "1");
        assert_eq!(o.status, RunStatus::Halted);
    }
}
