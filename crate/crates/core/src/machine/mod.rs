//! Monotone Turing-machine semantics.
//!
//! A monotone machine reads a binary program tape one way and writes symbols
//! to a one-way output tape: a longer program prefix or a larger step budget
//! never retracts emitted output. Machines here are immutable after
//! construction and `run` is a pure function of `(program, budget)`, so they
//! are safe to evaluate concurrently from many workers.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::alphabet::{Alphabet, SymbolString};
use crate::bits::BitString;

mod block;
mod copy;
mod refvm;
mod v5;

pub use block::BlockMachine;
pub use copy::CopyMachine;
pub use refvm::RefVm;
pub use v5::V5Machine;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MachineError {
    #[error("parameter s={0} is below this machine's minimum")]
    STooSmall(u32),
    #[error("parameter s must be at most {max}, got {got}")]
    STooLarge { got: u32, max: u32 },
    #[error("block outcome set must not contain symbol 1")]
    OutcomeSetContainsOne,
    #[error("block outcome set of size {x0} needs |X0| <= 2^s - 1 = {max}")]
    OutcomeSetTooLarge { x0: usize, max: u64 },
    #[error("block outcome set must be nonempty, without duplicates, over the alphabet")]
    BadOutcomeSet,
    #[error("alphabet error: {0}")]
    Alphabet(#[from] crate::alphabet::AlphabetError),
}

/// How a bounded run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    /// Still mid-transition; never returned by `run`, only by single-stepping
    /// executors.
    Running,
    /// The machine executed an explicit halt.
    Halted,
    /// The machine requested an input bit beyond the supplied program prefix.
    NeedsInput,
    /// The step budget ran out first.
    BudgetExhausted,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RunStatus::Running => "running",
            RunStatus::Halted => "halted",
            RunStatus::NeedsInput => "needs-input",
            RunStatus::BudgetExhausted => "budget-exhausted",
        };
        write!(f, "{s}")
    }
}

/// Result of running a program under a step budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub output: SymbolString,
    /// Input bits the head moved past. Never exceeds the program length.
    pub consumed: usize,
    pub steps_used: u64,
    pub status: RunStatus,
}

/// A length in bits, or infinity when no program qualifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CodeLen {
    Finite(u64),
    Infinite,
}

impl CodeLen {
    pub fn is_finite(&self) -> bool {
        matches!(self, CodeLen::Finite(_))
    }

    pub fn finite(&self) -> Option<u64> {
        match self {
            CodeLen::Finite(n) => Some(*n),
            CodeLen::Infinite => None,
        }
    }

    pub fn plus(&self, extra: u64) -> CodeLen {
        match self {
            CodeLen::Finite(n) => CodeLen::Finite(n + extra),
            CodeLen::Infinite => CodeLen::Infinite,
        }
    }

    /// 2^-len as an exact rational (0 for infinity).
    pub fn mass(&self) -> num::BigRational {
        match self {
            CodeLen::Finite(n) => crate::exact::pow2(-(*n as i64)),
            CodeLen::Infinite => num::BigRational::from_integer(0.into()),
        }
    }
}

impl fmt::Display for CodeLen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeLen::Finite(n) => write!(f, "{n}"),
            CodeLen::Infinite => write!(f, "inf"),
        }
    }
}

/// The monotone-machine evaluation contract.
///
/// Implementations must be deterministic and satisfy two monotonicity laws:
///
/// * output monotonicity: `run(p, t).output` is a prefix of
///   `run(p, t').output` for `t <= t'`;
/// * prefix monotonicity: if `run(p, t)` ends without requesting input
///   beyond `p` (status `Halted` or `BudgetExhausted`), then `run(p', t)` is
///   the identical outcome for every extension `p'` of `p`.
pub trait MonotoneMachine: Send + Sync {
    /// Stable identity string, e.g. `builtin:v5 s=4 uprime=off`.
    fn tag(&self) -> String;

    fn alphabet(&self) -> Alphabet;

    /// Runs `program` for at most `max_steps` instruction transitions.
    fn run(&self, program: &BitString, max_steps: u64) -> StepOutcome;

    /// Closed-form monotone complexity, where the machine's construction
    /// provides one. Machines with an oracle answer for *every* string;
    /// machines without answer `None` for every string.
    fn km_oracle(&self, _x: &SymbolString) -> Option<CodeLen> {
        None
    }

    fn has_km_oracle(&self) -> bool {
        self.km_oracle(&SymbolString::empty(self.alphabet())).is_some()
    }
}

/// The membership predicate "running `p` yields an output starting with `x`".
///
/// Outcomes that ended in `NeedsInput` still count when the prefix condition
/// is already met; `consumed <= p.len()` holds for every outcome by
/// construction.
pub fn outputs_prefix(
    machine: &dyn MonotoneMachine,
    p: &BitString,
    x: &SymbolString,
    max_steps: u64,
) -> bool {
    let outcome = machine.run(p, max_steps);
    debug_assert!(outcome.consumed <= p.len());
    outcome.output.starts_with(x)
}

/// Shared handle to a machine.
pub type MachineHandle = Arc<dyn MonotoneMachine>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_len_order_and_mass() {
        assert!(CodeLen::Finite(3) < CodeLen::Finite(4));
        assert!(CodeLen::Finite(u64::MAX) < CodeLen::Infinite);
        assert_eq!(CodeLen::Finite(4).mass(), crate::exact::rat(1, 16));
        assert_eq!(CodeLen::Infinite.mass(), crate::exact::rat_int(0));
        assert_eq!(CodeLen::Infinite.plus(5), CodeLen::Infinite);
        assert_eq!(CodeLen::Finite(2).plus(5), CodeLen::Finite(7));
    }
}
