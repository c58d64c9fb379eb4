//! Budgeted enumeration of minimal programs.
//!
//! Programs are explored over the binary prefix tree, every program after
//! all of its prefixes, which realizes the length-then-lexicographic
//! schedule's pruning rule: once a program's output already covers the
//! target (it is minimal, since no shorter prefix qualified or we would not
//! have reached it), or conflicts with the target (output only ever grows),
//! or the run ended without requesting more input (every extension behaves
//! identically), the whole subtree below it is dead. Only hungry,
//! still-compatible programs are extended.
//!
//! The result sets are defined by predicates, not by visit order, so the
//! reduction is order-independent and the engine may split subtrees across
//! workers; one worker and many workers produce identical results.

use std::collections::BTreeSet;
use std::fmt;

use num::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alphabet::SymbolString;
use crate::bits::BitString;
use crate::exact;
use crate::machine::{CodeLen, MonotoneMachine, RunStatus};

/// Resource bounds for one enumeration: program length in bits and a step
/// budget per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Budget {
    pub max_len: u32,
    pub max_steps: u64,
}

impl Budget {
    pub fn new(max_len: u32, max_steps: u64) -> Self {
        Budget { max_len, max_steps }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L={},T={}", self.max_len, self.max_steps)
    }
}

/// All minimal programs for a target at a fixed budget: every member outputs
/// the target (as a prefix) within the step budget and no proper prefix of a
/// member does so at the same budget. The set is prefix-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalProgramSet {
    pub target: SymbolString,
    pub programs: BTreeSet<BitString>,
    pub budget: Budget,
}

impl MinimalProgramSet {
    /// Minimum program length, infinite when the set is empty.
    pub fn min_len(&self) -> CodeLen {
        self.programs
            .iter()
            .map(|p| p.len() as u64)
            .min()
            .map_or(CodeLen::Infinite, CodeLen::Finite)
    }

    /// Exact dyadic mass contributed by the set: sum of 2^-l(p).
    pub fn mass(&self) -> BigRational {
        self.programs
            .iter()
            .map(|p| exact::pow2(-(p.len() as i64)))
            .fold(exact::rat_int(0), |a, b| a + b)
    }

    /// The shortest program, breaking length ties lexicographically.
    pub fn selected_shortest(&self) -> Option<&BitString> {
        self.programs.iter().next()
    }
}

/// Which quantity a [`ComplexityEstimate`] bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateKind {
    /// Monotone complexity; the estimate is an upper bound.
    Km,
    /// Prefix (halting) complexity; the estimate is an upper bound.
    K,
    /// Universal prior mass; the estimate is a lower bound on M = 2^-KM.
    KM,
}

impl fmt::Display for EstimateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateKind::Km => write!(f, "Km"),
            EstimateKind::K => write!(f, "K"),
            EstimateKind::KM => write!(f, "KM"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EstimateValue {
    /// An upper bound on a code length (Km or K).
    UpperBits(CodeLen),
    /// An exact dyadic lower bound on the mass M(x).
    LowerMass(BigRational),
}

/// Which side of the true quantity a budgeted estimate bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundDirection {
    Upper,
    Lower,
}

/// A budget-stamped one-sided bound on Km, K, or M.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityEstimate {
    pub kind: EstimateKind,
    pub value: EstimateValue,
    pub budget: Budget,
}

impl ComplexityEstimate {
    /// Code-length estimates bound from above; the mass estimate bounds the
    /// prior from below (so its negated log is also an upper bound on KM).
    pub fn direction(&self) -> BoundDirection {
        match self.kind {
            EstimateKind::Km | EstimateKind::K => BoundDirection::Upper,
            EstimateKind::KM => BoundDirection::Lower,
        }
    }

    pub fn bits(&self) -> Option<CodeLen> {
        match &self.value {
            EstimateValue::UpperBits(b) => Some(*b),
            EstimateValue::LowerMass(_) => None,
        }
    }

    pub fn mass(&self) -> BigRational {
        match &self.value {
            EstimateValue::UpperBits(b) => b.mass(),
            EstimateValue::LowerMass(m) => m.clone(),
        }
    }

    /// `-log2` of the mass when it is an exact power of two.
    pub fn neg_log2_exact(&self) -> Option<i64> {
        exact::log2_exact(&self.mass()).map(|z| -z)
    }
}

/// How a visited program relates to the membership predicate.
enum Node {
    /// Output already starts with the target: minimal program found.
    Qualifies,
    /// Output conflicts with the target, or the run ended without wanting
    /// more input: nothing below can qualify.
    Dead,
    /// Output is a proper prefix of the target and the run wants more bits.
    Hungry,
}

fn classify_prefix(m: &dyn MonotoneMachine, p: &BitString, x: &SymbolString, steps: u64) -> Node {
    let outcome = m.run(p, steps);
    debug_assert!(outcome.consumed <= p.len(), "consumed more bits than supplied");
    if outcome.output.starts_with(x) {
        return Node::Qualifies;
    }
    if !x.starts_with(&outcome.output) {
        return Node::Dead;
    }
    match outcome.status {
        RunStatus::NeedsInput => Node::Hungry,
        _ => Node::Dead,
    }
}

fn dfs_minimal(
    m: &dyn MonotoneMachine,
    x: &SymbolString,
    budget: Budget,
    p: &mut BitString,
    found: &mut BTreeSet<BitString>,
) {
    match classify_prefix(m, p, x, budget.max_steps) {
        Node::Qualifies => {
            found.insert(p.clone());
        }
        Node::Dead => {}
        Node::Hungry => {
            if (p.len() as u32) < budget.max_len {
                for b in [0u8, 1u8] {
                    p.push(b);
                    dfs_minimal(m, x, budget, p, found);
                    p.pop();
                }
            }
        }
    }
}

/// Depth at which the program tree is split across workers.
const PAR_SPLIT_DEPTH: u32 = 5;

fn walk_shallow(
    m: &dyn MonotoneMachine,
    x: &SymbolString,
    budget: Budget,
    p: &mut BitString,
    found: &mut BTreeSet<BitString>,
    frontier: &mut Vec<BitString>,
) {
    match classify_prefix(m, p, x, budget.max_steps) {
        Node::Qualifies => {
            found.insert(p.clone());
        }
        Node::Dead => {}
        Node::Hungry => {
            if p.len() as u32 == PAR_SPLIT_DEPTH {
                frontier.push(p.clone());
            } else if (p.len() as u32) < budget.max_len {
                for b in [0u8, 1u8] {
                    p.push(b);
                    walk_shallow(m, x, budget, p, found, frontier);
                    p.pop();
                }
            }
        }
    }
}

/// Exactly the set of minimal programs for `x` within `budget`.
pub fn enumerate_minimal(
    m: &dyn MonotoneMachine,
    x: &SymbolString,
    budget: Budget,
) -> MinimalProgramSet {
    let mut found = BTreeSet::new();
    if budget.max_len <= PAR_SPLIT_DEPTH + 2 {
        let mut p = BitString::empty();
        dfs_minimal(m, x, budget, &mut p, &mut found);
        return MinimalProgramSet { target: x.clone(), programs: found, budget };
    }

    // Walk the shallow tree sequentially, then farm out the live frontier.
    let mut frontier: Vec<BitString> = Vec::new();
    let mut p = BitString::empty();
    walk_shallow(m, x, budget, &mut p, &mut found, &mut frontier);

    let per_subtree: Vec<BTreeSet<BitString>> = frontier
        .par_iter()
        .map(|root| {
            let mut sub = BTreeSet::new();
            let mut p = root.clone();
            for b in [0u8, 1u8] {
                p.push(b);
                dfs_minimal(m, x, budget, &mut p, &mut sub);
                p.pop();
            }
            sub
        })
        .collect();
    for sub in per_subtree {
        found.extend(sub);
    }
    MinimalProgramSet { target: x.clone(), programs: found, budget }
}

/// Budgeted upper bound on the monotone complexity Km(x): the minimum length
/// over minimal programs, infinite when none is found. Monotone nonincreasing
/// as the budget grows.
pub fn km_upper(m: &dyn MonotoneMachine, x: &SymbolString, budget: Budget) -> ComplexityEstimate {
    let set = enumerate_minimal(m, x, budget);
    ComplexityEstimate {
        kind: EstimateKind::Km,
        value: EstimateValue::UpperBits(set.min_len()),
        budget,
    }
}

/// Budgeted lower bound on the universal prior mass M(x): the exact dyadic
/// sum of 2^-l(p) over the minimal-program set. Monotone nondecreasing as the
/// budget grows.
pub fn m_lower(m: &dyn MonotoneMachine, x: &SymbolString, budget: Budget) -> ComplexityEstimate {
    let set = enumerate_minimal(m, x, budget);
    ComplexityEstimate {
        kind: EstimateKind::KM,
        value: EstimateValue::LowerMass(set.mass()),
        budget,
    }
}

fn dfs_halting(
    m: &dyn MonotoneMachine,
    x: &SymbolString,
    budget: Budget,
    p: &mut BitString,
    best: &mut CodeLen,
) {
    let outcome = m.run(p, budget.max_steps);
    match outcome.status {
        RunStatus::Halted => {
            // Halting consumes the program exactly; extensions of a halting
            // run never qualify.
            if outcome.consumed == p.len() && outcome.output == *x {
                *best = (*best).min(CodeLen::Finite(p.len() as u64));
            }
        }
        RunStatus::NeedsInput => {
            // The output must still be extendable to exactly x.
            if x.starts_with(&outcome.output) && (p.len() as u32) < budget.max_len {
                for b in [0u8, 1u8] {
                    p.push(b);
                    dfs_halting(m, x, budget, p, best);
                    p.pop();
                }
            }
        }
        RunStatus::BudgetExhausted | RunStatus::Running => {}
    }
}

/// Budgeted upper bound on the prefix complexity K(x): the minimum length of
/// a program that halts with output exactly `x`, having consumed its whole
/// program text. Infinite when no such program exists within the budget,
/// which is also the honest answer for machines with no halting rule.
pub fn k_upper(m: &dyn MonotoneMachine, x: &SymbolString, budget: Budget) -> ComplexityEstimate {
    let mut best = CodeLen::Infinite;
    let mut p = BitString::empty();
    dfs_halting(m, x, budget, &mut p, &mut best);
    ComplexityEstimate {
        kind: EstimateKind::K,
        value: EstimateValue::UpperBits(best),
        budget,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::machine::{CopyMachine, RefVm, V5Machine};

    fn b(max_len: u32, max_steps: u64) -> Budget {
        Budget::new(max_len, max_steps)
    }

    #[test]
    fn empty_string_has_the_empty_program() {
        for m in [
            Box::new(RefVm::new()) as Box<dyn MonotoneMachine>,
            Box::new(CopyMachine::new()),
            Box::new(V5Machine::new(3, None).unwrap()),
        ] {
            let set = enumerate_minimal(m.as_ref(), &SymbolString::empty(m.alphabet()), b(6, 50));
            assert_eq!(set.programs.len(), 1);
            assert!(set.programs.contains(&BitString::empty()));
            assert_eq!(set.mass(), exact::rat_int(1));
            assert_eq!(set.min_len(), CodeLen::Finite(0));
        }
    }

    #[test]
    fn v5_counts_match_the_construction() {
        let m = V5Machine::new(4, None).unwrap();
        // "000": 0^4 plus every q encoding t >= 4, i.e. 2^s - 1 - 3 = 12 programs.
        let set = enumerate_minimal(&m, &SymbolString::bits("000"), b(6, 100));
        assert_eq!(set.programs.len(), 12);
        assert!(set.programs.iter().all(|p| p.len() == 4));
        assert_eq!(set.mass(), exact::rat(12, 16));

        // "0001": exactly the single q with t = 4.
        let set = enumerate_minimal(&m, &SymbolString::bits("0001"), b(6, 100));
        assert_eq!(set.programs.len(), 1);
        assert_eq!(set.programs.iter().next().unwrap().to_string(), "0100");
        assert_eq!(set.mass(), exact::rat(1, 16));
        assert_eq!(km_upper(&m, &SymbolString::bits("0001"), b(6, 100)).bits(), Some(CodeLen::Finite(4)));
    }

    #[test]
    fn copy_machine_km() {
        let m = CopyMachine::new();
        let est = km_upper(&m, &SymbolString::bits("0"), b(4, 100));
        assert_eq!(est.bits(), Some(CodeLen::Finite(2)));
        // Matches the closed form on every short string.
        for n in 0..=5usize {
            for x in SymbolString::all_of_length(Alphabet::binary(), n) {
                let enumerated = km_upper(&m, &x, b(8, 100)).bits().unwrap();
                assert_eq!(Some(enumerated), m.km_oracle(&x), "x={x}");
            }
        }
    }

    #[test]
    fn prefix_free_and_minimal() {
        let m = RefVm::new();
        let set = enumerate_minimal(&m, &SymbolString::bits("01"), b(8, 200));
        let progs: Vec<&BitString> = set.programs.iter().collect();
        for (i, p) in progs.iter().enumerate() {
            for (j, q) in progs.iter().enumerate() {
                if i != j {
                    assert!(!p.is_prefix_of(q), "{p} prefix of {q}");
                }
            }
        }
        // Every member qualifies and no proper prefix does.
        for p in &set.programs {
            assert!(crate::machine::outputs_prefix(&m, p, &set.target, 200));
            for cut in 0..p.len() {
                let prefix = BitString::from_bits(&p.bits()[..cut]);
                assert!(!crate::machine::outputs_prefix(&m, &prefix, &set.target, 200));
            }
        }
    }

    #[test]
    fn budget_monotonicity() {
        let m = RefVm::new();
        let x = SymbolString::bits("0101");
        let small = km_upper(&m, &x, b(8, 50));
        let large = km_upper(&m, &x, b(12, 500));
        assert!(large.bits().unwrap() <= small.bits().unwrap());
        let small = m_lower(&m, &x, b(8, 50));
        let large = m_lower(&m, &x, b(12, 500));
        assert!(large.mass() >= small.mass());
    }

    #[test]
    fn halting_complexity_on_the_reference_machine() {
        let m = RefVm::new();
        let e = k_upper(&m, &SymbolString::empty(Alphabet::binary()), b(8, 100));
        assert_eq!(e.bits(), Some(CodeLen::Finite(3))); // plain halt
        let e = k_upper(&m, &SymbolString::bits("1"), b(8, 100));
        assert_eq!(e.bits(), Some(CodeLen::Finite(2))); // out1-and-halt
        let e = k_upper(&m, &SymbolString::bits("0"), b(8, 100));
        assert_eq!(e.bits(), Some(CodeLen::Finite(5))); // out 0, halt

        // K >= Km at the same budget.
        for n in 0..=4usize {
            for x in SymbolString::all_of_length(Alphabet::binary(), n) {
                let km = km_upper(&m, &x, b(10, 200)).bits().unwrap();
                let k = k_upper(&m, &x, b(10, 200)).bits().unwrap();
                assert!(k >= km, "x={x}: K={k} < Km={km}");
            }
        }
    }

    #[test]
    fn constructed_machines_never_halt() {
        let m = CopyMachine::new();
        let e = k_upper(&m, &SymbolString::bits("0"), b(8, 100));
        assert_eq!(e.bits(), Some(CodeLen::Infinite));
    }

    #[test]
    fn parallel_matches_sequential() {
        let m = RefVm::new();
        let x = SymbolString::bits("010");
        // Sequential path (budget below the split depth) vs parallel path.
        let seq = enumerate_minimal(&m, &x, b(7, 100));
        let mut expected = BTreeSet::new();
        let mut p = BitString::empty();
        dfs_minimal(&m, &x, b(10, 100), &mut p, &mut expected);
        let par = enumerate_minimal(&m, &x, b(10, 100));
        assert_eq!(par.programs, expected);
        for q in &seq.programs {
            assert!(par.programs.contains(q));
        }
    }
}
