//! Predictive functions, chain-rule posteriors, normalization, and the
//! structural property checks (monotonicity, semimeasure, dominance).
//!
//! A predictive function assigns every string an exact nonnegative rational
//! mass. Posteriors are defined by the chain rule `b(a|x) = b(xa)/b(x)`
//! wherever the context mass is positive; the simple-MDL predictor overrides
//! the conditional directly, since its posteriors are defined even at
//! zero-mass contexts. Evaluators are pure and memoize into write-once maps,
//! so they are safe to fill concurrently.

use std::sync::Arc;

use dashmap::DashMap;
use num::{BigRational, One, Zero};
use thiserror::Error;

use crate::alphabet::{Alphabet, Symbol, SymbolString};
use crate::bits::BitString;
use crate::enumeration::{enumerate_minimal, k_upper, Budget};
use crate::exact;
use crate::machine::{CodeLen, MachineHandle};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PredictiveError {
    #[error("context {0} has zero mass; the raw posterior is undefined")]
    UndefinedContext(String),
    #[error("selected shortest program for {0} does not extend it within the budget")]
    NoContinuation(String),
    #[error("no program outputs {0} within the budget")]
    NoProgram(String),
    #[error("reference function is zero at {0}")]
    ZeroReference(String),
    #[error("empty string set")]
    EmptySet,
}

pub type PResult<T> = Result<T, PredictiveError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    FromKm,
    FromM,
    FromK,
    SimpleMdl,
    ExplicitMeasure,
    Derived,
}

/// Which structural properties a function's construction promises. These are
/// claims to be checked, not guarantees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropertyFlags {
    pub monotone: bool,
    pub semimeasure: bool,
    pub chain_rule_by_definition: bool,
    pub lower_semicomputable: bool,
}

impl Provenance {
    pub fn claimed_properties(self) -> PropertyFlags {
        match self {
            Provenance::FromKm => PropertyFlags {
                monotone: true,
                semimeasure: false,
                chain_rule_by_definition: true,
                lower_semicomputable: true,
            },
            Provenance::FromM | Provenance::ExplicitMeasure => PropertyFlags {
                monotone: true,
                semimeasure: true,
                chain_rule_by_definition: true,
                lower_semicomputable: true,
            },
            Provenance::FromK => PropertyFlags {
                monotone: false,
                semimeasure: false,
                chain_rule_by_definition: true,
                lower_semicomputable: true,
            },
            Provenance::SimpleMdl => PropertyFlags {
                monotone: true,
                semimeasure: true,
                chain_rule_by_definition: true,
                lower_semicomputable: false,
            },
            Provenance::Derived => PropertyFlags {
                monotone: false,
                semimeasure: false,
                chain_rule_by_definition: true,
                lower_semicomputable: false,
            },
        }
    }
}

/// An exact-rational predictive function `x -> b(x) >= 0`.
pub trait Predictive: Send + Sync {
    fn alphabet(&self) -> Alphabet;
    fn provenance(&self) -> Provenance;
    fn tag(&self) -> String;

    /// Joint mass `b(x)`.
    fn mass(&self, x: &SymbolString) -> PResult<BigRational>;

    /// Chain-rule posterior `b(a|x) = b(xa)/b(x)`; an error at zero-mass
    /// contexts. Implementations whose conditionals carry more information
    /// than the joint (simple MDL) override this.
    fn conditional(&self, ctx: &SymbolString, sym: Symbol) -> PResult<BigRational> {
        let denom = self.mass(ctx)?;
        if denom.is_zero() {
            return Err(PredictiveError::UndefinedContext(ctx.to_string()));
        }
        Ok(self.mass(&ctx.child(sym))? / denom)
    }

    /// The weight vector the loss-minimizing predictor acts on at `ctx`.
    /// Normalized posteriors by default (the argmin is scaling-invariant);
    /// overridden where the conditional is primary.
    fn action_weights(&self, ctx: &SymbolString) -> PResult<PosteriorVector> {
        normalize(self, ctx)
    }
}

/// The chain-rule posterior `b(x_t | x_{<t})`.
pub fn posterior<B: Predictive + ?Sized>(b: &B, ctx: &SymbolString, sym: Symbol) -> PResult<BigRational> {
    b.conditional(ctx, sym)
}

/// Per-symbol posterior values at one context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosteriorVector {
    pub context: SymbolString,
    pub values: Vec<BigRational>,
    pub normalized: bool,
    /// True when the normalizing sum was zero and the uniform convention
    /// `1/|X|` was applied.
    pub zero_sum_convention: bool,
}

impl PosteriorVector {
    pub fn value(&self, sym: Symbol) -> &BigRational {
        &self.values[sym as usize]
    }

    pub fn sum(&self) -> BigRational {
        self.values.iter().fold(exact::rat_int(0), |a, v| a + v)
    }

    /// A raw (unnormalized) vector from explicit values.
    pub fn raw(context: SymbolString, values: Vec<BigRational>) -> Self {
        PosteriorVector { context, values, normalized: false, zero_sum_convention: false }
    }
}

/// Normalized posteriors at `ctx`: each continuation mass divided by the sum
/// of all continuation masses. The context mass cancels from the quotient, so
/// this is computable even where the raw posterior is undefined; when the sum
/// itself is zero every symbol gets `1/|X|` by convention.
pub fn normalize<B: Predictive + ?Sized>(b: &B, ctx: &SymbolString) -> PResult<PosteriorVector> {
    let alphabet = b.alphabet();
    let mut masses = Vec::with_capacity(alphabet.size());
    for a in alphabet.symbols() {
        masses.push(b.mass(&ctx.child(a))?);
    }
    let sum: BigRational = masses.iter().fold(exact::rat_int(0), |acc, v| acc + v);
    if sum.is_zero() {
        let uniform = exact::rat(1, alphabet.size() as i64);
        return Ok(PosteriorVector {
            context: ctx.clone(),
            values: vec![uniform; alphabet.size()],
            normalized: true,
            zero_sum_convention: true,
        });
    }
    Ok(PosteriorVector {
        context: ctx.clone(),
        values: masses.into_iter().map(|v| v / &sum).collect(),
        normalized: true,
        zero_sum_convention: false,
    })
}

/// Raw posterior vector at `ctx` (chain-rule quotients).
pub fn raw_posteriors<B: Predictive + ?Sized>(b: &B, ctx: &SymbolString) -> PResult<PosteriorVector> {
    let alphabet = b.alphabet();
    let mut values = Vec::with_capacity(alphabet.size());
    for a in alphabet.symbols() {
        values.push(b.conditional(ctx, a)?);
    }
    Ok(PosteriorVector {
        context: ctx.clone(),
        values,
        normalized: false,
        zero_sum_convention: false,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemimeasureViolation {
    pub context: SymbolString,
    pub children_sum: BigRational,
    pub context_mass: BigRational,
}

/// Exhaustive semimeasure scan to depth `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemimeasureReport {
    pub depth: usize,
    pub violations: Vec<SemimeasureViolation>,
    pub root_mass: BigRational,
    pub root_ok: bool,
    /// The gap `g_n = 1 - sum_{l(x)=n} b(x)` for n = 1..=depth.
    pub gaps: Vec<BigRational>,
}

impl SemimeasureReport {
    pub fn is_semimeasure(&self) -> bool {
        self.root_ok && self.violations.is_empty()
    }
}

/// Scans every context of length < n for `sum_a b(xa) <= b(x)` and records
/// the per-depth gaps.
pub fn check_semimeasure<B: Predictive + ?Sized>(b: &B, depth: usize) -> PResult<SemimeasureReport> {
    let alphabet = b.alphabet();
    let root_mass = b.mass(&SymbolString::empty(alphabet))?;
    let root_ok = root_mass <= BigRational::one();
    let mut violations = Vec::new();
    let mut gaps = Vec::new();
    let mut level = vec![(SymbolString::empty(alphabet), root_mass.clone())];
    for _ in 1..=depth {
        let mut next = Vec::with_capacity(level.len() * alphabet.size());
        for (ctx, ctx_mass) in &level {
            let mut sum = exact::rat_int(0);
            for a in alphabet.symbols() {
                let child = ctx.child(a);
                let mass = b.mass(&child)?;
                sum += &mass;
                next.push((child, mass));
            }
            if sum > *ctx_mass {
                violations.push(SemimeasureViolation {
                    context: ctx.clone(),
                    children_sum: sum,
                    context_mass: ctx_mass.clone(),
                });
            }
        }
        let level_total: BigRational =
            next.iter().fold(exact::rat_int(0), |acc, (_, m)| acc + m);
        gaps.push(BigRational::one() - level_total);
        level = next;
    }
    Ok(SemimeasureReport { depth, violations, root_mass, root_ok, gaps })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneViolation {
    pub context: SymbolString,
    pub symbol: Symbol,
    pub context_mass: BigRational,
    pub extended_mass: BigRational,
}

/// Exhaustive single-symbol monotonicity scan: every `(x, a)` with
/// `b(xa) > b(x)` for `l(xa) <= n`.
pub fn check_monotone<B: Predictive + ?Sized>(b: &B, depth: usize) -> PResult<Vec<MonotoneViolation>> {
    let alphabet = b.alphabet();
    let mut violations = Vec::new();
    let mut level =
        vec![(SymbolString::empty(alphabet), b.mass(&SymbolString::empty(alphabet))?)];
    for _ in 1..=depth {
        let mut next = Vec::with_capacity(level.len() * alphabet.size());
        for (ctx, ctx_mass) in &level {
            for a in alphabet.symbols() {
                let child = ctx.child(a);
                let mass = b.mass(&child)?;
                if mass > *ctx_mass {
                    violations.push(MonotoneViolation {
                        context: ctx.clone(),
                        symbol: a,
                        context_mass: ctx_mass.clone(),
                        extended_mass: mass.clone(),
                    });
                }
                next.push((child, mass));
            }
        }
        level = next;
    }
    Ok(violations)
}

/// Finite-sample dominance witness: `min b(x)/nu(x)` over the given strings.
/// Cannot prove universality; can refute a claimed constant.
pub fn dominance_ratio<B: Predictive + ?Sized, N: Predictive + ?Sized>(
    b: &B,
    nu: &N,
    strings: &[SymbolString],
) -> PResult<BigRational> {
    if strings.is_empty() {
        return Err(PredictiveError::EmptySet);
    }
    let mut best: Option<BigRational> = None;
    for x in strings {
        let denom = nu.mass(x)?;
        if denom.is_zero() {
            return Err(PredictiveError::ZeroReference(x.to_string()));
        }
        let ratio = b.mass(x)? / denom;
        best = Some(match best {
            None => ratio,
            Some(cur) => cur.min(ratio),
        });
    }
    Ok(best.expect("nonempty"))
}

/// `b = 2^-Km` built from a machine's closed-form complexity when it has
/// one, otherwise from budgeted enumeration.
pub struct FromKm {
    machine: MachineHandle,
    budget: Option<Budget>,
    cache: DashMap<SymbolString, CodeLen>,
}

impl FromKm {
    /// Uses the closed-form oracle when the machine provides one, and the
    /// budgeted estimator otherwise.
    pub fn new(machine: MachineHandle, budget: Budget) -> Self {
        let budget = if machine.has_km_oracle() { None } else { Some(budget) };
        FromKm { machine, budget, cache: DashMap::new() }
    }

    /// Forces the budgeted estimator even on machines with an oracle.
    pub fn enumerated(machine: MachineHandle, budget: Budget) -> Self {
        FromKm { machine, budget: Some(budget), cache: DashMap::new() }
    }

    pub fn machine(&self) -> &MachineHandle {
        &self.machine
    }

    /// The code length backing `mass`.
    pub fn km(&self, x: &SymbolString) -> CodeLen {
        if let Some(hit) = self.cache.get(x) {
            return *hit;
        }
        let len = match self.budget {
            None => self.machine.km_oracle(x).expect("machine advertised an oracle"),
            Some(budget) => crate::enumeration::km_upper(self.machine.as_ref(), x, budget)
                .bits()
                .expect("km estimate carries bits"),
        };
        *self.cache.entry(x.clone()).or_insert(len)
    }
}

impl Predictive for FromKm {
    fn alphabet(&self) -> Alphabet {
        self.machine.alphabet()
    }

    fn provenance(&self) -> Provenance {
        Provenance::FromKm
    }

    fn tag(&self) -> String {
        match self.budget {
            None => format!("from-km[{}]", self.machine.tag()),
            Some(b) => format!("from-km[{};{b}]", self.machine.tag()),
        }
    }

    fn mass(&self, x: &SymbolString) -> PResult<BigRational> {
        Ok(self.km(x).mass())
    }
}

/// `b = M_lower`, the budgeted dyadic lower bound on the universal prior.
pub struct FromM {
    machine: MachineHandle,
    budget: Budget,
    cache: DashMap<SymbolString, BigRational>,
}

impl FromM {
    pub fn new(machine: MachineHandle, budget: Budget) -> Self {
        FromM { machine, budget, cache: DashMap::new() }
    }
}

impl Predictive for FromM {
    fn alphabet(&self) -> Alphabet {
        self.machine.alphabet()
    }

    fn provenance(&self) -> Provenance {
        Provenance::FromM
    }

    fn tag(&self) -> String {
        format!("from-m[{};{}]", self.machine.tag(), self.budget)
    }

    fn mass(&self, x: &SymbolString) -> PResult<BigRational> {
        if let Some(hit) = self.cache.get(x) {
            return Ok(hit.clone());
        }
        let mass = enumerate_minimal(self.machine.as_ref(), x, self.budget).mass();
        Ok(self.cache.entry(x.clone()).or_insert(mass).clone())
    }
}

/// `b = 2^-K` from budgeted halting enumeration.
pub struct FromK {
    machine: MachineHandle,
    budget: Budget,
    cache: DashMap<SymbolString, CodeLen>,
}

impl FromK {
    pub fn new(machine: MachineHandle, budget: Budget) -> Self {
        FromK { machine, budget, cache: DashMap::new() }
    }

    pub fn k(&self, x: &SymbolString) -> CodeLen {
        if let Some(hit) = self.cache.get(x) {
            return *hit;
        }
        let len = k_upper(self.machine.as_ref(), x, self.budget)
            .bits()
            .expect("k estimate carries bits");
        *self.cache.entry(x.clone()).or_insert(len)
    }
}

impl Predictive for FromK {
    fn alphabet(&self) -> Alphabet {
        self.machine.alphabet()
    }

    fn provenance(&self) -> Provenance {
        Provenance::FromK
    }

    fn tag(&self) -> String {
        format!("from-k[{};{}]", self.machine.tag(), self.budget)
    }

    fn mass(&self, x: &SymbolString) -> PResult<BigRational> {
        Ok(self.k(x).mass())
    }
}

/// The simple MDL predictor: follow the single selected shortest program.
///
/// For each context the shortest program emitting it is selected (length
/// ties broken lexicographically); the posterior puts mass 1 on that
/// program's next output symbol and 0 elsewhere. Joint values are the
/// product of posteriors along the string.
pub struct SimpleMdl {
    machine: MachineHandle,
    budget: Budget,
    selected: DashMap<SymbolString, Option<BitString>>,
}

impl SimpleMdl {
    pub fn new(machine: MachineHandle, budget: Budget) -> Self {
        SimpleMdl { machine, budget, selected: DashMap::new() }
    }

    /// The selected shortest program for `ctx*`, if any exists in budget.
    pub fn selected_program(&self, ctx: &SymbolString) -> Option<BitString> {
        if let Some(hit) = self.selected.get(ctx) {
            return hit.clone();
        }
        let set = enumerate_minimal(self.machine.as_ref(), ctx, self.budget);
        let sel = set.selected_shortest().cloned();
        self.selected.entry(ctx.clone()).or_insert(sel).clone()
    }

    /// The symbol the selected program predicts after `ctx`.
    pub fn predicted_symbol(&self, ctx: &SymbolString) -> PResult<Symbol> {
        let program = self
            .selected_program(ctx)
            .ok_or_else(|| PredictiveError::NoProgram(ctx.to_string()))?;
        let outcome = self.machine.run(&program, self.budget.max_steps);
        debug_assert!(outcome.output.starts_with(ctx));
        if outcome.output.len() <= ctx.len() {
            return Err(PredictiveError::NoContinuation(ctx.to_string()));
        }
        Ok(outcome.output.symbol(ctx.len()))
    }
}

impl Predictive for SimpleMdl {
    fn alphabet(&self) -> Alphabet {
        self.machine.alphabet()
    }

    fn provenance(&self) -> Provenance {
        Provenance::SimpleMdl
    }

    fn tag(&self) -> String {
        format!("simple-mdl[{};{}]", self.machine.tag(), self.budget)
    }

    fn mass(&self, x: &SymbolString) -> PResult<BigRational> {
        let mut value = BigRational::one();
        for t in 0..x.len() {
            let ctx = x.prefix(t);
            let cond = self.conditional(&ctx, x.symbol(t))?;
            if cond.is_zero() {
                return Ok(exact::rat_int(0));
            }
            value *= cond;
        }
        Ok(value)
    }

    fn conditional(&self, ctx: &SymbolString, sym: Symbol) -> PResult<BigRational> {
        let predicted = self.predicted_symbol(ctx)?;
        Ok(if predicted == sym { BigRational::one() } else { exact::rat_int(0) })
    }

    // The conditional is primary: it stays defined at zero-mass contexts.
    fn action_weights(&self, ctx: &SymbolString) -> PResult<PosteriorVector> {
        raw_posteriors(self, ctx)
    }
}

/// `min(1, factor * inner)`: the perturbed functions used to exercise the
/// convergence bounds for universal non-semimeasures.
pub struct ScaledCapped {
    inner: Arc<dyn Predictive>,
    factor: BigRational,
}

impl ScaledCapped {
    pub fn new(inner: Arc<dyn Predictive>, factor: BigRational) -> Self {
        ScaledCapped { inner, factor }
    }
}

impl Predictive for ScaledCapped {
    fn alphabet(&self) -> Alphabet {
        self.inner.alphabet()
    }

    fn provenance(&self) -> Provenance {
        Provenance::Derived
    }

    fn tag(&self) -> String {
        format!("scaled[{} * {}]", exact::format_rational(&self.factor), self.inner.tag())
    }

    fn mass(&self, x: &SymbolString) -> PResult<BigRational> {
        let scaled = self.inner.mass(x)? * &self.factor;
        Ok(scaled.min(BigRational::one()))
    }
}

/// The measure induced by a function's normalized posteriors: joint values
/// are products of normalized conditionals (with the zero-sum convention).
pub struct NormalizedJoint {
    inner: Arc<dyn Predictive>,
}

impl NormalizedJoint {
    pub fn new(inner: Arc<dyn Predictive>) -> Self {
        NormalizedJoint { inner }
    }
}

impl Predictive for NormalizedJoint {
    fn alphabet(&self) -> Alphabet {
        self.inner.alphabet()
    }

    fn provenance(&self) -> Provenance {
        Provenance::Derived
    }

    fn tag(&self) -> String {
        format!("normalized[{}]", self.inner.tag())
    }

    fn mass(&self, x: &SymbolString) -> PResult<BigRational> {
        let mut value = BigRational::one();
        for t in 0..x.len() {
            let ctx = x.prefix(t);
            let vec = normalize(self.inner.as_ref(), &ctx)?;
            value *= vec.value(x.symbol(t));
            if value.is_zero() {
                return Ok(value);
            }
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{BlockMachine, CopyMachine, RefVm, V5Machine};

    fn v5_fn(s: u32) -> FromKm {
        FromKm::new(Arc::new(V5Machine::new(s, None).unwrap()), Budget::new(8, 200))
    }

    fn copy_fn() -> FromKm {
        FromKm::new(Arc::new(CopyMachine::new()), Budget::new(8, 200))
    }

    #[test]
    fn chain_rule_posteriors_on_v5() {
        let b = v5_fn(4);
        // m(1|000) = 1: both strings cost s bits.
        let p = posterior(&b, &SymbolString::bits("000"), 1).unwrap();
        assert_eq!(p, exact::rat_int(1));
        // Zero-mass context is an error for the raw posterior.
        let err = posterior(&b, &SymbolString::bits("011"), 0).unwrap_err();
        assert!(matches!(err, PredictiveError::UndefinedContext(_)));
    }

    #[test]
    fn from_m_posterior_on_v5() {
        let m = FromM::new(Arc::new(V5Machine::new(4, None).unwrap()), Budget::new(6, 100));
        let p = posterior(&m, &SymbolString::bits("000"), 1).unwrap();
        assert_eq!(p, exact::rat(1, 12));
        let p0 = posterior(&m, &SymbolString::bits("000"), 0).unwrap();
        assert_eq!(p0, exact::rat(11, 12));
    }

    #[test]
    fn normalization_examples() {
        // Copy machine: (2/3, 1/3) at every context.
        let b = copy_fn();
        for ctx in ["", "0", "1", "0101", "111"] {
            let v = normalize(&b, &SymbolString::bits(ctx)).unwrap();
            assert_eq!(v.values[0], exact::rat(2, 3), "ctx={ctx}");
            assert_eq!(v.values[1], exact::rat(1, 3), "ctx={ctx}");
            assert!(!v.zero_sum_convention);
            assert_eq!(v.sum(), exact::rat_int(1));
        }
        // v5 at context 000: both raw posteriors are 1, normalized (1/2, 1/2).
        let b = v5_fn(4);
        let v = normalize(&b, &SymbolString::bits("000")).unwrap();
        assert_eq!(v.values, vec![exact::rat(1, 2), exact::rat(1, 2)]);
        // All-zero continuations trigger the uniform convention.
        let v = normalize(&b, &SymbolString::bits("0001")).unwrap();
        assert!(v.zero_sum_convention);
        assert_eq!(v.values, vec![exact::rat(1, 2), exact::rat(1, 2)]);
    }

    #[test]
    fn semimeasure_scan_finds_v5_violations() {
        let b = v5_fn(4);
        let report = check_semimeasure(&b, 3).unwrap();
        assert!(!report.is_semimeasure());
        // Context 00 violates: 2^-4 + 2^-4 > 2^-4.
        let ctx: Vec<String> = report.violations.iter().map(|v| v.context.to_string()).collect();
        assert!(ctx.contains(&"00".to_string()));
        for v in &report.violations {
            assert!(v.children_sum > v.context_mass);
        }
    }

    #[test]
    fn measure_has_no_violations() {
        let m = FromM::new(Arc::new(V5Machine::new(4, None).unwrap()), Budget::new(6, 100));
        let report = check_semimeasure(&m, 5).unwrap();
        assert!(report.is_semimeasure());
    }

    #[test]
    fn monotone_holds_for_km_fails_for_k() {
        let machine: MachineHandle = Arc::new(RefVm::new());
        let km = FromKm::new(machine.clone(), Budget::new(12, 300));
        assert!(check_monotone(&km, 4).unwrap().is_empty());

        let k = FromK::new(machine, Budget::new(12, 300));
        let violations = check_monotone(&k, 4).unwrap();
        assert!(!violations.is_empty());
        // k(1) = 2^-2 > 2^-3 = k(eps).
        assert!(violations.iter().any(|v| v.context.is_empty() && v.symbol == 1));
    }

    #[test]
    fn constant_function_is_monotone() {
        struct One;
        impl Predictive for One {
            fn alphabet(&self) -> Alphabet {
                Alphabet::binary()
            }
            fn provenance(&self) -> Provenance {
                Provenance::Derived
            }
            fn tag(&self) -> String {
                "one".into()
            }
            fn mass(&self, _x: &SymbolString) -> PResult<BigRational> {
                Ok(BigRational::one())
            }
        }
        assert!(check_monotone(&One, 5).unwrap().is_empty());
    }

    #[test]
    fn dominance_examples() {
        struct Det;
        impl Predictive for Det {
            fn alphabet(&self) -> Alphabet {
                Alphabet::binary()
            }
            fn provenance(&self) -> Provenance {
                Provenance::ExplicitMeasure
            }
            fn tag(&self) -> String {
                "det-zeros".into()
            }
            fn mass(&self, x: &SymbolString) -> PResult<BigRational> {
                Ok(if x.symbols().iter().all(|s| *s == 0) {
                    BigRational::one()
                } else {
                    exact::rat_int(0)
                })
            }
        }

        let b = v5_fn(4);
        let strings: Vec<SymbolString> = (0..=14)
            .map(|j| SymbolString::repeated(Alphabet::binary(), 0, j).unwrap())
            .collect();
        let ratio = dominance_ratio(&b, &Det, &strings).unwrap();
        assert_eq!(ratio, exact::rat(1, 16));

        // b against itself is 1.
        let ratio = dominance_ratio(&b, &b, &strings).unwrap();
        assert_eq!(ratio, exact::rat_int(1));

        // The prefix-complexity function decays against the same environment.
        let k = FromK::new(Arc::new(RefVm::new()), Budget::new(12, 300));
        let strings: Vec<SymbolString> =
            (0..=3).map(|j| SymbolString::repeated(Alphabet::binary(), 0, j).unwrap()).collect();
        let r3 = dominance_ratio(&k, &Det, &strings).unwrap();
        let r1 = dominance_ratio(&k, &Det, &strings[..2]).unwrap();
        assert!(r3 < r1);
    }

    #[test]
    fn simple_mdl_on_v5() {
        let mdl = SimpleMdl::new(Arc::new(V5Machine::new(4, None).unwrap()), Budget::new(6, 100));
        // Shortest programs for "00" are all of length 4; the lexicographic
        // tie-break selects 0000, which continues with 0 forever.
        let sel = mdl.selected_program(&SymbolString::bits("00")).unwrap();
        assert_eq!(sel.to_string(), "0000");
        assert_eq!(mdl.conditional(&SymbolString::bits("00"), 0).unwrap(), exact::rat_int(1));
        assert_eq!(mdl.conditional(&SymbolString::bits("00"), 1).unwrap(), exact::rat_int(0));
        // At most one symbol per context gets posterior 1 (exactly one
        // wherever the predictor is defined at all).
        for ctx in ["0", "00", "000"] {
            let ctx = SymbolString::bits(ctx);
            let ones: usize = Alphabet::binary()
                .symbols()
                .filter(|a| mdl.conditional(&ctx, *a).unwrap() == exact::rat_int(1))
                .count();
            assert_eq!(ones, 1);
        }
        // At the empty context the selected program is the empty program,
        // which emits nothing: no continuation to follow.
        let err = mdl.predicted_symbol(&SymbolString::empty(Alphabet::binary())).unwrap_err();
        assert!(matches!(err, PredictiveError::NoContinuation(_)));
        // The joint value of the empty string is 1.
        assert_eq!(mdl.mass(&SymbolString::empty(Alphabet::binary())).unwrap(), exact::rat_int(1));
        // The program for 0001 emits nothing further: no-continuation.
        let err = mdl.predicted_symbol(&SymbolString::bits("0001")).unwrap_err();
        assert!(matches!(err, PredictiveError::NoContinuation(_)));
        // Unreachable context: no program at all.
        let err = mdl.predicted_symbol(&SymbolString::bits("11")).unwrap_err();
        assert!(matches!(err, PredictiveError::NoProgram(_)));
    }

    #[test]
    fn chain_rule_identity() {
        let b = copy_fn();
        for x in SymbolString::all_of_length(Alphabet::binary(), 5) {
            let mut product = BigRational::one();
            for t in 0..x.len() {
                product *= posterior(&b, &x.prefix(t), x.symbol(t)).unwrap();
            }
            assert_eq!(product, b.mass(&x).unwrap(), "x={x}");
        }
    }

    #[test]
    fn telescoping_to_km() {
        // Sum of -log posteriors equals the code length exactly.
        let machine: MachineHandle = Arc::new(CopyMachine::new());
        let b = FromKm::new(machine.clone(), Budget::new(10, 200));
        let x = SymbolString::bits("0101");
        let mut total: i64 = 0;
        for t in 0..x.len() {
            let p = posterior(&b, &x.prefix(t), x.symbol(t)).unwrap();
            total += -exact::log2_exact(&p).expect("power of two");
        }
        let km = b.km(&x).finite().unwrap() as i64;
        assert_eq!(total, km);
    }

    #[test]
    fn normalization_idempotence() {
        let inner: Arc<dyn Predictive> = Arc::new(copy_fn());
        let normalized = NormalizedJoint::new(inner.clone());
        for ctx in ["", "0", "01", "110"] {
            let ctx = SymbolString::bits(ctx);
            let once = normalize(inner.as_ref(), &ctx).unwrap();
            let twice = normalize(&normalized, &ctx).unwrap();
            assert_eq!(once.values, twice.values, "ctx={ctx}");
        }
    }

    #[test]
    fn claimed_properties_hold_where_claimed() {
        // Positive claims must survive their checks (negative claims merely
        // withhold a promise).
        let machine: MachineHandle = Arc::new(V5Machine::new(4, None).unwrap());
        let budget = Budget::new(8, 200);
        let functions: Vec<Box<dyn Predictive>> = vec![
            Box::new(FromKm::new(machine.clone(), budget)),
            Box::new(FromM::new(machine.clone(), budget)),
            Box::new(FromK::new(machine, budget)),
        ];
        for b in &functions {
            let flags = b.provenance().claimed_properties();
            if flags.monotone {
                assert!(
                    check_monotone(b.as_ref(), 4).unwrap().is_empty(),
                    "{} claims monotonicity",
                    b.tag()
                );
            }
            if flags.semimeasure {
                assert!(
                    check_semimeasure(b.as_ref(), 4).unwrap().is_semimeasure(),
                    "{} claims the semimeasure law",
                    b.tag()
                );
            }
        }
        // And the code-length function indeed withholds the semimeasure
        // claim for a reason.
        assert!(!Provenance::FromKm.claimed_properties().semimeasure);
    }

    #[test]
    fn block_machine_normalized_posterior() {
        let m: MachineHandle = Arc::new(BlockMachine::binary_single(3, None).unwrap());
        let b = FromKm::new(m, Budget::new(12, 200));
        // At a block boundary: m_norm(x0|x) = 1/(|X0| + 2^-s) = 8/9.
        let v = normalize(&b, &SymbolString::bits("0111")).unwrap();
        assert_eq!(v.values[0], exact::rat(8, 9));
        assert_eq!(v.values[1], exact::rat(1, 9));
        // Same at a withheld boundary.
        let v = normalize(&b, &SymbolString::bits("1001")).unwrap();
        assert_eq!(v.values[0], exact::rat(8, 9));
    }
}
