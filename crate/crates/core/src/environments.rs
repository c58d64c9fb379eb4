//! Sequence-generating environments: deterministic computable sequences and
//! the exactly-representable probabilistic measures used by the harness.
//!
//! Probabilistic environments expose exact rational posteriors and a seeded
//! sampler (ChaCha8, with the seed recorded by every consumer). Evaluators
//! are pure; each run owns its own RNG stream.

use std::sync::Arc;

use num::{BigRational, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::alphabet::{Alphabet, Symbol, SymbolString};
use crate::bits::BitString;
use crate::exact;
use crate::machine::MonotoneMachine;
use crate::predictive::{PResult, PosteriorVector, Predictive, Provenance};

/// RNG identifier recorded in reports alongside seeds.
pub const RNG_ALGORITHM: &str = "chacha8";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnvError {
    #[error("bernoulli parameter must lie strictly between 0 and 1")]
    ThetaOutOfRange,
    #[error("deterministic generator provides {got} symbols, horizon needs {needed}")]
    GeneratorTooShort { got: usize, needed: usize },
    #[error("context of length {0} leaves the environment's support")]
    OffSupport(usize),
    #[error("block measure parameters: {0}")]
    BadBlockParams(String),
}

/// An exact probability measure over infinite sequences, evaluated on
/// finite prefixes.
pub trait MeasureFn: Send + Sync {
    fn alphabet(&self) -> Alphabet;
    fn tag(&self) -> String;
    /// Exact mass of the cylinder set of `x`.
    fn mass(&self, x: &SymbolString) -> BigRational;
}

/// I.i.d. binary measure with chance `theta` of symbol 1.
pub struct Bernoulli {
    theta: BigRational,
}

impl Bernoulli {
    pub fn new(theta: BigRational) -> Result<Self, EnvError> {
        if theta <= BigRational::zero() || theta >= BigRational::one() {
            return Err(EnvError::ThetaOutOfRange);
        }
        Ok(Bernoulli { theta })
    }
}

impl MeasureFn for Bernoulli {
    fn alphabet(&self) -> Alphabet {
        Alphabet::binary()
    }

    fn tag(&self) -> String {
        format!("bernoulli:{}", exact::format_rational(&self.theta))
    }

    fn mass(&self, x: &SymbolString) -> BigRational {
        let ones = x.symbols().iter().filter(|s| **s == 1).count();
        let zeros = x.len() - ones;
        let mut mass = BigRational::one();
        for _ in 0..ones {
            mass *= &self.theta;
        }
        let inv = BigRational::one() - &self.theta;
        for _ in 0..zeros {
            mass *= &inv;
        }
        mass
    }
}

/// The uniform product measure over the block machine's reachable
/// (s+1)-symbol blocks, marginalized to arbitrary prefixes.
pub struct BlockMeasure {
    alphabet: Alphabet,
    s: u32,
    x0: Vec<Symbol>,
}

impl BlockMeasure {
    pub fn new(alphabet: Alphabet, mut x0: Vec<Symbol>, s: u32) -> Result<Self, EnvError> {
        x0.sort_unstable();
        x0.dedup();
        if x0.is_empty() || x0.contains(&1) || x0.iter().any(|sym| !alphabet.contains(*sym)) {
            return Err(EnvError::BadBlockParams("invalid outcome set".into()));
        }
        if s == 0 || s > 16 || x0.len() as u64 > (1u64 << s) - 1 {
            return Err(EnvError::BadBlockParams("outcome set too large for s".into()));
        }
        Ok(BlockMeasure { alphabet, s, x0 })
    }

    /// Matches this measure against a block machine's configuration.
    pub fn for_machine(machine: &crate::machine::BlockMachine) -> Self {
        BlockMeasure {
            alphabet: machine.alphabet(),
            s: machine.s(),
            x0: machine.outcome_symbols().to_vec(),
        }
    }

    fn block_len(&self) -> usize {
        self.s as usize + 1
    }

    /// Number of reachable blocks that extend the partial block `w`
    /// (0 < l(w) <= s). Reachable blocks are `x0 1^s` and `1 z` for the
    /// 2^s - |X0| non-reserved s-bit values z.
    fn extension_count(&self, w: &[Symbol]) -> u64 {
        debug_assert!(!w.is_empty() && w.len() <= self.s as usize);
        let s = self.s as usize;
        let mut count = 0u64;
        if self.x0.contains(&w[0]) && w[1..].iter().all(|b| *b == 1) {
            count += 1;
        }
        if w[0] == 1 && w[1..].iter().all(|b| *b <= 1) {
            let fixed = w.len() - 1;
            let prefix = w[1..].iter().fold(0u64, |acc, b| (acc << 1) | *b as u64);
            let free = (s - fixed) as u32;
            let lo = prefix << free;
            let hi = lo + (1u64 << free);
            // Reserved values are 0..|X0|.
            let reserved = (self.x0.len() as u64).clamp(lo, hi) - lo;
            count += (hi - lo) - reserved;
        }
        count
    }
}

impl MeasureFn for BlockMeasure {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn tag(&self) -> String {
        let x0: String = self.x0.iter().map(|s| crate::alphabet::symbol_char(*s)).collect();
        format!("block:s={},x0={}", self.s, x0)
    }

    fn mass(&self, x: &SymbolString) -> BigRational {
        let blen = self.block_len();
        let syms = x.symbols();
        let complete = syms.len() / blen;
        let mut mass = BigRational::one();
        let per_block = exact::pow2(-(self.s as i64));
        for i in 0..complete {
            let block = &syms[i * blen..(i + 1) * blen];
            let ok = if self.x0.contains(&block[0]) {
                block[1..].iter().all(|b| *b == 1)
            } else if block[0] == 1 && block[1..].iter().all(|b| *b <= 1) {
                let z = block[1..].iter().fold(0u64, |acc, b| (acc << 1) | *b as u64);
                z >= self.x0.len() as u64
            } else {
                false
            };
            if !ok {
                return exact::rat_int(0);
            }
            mass *= &per_block;
        }
        let w = &syms[complete * blen..];
        if !w.is_empty() {
            mass *= exact::rat_int(self.extension_count(w) as i64) * &per_block;
        }
        mass
    }
}

enum EnvKind {
    Deterministic { source: DetSource, tag: String },
    Probabilistic(Arc<dyn MeasureFn>),
}

enum DetSource {
    Zeros,
    Alternating,
    Fixed(SymbolString),
}

impl DetSource {
    fn symbol(&self, t: usize) -> Option<Symbol> {
        match self {
            DetSource::Zeros => Some(0),
            DetSource::Alternating => Some((t % 2) as Symbol),
            DetSource::Fixed(s) => s.symbols().get(t).copied(),
        }
    }
}

/// A sequence-generating environment: either one fixed computable sequence or
/// an exactly-representable measure with a seeded sampler.
pub struct Environment {
    alphabet: Alphabet,
    kind: EnvKind,
}

impl Environment {
    /// The all-zero sequence.
    pub fn zeros() -> Self {
        Environment {
            alphabet: Alphabet::binary(),
            kind: EnvKind::Deterministic { source: DetSource::Zeros, tag: "det:zeros".into() },
        }
    }

    /// The alternating sequence 0101...
    pub fn alternating() -> Self {
        Environment {
            alphabet: Alphabet::binary(),
            kind: EnvKind::Deterministic {
                source: DetSource::Alternating,
                tag: "det:alternating".into(),
            },
        }
    }

    /// A fixed finite sequence (total only up to its length).
    pub fn fixed(x: SymbolString) -> Self {
        let tag = format!("det:fixed={x}");
        Environment {
            alphabet: x.alphabet(),
            kind: EnvKind::Deterministic { source: DetSource::Fixed(x), tag },
        }
    }

    /// The sequence a fixed program produces on `machine`, prefetched to
    /// `horizon` symbols.
    pub fn from_program(
        machine: &dyn MonotoneMachine,
        program: &BitString,
        horizon: usize,
        max_steps: u64,
    ) -> Result<Self, EnvError> {
        let outcome = machine.run(program, max_steps);
        if outcome.output.len() < horizon {
            return Err(EnvError::GeneratorTooShort { got: outcome.output.len(), needed: horizon });
        }
        let tag = format!("det:prog={program}");
        Ok(Environment {
            alphabet: machine.alphabet(),
            kind: EnvKind::Deterministic {
                source: DetSource::Fixed(outcome.output.prefix(horizon)),
                tag,
            },
        })
    }

    pub fn bernoulli(theta: BigRational) -> Result<Self, EnvError> {
        let measure = Bernoulli::new(theta)?;
        Ok(Environment { alphabet: Alphabet::binary(), kind: EnvKind::Probabilistic(Arc::new(measure)) })
    }

    pub fn block_measure(alphabet: Alphabet, x0: Vec<Symbol>, s: u32) -> Result<Self, EnvError> {
        let measure = BlockMeasure::new(alphabet, x0, s)?;
        Ok(Environment { alphabet, kind: EnvKind::Probabilistic(Arc::new(measure)) })
    }

    pub fn probabilistic(measure: Arc<dyn MeasureFn>) -> Self {
        Environment { alphabet: measure.alphabet(), kind: EnvKind::Probabilistic(measure) }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn tag(&self) -> String {
        match &self.kind {
            EnvKind::Deterministic { tag, .. } => tag.clone(),
            EnvKind::Probabilistic(m) => m.tag(),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.kind, EnvKind::Deterministic { .. })
    }

    /// Exact cylinder mass of `x` under this environment.
    pub fn mass(&self, x: &SymbolString) -> BigRational {
        match &self.kind {
            EnvKind::Probabilistic(m) => m.mass(x),
            EnvKind::Deterministic { source, .. } => {
                for (t, sym) in x.symbols().iter().enumerate() {
                    if source.symbol(t) != Some(*sym) {
                        return exact::rat_int(0);
                    }
                }
                BigRational::one()
            }
        }
    }

    /// The true (normalized) posterior vector at an on-support context.
    pub fn posterior_vec(&self, ctx: &SymbolString) -> Result<PosteriorVector, EnvError> {
        match &self.kind {
            EnvKind::Deterministic { source, .. } => {
                let sym = source
                    .symbol(ctx.len())
                    .ok_or(EnvError::GeneratorTooShort { got: ctx.len(), needed: ctx.len() + 1 })?;
                let mut values = vec![exact::rat_int(0); self.alphabet.size()];
                values[sym as usize] = BigRational::one();
                Ok(PosteriorVector {
                    context: ctx.clone(),
                    values,
                    normalized: true,
                    zero_sum_convention: false,
                })
            }
            EnvKind::Probabilistic(m) => {
                let denom = m.mass(ctx);
                if denom.is_zero() {
                    return Err(EnvError::OffSupport(ctx.len()));
                }
                let values: Vec<BigRational> =
                    self.alphabet.symbols().map(|a| m.mass(&ctx.child(a)) / &denom).collect();
                Ok(PosteriorVector {
                    context: ctx.clone(),
                    values,
                    normalized: true,
                    zero_sum_convention: false,
                })
            }
        }
    }

    /// Draws the next symbol. Deterministic environments ignore the RNG.
    pub fn next_symbol(&self, ctx: &SymbolString, rng: &mut ChaCha8Rng) -> Result<Symbol, EnvError> {
        let vec = self.posterior_vec(ctx)?;
        match &self.kind {
            EnvKind::Deterministic { .. } => Ok(vec
                .values
                .iter()
                .position(|v| v.is_one())
                .expect("point mass") as Symbol),
            EnvKind::Probabilistic(_) => Ok(sample_index(&vec.values, rng) as Symbol),
        }
    }

    /// Seeded RNG stream for one run.
    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// This environment's measure viewed as a predictive function.
    pub fn as_predictive(self: &Arc<Self>) -> EnvPredictive {
        EnvPredictive { env: Arc::clone(self) }
    }
}

/// Samples an index from exact normalized weights using one 64-bit draw
/// interpreted as the dyadic rational r/2^64. The residual bias is below
/// 2^-63, far inside any tolerance used here.
fn sample_index(weights: &[BigRational], rng: &mut ChaCha8Rng) -> usize {
    let r: u64 = rng.gen();
    let point = BigRational::new(r.into(), num::BigInt::one() << 64u16);
    let mut cum = exact::rat_int(0);
    for (i, w) in weights.iter().enumerate() {
        cum += w;
        if point < cum {
            return i;
        }
    }
    weights.len() - 1
}

/// Adapter exposing an environment's measure through the predictive-function
/// interface.
pub struct EnvPredictive {
    env: Arc<Environment>,
}

impl Predictive for EnvPredictive {
    fn alphabet(&self) -> Alphabet {
        self.env.alphabet()
    }

    fn provenance(&self) -> Provenance {
        Provenance::ExplicitMeasure
    }

    fn tag(&self) -> String {
        self.env.tag()
    }

    fn mass(&self, x: &SymbolString) -> PResult<BigRational> {
        Ok(self.env.mass(x))
    }
}
