//! Loss matrices, the loss-minimizing predictor, and prediction traces.

use num::{BigRational, One, Zero};
use thiserror::Error;

use crate::alphabet::{Alphabet, Symbol, SymbolString};
use crate::environments::{EnvError, Environment};
use crate::exact;
use crate::predictive::{PosteriorVector, Predictive};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LossError {
    #[error("loss matrix needs at least one action")]
    NoActions,
    #[error("loss matrix row count {got} does not match alphabet size {want}")]
    RowMismatch { got: usize, want: usize },
    #[error("loss rows must all have the same number of actions")]
    RaggedRows,
    #[error("loss entries must lie in [0,1]; entry ({x},{y}) = {value} does not")]
    EntryOutOfRange { x: usize, y: usize, value: String },
}

/// Loss `l_{xy} in [0,1]` indexed by outcome `x` and action `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LossMatrix {
    name: String,
    alphabet: Alphabet,
    entries: Vec<Vec<BigRational>>,
}

impl LossMatrix {
    pub fn new(
        name: impl Into<String>,
        alphabet: Alphabet,
        entries: Vec<Vec<BigRational>>,
    ) -> Result<Self, LossError> {
        if entries.len() != alphabet.size() {
            return Err(LossError::RowMismatch { got: entries.len(), want: alphabet.size() });
        }
        let actions = entries.first().map_or(0, |r| r.len());
        if actions == 0 {
            return Err(LossError::NoActions);
        }
        for (x, row) in entries.iter().enumerate() {
            if row.len() != actions {
                return Err(LossError::RaggedRows);
            }
            for (y, v) in row.iter().enumerate() {
                if v < &BigRational::zero() || v > &BigRational::one() {
                    return Err(LossError::EntryOutOfRange {
                        x,
                        y,
                        value: exact::format_rational(v),
                    });
                }
            }
        }
        Ok(LossMatrix { name: name.into(), alphabet, entries })
    }

    /// Error loss `l_{xy} = 1 - [x = y]` with actions identified with
    /// outcomes.
    pub fn error_loss(alphabet: Alphabet) -> Self {
        let n = alphabet.size();
        let entries = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| if x == y { exact::rat_int(0) } else { exact::rat_int(1) })
                    .collect()
            })
            .collect();
        LossMatrix { name: "error".into(), alphabet, entries }
    }

    /// The three-action loss with `l_{x0} = x`, `l_{x1} = 3/8`,
    /// `l_{x2} = (2/3)(1-x)` over binary outcomes.
    pub fn fig1() -> Self {
        Self::fig1_with_middle(exact::rat(3, 8))
    }

    /// Same shape with the middle action's flat loss replaced (the sharpened
    /// variant uses `1/3 + eps`).
    pub fn fig1_with_middle(middle: BigRational) -> Self {
        let entries = vec![
            vec![exact::rat_int(0), middle.clone(), exact::rat(2, 3)],
            vec![exact::rat_int(1), middle.clone(), exact::rat_int(0)],
        ];
        LossMatrix { name: format!("fig1[{}]", exact::format_rational(&middle)), alphabet: Alphabet::binary(), entries }
    }

    /// The asymmetric binary loss `l_00 = l_11 = 0`, `l_10 = 1`, `l_01 = 2/3`.
    pub fn copy_loss() -> Self {
        let entries = vec![
            vec![exact::rat_int(0), exact::rat(2, 3)],
            vec![exact::rat_int(1), exact::rat_int(0)],
        ];
        LossMatrix { name: "copyloss".into(), alphabet: Alphabet::binary(), entries }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn num_actions(&self) -> usize {
        self.entries[0].len()
    }

    pub fn entry(&self, x: Symbol, y: usize) -> &BigRational {
        &self.entries[x as usize][y]
    }

    /// Expected loss of action `y` under an (arbitrary, possibly
    /// unnormalized) outcome-weight vector.
    pub fn expected_loss(&self, weights: &[BigRational], y: usize) -> BigRational {
        weights
            .iter()
            .enumerate()
            .fold(exact::rat_int(0), |acc, (x, w)| acc + w * &self.entries[x][y])
    }

    /// All actions attaining `min_y l_{xy}` for the fixed outcome `x`.
    pub fn argmin_actions_for_outcome(&self, x: Symbol) -> Vec<usize> {
        let row = &self.entries[x as usize];
        let best = row.iter().min().expect("actions nonempty");
        row.iter().enumerate().filter(|(_, v)| *v == best).map(|(y, _)| y).collect()
    }
}

/// The action minimizing expected loss under `weights`, lowest index on ties.
/// Scaling the weight vector by any positive constant cannot change the
/// result, so raw and normalized posteriors act identically.
pub fn act(weights: &PosteriorVector, loss: &LossMatrix) -> usize {
    let mut best_y = 0usize;
    let mut best = loss.expected_loss(&weights.values, 0);
    for y in 1..loss.num_actions() {
        let l = loss.expected_loss(&weights.values, y);
        if l < best {
            best = l;
            best_y = y;
        }
    }
    best_y
}

/// The true expected instantaneous loss of action `y`; `mu` must be
/// normalized.
pub fn inst_loss(mu: &PosteriorVector, y: usize, loss: &LossMatrix) -> BigRational {
    debug_assert!(mu.normalized);
    loss.expected_loss(&mu.values, y)
}

/// A loss is non-degenerate when no single action is optimal for every
/// outcome simultaneously.
pub fn is_nondegenerate(loss: &LossMatrix) -> bool {
    let mut common: Option<Vec<usize>> = None;
    for x in loss.alphabet().symbols() {
        let mins = loss.argmin_actions_for_outcome(x);
        common = Some(match common {
            None => mins,
            Some(prev) => prev.into_iter().filter(|y| mins.contains(y)).collect(),
        });
        if common.as_ref().is_some_and(|c| c.is_empty()) {
            return true;
        }
    }
    common.is_some_and(|c| c.is_empty())
}

/// Loss ratio of a step; infinite when the optimum is free and the predictor
/// pays, and 1 when both sides agree (including 0/0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LossRatio {
    Finite(BigRational),
    Infinite,
}

impl LossRatio {
    pub fn as_string(&self) -> String {
        match self {
            LossRatio::Finite(r) => exact::format_rational(r),
            LossRatio::Infinite => "inf".into(),
        }
    }
}

/// One step of a prediction run.
#[derive(Debug, Clone)]
pub struct TraceStep {
    /// 1-based time index.
    pub t: usize,
    /// The realized symbol x_t.
    pub symbol: Symbol,
    /// The (normalized) posterior vector the predictor acted on.
    pub predictor_posteriors: PosteriorVector,
    pub action: usize,
    /// mu-expected loss of the chosen action.
    pub inst_loss: BigRational,
    /// mu-expected loss of the mu-optimal action.
    pub optimal_loss: BigRational,
}

impl TraceStep {
    pub fn ratio(&self) -> LossRatio {
        if self.inst_loss == self.optimal_loss {
            return LossRatio::Finite(BigRational::one());
        }
        if self.optimal_loss.is_zero() {
            return LossRatio::Infinite;
        }
        LossRatio::Finite(&self.inst_loss / &self.optimal_loss)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Truncation {
    PredictorUndefined { t: usize, reason: String },
    EnvironmentExhausted { t: usize },
}

/// The per-step record of a prediction run.
pub struct PredictorTrace {
    pub predictor_tag: String,
    pub env_tag: String,
    pub loss_name: String,
    pub seed: u64,
    pub steps: Vec<TraceStep>,
    pub truncation: Option<Truncation>,
    pub realized: SymbolString,
}

/// Runs the loss-minimizing predictor built on `rho` against `env` for
/// `horizon` steps. Deterministic given the seed and the fixed tie-break.
/// The predictor, environment, and loss must share one alphabet.
pub fn run_predictor(
    rho: &dyn Predictive,
    env: &Environment,
    loss: &LossMatrix,
    horizon: usize,
    seed: u64,
) -> PredictorTrace {
    assert_eq!(rho.alphabet(), env.alphabet(), "predictor/environment alphabet mismatch");
    assert_eq!(loss.alphabet(), env.alphabet(), "loss/environment alphabet mismatch");
    let mut rng = Environment::rng(seed);
    let mut realized = SymbolString::empty(env.alphabet());
    let mut steps = Vec::with_capacity(horizon);
    let mut truncation = None;

    for t in 1..=horizon {
        let ctx = realized.clone();
        let rho_vec = match rho.action_weights(&ctx) {
            Ok(v) => v,
            Err(err) => {
                truncation = Some(Truncation::PredictorUndefined { t, reason: err.to_string() });
                break;
            }
        };
        let mu_vec = match env.posterior_vec(&ctx) {
            Ok(v) => v,
            Err(EnvError::GeneratorTooShort { .. }) => {
                truncation = Some(Truncation::EnvironmentExhausted { t });
                break;
            }
            Err(err) => {
                truncation = Some(Truncation::PredictorUndefined { t, reason: err.to_string() });
                break;
            }
        };

        let action = act(&rho_vec, loss);
        let l = inst_loss(&mu_vec, action, loss);
        let opt_action = act(&mu_vec, loss);
        let l_opt = inst_loss(&mu_vec, opt_action, loss);
        debug_assert!(l_opt <= l);

        let symbol = env.next_symbol(&ctx, &mut rng).expect("on-support context");
        steps.push(TraceStep {
            t,
            symbol,
            predictor_posteriors: rho_vec,
            action,
            inst_loss: l,
            optimal_loss: l_opt,
        });
        realized.push(symbol);
    }

    PredictorTrace {
        predictor_tag: rho.tag().to_string(),
        env_tag: env.tag(),
        loss_name: loss.name().to_string(),
        seed,
        steps,
        truncation,
        realized,
    }
}
