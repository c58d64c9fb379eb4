//! The theorem harness: one runnable check per in-scope claim, each
//! returning a self-auditing report of the measured quantities.
//!
//! A report records named quantities (exact rationals, integers, infinities,
//! or explicitly-marked floats) and the relations checked between them; the
//! verdict is recomputable from the recorded values alone. Serialized
//! reports omit the runtime so identical inputs give byte-identical output.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use num::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environments::EnvError;
use crate::exact;
use crate::machine::{CodeLen, MachineError};
use crate::predictive::PredictiveError;

mod convergence;
mod foundations;
mod losses;
mod registry;

pub use convergence::{verify_iii_counting, verify_vi1, verify_vi3, verify_vi5, verify_vi6, Vi6Variant};
pub use foundations::{verify_empirical_m_trend, verify_k_failure, verify_thm51, verify_thm52};
pub use losses::{verify_vii3, verify_vii5_general, verify_vii5_simple};
pub use registry::{run_check, KNOWN_CHECKS};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("parameter s={got} outside the checkable range {min}..={max}")]
    SOutOfRange { got: u32, min: u32, max: u32 },
    #[error("loss must be non-degenerate for this check")]
    DegenerateLoss,
    #[error("loss does not fit the outcome decomposition: {0}")]
    LossDecomposition(String),
    #[error("dominance precondition fails at prefix {prefix}: {detail}")]
    Precondition { prefix: String, detail: String },
    #[error("predictive function: {0}")]
    Predictive(#[from] PredictiveError),
    #[error("environment: {0}")]
    Env(#[from] EnvError),
    #[error("machine: {0}")]
    Machine(#[from] MachineError),
    #[error("bad parameter: {0}")]
    BadParam(String),
}

/// A measured value inside a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "v")]
pub enum Measured {
    /// Exact rational, canonical `num/den`.
    Rational(String),
    Int(i64),
    Infinite,
    /// Explicitly inexact; comparisons involving it are float comparisons.
    Float(f64),
    Bool(bool),
}

impl Measured {
    pub fn rational(r: &BigRational) -> Self {
        Measured::Rational(exact::format_rational(r))
    }

    pub fn code_len(len: CodeLen) -> Self {
        match len {
            CodeLen::Finite(n) => Measured::Int(n as i64),
            CodeLen::Infinite => Measured::Infinite,
        }
    }

    fn as_rational(&self) -> Option<BigRational> {
        match self {
            Measured::Rational(s) => exact::parse_rational(s),
            Measured::Int(n) => Some(exact::rat_int(*n)),
            _ => None,
        }
    }

    fn as_f64(&self) -> Option<f64> {
        match self {
            Measured::Rational(s) => exact::parse_rational(s).map(|r| exact::to_f64(&r)),
            Measured::Int(n) => Some(*n as f64),
            Measured::Float(f) => Some(*f),
            Measured::Infinite => Some(f64::INFINITY),
            Measured::Bool(_) => None,
        }
    }

    /// Comparison used by relations: exact wherever both sides are exact,
    /// float when either side is a float.
    fn compare(&self, other: &Measured) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Measured::Bool(a), Measured::Bool(b)) => Some(a.cmp(b)),
            (Measured::Infinite, Measured::Infinite) => Some(Equal),
            (Measured::Infinite, _) => Some(Greater),
            (_, Measured::Infinite) => Some(Less),
            (Measured::Float(_), _) | (_, Measured::Float(_)) => {
                self.as_f64()?.partial_cmp(&other.as_f64()?)
            }
            _ => Some(self.as_rational()?.cmp(&other.as_rational()?)),
        }
    }
}

impl fmt::Display for Measured {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measured::Rational(s) => write!(f, "{s}"),
            Measured::Int(n) => write!(f, "{n}"),
            Measured::Infinite => write!(f, "inf"),
            Measured::Float(v) => write!(f, "{v:.12}"),
            Measured::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    Le,
    Lt,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Cmp::Le => ord != Greater,
            Cmp::Lt => ord == Less,
            Cmp::Eq => ord == Equal,
            Cmp::Ge => ord != Less,
            Cmp::Gt => ord == Greater,
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Cmp::Le => "<=",
            Cmp::Lt => "<",
            Cmp::Eq => "==",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        };
        write!(f, "{s}")
    }
}

/// A checked relation between two named quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub lhs: String,
    pub cmp: Cmp,
    pub rhs: String,
    pub holds: bool,
}

/// Result of one theorem check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremReport {
    pub id: String,
    pub params: BTreeMap<String, String>,
    pub quantities: BTreeMap<String, Measured>,
    pub relations: Vec<Relation>,
    pub notes: Vec<String>,
    pub verdict: bool,
    #[serde(skip)]
    pub runtime: Duration,
}

impl TheoremReport {
    pub fn new(id: impl Into<String>) -> Self {
        TheoremReport {
            id: id.into(),
            params: BTreeMap::new(),
            quantities: BTreeMap::new(),
            relations: Vec::new(),
            notes: Vec::new(),
            verdict: true,
            runtime: Duration::ZERO,
        }
    }

    pub fn param(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn put(&mut self, name: &str, value: Measured) -> &mut Self {
        self.quantities.insert(name.to_string(), value);
        self
    }

    pub fn put_rat(&mut self, name: &str, value: &BigRational) -> &mut Self {
        self.put(name, Measured::rational(value))
    }

    /// Records and immediately evaluates a relation between two quantities
    /// added earlier. Panics on a missing name: that is a harness bug, not a
    /// failed check.
    pub fn check(&mut self, lhs: &str, cmp: Cmp, rhs: &str) -> &mut Self {
        let l = self.quantities.get(lhs).unwrap_or_else(|| panic!("no quantity {lhs}"));
        let r = self.quantities.get(rhs).unwrap_or_else(|| panic!("no quantity {rhs}"));
        let holds = l.compare(r).map(|ord| cmp.holds(ord)).unwrap_or(false);
        self.relations.push(Relation {
            lhs: lhs.to_string(),
            cmp,
            rhs: rhs.to_string(),
            holds,
        });
        self.verdict &= holds;
        self
    }

    /// Shorthand for boolean quantities that must be true.
    pub fn check_flag(&mut self, name: &str, value: bool) -> &mut Self {
        self.put(name, Measured::Bool(value));
        self.put("true", Measured::Bool(true));
        self.check(name, Cmp::Eq, "true")
    }

    pub fn note(&mut self, s: impl Into<String>) -> &mut Self {
        self.notes.push(s.into());
        self
    }

    /// Re-derives the verdict from the recorded quantities; reports are
    /// self-auditing.
    pub fn recheck(&self) -> bool {
        let all = self.relations.iter().all(|rel| {
            let (Some(l), Some(r)) = (self.quantities.get(&rel.lhs), self.quantities.get(&rel.rhs))
            else {
                return false;
            };
            l.compare(r).map(|ord| rel.cmp.holds(ord)).unwrap_or(false) == rel.holds
        });
        all && self.verdict == self.relations.iter().all(|r| r.holds)
    }

    /// Stable single-line JSON (runtime excluded).
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json_line(s: &str) -> Option<TheoremReport> {
        serde_json::from_str(s).ok()
    }

    /// One human-readable pass/fail line.
    pub fn summary_line(&self) -> String {
        let status = if self.verdict { "PASS" } else { "FAIL" };
        let params: Vec<String> =
            self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{status} {} [{}]", self.id, params.join(","))
    }
}
