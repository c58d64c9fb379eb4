//! Optional estimate cache: one textual line per cached complexity bound,
//! `machine-hash, x, kind, value, L, T`.
//!
//! The machine hash is the first 12 hex digits of SHA-256 over the machine's
//! identity tag, so caches survive renames of nothing but stay pinned to the
//! exact machine configuration.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::alphabet::{Alphabet, SymbolString};
use crate::enumeration::{Budget, ComplexityEstimate, EstimateKind, EstimateValue};
use crate::exact;
use crate::machine::{CodeLen, MonotoneMachine};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CacheError {
    #[error("cache line {line}: expected 6 comma-separated fields")]
    FieldCount { line: usize },
    #[error("cache line {line}: bad {field}: {detail}")]
    BadField { line: usize, field: &'static str, detail: String },
}

pub fn machine_hash(machine: &dyn MonotoneMachine) -> String {
    let digest = Sha256::digest(machine.tag().as_bytes());
    let mut out = String::with_capacity(12);
    for byte in digest.iter().take(6) {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CacheKey {
    pub machine_hash: String,
    pub x: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub value: String,
    pub max_len: u32,
    pub max_steps: u64,
}

/// In-memory view of a cache file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EstimateCache {
    entries: BTreeMap<CacheKey, CacheEntry>,
}

fn kind_name(kind: EstimateKind) -> &'static str {
    match kind {
        EstimateKind::Km => "Km",
        EstimateKind::K => "K",
        EstimateKind::KM => "KM",
    }
}

fn format_value(value: &EstimateValue) -> String {
    match value {
        EstimateValue::UpperBits(CodeLen::Finite(n)) => n.to_string(),
        EstimateValue::UpperBits(CodeLen::Infinite) => "inf".to_string(),
        EstimateValue::LowerMass(m) => exact::format_rational(m),
    }
}

fn render_x(x: &SymbolString) -> String {
    if x.is_empty() {
        "eps".to_string()
    } else {
        x.to_string()
    }
}

impl EstimateCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, machine: &dyn MonotoneMachine, x: &SymbolString, est: &ComplexityEstimate) {
        let key = CacheKey {
            machine_hash: machine_hash(machine),
            x: render_x(x),
            kind: kind_name(est.kind).to_string(),
        };
        self.entries.insert(
            key,
            CacheEntry {
                value: format_value(&est.value),
                max_len: est.budget.max_len,
                max_steps: est.budget.max_steps,
            },
        );
    }

    /// Looks up a value cached at a budget at least as large as requested.
    pub fn lookup(
        &self,
        machine: &dyn MonotoneMachine,
        x: &SymbolString,
        kind: EstimateKind,
        budget: Budget,
    ) -> Option<ComplexityEstimate> {
        let key = CacheKey {
            machine_hash: machine_hash(machine),
            x: render_x(x),
            kind: kind_name(kind).to_string(),
        };
        let entry = self.entries.get(&key)?;
        if entry.max_len < budget.max_len || entry.max_steps < budget.max_steps {
            return None;
        }
        let value = match kind {
            EstimateKind::Km | EstimateKind::K => {
                if entry.value == "inf" {
                    EstimateValue::UpperBits(CodeLen::Infinite)
                } else {
                    EstimateValue::UpperBits(CodeLen::Finite(entry.value.parse().ok()?))
                }
            }
            EstimateKind::KM => {
                EstimateValue::LowerMass(exact::parse_rational(&entry.value)?)
            }
        };
        Some(ComplexityEstimate {
            kind,
            value,
            budget: Budget::new(entry.max_len, entry.max_steps),
        })
    }

    /// Stable textual rendering, one line per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, entry) in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                key.machine_hash, key.x, key.kind, entry.value, entry.max_len, entry.max_steps
            ));
        }
        out
    }

    pub fn parse(input: &str) -> Result<Self, CacheError> {
        let mut entries = BTreeMap::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [hash, x, kind, value, max_len, max_steps] = fields.as_slice() else {
                return Err(CacheError::FieldCount { line: idx + 1 });
            };
            if !matches!(*kind, "Km" | "K" | "KM") {
                return Err(CacheError::BadField {
                    line: idx + 1,
                    field: "kind",
                    detail: format!("{kind:?}"),
                });
            }
            let valid_value = *value == "inf"
                || value.parse::<u64>().is_ok()
                || exact::parse_rational(value)
                    .is_some_and(|r| !num::Signed::is_negative(&r));
            if !valid_value {
                return Err(CacheError::BadField {
                    line: idx + 1,
                    field: "value",
                    detail: format!("{value:?}"),
                });
            }
            if *x != "eps" && SymbolString::parse(Alphabet::new(36).expect("36"), x).is_err() {
                return Err(CacheError::BadField {
                    line: idx + 1,
                    field: "x",
                    detail: format!("{x:?}"),
                });
            }
            let max_len: u32 = max_len.parse().map_err(|e| CacheError::BadField {
                line: idx + 1,
                field: "L",
                detail: format!("{e}"),
            })?;
            let max_steps: u64 = max_steps.parse().map_err(|e| CacheError::BadField {
                line: idx + 1,
                field: "T",
                detail: format!("{e}"),
            })?;
            entries.insert(
                CacheKey {
                    machine_hash: hash.to_string(),
                    x: x.to_string(),
                    kind: kind.to_string(),
                },
                CacheEntry { value: value.to_string(), max_len, max_steps },
            );
        }
        Ok(EstimateCache { entries })
    }
}

/// Returns the cached estimate or computes and caches it.
pub fn cached_estimate(
    cache: &mut EstimateCache,
    machine: &dyn MonotoneMachine,
    x: &SymbolString,
    kind: EstimateKind,
    budget: Budget,
) -> ComplexityEstimate {
    if let Some(hit) = cache.lookup(machine, x, kind, budget) {
        return hit;
    }
    let est = match kind {
        EstimateKind::Km => crate::enumeration::km_upper(machine, x, budget),
        EstimateKind::K => crate::enumeration::k_upper(machine, x, budget),
        EstimateKind::KM => crate::enumeration::m_lower(machine, x, budget),
    };
    cache.insert(machine, x, &est);
    est
}
