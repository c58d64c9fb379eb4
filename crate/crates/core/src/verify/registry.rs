//! Name-based dispatch from parsed check specs to harness runs, with the
//! documented defaults.

use std::sync::Arc;

use num::BigRational;

use crate::alphabet::{Alphabet, SymbolString};
use crate::enumeration::Budget;
use crate::exact;
use crate::machine::{MachineHandle, V5Machine};
use crate::predictive::{FromM, Predictive, ScaledCapped};
use crate::textspec::{parse_loss_spec, parse_string_set, CheckSpec};

use super::{
    verify_empirical_m_trend, verify_iii_counting, verify_k_failure, verify_thm51, verify_thm52,
    verify_vi1, verify_vi3, verify_vi5, verify_vi6, verify_vii3, verify_vii5_general,
    verify_vii5_simple, TheoremReport, VerifyError, Vi6Variant,
};

pub const KNOWN_CHECKS: &[&str] = &[
    "vi1",
    "vi3",
    "vi5",
    "vi6",
    "vii3",
    "vii5-simple",
    "vii5-general",
    "iii-counting",
    "thm51",
    "thm52",
    "k-failure",
    "m-trend",
];

fn get_u32(spec: &CheckSpec, key: &str, default: u32) -> Result<u32, VerifyError> {
    match spec.params.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|e| VerifyError::BadParam(format!("{key}: {e}"))),
    }
}

fn get_u64(spec: &CheckSpec, key: &str, default: u64) -> Result<u64, VerifyError> {
    match spec.params.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|e| VerifyError::BadParam(format!("{key}: {e}"))),
    }
}

fn get_usize(spec: &CheckSpec, key: &str, default: usize) -> Result<usize, VerifyError> {
    match spec.params.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|e| VerifyError::BadParam(format!("{key}: {e}"))),
    }
}

fn get_rational(spec: &CheckSpec, key: &str) -> Result<Option<BigRational>, VerifyError> {
    match spec.params.get(key) {
        None => Ok(None),
        Some(v) => exact::parse_rational(v)
            .map(Some)
            .ok_or_else(|| VerifyError::BadParam(format!("{key}: bad rational {v:?}"))),
    }
}

fn get_string_arg(
    spec: &CheckSpec,
    key: &str,
    default: &str,
    alphabet: Alphabet,
) -> Result<SymbolString, VerifyError> {
    let raw = spec.params.get(key).map(String::as_str).unwrap_or(default);
    let mut set = parse_string_set(raw, alphabet)
        .map_err(|e| VerifyError::BadParam(format!("{key}: {e}")))?;
    if set.len() != 1 {
        return Err(VerifyError::BadParam(format!("{key}: expected exactly one string")));
    }
    Ok(set.remove(0))
}

fn default_machine(machine: Option<&MachineHandle>) -> Result<MachineHandle, VerifyError> {
    match machine {
        Some(m) => Ok(m.clone()),
        None => Ok(Arc::new(V5Machine::new(4, None)?)),
    }
}

/// Runs one named check. `machine` (from the run config) provides the
/// machine for the checks that take one; `seed` is the fallback seed.
pub fn run_check(
    spec: &CheckSpec,
    machine: Option<&MachineHandle>,
    seed: u64,
) -> Result<TheoremReport, VerifyError> {
    let name = spec.name.replace('_', "-");
    let seed = get_u64(spec, "seed", seed)?;
    match name.as_str() {
        "vi1" | "vi3" | "iii-counting" => {
            let machine = default_machine(machine)?;
            let x = get_string_arg(spec, "x", "0^14", machine.alphabet())?;
            let budget = Budget::new(get_u32(spec, "max-len", 10)?, get_u64(spec, "steps", 400)?);
            match name.as_str() {
                "vi1" => verify_vi1(&machine, &x, budget),
                "vi3" => verify_vi3(&machine, &x, budget),
                _ => verify_iii_counting(&machine, &x, budget),
            }
        }
        "vi5" => verify_vi5(get_u32(spec, "s", 4)?),
        "vi6" => {
            let variant = match spec.params.get("variant").map(String::as_str) {
                None | Some("raw") => Vi6Variant::Raw,
                Some("normalized") => Vi6Variant::Normalized,
                Some(other) => {
                    return Err(VerifyError::BadParam(format!("variant: {other:?}")))
                }
            };
            verify_vi6(variant)
        }
        "vii3" => verify_vii3(get_rational(spec, "eps")?),
        "vii5-simple" => {
            verify_vii5_simple(get_u32(spec, "s", 8)?, get_u64(spec, "samples", 10_000)?, seed)
        }
        "vii5-general" => {
            let s = get_u32(spec, "s", 3)?;
            let x0_raw = spec.params.get("x0").map(String::as_str).unwrap_or("0");
            let x0: Vec<u8> = x0_raw
                .chars()
                .map(|c| c.to_digit(36).map(|d| d as u8))
                .collect::<Option<_>>()
                .ok_or_else(|| VerifyError::BadParam("x0: bad symbols".into()))?;
            let alphabet_size =
                x0.iter().copied().max().map(|m| (m as usize + 1).max(2)).unwrap_or(2);
            let alphabet = Alphabet::new(alphabet_size)
                .map_err(|e| VerifyError::BadParam(e.to_string()))?;
            let loss_name = spec.params.get("loss").map(String::as_str).unwrap_or("error");
            let loss = parse_loss_spec(loss_name, alphabet)
                .map_err(|e| VerifyError::BadParam(e.to_string()))?;
            let blocks = get_usize(spec, "blocks", 16)?;
            verify_vii5_general(s, x0, &loss, blocks, seed)
        }
        "thm51" => verify_thm51(get_u64(spec, "trials", 10_000)?, seed),
        "thm52" => {
            let machine = default_machine(machine)?;
            let x = get_string_arg(spec, "x", "0^10", machine.alphabet())?;
            let budget = Budget::new(get_u32(spec, "max-len", 8)?, get_u64(spec, "steps", 200)?);
            let a = get_rational(spec, "a")?.unwrap_or_else(|| exact::rat_int(1));
            let c = get_rational(spec, "c")?;
            let factor = get_rational(spec, "factor")?;
            let base: Arc<dyn Predictive> = Arc::new(FromM::new(machine.clone(), budget));
            let b: Arc<dyn Predictive> = match factor {
                None => base,
                Some(f) => Arc::new(ScaledCapped::new(base, f)),
            };
            verify_thm52(b.as_ref(), &a, c.as_ref(), &machine, &x, budget)
        }
        "k-failure" => verify_k_failure(),
        "m-trend" => verify_empirical_m_trend(seed),
        other => Err(VerifyError::BadParam(format!("unknown check {other:?}"))),
    }
}
