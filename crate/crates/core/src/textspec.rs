//! Text formats parsed from the command line and from config files: machine
//! specs, environment specs, loss matrices, string sets, check lists, and
//! run configs. Everything here treats its input as untrusted.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::BigRational;
use thiserror::Error;

use crate::alphabet::{Alphabet, Symbol, SymbolString};
use crate::bits::BitString;
use crate::decision::LossMatrix;
use crate::environments::{EnvError, Environment};
use crate::exact;
use crate::machine::{BlockMachine, CopyMachine, MachineError, MachineHandle, RefVm, V5Machine};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("{what}: {detail}")]
    Invalid { what: &'static str, detail: String },
    #[error("machine: {0}")]
    Machine(#[from] MachineError),
    #[error("environment: {0}")]
    Env(#[from] EnvError),
    #[error("loss: {0}")]
    Loss(#[from] crate::decision::LossError),
    #[error("{what} parse error at line {line}: {detail}")]
    AtLine { what: &'static str, line: usize, detail: String },
}

fn invalid(what: &'static str, detail: impl Into<String>) -> SpecError {
    SpecError::Invalid { what, detail: detail.into() }
}

/// Parsed machine description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MachineSpec {
    RefVm,
    V5 { s: u32, uprime: bool },
    Copy { s: Option<u32>, uprime: bool },
    Block { s: u32, x0: Vec<Symbol> },
}

/// Grammar: `refvm` | `builtin:v5 s=<int> uprime=<on|off>` |
/// `builtin:copy [s=<int>] uprime=<on|off>` | `builtin:block s=<int> x0=<symbols>`.
pub fn parse_machine_spec(input: &str) -> Result<MachineSpec, SpecError> {
    const WHAT: &str = "machine spec";
    let mut tokens = input.split_whitespace();
    let head = tokens.next().ok_or_else(|| invalid(WHAT, "empty spec"))?;

    let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| invalid(WHAT, format!("expected key=value, got {tok:?}")))?;
        if kv.insert(k, v).is_some() {
            return Err(invalid(WHAT, format!("duplicate key {k:?}")));
        }
    }
    let parse_s = |kv: &BTreeMap<&str, &str>| -> Result<Option<u32>, SpecError> {
        kv.get("s")
            .map(|v| v.parse::<u32>().map_err(|e| invalid(WHAT, format!("s: {e}"))))
            .transpose()
    };
    let parse_uprime = |kv: &BTreeMap<&str, &str>| -> Result<bool, SpecError> {
        match kv.get("uprime").copied() {
            None | Some("off") => Ok(false),
            Some("on") => Ok(true),
            Some(other) => Err(invalid(WHAT, format!("uprime must be on or off, got {other:?}"))),
        }
    };
    let check_keys = |kv: &BTreeMap<&str, &str>, allowed: &[&str]| -> Result<(), SpecError> {
        for k in kv.keys() {
            if !allowed.contains(k) {
                return Err(invalid(WHAT, format!("unknown key {k:?}")));
            }
        }
        Ok(())
    };

    match head {
        "refvm" => {
            check_keys(&kv, &[])?;
            Ok(MachineSpec::RefVm)
        }
        "builtin:v5" => {
            check_keys(&kv, &["s", "uprime"])?;
            let s = parse_s(&kv)?.ok_or_else(|| invalid(WHAT, "v5 requires s=<int>"))?;
            Ok(MachineSpec::V5 { s, uprime: parse_uprime(&kv)? })
        }
        "builtin:copy" => {
            check_keys(&kv, &["s", "uprime"])?;
            let uprime = parse_uprime(&kv)?;
            let s = parse_s(&kv)?;
            if uprime && s.is_none() {
                return Err(invalid(WHAT, "copy with uprime=on requires s=<int>"));
            }
            Ok(MachineSpec::Copy { s, uprime })
        }
        "builtin:block" => {
            check_keys(&kv, &["s", "x0"])?;
            let s = parse_s(&kv)?.ok_or_else(|| invalid(WHAT, "block requires s=<int>"))?;
            let x0_str = kv.get("x0").ok_or_else(|| invalid(WHAT, "block requires x0=<symbols>"))?;
            let x0 = parse_symbols(x0_str).ok_or_else(|| invalid(WHAT, "bad x0 symbols"))?;
            Ok(MachineSpec::Block { s, x0 })
        }
        other => Err(invalid(WHAT, format!("unknown machine {other:?}"))),
    }
}

fn parse_symbols(s: &str) -> Option<Vec<Symbol>> {
    if s.is_empty() {
        return None;
    }
    s.chars().map(|c| c.to_digit(36).map(|d| d as Symbol)).collect()
}

impl MachineSpec {
    /// Builds the machine; `uprime=on` embeds the reference machine.
    pub fn build(&self) -> Result<MachineHandle, SpecError> {
        let refvm = || Arc::new(RefVm::new()) as MachineHandle;
        Ok(match self {
            MachineSpec::RefVm => refvm(),
            MachineSpec::V5 { s, uprime } => Arc::new(V5Machine::new(*s, uprime.then(refvm))?),
            MachineSpec::Copy { s, uprime } => {
                if *uprime {
                    let s = s.expect("validated at parse time");
                    Arc::new(CopyMachine::with_uprime(s, refvm())?)
                } else {
                    Arc::new(CopyMachine::new())
                }
            }
            MachineSpec::Block { s, x0 } => {
                let alphabet = block_alphabet(x0)?;
                Arc::new(BlockMachine::new(alphabet, x0.clone(), *s, None)?)
            }
        })
    }
}

fn block_alphabet(x0: &[Symbol]) -> Result<Alphabet, SpecError> {
    let size = x0.iter().copied().max().map(|m| (m as usize + 1).max(2)).unwrap_or(2);
    Alphabet::new(size).map_err(|e| invalid("block alphabet", e.to_string()))
}

/// Parsed environment description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnvSpec {
    Zeros,
    Alternating,
    Program(BitString),
    Bernoulli(String),
    Block { s: u32, x0: Vec<Symbol> },
}

/// Grammar: `det:zeros` | `det:alternating` | `det:prog=<bits>` |
/// `bernoulli:<num>/<den>` | `block:s=<int>,x0=<symbols>`.
pub fn parse_env_spec(input: &str) -> Result<EnvSpec, SpecError> {
    const WHAT: &str = "environment spec";
    let input = input.trim();
    if let Some(rest) = input.strip_prefix("det:") {
        return match rest {
            "zeros" => Ok(EnvSpec::Zeros),
            "alternating" => Ok(EnvSpec::Alternating),
            other => {
                let bits = other.strip_prefix("prog=").ok_or_else(|| {
                    invalid(WHAT, format!("unknown deterministic source {other:?}"))
                })?;
                let program = BitString::parse(bits)
                    .ok_or_else(|| invalid(WHAT, "program must be a 0/1 literal"))?;
                Ok(EnvSpec::Program(program))
            }
        };
    }
    if let Some(theta) = input.strip_prefix("bernoulli:") {
        exact::parse_rational(theta).ok_or_else(|| invalid(WHAT, "bad rational"))?;
        return Ok(EnvSpec::Bernoulli(theta.to_string()));
    }
    if let Some(rest) = input.strip_prefix("block:") {
        let mut s = None;
        let mut x0 = None;
        for part in rest.split(',') {
            match part.split_once('=') {
                Some(("s", v)) => {
                    s = Some(v.parse::<u32>().map_err(|e| invalid(WHAT, format!("s: {e}")))?)
                }
                Some(("x0", v)) => {
                    x0 = Some(parse_symbols(v).ok_or_else(|| invalid(WHAT, "bad x0 symbols"))?)
                }
                _ => return Err(invalid(WHAT, format!("expected s=... or x0=..., got {part:?}"))),
            }
        }
        return Ok(EnvSpec::Block {
            s: s.ok_or_else(|| invalid(WHAT, "block requires s"))?,
            x0: x0.ok_or_else(|| invalid(WHAT, "block requires x0"))?,
        });
    }
    Err(invalid(WHAT, format!("unknown environment {input:?}")))
}

impl EnvSpec {
    /// Builds the environment. Program-generated sequences run on the
    /// reference machine and must cover `horizon` symbols within
    /// `max_steps`.
    pub fn build(&self, horizon: usize, max_steps: u64) -> Result<Environment, SpecError> {
        Ok(match self {
            EnvSpec::Zeros => Environment::zeros(),
            EnvSpec::Alternating => Environment::alternating(),
            EnvSpec::Program(p) => {
                Environment::from_program(&RefVm::new(), p, horizon, max_steps)?
            }
            EnvSpec::Bernoulli(theta) => {
                let theta: BigRational =
                    exact::parse_rational(theta).expect("validated at parse time");
                Environment::bernoulli(theta)?
            }
            EnvSpec::Block { s, x0 } => {
                let alphabet = block_alphabet(x0)?;
                Environment::block_measure(alphabet, x0.clone(), *s)?
            }
        })
    }
}

/// Builtin loss names or an inline matrix: rows per outcome, rational
/// entries, rows separated by `;` (or newlines), entries by whitespace.
pub fn parse_loss_spec(input: &str, alphabet: Alphabet) -> Result<LossMatrix, SpecError> {
    const WHAT: &str = "loss spec";
    match input.trim() {
        "error" => return Ok(LossMatrix::error_loss(alphabet)),
        "fig1" => return Ok(LossMatrix::fig1()),
        "copyloss" => return Ok(LossMatrix::copy_loss()),
        _ => {}
    }
    let mut entries = Vec::new();
    for (lineno, row) in input.split([';', '\n']).enumerate() {
        let row = row.trim();
        if row.is_empty() || row.starts_with('#') {
            continue;
        }
        let mut parsed = Vec::new();
        for tok in row.split_whitespace() {
            let value = exact::parse_rational(tok).ok_or_else(|| SpecError::AtLine {
                what: WHAT,
                line: lineno + 1,
                detail: format!("bad rational {tok:?}"),
            })?;
            parsed.push(value);
        }
        entries.push(parsed);
    }
    Ok(LossMatrix::new("custom", alphabet, entries)?)
}

/// A set of strings: comma-separated items, each a digit literal, `eps`, a
/// repeat `<sym>^<n>`, a repeat range `<sym>^<a>..<b>`, all prefixes of an
/// item (`prefixes:<item>`), or every string up to a length (`all:<n>`).
pub fn parse_string_set(input: &str, alphabet: Alphabet) -> Result<Vec<SymbolString>, SpecError> {
    const WHAT: &str = "string set";
    const MAX_LEN: usize = 4096;
    const MAX_ALL: usize = 12;
    let mut out = Vec::new();
    for item in input.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        if let Some(rest) = item.strip_prefix("prefixes:") {
            let base = parse_string_item(rest, alphabet)?;
            for n in 0..=base.len() {
                out.push(base.prefix(n));
            }
            continue;
        }
        if let Some(rest) = item.strip_prefix("all:") {
            let n: usize =
                rest.parse().map_err(|e| invalid(WHAT, format!("all: bad length: {e}")))?;
            if n > MAX_ALL {
                return Err(invalid(WHAT, format!("all:{n} too large (max {MAX_ALL})")));
            }
            for len in 0..=n {
                out.extend(SymbolString::all_of_length(alphabet, len));
            }
            continue;
        }
        if let Some((sym, counts)) = item.split_once('^') {
            let symbol = parse_single_symbol(sym, alphabet)?;
            if let Some((a, b)) = counts.split_once("..") {
                let a: usize = a.parse().map_err(|e| invalid(WHAT, format!("range: {e}")))?;
                let b: usize = b.parse().map_err(|e| invalid(WHAT, format!("range: {e}")))?;
                if a > b || b > MAX_LEN {
                    return Err(invalid(WHAT, format!("bad range {a}..{b}")));
                }
                for n in a..=b {
                    out.push(SymbolString::repeated(alphabet, symbol, n).expect("in range"));
                }
            } else {
                let n: usize =
                    counts.parse().map_err(|e| invalid(WHAT, format!("repeat: {e}")))?;
                if n > MAX_LEN {
                    return Err(invalid(WHAT, format!("repeat {n} too long (max {MAX_LEN})")));
                }
                out.push(SymbolString::repeated(alphabet, symbol, n).expect("in range"));
            }
            continue;
        }
        out.push(parse_string_item(item, alphabet)?);
    }
    if out.is_empty() {
        return Err(invalid(WHAT, "no strings"));
    }
    Ok(out)
}

fn parse_string_item(item: &str, alphabet: Alphabet) -> Result<SymbolString, SpecError> {
    if item == "eps" {
        return Ok(SymbolString::empty(alphabet));
    }
    if let Some((sym, count)) = item.split_once('^') {
        let symbol = parse_single_symbol(sym, alphabet)?;
        let n: usize =
            count.parse().map_err(|e| invalid("string set", format!("repeat: {e}")))?;
        return SymbolString::repeated(alphabet, symbol, n)
            .map_err(|e| invalid("string set", e.to_string()));
    }
    SymbolString::parse(alphabet, item).map_err(|e| invalid("string set", e.to_string()))
}

fn parse_single_symbol(s: &str, alphabet: Alphabet) -> Result<Symbol, SpecError> {
    let syms = parse_symbols(s).ok_or_else(|| invalid("string set", "bad symbol"))?;
    match syms.as_slice() {
        [one] if alphabet.contains(*one) => Ok(*one),
        _ => Err(invalid("string set", format!("expected one symbol, got {s:?}"))),
    }
}

/// One requested check with its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckSpec {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

/// Grammar: comma-separated checks, each `name[:key=value[:key=value]...]`,
/// e.g. `vi5:s=4,vii3,thm51:trials=1000:seed=7`.
pub fn parse_check_list(input: &str) -> Result<Vec<CheckSpec>, SpecError> {
    const WHAT: &str = "check list";
    let mut out = Vec::new();
    for item in input.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let mut parts = item.split(':');
        let name = parts.next().expect("split yields at least one").to_string();
        if name.is_empty() {
            return Err(invalid(WHAT, "empty check name"));
        }
        let mut params = BTreeMap::new();
        for kv in parts {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| invalid(WHAT, format!("expected key=value, got {kv:?}")))?;
            if params.insert(k.to_string(), v.to_string()).is_some() {
                return Err(invalid(WHAT, format!("duplicate parameter {k:?}")));
            }
        }
        out.push(CheckSpec { name, params });
    }
    if out.is_empty() {
        return Err(invalid(WHAT, "no checks"));
    }
    Ok(out)
}

/// Raw key/value run configuration, as read from a config file. Values here
/// override command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunConfigFile {
    pub values: BTreeMap<String, String>,
}

const CONFIG_KEYS: &[&str] = &[
    "machine", "env", "loss", "max-len", "steps", "horizon", "seed", "out", "checks", "strings",
    "predictor",
];

/// `key = value` lines; `#` starts a comment; keys restricted to the run
/// options.
pub fn parse_config_file(input: &str) -> Result<RunConfigFile, SpecError> {
    const WHAT: &str = "config file";
    let mut values = BTreeMap::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| SpecError::AtLine {
            what: WHAT,
            line: idx + 1,
            detail: "expected key = value".into(),
        })?;
        let k = k.trim();
        let v = v.trim();
        if !CONFIG_KEYS.contains(&k) {
            return Err(SpecError::AtLine {
                what: WHAT,
                line: idx + 1,
                detail: format!("unknown key {k:?}"),
            });
        }
        if values.insert(k.to_string(), v.to_string()).is_some() {
            return Err(SpecError::AtLine {
                what: WHAT,
                line: idx + 1,
                detail: format!("duplicate key {k:?}"),
            });
        }
    }
    Ok(RunConfigFile { values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_specs() {
        let spec = parse_machine_spec("builtin:v5 s=4 uprime=off").unwrap();
        assert_eq!(spec, MachineSpec::V5 { s: 4, uprime: false });
        let m = spec.build().unwrap();
        assert_eq!(m.tag(), "builtin:v5 s=4 uprime=off");

        assert_eq!(parse_machine_spec("refvm").unwrap(), MachineSpec::RefVm);
        assert_eq!(
            parse_machine_spec("builtin:copy uprime=off").unwrap(),
            MachineSpec::Copy { s: None, uprime: false }
        );
        assert_eq!(
            parse_machine_spec("builtin:copy s=8 uprime=on").unwrap(),
            MachineSpec::Copy { s: Some(8), uprime: true }
        );
        assert_eq!(
            parse_machine_spec("builtin:block s=3 x0=0").unwrap(),
            MachineSpec::Block { s: 3, x0: vec![0] }
        );

        assert!(parse_machine_spec("").is_err());
        assert!(parse_machine_spec("builtin:v5").is_err());
        assert!(parse_machine_spec("builtin:v5 s=x").is_err());
        assert!(parse_machine_spec("builtin:v5 s=4 s=5").is_err());
        assert!(parse_machine_spec("builtin:v5 s=4 bogus=1").is_err());
        assert!(parse_machine_spec("builtin:copy uprime=on").is_err());
        assert!(parse_machine_spec("martian").is_err());
    }

    #[test]
    fn env_specs() {
        assert_eq!(parse_env_spec("det:zeros").unwrap(), EnvSpec::Zeros);
        assert_eq!(
            parse_env_spec("det:prog=0011110").unwrap(),
            EnvSpec::Program(BitString::parse("0011110").unwrap())
        );
        assert_eq!(parse_env_spec("bernoulli:3/8").unwrap(), EnvSpec::Bernoulli("3/8".into()));
        assert_eq!(parse_env_spec("block:s=3,x0=0").unwrap(), EnvSpec::Block { s: 3, x0: vec![0] });
        assert!(parse_env_spec("det:prog=012").is_err());
        assert!(parse_env_spec("bernoulli:x").is_err());
        assert!(parse_env_spec("nonsense").is_err());

        let env = parse_env_spec("det:prog=0011110").unwrap().build(16, 200).unwrap();
        assert!(env.is_deterministic());
    }

    #[test]
    fn loss_specs() {
        let alphabet = Alphabet::binary();
        assert_eq!(parse_loss_spec("error", alphabet).unwrap().name(), "error");
        assert_eq!(parse_loss_spec("fig1", alphabet).unwrap().num_actions(), 3);
        let custom = parse_loss_spec("0 2/3; 1 0", alphabet).unwrap();
        assert_eq!(custom.entry(0, 1), &exact::rat(2, 3));
        assert!(parse_loss_spec("0 x; 1 0", alphabet).is_err());
        assert!(parse_loss_spec("0 2; 1 0", alphabet).is_err()); // out of range
    }

    #[test]
    fn string_sets() {
        let alphabet = Alphabet::binary();
        let set = parse_string_set("0^1..3", alphabet).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set[2].to_string(), "000");

        let set = parse_string_set("eps,01,1^4", alphabet).unwrap();
        assert_eq!(set[0].len(), 0);
        assert_eq!(set[2].to_string(), "1111");

        let set = parse_string_set("prefixes:0101", alphabet).unwrap();
        assert_eq!(set.len(), 5);

        let set = parse_string_set("all:2", alphabet).unwrap();
        assert_eq!(set.len(), 1 + 2 + 4);

        assert!(parse_string_set("", alphabet).is_err());
        assert!(parse_string_set("2^3", alphabet).is_err());
        assert!(parse_string_set("0^9999999", alphabet).is_err());
        assert!(parse_string_set("all:64", alphabet).is_err());
    }

    #[test]
    fn check_lists() {
        let checks = parse_check_list("vi5:s=4,vii3,thm51:trials=1000:seed=7").unwrap();
        assert_eq!(checks.len(), 3);
        assert_eq!(checks[0].name, "vi5");
        assert_eq!(checks[0].params.get("s"), Some(&"4".to_string()));
        assert_eq!(checks[2].params.get("seed"), Some(&"7".to_string()));
        assert!(parse_check_list("").is_err());
        assert!(parse_check_list("vi5:s").is_err());
        assert!(parse_check_list("vi5:s=4:s=5").is_err());
    }

    #[test]
    fn config_files() {
        let cfg = parse_config_file(
            "# run setup\nmachine = builtin:v5 s=4 uprime=off\nseed = 7\nchecks = vi5:s=4\n",
        )
        .unwrap();
        assert_eq!(cfg.values.get("machine"), Some(&"builtin:v5 s=4 uprime=off".to_string()));
        assert_eq!(cfg.values.get("seed"), Some(&"7".to_string()));

        assert!(parse_config_file("bogus = 1").is_err());
        assert!(parse_config_file("machine").is_err());
        assert!(parse_config_file("seed = 1\nseed = 2").is_err());
    }
}
