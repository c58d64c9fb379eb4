//! Command-line front end: estimate complexities, run predictors, execute
//! theorem checks, and emit reproducible reports.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use kmlab::cache::{cached_estimate, EstimateCache};
use kmlab::decision::{LossRatio, PredictorTrace, Truncation};
use kmlab::enumeration::{Budget, EstimateKind};
use kmlab::environments::Environment;
use kmlab::exact;
use kmlab::machine::MachineHandle;
use kmlab::predictive::{FromK, FromKm, FromM, Predictive, SimpleMdl};
use kmlab::textspec::{
    parse_check_list, parse_config_file, parse_env_spec, parse_loss_spec, parse_machine_spec,
    parse_string_set, CheckSpec,
};
use kmlab::verify::run_check;

#[derive(Parser)]
#[command(name = "kmlab", version, about = "complexity-based sequence prediction lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default, Clone)]
struct RunArgs {
    /// Machine spec, e.g. `refvm` or `builtin:v5 s=4 uprime=off`
    #[arg(long)]
    machine: Option<String>,
    /// Environment spec, e.g. `det:zeros` or `bernoulli:1/2`
    #[arg(long)]
    env: Option<String>,
    /// Loss spec: `error`, `fig1`, `copyloss`, or inline rows
    #[arg(long)]
    loss: Option<String>,
    /// Enumeration bound on program length in bits
    #[arg(long = "max-len")]
    max_len: Option<u32>,
    /// Enumeration step budget per program run
    #[arg(long)]
    steps: Option<u64>,
    /// Prediction horizon
    #[arg(long)]
    horizon: Option<usize>,
    /// RNG seed (chacha8), recorded in every output
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check list, e.g. `vi5:s=4,vii3`
    #[arg(long)]
    checks: Option<String>,
    /// String set, e.g. `0^1..14` or `prefixes:0101`
    #[arg(long)]
    strings: Option<String>,
    /// Predictor: km (default), m, k, mdl, or mu
    #[arg(long)]
    predictor: Option<String>,
    /// Config file of `key = value` lines; its values override flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate complexity estimates for a set of strings
    Estimate {
        #[command(flatten)]
        run: RunArgs,
        /// Optional estimate cache file (read and updated)
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Run a loss-minimizing predictor against an environment
    Predict {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run theorem checks and report pass/fail
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Single check name, e.g. `vi5` (alternative to --checks)
        check: Option<String>,
        /// Parameter s for the selected check
        #[arg(long)]
        s: Option<u32>,
        /// Trials for randomized checks
        #[arg(long)]
        trials: Option<u64>,
        /// Samples for sampled checks
        #[arg(long)]
        samples: Option<u64>,
        /// Epsilon for sharpened losses, as a rational
        #[arg(long)]
        eps: Option<String>,
        /// Variant selector (e.g. raw/normalized)
        #[arg(long)]
        variant: Option<String>,
        /// Outcome symbols for the block construction
        #[arg(long)]
        x0: Option<String>,
        /// Block count for the block construction
        #[arg(long)]
        blocks: Option<usize>,
        /// Sequence argument for sequence-based checks
        #[arg(long)]
        x: Option<String>,
    },
}

/// Flags merged with the config file; config wins.
struct Resolved {
    values: BTreeMap<String, String>,
}

impl Resolved {
    fn new(run: &RunArgs) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        };
        set("machine", run.machine.clone());
        set("env", run.env.clone());
        set("loss", run.loss.clone());
        set("max-len", run.max_len.map(|v| v.to_string()));
        set("steps", run.steps.map(|v| v.to_string()));
        set("horizon", run.horizon.map(|v| v.to_string()));
        set("seed", run.seed.map(|v| v.to_string()));
        set("out", run.out.as_ref().map(|p| p.display().to_string()));
        set("checks", run.checks.clone());
        set("strings", run.strings.clone());
        set("predictor", run.predictor.clone());
        if let Some(path) = &run.config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let file = parse_config_file(&text)?;
            for (k, v) in file.values {
                values.insert(k, v);
            }
        }
        Ok(Resolved { values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| anyhow!("missing required option --{key}"))
    }

    fn u32_or(&self, key: &str, default: u32) -> Result<u32> {
        self.get(key).map_or(Ok(default), |v| v.parse().context(key.to_string()))
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        self.get(key).map_or(Ok(default), |v| v.parse().context(key.to_string()))
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        self.get(key).map_or(Ok(default), |v| v.parse().context(key.to_string()))
    }

    /// The header comment embedded in every emitted file: the full resolved
    /// configuration, sorted, so identical runs are byte-identical.
    fn header(&self, command: &str, defaults: &[(&str, String)]) -> String {
        let mut merged = self.values.clone();
        for (k, v) in defaults {
            merged.entry(k.to_string()).or_insert_with(|| v.clone());
        }
        let mut out = format!("# kmlab {command}\n");
        for (k, v) in &merged {
            if k != "out" {
                out.push_str(&format!("# {k} = {v}\n"));
            }
        }
        out
    }

    fn write_output(&self, body: &str) -> Result<()> {
        match self.get("out") {
            None => {
                print!("{body}");
                Ok(())
            }
            Some(path) => std::fs::write(path, body).with_context(|| format!("writing {path}")),
        }
    }
}

fn build_machine(resolved: &Resolved) -> Result<MachineHandle> {
    let spec = parse_machine_spec(resolved.require("machine")?)?;
    Ok(spec.build()?)
}

fn cmd_estimate(run: RunArgs, cache_path: Option<PathBuf>) -> Result<()> {
    let resolved = Resolved::new(&run)?;
    let machine = build_machine(&resolved)?;
    let max_len = resolved.u32_or("max-len", 12)?;
    let steps = resolved.u64_or("steps", 1000)?;
    if max_len == 0 || steps == 0 {
        eprintln!("warning: zero budget; only the empty program is reachable");
    }
    let budget = Budget::new(max_len, steps);
    let strings = parse_string_set(resolved.require("strings")?, machine.alphabet())?;

    let mut cache = match &cache_path {
        Some(path) if path.exists() => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading cache {}", path.display()))?;
            EstimateCache::parse(&text)?
        }
        _ => EstimateCache::new(),
    };

    let defaults = [("max-len", max_len.to_string()), ("steps", steps.to_string())];
    let mut body = resolved.header("estimate", &defaults);
    body.push_str("x,km_upper,m_lower,neg_log2_m,k_upper,max_len,steps\n");
    for x in &strings {
        let km = cached_estimate(&mut cache, machine.as_ref(), x, EstimateKind::Km, budget);
        let m = cached_estimate(&mut cache, machine.as_ref(), x, EstimateKind::KM, budget);
        let k = cached_estimate(&mut cache, machine.as_ref(), x, EstimateKind::K, budget);
        let mass = m.mass();
        let neg_log = if mass == exact::rat_int(0) {
            "inf".to_string()
        } else {
            format!("{:.6}", -exact::to_f64(&mass).log2())
        };
        body.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            if x.is_empty() { "eps".to_string() } else { x.to_string() },
            km.bits().expect("bits"),
            exact::format_rational(&mass),
            neg_log,
            k.bits().expect("bits"),
            max_len,
            steps
        ));
    }
    resolved.write_output(&body)?;
    if let Some(path) = cache_path {
        std::fs::write(&path, cache.to_text())
            .with_context(|| format!("writing cache {}", path.display()))?;
    }
    Ok(())
}

fn build_predictor(
    name: &str,
    machine: &MachineHandle,
    env: &Arc<Environment>,
    budget: Budget,
) -> Result<Arc<dyn Predictive>> {
    Ok(match name {
        "km" => Arc::new(FromKm::new(machine.clone(), budget)),
        "m" => Arc::new(FromM::new(machine.clone(), budget)),
        "k" => Arc::new(FromK::new(machine.clone(), budget)),
        "mdl" => Arc::new(SimpleMdl::new(machine.clone(), budget)),
        "mu" => Arc::new(env.as_predictive()),
        other => bail!("unknown predictor {other:?} (expected km, m, k, mdl, or mu)"),
    })
}

fn ratio_columns(ratio: &LossRatio) -> (String, String) {
    match ratio {
        LossRatio::Finite(r) => (exact::format_rational(r), format!("{:.6}", exact::to_f64(r))),
        LossRatio::Infinite => ("inf".to_string(), "inf".to_string()),
    }
}

fn trace_csv(trace: &PredictorTrace, header: String, alphabet_size: usize) -> String {
    let mut body = header;
    let mut cols = vec!["t".to_string(), "x_t".to_string()];
    for a in 0..alphabet_size {
        cols.push(format!("p{a}"));
        cols.push(format!("p{a}_float"));
    }
    cols.extend(
        ["y_t", "l_t", "l_t_float", "l_t_opt", "l_t_opt_float", "ratio", "ratio_float"]
            .map(String::from),
    );
    body.push_str(&cols.join(","));
    body.push('\n');
    for step in &trace.steps {
        let mut row = vec![step.t.to_string(), step.symbol.to_string()];
        for v in &step.predictor_posteriors.values {
            row.push(exact::format_rational(v));
            row.push(format!("{:.6}", exact::to_f64(v)));
        }
        row.push(step.action.to_string());
        row.push(exact::format_rational(&step.inst_loss));
        row.push(format!("{:.6}", exact::to_f64(&step.inst_loss)));
        row.push(exact::format_rational(&step.optimal_loss));
        row.push(format!("{:.6}", exact::to_f64(&step.optimal_loss)));
        let (r, rf) = ratio_columns(&step.ratio());
        row.push(r);
        row.push(rf);
        body.push_str(&row.join(","));
        body.push('\n');
    }
    match &trace.truncation {
        Some(Truncation::PredictorUndefined { t, reason }) => {
            body.push_str(&format!("# truncated at t={t}: {reason}\n"));
        }
        Some(Truncation::EnvironmentExhausted { t }) => {
            body.push_str(&format!("# truncated at t={t}: environment exhausted\n"));
        }
        None => {}
    }
    body
}

fn cmd_predict(run: RunArgs) -> Result<()> {
    let resolved = Resolved::new(&run)?;
    let machine = build_machine(&resolved)?;
    let horizon = resolved.usize_or("horizon", 32)?;
    let seed = resolved.u64_or("seed", 0)?;
    let max_len = resolved.u32_or("max-len", 12)?;
    let steps = resolved.u64_or("steps", 1000)?;
    let budget = Budget::new(max_len, steps);

    let env_spec = parse_env_spec(resolved.require("env")?)?;
    let env = Arc::new(env_spec.build(horizon, steps.max(4 * horizon as u64))?);
    if machine.alphabet() != env.alphabet() {
        bail!(
            "machine alphabet (size {}) does not match environment alphabet (size {})",
            machine.alphabet().size(),
            env.alphabet().size()
        );
    }
    let loss = parse_loss_spec(resolved.get("loss").unwrap_or("error"), env.alphabet())?;
    let predictor_name = resolved.get("predictor").unwrap_or("km");
    let rho = build_predictor(predictor_name, &machine, &env, budget)?;

    let trace = kmlab::decision::run_predictor(rho.as_ref(), &env, &loss, horizon, seed);
    let defaults = [
        ("horizon", horizon.to_string()),
        ("seed", seed.to_string()),
        ("max-len", max_len.to_string()),
        ("steps", steps.to_string()),
        ("loss", loss.name().to_string()),
        ("predictor", predictor_name.to_string()),
        ("rng", kmlab::environments::RNG_ALGORITHM.to_string()),
    ];
    let header = resolved.header("predict", &defaults);
    let body = trace_csv(&trace, header, env.alphabet().size());
    resolved.write_output(&body)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    run: RunArgs,
    check: Option<String>,
    s: Option<u32>,
    trials: Option<u64>,
    samples: Option<u64>,
    eps: Option<String>,
    variant: Option<String>,
    x0: Option<String>,
    blocks: Option<usize>,
    x: Option<String>,
) -> Result<bool> {
    let resolved = Resolved::new(&run)?;
    let seed = resolved.u64_or("seed", 0)?;

    let checks: Vec<CheckSpec> = match (check, resolved.get("checks")) {
        (Some(_), Some(_)) => {
            bail!("give either a positional check name or --checks, not both")
        }
        (Some(name), None) => {
            let mut params = BTreeMap::new();
            let mut put = |k: &str, v: Option<String>| {
                if let Some(v) = v {
                    params.insert(k.to_string(), v);
                }
            };
            put("s", s.map(|v| v.to_string()));
            put("trials", trials.map(|v| v.to_string()));
            put("samples", samples.map(|v| v.to_string()));
            put("eps", eps);
            put("variant", variant);
            put("x0", x0);
            put("blocks", blocks.map(|v| v.to_string()));
            put("x", x);
            put("max-len", resolved.get("max-len").map(String::from));
            put("steps", resolved.get("steps").map(String::from));
            vec![CheckSpec { name, params }]
        }
        (None, Some(list)) => parse_check_list(list)?,
        (None, None) => bail!("verify needs a check name or --checks"),
    };

    let machine = match resolved.get("machine") {
        Some(spec) => Some(parse_machine_spec(spec)?.build()?),
        None => None,
    };

    let defaults = [("seed", seed.to_string())];
    let mut body = resolved.header("verify", &defaults);
    let mut all_pass = true;
    for spec in &checks {
        let report = run_check(spec, machine.as_ref(), seed)
            .with_context(|| format!("check {}", spec.name))?;
        eprintln!("{}  ({:?})", report.summary_line(), report.runtime);
        all_pass &= report.verdict;
        body.push_str(&report.to_json_line());
        body.push('\n');
    }
    resolved.write_output(&body)?;
    Ok(all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Estimate { run, cache } => cmd_estimate(run, cache).map(|_| true),
        Command::Predict { run } => cmd_predict(run).map(|_| true),
        Command::Verify { run, check, s, trials, samples, eps, variant, x0, blocks, x } => {
            cmd_verify(run, check, s, trials, samples, eps, variant, x0, blocks, x)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
