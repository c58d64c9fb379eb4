//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line with the measured quantities. Every tolerance and
//! threshold is pinned here; run with `--nocapture` to see the lines.

use std::sync::Arc;
use std::time::{Duration, Instant};

use num::{BigRational, One, Zero};
use rayon::prelude::*;

use kmlab::alphabet::{Alphabet, SymbolString};
use kmlab::enumeration::{enumerate_minimal, k_upper, Budget};
use kmlab::exact;
use kmlab::machine::{
    BlockMachine, CopyMachine, MachineHandle, MonotoneMachine, RefVm, V5Machine,
};
use kmlab::predictive::{check_semimeasure, posterior, FromKm, FromM, Predictive, ScaledCapped};
use kmlab::verify::{
    verify_empirical_m_trend, verify_iii_counting, verify_thm51, verify_thm52, verify_vi1,
    verify_vi3, verify_vi5, verify_vi6, verify_vii3, verify_vii5_simple, Measured, Vi6Variant,
};

fn zeros(n: usize) -> SymbolString {
    SymbolString::repeated(Alphabet::binary(), 0, n).unwrap()
}

fn alternating(n: usize) -> SymbolString {
    let syms: Vec<u8> = (0..n).map(|t| (t % 2) as u8).collect();
    SymbolString::new(Alphabet::binary(), syms).unwrap()
}

fn assert_runtime(name: &str, elapsed: Duration, limit: Duration) {
    assert!(
        elapsed <= limit,
        "{name}: runtime {elapsed:?} exceeds the {limit:?} budget"
    );
}

fn rational_quantity(report: &kmlab::verify::TheoremReport, name: &str) -> BigRational {
    match report.quantities.get(name) {
        Some(Measured::Rational(s)) => exact::parse_rational(s).expect("well-formed"),
        Some(Measured::Int(n)) => exact::rat_int(*n),
        other => panic!("quantity {name} missing or non-rational: {other:?}"),
    }
}

/// Criterion 1: the counterexample machine attains its off-sequence mass
/// exactly, in exact arithmetic, for s in {2,3,4,5}, in under a second.
///
/// Exact attained values: every code step t in {2..2^s-2} has posterior
/// exactly 1 (2^s-3 of them) and the t=1 boundary term is exactly 2^-s,
/// because the empty context has mass 1; the prior posterior is exactly
/// 1/(2^s - t) from t=2 on. The reports carry the boundary note.
#[test]
fn criterion_1_counterexample_mass() {
    let start = Instant::now();
    for s in [2u32, 3, 4, 5] {
        let report = verify_vi5(s).expect("vi5 runs");
        assert!(report.verdict, "vi5 s={s}: {}", report.to_json_line());
        assert!(report.recheck(), "report must be self-auditing");

        let expected =
            exact::rat_int((1i64 << s) - 3) + exact::pow2(-(s as i64));
        assert_eq!(rational_quantity(&report, "m_offseq_mass"), expected, "s={s}");
        assert_eq!(
            rational_quantity(&report, "code_step_mass"),
            exact::rat_int((1i64 << s) - 3),
            "s={s}: every code step contributes exactly 1"
        );
        assert_eq!(
            rational_quantity(&report, "first_step_posterior"),
            exact::pow2(-(s as i64)),
            "s={s}: boundary term"
        );
    }
    let elapsed = start.elapsed();
    assert_runtime("criterion 1", elapsed, Duration::from_secs(1));
    println!(
        "criterion 1: PASS: off-sequence mass exactly 2^s-3 + 2^-s for s in {{2,3,4,5}}, \
         prior posteriors exactly 1/(2^s-t) from t=2 ({elapsed:?})"
    );
}

/// Criterion 2: the fixed loss-ratio constants. 16/15 exactly for the
/// three-action construction; 3/2 at every step on the plain copy machine;
/// with the reference machine embedded at s=8, the favourable frequency
/// over 10^4 sampled steps is at least 1 - 2^-8 minus three binomial sigma.
/// All in under 30 seconds.
#[test]
fn criterion_2_loss_ratio_constants() {
    let start = Instant::now();

    let vii3 = verify_vii3(None).expect("vii3 runs");
    assert!(vii3.verdict, "{}", vii3.to_json_line());
    assert_eq!(rational_quantity(&vii3, "main_ratio"), exact::rat(16, 15));

    let vii5 = verify_vii5_simple(8, 10_000, 42).expect("vii5 runs");
    assert!(vii5.verdict, "{}", vii5.to_json_line());
    assert_eq!(rational_quantity(&vii5, "plain_ratio"), exact::rat(3, 2));
    let freq = rational_quantity(&vii5, "favourable_frequency");
    let bound = BigRational::one() - exact::pow2(-8);
    // The margin check lives in the report; assert the raw comparison here
    // too with the exact three-sigma tolerance.
    let sigma2 = &bound * (BigRational::one() - &bound) / exact::rat_int(10_000);
    if freq < bound {
        let deficit = &bound - &freq;
        assert!(&deficit * &deficit <= exact::rat_int(9) * sigma2, "frequency {freq} too low");
    }

    let elapsed = start.elapsed();
    assert_runtime("criterion 2", elapsed, Duration::from_secs(30));
    println!(
        "criterion 2: PASS: ratio exactly 16/15 and 3/2; embedded-machine frequency {} \
         >= 1 - 2^-8 - 3 sigma ({elapsed:?})",
        exact::to_f64(&freq)
    );
}

/// Criterion 3: the bound suite along computable test sequences on every
/// builtin machine, horizon 64 where the closed forms reach it, with the
/// telescoping identity exact. The counting bound's horizon is capped where
/// a non-universal builtin's zero-mass alternatives void its premise (see
/// the machine-by-machine comments). Under a minute.
#[test]
fn criterion_3_bound_suite() {
    let start = Instant::now();
    let v5: MachineHandle = Arc::new(V5Machine::new(4, None).unwrap());
    let copy: MachineHandle = Arc::new(CopyMachine::new());
    let block: MachineHandle = Arc::new(BlockMachine::binary_single(3, None).unwrap());
    let refvm: MachineHandle = Arc::new(RefVm::new());

    let oracle_budget = Budget::new(8, 200);
    let ref_budget = Budget::new(14, 2000);

    // A period-3 sequence emitted by a fixed reference-machine program.
    let prog = kmlab::BitString::parse("0000011111110").unwrap();
    let prog_out = RefVm::new().run(&prog, 2000).output;
    assert!(prog_out.len() >= 64, "program-generated sequence long enough");
    let period3 = prog_out.prefix(64);

    // Repeated flushing blocks for the block machine.
    let block_seq = {
        let mut s = SymbolString::empty(Alphabet::binary());
        for _ in 0..16 {
            s = s.concat(&SymbolString::bits("0111"));
        }
        s
    };

    // (machine, budget, sequence, horizon for the counting bound)
    let cases: Vec<(&MachineHandle, Budget, SymbolString, Option<usize>)> = vec![
        // v5 reaches horizon 64 on its zero sequence; the counting bound is
        // valid to the code range 2^s-2 = 14.
        (&v5, oracle_budget, zeros(64), Some(14)),
        // The copy machine's closed form is total: all three sequences to 64.
        (&copy, oracle_budget, zeros(64), Some(64)),
        (&copy, oracle_budget, alternating(64), Some(64)),
        (&copy, oracle_budget, period3.clone(), Some(64)),
        // Block machine: off-block symbols have zero mass, counting capped
        // at one block.
        (&block, oracle_budget, block_seq, Some(4)),
        // Reference machine by enumeration; counting capped where single-
        // symbol alternatives stay within the length budget.
        (&refvm, ref_budget, zeros(64), Some(7)),
        (&refvm, ref_budget, alternating(64), Some(7)),
        (&refvm, ref_budget, period3, Some(7)),
    ];

    for (machine, budget, x, counting_horizon) in &cases {
        let tag = machine.tag();
        let r = verify_vi1(machine, x, *budget)
            .unwrap_or_else(|e| panic!("vi1 {tag} {x}: {e}"));
        assert!(r.verdict, "vi1 {tag}: {}", r.to_json_line());
        // Telescoping is one of vi1's recorded relations; spot-check it.
        assert!(
            r.relations.iter().any(|rel| rel.lhs == "telescoped_neg_log_sum" && rel.holds),
            "telescoping identity on {tag}"
        );
        let r = verify_vi3(machine, x, *budget).unwrap();
        assert!(r.verdict, "vi3 {tag}: {}", r.to_json_line());
        if let Some(h) = counting_horizon {
            let r = verify_iii_counting(machine, &x.prefix(*h), *budget).unwrap();
            assert!(r.verdict, "iii-counting {tag} h={h}: {}", r.to_json_line());
        }
    }

    // Sequences off a machine's support fail the checks' preconditions
    // rather than producing undefined arithmetic.
    let err = verify_vi1(&v5, &alternating(8), oracle_budget).unwrap_err();
    assert!(err.to_string().contains("zero mass"), "got: {err}");

    let elapsed = start.elapsed();
    assert_runtime("criterion 3", elapsed, Duration::from_secs(60));
    println!(
        "criterion 3: PASS: on/off-sequence bounds and counting bound hold with exact \
         telescoping on {} machine/sequence pairs ({elapsed:?})",
        cases.len()
    );
}

/// Criterion 4: non-density of the posterior ranges, exhaustively to depth
/// 6, with the exact gap constants and zero exceptions.
#[test]
fn criterion_4_range_non_density() {
    let start = Instant::now();
    let raw = verify_vi6(Vi6Variant::Raw).expect("raw scan");
    assert!(raw.verdict, "{}", raw.to_json_line());
    assert_eq!(rational_quantity(&raw, "min_gap"), exact::rat(1, 8));

    let norm = verify_vi6(Vi6Variant::Normalized).expect("normalized scan");
    assert!(norm.verdict, "{}", norm.to_json_line());
    assert_eq!(rational_quantity(&norm, "min_gap"), exact::rat(1, 12));

    let checked_raw = match raw.quantities.get("posteriors_checked") {
        Some(Measured::Int(n)) => *n,
        _ => 0,
    };
    let elapsed = start.elapsed();
    println!(
        "criterion 4: PASS: {checked_raw} raw posteriors in 2^-N0 (gap to 3/8 exactly 1/8), \
         normalized values in 1/(1+2^Z) with closure points (gap to 5/12 exactly 1/12) ({elapsed:?})"
    );
}

/// Criterion 5: the budgeted ordering -log M_lower <= Km_upper <= K_upper
/// pointwise on the reference machine for every string of length at most 6
/// at L=16, T=10^4, in under two minutes (parallel over strings).
#[test]
fn criterion_5_ordering() {
    let start = Instant::now();
    let budget = Budget::new(16, 10_000);
    let machine = RefVm::new();

    let mut strings = Vec::new();
    for n in 0..=6usize {
        strings.extend(SymbolString::all_of_length(Alphabet::binary(), n));
    }
    assert_eq!(strings.len(), 127);

    let failures: Vec<String> = strings
        .par_iter()
        .filter_map(|x| {
            let set = enumerate_minimal(&machine, x, budget);
            let mass = set.mass();
            let km = set.min_len();
            let k = k_upper(&machine, x, budget).bits().expect("bits");
            // -log M <= Km  <=>  M >= 2^-Km; Km <= K directly.
            if mass < km.mass() {
                return Some(format!("{x}: M_lower {} below 2^-Km", exact::format_rational(&mass)));
            }
            if km > k {
                return Some(format!("{x}: Km {km} > K {k}"));
            }
            // Within this budget every string is reachable and haltable.
            if !km.is_finite() || !k.is_finite() {
                return Some(format!("{x}: unreachable at L=16"));
            }
            None
        })
        .collect();
    assert!(failures.is_empty(), "ordering failures: {failures:?}");

    let elapsed = start.elapsed();
    assert_runtime("criterion 5", elapsed, Duration::from_secs(120));
    println!(
        "criterion 5: PASS: -log M_lower <= Km_upper <= K_upper on all 127 strings \
         (L=16, T=10^4) ({elapsed:?})"
    );
}

/// Criterion 6: the enumerated prior is a semimeasure (zero violations to
/// depth 5) on every machine and budget, while the code-length function
/// fails the semimeasure scan exactly at the contexts its closed form
/// predicts.
#[test]
fn criterion_6_semimeasure_laws() {
    let start = Instant::now();
    let refvm = || Arc::new(RefVm::new()) as MachineHandle;
    let machines: Vec<MachineHandle> = vec![
        Arc::new(V5Machine::new(4, None).unwrap()),
        Arc::new(V5Machine::new(3, Some(refvm())).unwrap()),
        Arc::new(CopyMachine::new()),
        Arc::new(CopyMachine::with_uprime(4, refvm()).unwrap()),
        Arc::new(BlockMachine::binary_single(3, None).unwrap()),
        refvm(),
    ];
    for machine in &machines {
        for budget in [Budget::new(8, 200), Budget::new(12, 1000)] {
            let m = FromM::new(machine.clone(), budget);
            let report = check_semimeasure(&m, 5).expect("measurable");
            assert!(
                report.is_semimeasure(),
                "M_lower violates the semimeasure law on {} at {budget}: {:?}",
                machine.tag(),
                report.violations.first().map(|v| v.context.to_string())
            );
        }
    }

    // The code-length function fails exactly at 0^j for j = 1..4 on the
    // counterexample machine (depth 5 scans contexts up to length 4).
    let v5: MachineHandle = Arc::new(V5Machine::new(4, None).unwrap());
    let km = FromKm::new(v5, Budget::new(8, 200));
    let report = check_semimeasure(&km, 5).expect("scan");
    let got: Vec<String> =
        report.violations.iter().map(|v| v.context.to_string()).collect();
    assert_eq!(got, vec!["0", "00", "000", "0000"], "predicted violation contexts");

    let elapsed = start.elapsed();
    println!(
        "criterion 6: PASS: prior semimeasure on {} machine/budget pairs; code-length \
         fails exactly at 0^j, j=1..4 ({elapsed:?})",
        machines.len() * 2
    );
}

/// Criterion 7: randomized property suites, 10^4 instances each with zero
/// violations; the non-semimeasure convergence bound checked analytically
/// (b = M_lower, a = c = 1), on the capped doubled prior, and across 10^4
/// randomized (machine, sequence, factor) instances with certified log
/// enclosures.
#[test]
fn criterion_7_property_suites() {
    let start = Instant::now();

    let thm51 = verify_thm51(10_000, 7).expect("thm51 runs");
    assert!(thm51.verdict, "{}", thm51.to_json_line());

    // Analytic case.
    let v5: MachineHandle = Arc::new(V5Machine::new(4, None).unwrap());
    let budget = Budget::new(6, 64);
    let one = exact::rat_int(1);
    let m = FromM::new(v5.clone(), budget);
    let r = verify_thm52(&m, &one, Some(&one), &v5, &zeros(10), budget).expect("analytic");
    assert!(r.verdict, "{}", r.to_json_line());

    // Perturbed case via the report path.
    let m_arc: Arc<dyn Predictive> = Arc::new(FromM::new(v5.clone(), budget));
    let doubled = ScaledCapped::new(m_arc, exact::rat_int(2));
    let two = exact::rat_int(2);
    let r = verify_thm52(&doubled, &one, Some(&two), &v5, &zeros(5), budget).expect("perturbed");
    assert!(r.verdict, "{}", r.to_json_line());

    // Randomized thm52 instances with shared caches: capped scalings of the
    // prior satisfy a=1 and c=factor by construction; the bound must hold
    // with certified enclosures on every sampled sequence.
    use rand::Rng;
    let mut rng = kmlab::environments::Environment::rng(11);
    let machines: Vec<MachineHandle> = vec![
        Arc::new(V5Machine::new(4, None).unwrap()),
        Arc::new(CopyMachine::new()),
        Arc::new(RefVm::new()),
    ];
    let priors: Vec<Arc<FromM>> = machines
        .iter()
        .map(|m| Arc::new(FromM::new(m.clone(), Budget::new(8, 200))))
        .collect();
    let mut checked = 0u64;
    let mut attempts = 0u64;
    while checked < 10_000 {
        attempts += 1;
        assert!(attempts < 100_000, "sampling starved");
        let idx = rng.gen_range(0..machines.len());
        let prior = &priors[idx];
        let len = rng.gen_range(0..=6usize);
        let syms: Vec<u8> = (0..len).map(|_| rng.gen_range(0..=1u8)).collect();
        let x = SymbolString::new(Alphabet::binary(), syms).unwrap();
        // Resample sequences the machine cannot reach (zero prior mass at
        // some prefix): the chain-rule posterior is undefined there.
        if (0..=x.len()).any(|t| prior.mass(&x.prefix(t)).unwrap().is_zero()) {
            continue;
        }
        let factor = exact::rat(rng.gen_range(1..=4i64), 1);
        let b = ScaledCapped::new(prior.clone() as Arc<dyn Predictive>, factor.clone());

        let mut onseq = exact::rat_int(0);
        let mut offseq = exact::rat_int(0);
        for t in 0..x.len() {
            let ctx = x.prefix(t);
            for a in Alphabet::binary().symbols() {
                let p = posterior(&b, &ctx, a).unwrap();
                if a == x.symbol(t) {
                    onseq += BigRational::one() - &p;
                } else {
                    offseq += &p;
                }
            }
        }
        let mass = prior.mass(&x).unwrap();
        let (ln_lo, _) = exact::ln_bounds(&mass.recip());
        assert!(onseq <= ln_lo || onseq <= exact::rat_int(0), "on-sequence bound at {x}");
        assert!(offseq <= &factor * &ln_lo || offseq.is_zero(), "off-sequence bound at {x}");
        checked += 1;
    }
    assert_eq!(checked, 10_000);

    let elapsed = start.elapsed();
    assert_runtime("criterion 7", elapsed, Duration::from_secs(120));
    println!(
        "criterion 7: PASS: 10^4 monotonicity/loss-bound instances and {checked} \
         certified convergence-bound instances, zero violations ({elapsed:?})"
    );
}

/// Criterion 8: what is not reproducible at desk scale, stated explicitly.
/// The in-mean-sum constants involve the complexity of the generating
/// function, the prior/code-length gap grows without bound only
/// asymptotically, and the almost-sure strengthening of the embedded-copy
/// argument is a limit statement; all three are replaced here by the
/// randomized property suites and by empirical trend reporting.
#[test]
fn criterion_8_stated_non_reproducibles() {
    let report = verify_empirical_m_trend(3).expect("trend runs");
    assert!(report.verdict, "{}", report.to_json_line());
    assert!(
        report.notes.iter().any(|n| n.contains("empirical, not a theorem check")),
        "the trend report labels itself empirical"
    );
    println!(
        "criterion 8: PASS: declared substitutes in place: property suites (criterion 7) \
         and empirical trend reporting (cumulative mean-square error falls from {} to {} \
         on the deterministic run; the fair-coin series is recorded unasserted)",
        rational_quantity(&report, "det_avg_first"),
        rational_quantity(&report, "det_avg_last"),
    );
}
