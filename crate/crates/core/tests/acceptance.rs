//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::One;
use substoch_core::classification::{classify, ClassifyOptions, Confidence, Evidence, Verdict};
use substoch_core::constructions::{
    BeadLengths, BeadedWeighting, EpsilonSchedule, Example1, Example2, FiniteFamily, GapTarget, Prop2, TargetRule, Q,
};
use substoch_core::cycles::omega;
use substoch_core::digraph::{WeightedDigraph, WeightingTag};
use substoch_core::family::TruncationFamily;
use substoch_core::fvs::{min_cycle_transversal, Optimality, DEFAULT_NODE_BUDGET};
use substoch_core::inequalities::{random_instance, run_suite, signs_agree, Suite, SuiteSpec};
use substoch_core::scalar::{rational, rational_to_f64, Rational};
use substoch_core::special::zeta;
use substoch_core::spectral::{coates_charpoly, elimination_charpoly, perron_root, DEFAULT_UNION_BUDGET};
use substoch_core::sweep::{fit_decay, log_grid};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(elapsed.as_secs() < limit_s, format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64()))
}

fn c1_coates_identity() -> Outcome {
    let t = Instant::now();
    let spec = SuiteSpec { count: 20, seed: 101, order_min: 2, order_max: 8, max_denominator: 9 };
    for i in 0..20 {
        let d = random_instance(&spec, i);
        let a = coates_charpoly(&d, DEFAULT_UNION_BUDGET).map_err(|e| e.to_string())?.trimmed();
        let b = elimination_charpoly(&d).trimmed();
        ensure(a == b, format!("instance {i}: coefficients differ"))?;
    }
    within(t.elapsed(), 10)?;
    Ok("20/20 instances match coefficient by coefficient".into())
}

fn c2_chains() -> Outcome {
    let t = Instant::now();
    let spec = SuiteSpec { count: 100, seed: 202, order_min: 2, order_max: 8, max_denominator: 8 };
    let mut parts = Vec::new();
    for s in [Suite::BoyleHandelman, Suite::Ksv] {
        let e = run_suite::<Rational>(s, &spec);
        let f = run_suite::<f64>(s, &spec);
        ensure(e.instances_tested == 100, format!("{}: {} instances tested", e.name, e.instances_tested))?;
        ensure(e.passed(), format!("{}: {} exact violations", e.name, e.violations.len()))?;
        ensure(signs_agree(e.signs(), f.signs()), format!("{}: float signs disagree", e.name))?;
        parts.push(format!("{} min margin {}", e.name, e.min_margin_exact.unwrap_or_default()));
    }
    within(t.elapsed(), 30)?;
    Ok(format!("0 violations, float signs agree; {}", parts.join(", ")))
}

fn c3_resolvent_suites() -> Outcome {
    let t = Instant::now();
    let spec = SuiteSpec { count: 100, seed: 303, order_min: 2, order_max: 12, max_denominator: 6 };
    let mut parts = Vec::new();
    for s in [Suite::LemmaA1, Suite::LemmaA2, Suite::A1Product, Suite::SigmaK] {
        let r = run_suite::<Rational>(s, &spec);
        ensure(r.instances_tested == 100, format!("{}: {} instances tested", r.name, r.instances_tested))?;
        ensure(r.passed(), format!("{}: {} violations", r.name, r.violations.len()))?;
        parts.push(format!("{} min margin {:.3e}", r.name, r.min_margin.unwrap_or(f64::NAN)));
    }
    within(t.elapsed(), 60)?;
    Ok(parts.join(", "))
}

fn c4_zeta_identity() -> Outcome {
    let t = Instant::now();
    let spec = SuiteSpec { count: 50, seed: 404, order_min: 2, order_max: 8, max_denominator: 8 };
    let r = run_suite::<Rational>(Suite::Zeta, &spec);
    ensure(r.instances_tested == 50, "not every instance ran")?;
    ensure(r.passed(), format!("{} inequalities", r.violations.len()))?;
    let skipped = r.notes.len();
    within(t.elapsed(), 20)?;
    Ok(format!("{} exact equalities over 50 instances, {skipped} singular samples skipped", r.relations_checked))
}

fn c5_example2() -> Outcome {
    let t = Instant::now();
    let e = Example2::power_law(0.75).map_err(|e| e.to_string())?;
    let f: TruncationFamily<f64> = e.family().map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for n in [2, 10, 100, 500] {
        let r = perron_root(&f.truncate(n).map_err(|e| e.to_string())?, 1e-14).value;
        worst = worst.max((r - e.lambda(n)).abs() / e.lambda(n));
    }
    ensure(worst <= 1e-10, format!("relative error {worst:.2e}"))?;
    let series: Vec<(f64, f64)> = log_grid(1000, 100_000, 21).into_iter().map(|n| (n as f64, e.gap(n))).collect();
    let fit = fit_decay(&series, None, false).map_err(|e| e.to_string())?;
    ensure((-0.6..=-0.4).contains(&fit.slope), format!("slope {:.4}", fit.slope))?;
    within(t.elapsed(), 60)?;
    Ok(format!("max relative error {worst:.1e}; gap slope {:.4}", fit.slope))
}

fn c6_example1_rate() -> Outcome {
    let t = Instant::now();
    let e = Example1::power_law(0.5).map_err(|e| e.to_string())?;
    let f: TruncationFamily<f64> = e.family().map_err(|e| e.to_string())?;
    // the closed form against cycle enumeration
    for n in [100, 1000] {
        let d = f.truncate(n).map_err(|e| e.to_string())?;
        let w = omega(&d, n, false, None).map_err(|_| "cycle budget")?.ok_or("no cycle")?.value();
        ensure((w - e.omega_closed_form(n)).abs() < 1e-12, format!("omega mismatch at n = {n}"))?;
    }
    let mut worst_rate: f64 = 0.0;
    for n in log_grid(100, 10_000, 41) {
        let nf = n as f64;
        worst_rate = worst_rate.max(nf * (1.0 - e.omega_closed_form(n)) / nf.ln());
    }
    ensure(worst_rate <= 2.0, format!("n(1 - omega)/ln n reached {worst_rate:.3}"))?;
    let floor = 0.5 / zeta(1.5);
    let mut least = f64::INFINITY;
    for n in log_grid(2, 1000, 30) {
        let lam = perron_root(&f.truncate(n).map_err(|e| e.to_string())?, 1e-14).value;
        least = least.min(n as f64 * (1.0 - lam));
    }
    ensure(least >= floor, format!("n(1 - lambda_n) fell to {least:.4} < {floor:.4}"))?;
    within(t.elapsed(), 300)?;
    Ok(format!("max n(1-omega)/ln n = {worst_rate:.3} <= 2; min n(1-lambda_n) = {least:.4} >= {floor:.4}"))
}

fn c7_prop2() -> Outcome {
    let t = Instant::now();
    let p = Prop2::new(EpsilonSchedule::power_of_four(6).map_err(|e| e.to_string())?, 1).map_err(|e| e.to_string())?;
    let r = p.report();
    for c in &r.cycles {
        ensure(c.inequality.as_ref().is_none_or(|i| i.holds), format!("length inequality fails at k = {}", c.k))?;
        ensure(c.gain_certified, format!("gain of cycle {} below 1 - 2 eps", c.k))?;
        ensure(c.out_weight_ok, format!("out-weight above 1 - eps/2 at k = {}", c.k))?;
    }
    ensure(r.gamma_class == WeightingTag::StrictlySubstochastic, format!("class {:?}", r.gamma_class))?;
    ensure(r.all_certified, "report not certified")?;
    let bound = Rational::one() - rational(2, 4096);
    ensure(r.omega_lower_bound == bound.to_string(), "omega bound is not 1 - 2 eps_6")?;
    within(t.elapsed(), 60)?;
    Ok(format!("lengths {:?}; omega_S(D) in [{}, 1]", p.lengths(), r.omega_lower_bound))
}

fn c8_fast_gap() -> Outcome {
    let t = Instant::now();
    let g = |n: usize| Rational::new(1.into(), num_bigint::BigInt::one() << n);
    let gap = || GapTarget::geometric(rational(1, 2)).map_err(|e| e.to_string());
    let s = BeadedWeighting::corollary1(BeadLengths::linear(), gap()?).map_err(|e| e.to_string())?;
    let fs: TruncationFamily<Rational> = s.family().map_err(|e| e.to_string())?;
    for n in s.ell_min()..=12 {
        let d = fs.truncate(s.order_through(n)).map_err(|e| e.to_string())?;
        let best = omega(&d, n, false, None).map_err(|_| "cycle budget")?.ok_or("no cycle")?;
        // 1 − ω < g(n) ⟺ weight > (1 − g(n))^length
        let threshold = num_traits::pow(Rational::one() - g(n), best.length);
        ensure(best.weight > threshold, format!("1 - omega_S(D, {n}) >= g({n})"))?;
    }
    let m = BeadedWeighting::theorem2_fast(BeadLengths::linear(), gap()?).map_err(|e| e.to_string())?;
    let c = m.scale().clone();
    let mut worst = f64::INFINITY;
    for n in 1..=12 {
        // λ_S(M, n) ≥ c·β_k for the longest bead with ℓ_k ≤ n; λ(M) = c
        let k = m.longest_bead_within(n, n).ok_or("no bead fits")?;
        let w = m.bead_weight_exact(k).map_err(|e| e.to_string())?.ok_or("bead weight inexact")?;
        let lower = &c - &w;
        ensure(lower < g(n), format!("lambda(M) - lambda_{n}(M) not below g({n})"))?;
        let bead: Vec<usize> = m.bead_vertices(k).collect();
        let fm: TruncationFamily<f64> = m.family().map_err(|e| e.to_string())?;
        let witness = fm.truncate(m.order_through(k)).map_err(|e| e.to_string())?.induced(&bead);
        let r = perron_root(&witness, 1e-14).value;
        ensure((r - rational_to_f64(&w)).abs() < 1e-12, format!("bead {k} Perron root {r} differs"))?;
        worst = worst.min(rational_to_f64(&(g(n) - lower)));
    }
    let fm: TruncationFamily<Rational> = m.family().map_err(|e| e.to_string())?;
    let v = classify(&fm, &ClassifyOptions { n_max: 40, p_max: 200, ..Default::default() });
    ensure(v.verdict == Verdict::Transient && v.confidence == Confidence::Certified, format!("{:?}", v.verdict))?;
    let Evidence::PruittVector { vector, .. } = &v.evidence else { return Err("no Pruitt evidence".into()) };
    ensure(vector == "all-ones", "certificate is not the all-ones vector")?;
    within(t.elapsed(), 30)?;
    Ok(format!("c = {c}; gap bound holds on [1, 12] (least slack {worst:.3e}); all-ones certificate"))
}

fn c9_classification() -> Outcome {
    let t = Instant::now();
    let e2: TruncationFamily<f64> = Example2::power_law(0.75).and_then(|e| e.family()).map_err(|e| e.to_string())?;
    let v = classify(&e2, &ClassifyOptions::default());
    ensure(
        v.verdict == Verdict::Recurrent && matches!(v.evidence, Evidence::CyrStructural { .. }) && v.confidence == Confidence::Certified,
        "Example 2 not certified recurrent",
    )?;
    let lp: TruncationFamily<Rational> =
        FiniteFamily::single_loop(rational(1, 2)).and_then(|f| f.family()).map_err(|e| e.to_string())?;
    let v = classify(&lp, &ClassifyOptions { p_max: 200, ..Default::default() });
    let linear = matches!(v.evidence, Evidence::DivergingSeries { exact_linear_growth: true, .. });
    ensure(v.verdict == Verdict::Recurrent && linear, "loop family not exactly divergent")?;
    let p1 = BeadedWeighting::prop1(BeadLengths::linear(), TargetRule::Constant { value: Q(rational(1, 2)) })
        .and_then(|w| w.family::<f64>())
        .map_err(|e| e.to_string())?;
    let v = classify(&p1, &ClassifyOptions { n_max: 40, p_max: 400, ..Default::default() });
    ensure(v.verdict == Verdict::Transient && v.confidence == Confidence::Certified, "Prop 1 not certified transient")?;
    within(t.elapsed(), 30)?;
    Ok("Cyr / exact linear divergence / all-ones certificate".into())
}

fn exhaustive_min_transversal(d: &WeightedDigraph<Rational>) -> usize {
    let n = d.order();
    (0..=n)
        .find(|&k| {
            let mut found = false;
            let mut pick = Vec::with_capacity(k);
            subsets(n, k, 0, &mut pick, &mut |s| {
                if !found && d.is_transversal(s) {
                    found = true;
                }
            });
            found
        })
        .unwrap()
}

fn subsets(n: usize, k: usize, from: usize, pick: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if pick.len() == k {
        return f(pick);
    }
    for v in from..n {
        pick.push(v);
        subsets(n, k, v + 1, pick, f);
        pick.pop();
    }
}

fn c10_fvs() -> Outcome {
    let t = Instant::now();
    let spec = SuiteSpec { count: 50, seed: 1010, order_min: 2, order_max: 9, max_denominator: 4 };
    for i in 0..50 {
        let d = random_instance(&spec, i);
        let r = min_cycle_transversal(&d, DEFAULT_NODE_BUDGET);
        ensure(r.optimality == Optimality::Exact, format!("instance {i}: budget hit"))?;
        ensure(d.is_transversal(&r.vertices), format!("instance {i}: not a transversal"))?;
        ensure(r.size() == exhaustive_min_transversal(&d), format!("instance {i}: size differs"))?;
    }
    let e: TruncationFamily<f64> = Example1::power_law(0.5).and_then(|e| e.family()).map_err(|e| e.to_string())?;
    for n in (1..=40).chain([100, 500, 2000]) {
        let r = min_cycle_transversal(&e.truncate(n).map_err(|e| e.to_string())?, DEFAULT_NODE_BUDGET);
        ensure(r.vertices == vec![0], format!("Example 1 at n = {n} gave {:?}", r.vertices))?;
    }
    within(t.elapsed(), 60)?;
    Ok("50/50 match exhaustive search; Example 1 always {1}".into())
}

fn c11_conjecture() -> Outcome {
    let t = Instant::now();
    let spec = SuiteSpec { count: 500, seed: 1111, order_min: 2, order_max: 8, max_denominator: 8 };
    let r = run_suite::<Rational>(Suite::Conjecture, &spec);
    ensure(r.instances_tested == 500, format!("{} instances processed", r.instances_tested))?;
    ensure(r.passed(), format!("{} proved-lemma violations", r.violations.len()))?;
    within(t.elapsed(), 300)?;
    let minimum = r.findings.iter().filter(|f| f.minimum).count();
    let instances = r.findings.iter().map(|f| &f.instance).collect::<std::collections::BTreeSet<_>>().len();
    Ok(format!(
        "500 instances, 0 lemma violations; findings: {} transversals missing the argmax ({minimum} of minimum size) on {instances} instances",
        r.findings.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("coates identity", c1_coates_identity),
        ("boyle-handelman and ksv chains", c2_chains),
        ("lemma a1, lemma a2, a1-product, sigma_k suites", c3_resolvent_suites),
        ("zeta identity", c4_zeta_identity),
        ("example 2 closed form and decay", c5_example2),
        ("example 1 rate", c6_example1_rate),
        ("prop 2 construction", c7_prop2),
        ("fast-gap construction", c8_fast_gap),
        ("classification soundness", c9_classification),
        ("fvs correctness", c10_fvs),
        ("conjecture fuzzing", c11_conjecture),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = run();
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("PASS {:>2} {name} ({secs:.1}s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {msg}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
