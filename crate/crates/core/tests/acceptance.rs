//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 1 to 9 run twice; criterion 10 compares the serialized artifacts
//! of the two passes byte for byte. Exits non-zero if any criterion fails.

use std::sync::Arc;

use mdimlab::bound::BoundSpec;
use mdimlab::functional::{builtin, run, yield_of, Oracle, TuringFunctional, DEFAULT_BUDGET};
use mdimlab::harness::{run_experiment, Direction, ExperimentConfig, ExperimentReport};
use mdimlab::infoproxy::{
    default_corpus, mutual_info, proxy_diagnostics, ChainRule, ComplexityProxy, ContextProxy, Form, LemmaId,
    Lz78Proxy, SlackModel,
};
use mdimlab::mdim::{estimate, profile, Estimate, Schedule};
use mdimlab::reduction::{
    invert_uyb, invert_uyb_fast, replay_counterexample, verify_bt, verify_uyb, FailureCategory, Mode,
    ReductionWitness,
};
use mdimlab::seq::{coupled_gen, Alphabet, GenSpec, JointDistribution, SequenceGen};

const B: u64 = DEFAULT_BUDGET;
const N: usize = 1 << 16;
const QS: [f64; 3] = [0.05, 0.1, 0.25];
const SEEDS: std::ops::RangeInclusive<u64> = 1..=10;
const EPS: f64 = 0.1;

struct Outcome {
    pass: bool,
    detail: String,
    artifact: String,
}

fn phi(name: &str) -> Arc<TuringFunctional> {
    Arc::new(builtin(name, Alphabet::BINARY).unwrap())
}

fn bound(text: &str) -> BoundSpec {
    text.parse().unwrap()
}

fn uniform(seed: u64) -> SequenceGen {
    SequenceGen::uniform(Alphabet::BINARY, seed)
}

fn h2(q: f64) -> f64 {
    -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
}

fn ceil_half(n: u64) -> u64 {
    n.div_ceil(2)
}

fn criterion_1() -> Outcome {
    type Form = fn(u64) -> u64;
    let fixtures: [(&str, Form, Form); 4] = [
        ("identity", |n| n, |n| n + 1),
        ("xor-mask:0110", |n| n, |n| n + 1),
        ("dilute:1", ceil_half, |n| 2 * n + 1),
        ("condense:1", |n| 2 * n, |n| ceil_half(n) + 1),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    let mut artifact = String::new();
    for (name, use_form, yield_form) in fixtures {
        let f = phi(name);
        let (mut use_bad, mut yield_bad) = (Vec::new(), Vec::new());
        for seed in 0..3 {
            let x = uniform(seed);
            let xs = x.prefix(1024);
            for n in 0..=256u64 {
                let u = run(&f, Oracle::Str(&xs), n as usize, B).unwrap().use_value();
                let y = yield_of(&f, Oracle::Seq(&x), n as usize, 0, B).unwrap().value.finite();
                artifact.push_str(&format!("{name},{seed},{n},{u:?},{y:?}\n"));
                if u != Some(use_form(n)) && !use_bad.contains(&n) {
                    use_bad.push(n);
                }
                if y != Some(yield_form(n)) && !yield_bad.contains(&n) {
                    yield_bad.push(n);
                }
            }
        }
        for (what, bad) in [("use", use_bad), ("yield", yield_bad)] {
            if !bad.is_empty() {
                pass = false;
                let head: Vec<String> = bad.iter().take(4).map(u64::to_string).collect();
                notes.push(format!("{name} {what} differs at {} values of n (first: {})", bad.len(), head.join(",")));
            }
        }
    }
    let detail = if pass { "all closed forms hold for n <= 256".into() } else { notes.join("; ") };
    Outcome { pass, detail, artifact }
}

fn criterion_2() -> Outcome {
    let x = uniform(1);
    let w = |name: &str, b: &str, mode| ReductionWitness::derived(phi(name), x.clone(), bound(b), mode, B).unwrap();
    let mut checks = Vec::new();
    let mut artifact = String::new();
    let mut record = |label: &str, ok: bool, json: String| {
        checks.push((label.to_string(), ok));
        artifact.push_str(&json);
    };
    for name in ["identity", "xor-mask:0110"] {
        let r = verify_bt(&w(name, "cl:0", Mode::UseBounded), 512, B).unwrap();
        record(&format!("{name} bT cl:0"), r.passed(), serde_json::to_string(&r).unwrap());
    }
    let r = verify_bt(&w("condense:1", "cl:0", Mode::UseBounded), 512, B).unwrap();
    let first = r.first_failure.as_ref();
    record(
        "condense cl:0 fails at n=1",
        !r.passed() && first.is_some_and(|f| f.n == 1 && f.category == FailureCategory::UseExceeded),
        serde_json::to_string(&r).unwrap(),
    );
    let r = verify_bt(&w("condense:1", "h:2,0", Mode::UseBounded), 512, B).unwrap();
    record("condense h:2,0", r.passed(), serde_json::to_string(&r).unwrap());
    let r = verify_uyb(&w("dilute:1", "h:2,1", Mode::YieldBounded), 64, 16, B).unwrap();
    record("dilute uyb h:2,1", r.passed(), serde_json::to_string(&r).unwrap());
    let r = verify_uyb(&w("condense:1", "h:2,1", Mode::YieldBounded), 64, 16, B).unwrap();
    let clause_c_fails = r.clauses.iter().any(|c| c.clause == "c" && !c.verdict.passed());
    let replayed = r
        .counterexample
        .as_ref()
        .is_some_and(|c| !c.holds() && replay_counterexample(&phi("condense:1"), &x, c, B).unwrap());
    record(
        "condense not uniquely yielding, counterexample replays",
        clause_c_fails && replayed,
        serde_json::to_string(&r).unwrap(),
    );
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
    Outcome {
        pass: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{} checks hold", checks.len())
        } else {
            format!("failed: {}", failed.join("; "))
        },
        artifact,
    }
}

fn criterion_3() -> Outcome {
    let mut bad = Vec::new();
    let mut artifact = String::new();
    for (name, b) in [("dilute:1", "h:2,1"), ("xor-mask:0110", "cl:1")] {
        let f = phi(name);
        let b = bound(b);
        for seed in 0..3 {
            let x = uniform(seed);
            let z = mdimlab::functional::apply(&f, Oracle::Seq(&x), b.eval(256) as usize, B).unwrap();
            for n in 0..=256usize {
                let max_len = b.eval(n as u64) as usize + 1;
                let fast = invert_uyb_fast(&f, &z, n, &b, max_len);
                let ok_fast = fast.as_ref().is_ok_and(|s| *s == x.prefix(n));
                let ok_brute = n > 12 || {
                    let brute = invert_uyb(&f, &z, n, &b, n + 2, B);
                    brute.as_ref().is_ok_and(|s| *s == x.prefix(n)) && brute.ok() == fast.as_ref().ok().cloned()
                };
                if !(ok_fast && ok_brute) {
                    bad.push(format!("{name} seed {seed} n={n}"));
                }
                if let Ok(s) = &fast {
                    artifact.push_str(&format!("{name},{seed},{n},{s}\n"));
                }
            }
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            "brute force (n <= 12) and fast path (n <= 256) recover X, and agree".into()
        } else {
            format!("{} failures, first {}", bad.len(), bad[0])
        },
        artifact,
    }
}

fn config(q: f64, functional: &str, direction: Direction, b: &str) -> ExperimentConfig {
    ExperimentConfig {
        x: format!("gen:bsc?q={q}&side=x").parse::<GenSpec>().unwrap(),
        y: format!("gen:bsc?q={q}&side=y").parse::<GenSpec>().unwrap(),
        functional: functional.into(),
        direction,
        bound: bound(b),
        horizon: N,
        window: 0.25,
        tolerance: EPS,
        proxy: "ctx".into(),
        seeds: SEEDS.collect(),
        schedule: Schedule::default(),
        required_pass_fraction: 0.9,
        uyb_horizon: None,
        uyb_cap: None,
        budget: None,
    }
}

/// Experiments shared by criteria 4 to 8, per coupling strength.
struct Experiments {
    fwd_xor: Vec<ExperimentReport>,
    fwd_condense: Vec<ExperimentReport>,
    rev_xor: Vec<ExperimentReport>,
    rev_dilute: Vec<ExperimentReport>,
}

impl Experiments {
    fn run() -> Self {
        let all = |f: &str, d, b: &str| -> Vec<ExperimentReport> {
            QS.iter().map(|&q| run_experiment(&config(q, f, d, b)).unwrap().report).collect()
        };
        Experiments {
            fwd_xor: all("xor-mask:0110", Direction::ForwardDpi, "cl:0"),
            fwd_condense: all("condense:1", Direction::ForwardDpi, "h:2,0"),
            rev_xor: all("xor-mask:0110", Direction::ReverseDpi, "cl:1"),
            rev_dilute: all("dilute:1", Direction::ReverseDpi, "h:2,1"),
        }
    }

    fn reports(&self) -> impl Iterator<Item = &ExperimentReport> {
        self.fwd_xor.iter().chain(&self.fwd_condense).chain(&self.rev_xor).chain(&self.rev_dilute)
    }
}

/// Counts seeds per q where `ok(row checks, row)` holds; PASS iff >= 9 for every q.
fn seed_gate(reports: &[ExperimentReport], ok: impl Fn(&mdimlab::harness::SeedRow) -> bool) -> Outcome {
    let counts: Vec<usize> = reports.iter().map(|r| r.rows.iter().filter(|row| ok(row)).count()).collect();
    let parts: Vec<String> = QS.iter().zip(&counts).map(|(q, c)| format!("q={q}: {c}/10")).collect();
    Outcome {
        pass: counts.iter().all(|&c| c >= 9),
        detail: parts.join(", "),
        artifact: reports.iter().map(|r| serde_json::to_string(r).unwrap()).collect(),
    }
}

fn criterion_4(e: &Experiments) -> Outcome {
    seed_gate(&e.fwd_xor, |row| {
        row.zy.mdim_hat <= row.xy.mdim_hat + EPS && row.zy.mdim_upper_hat <= row.xy.mdim_upper_hat + EPS
    })
}

fn criterion_5(e: &Experiments) -> Outcome {
    seed_gate(&e.fwd_condense, |row| row.zy.mdim_hat <= 2.0 * row.xy.mdim_hat + EPS)
}

fn criterion_6(e: &Experiments) -> Outcome {
    let xor = seed_gate(&e.rev_xor, |row| row.xy.mdim_hat <= row.zy.mdim_hat + EPS);
    let dil = seed_gate(&e.rev_dilute, |row| {
        let half = 0.5 * row.xy.mdim_hat;
        row.xy.mdim_hat <= 2.0 * row.zy.mdim_hat + EPS && (row.zy.mdim_hat - half).abs() <= EPS
    });
    Outcome {
        pass: xor.pass && dil.pass,
        detail: format!("xor-mask cl:1 [{}]; dilute h:2,1 with halving band [{}]", xor.detail, dil.detail),
        artifact: xor.artifact + &dil.artifact,
    }
}

fn criterion_7(e: &Experiments) -> Outcome {
    let r = &e.fwd_xor[1];
    let mean = r.rows.iter().map(|row| row.xy.mdim_hat).sum::<f64>() / r.rows.len() as f64;
    let target = 1.0 - h2(0.1);
    Outcome {
        pass: (mean - target).abs() <= 0.15,
        detail: format!("mean mdim_hat {mean:.4} vs 1-H(0.1) = {target:.4}"),
        artifact: format!("{mean}"),
    }
}

fn criterion_8(e: &Experiments) -> Outcome {
    let mut notes = Vec::new();
    let mut artifact = String::new();

    let ctx = ContextProxy;
    let lz = Lz78Proxy::default();
    let proxies: [&dyn ComplexityProxy; 2] = [&ChainRule(&ctx), &lz];
    let mut mismatches = 0;
    for i in 0..1000u64 {
        let k = 2 + (i % 3) as usize;
        let a = Alphabet::new(k).unwrap();
        let x = SequenceGen::uniform(a, 10_000 + i).prefix((i as usize * 37) % 400);
        let y = SequenceGen::uniform(a, 20_000 + i).prefix((i as usize * 53) % 400);
        for p in proxies {
            let d = mutual_info(&x, &y, p, Form::Definitional).unwrap().value_bits;
            let s = mutual_info(&x, &y, p, Form::Symmetric).unwrap().value_bits;
            if d.to_bits() != s.to_bits() {
                mismatches += 1;
            }
            artifact.push_str(&format!("{}:{d}\n", p.name()));
        }
    }
    notes.push(format!("chain-rule identity mismatches: {mismatches}/2000"));

    let mut asym = 0;
    let mut estimates: Vec<Estimate> = Vec::new();
    for seed in 1..=3 {
        let (x, y) = coupled_gen(&JointDistribution::binary_symmetric(0.1).unwrap(), seed).unwrap();
        let z = SequenceGen::derived(phi("dilute:1"), x.clone(), B).unwrap();
        for (s, t) in [(&x, &y), (&z, &y)] {
            for proxy in [&ctx as &dyn ComplexityProxy, &lz] {
                let st = estimate(&profile(s, t, 1 << 14, &Schedule::default(), proxy).unwrap(), 0.25).unwrap();
                let ts = estimate(&profile(t, s, 1 << 14, &Schedule::default(), proxy).unwrap(), 0.25).unwrap();
                if serde_json::to_string(&st).unwrap() != serde_json::to_string(&ts).unwrap() {
                    asym += 1;
                }
                estimates.extend([st, ts]);
            }
        }
    }
    notes.push(format!("asymmetric estimates: {asym}/12"));

    for r in e.reports() {
        for row in &r.rows {
            estimates.extend([row.xy, row.zy]);
        }
    }
    let disordered = estimates.iter().filter(|e| e.mdim_hat > e.mdim_upper_hat).count();
    notes.push(format!("mdim_hat > Mdim_hat in {disordered}/{} estimates", estimates.len()));
    artifact.push_str(&serde_json::to_string(&estimates).unwrap());
    Outcome {
        pass: mismatches == 0 && asym == 0 && disordered == 0,
        detail: notes.join("; "),
        artifact,
    }
}

fn criterion_9() -> Outcome {
    let r = proxy_diagnostics(&ContextProxy, &default_corpus(), SlackModel { a: 4.0, b: 64.0 }).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for id in [LemmaId::Cond, LemmaId::UUv, LemmaId::Proc] {
        let l = r.lemma(id).unwrap();
        pass &= l.pass_rate >= 0.9;
        let worst = l.failures.iter().map(|f| f.label.as_str()).take(3).collect::<Vec<_>>().join(",");
        parts.push(format!(
            "{id} {:.1}% (worst deficit {:.1} bits{})",
            100.0 * l.pass_rate,
            l.worst_deficit_bits,
            if worst.is_empty() { String::new() } else { format!("; failing {worst}") }
        ));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
        artifact: serde_json::to_string(&r).unwrap(),
    }
}

fn all_criteria() -> Vec<(&'static str, Outcome)> {
    let e = Experiments::run();
    vec![
        ("vm exactness", criterion_1()),
        ("reduction verification", criterion_2()),
        ("inversion", criterion_3()),
        ("forward dpi", criterion_4(&e)),
        ("factor-alpha dpi", criterion_5(&e)),
        ("reverse dpi", criterion_6(&e)),
        ("calibration", criterion_7(&e)),
        ("estimator identities", criterion_8(&e)),
        ("proxy diagnostics", criterion_9()),
    ]
}

fn main() {
    // Ignore libtest flags such as --nocapture or a name filter.
    let first = all_criteria();
    let second = all_criteria();
    let mut failed = 0;
    for (i, (name, o)) in first.iter().enumerate() {
        println!("criterion {} ({name}): {} - {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    let differing: Vec<String> = first
        .iter()
        .zip(&second)
        .enumerate()
        .filter(|(_, (a, b))| a.1.artifact.as_bytes() != b.1.artifact.as_bytes())
        .map(|(i, _)| (i + 1).to_string())
        .collect();
    let repro = differing.is_empty();
    println!(
        "criterion 10 (reproducibility): {} - {}",
        if repro { "PASS" } else { "FAIL" },
        if repro {
            format!("{} artifacts byte-identical across two runs", first.len())
        } else {
            format!("artifacts differ for criteria {}", differing.join(","))
        }
    );
    failed += usize::from(!repro);
    println!("acceptance: {}/10 criteria pass", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
