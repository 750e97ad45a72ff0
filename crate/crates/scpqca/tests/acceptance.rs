//! Acceptance criteria 1–10. Each prints one PASS/FAIL/SKIP line; run with
//! `cargo test -p scpqca --test acceptance -- --nocapture --test-threads 1`.
//!
//! `KNOWN_RED` lists criteria that fail for reasons recorded in the
//! decisions ledger. They still print FAIL, and the suite errors if one of
//! them starts passing so the list cannot go stale.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use scpqca::parallel;
use scpqca_core::cover::{exhaustive_cover_oracle, greedy_cover, CoverParams};
use scpqca_core::model::{matches, necessity_consistency, sufficiency_consistency};
use scpqca_core::pathways::{generate, letter_schema, parse_pathway, ExperimentSpec};
use scpqca_core::pipeline::AnalysisParams;
use scpqca_core::rng::ExperimentRng;
use scpqca_core::robustness::{classify_configuration, ValidityClass};
use scpqca_core::{CandidateRule, Case, CaseSet, CaseTable, Conjunction, FactorSchema, Literal};

const KNOWN_RED: &[u32] = &[2];

fn report(n: u32, pass: Option<bool>, detail: String) {
    let status = match pass {
        None => "SKIP",
        Some(true) => "PASS",
        Some(false) => "FAIL",
    };
    println!("criterion {n:>2}: {status}  {detail}");
    match pass {
        Some(false) if !KNOWN_RED.contains(&n) => panic!("criterion {n} failed: {detail}"),
        Some(true) if KNOWN_RED.contains(&n) => panic!("criterion {n} is listed as known red but passes; update KNOWN_RED"),
        _ => {}
    }
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scpqca"))
}

fn six_factor(seed: u64, confound: usize) -> (ExperimentSpec, CaseTable) {
    let s = letter_schema(6, &[2]).unwrap();
    let spec = ExperimentSpec { pathway: parse_pathway("ab+CD+ace+BDF", &s).unwrap(), sample_size: 200, confound_count: confound, seed };
    let t = generate(&spec).unwrap();
    (spec, t)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

#[test]
fn criterion_01_clean_recovery() {
    let (spec, t) = six_factor(0, 0);
    let start = Instant::now();
    let a = parallel::analyze(&t, &AnalysisParams::default()).unwrap();
    let took = start.elapsed();
    let s = &a.solution;
    let exact = s.consistency.numerator() == s.consistency.denominator();
    let classes: Vec<ValidityClass> = s.configurations().iter().map(|c| classify_configuration(c, spec.pathway.terms())).collect();
    let recovered = classes.iter().all(|c| *c != ValidityClass::NotIdentified);
    let pass = exact && s.coverage.value() >= 0.98 && recovered && took < Duration::from_secs(5);
    report(
        1,
        Some(pass),
        format!(
            "consistency {}/{}, coverage {:.4}, classes {:?}, {:.0} ms",
            s.consistency.numerator(),
            s.consistency.denominator(),
            s.coverage.value(),
            classes,
            took.as_secs_f64() * 1e3
        ),
    );
}

#[test]
fn criterion_02_confounding() {
    let start = Instant::now();
    let (mut cons, mut cov) = (Vec::new(), Vec::new());
    for seed in 0..10 {
        let (_, t) = six_factor(seed, 20);
        let a = parallel::analyze(&t, &AnalysisParams::default()).unwrap();
        cons.push(a.solution.consistency.value());
        cov.push(a.solution.coverage.value());
    }
    let took = start.elapsed();
    let (mc, mv) = (median(cons), median(cov));
    let pass = (0.84..=0.94).contains(&mc) && (0.83..=0.93).contains(&mv) && took < Duration::from_secs(60);
    report(
        2,
        Some(pass),
        format!("median consistency {mc:.4} (want [0.84, 0.94]), median coverage {mv:.4} (want [0.83, 0.93]), {:.0} ms", took.as_secs_f64() * 1e3),
    );
}

fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status.lines().find_map(|l| l.strip_prefix("VmHWM:")).and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
}

#[test]
fn criterion_03_twenty_factors() {
    let s = letter_schema(20, &[2]).unwrap();
    let spec = ExperimentSpec { pathway: parse_pathway("ab+CD+ace+BDF", &s).unwrap(), sample_size: 200, confound_count: 0, seed: 0 };
    let t = generate(&spec).unwrap();
    let params = AnalysisParams { max_order: Some(4), ..Default::default() };
    let start = Instant::now();
    let a = parallel::analyze(&t, &params).unwrap();
    let took = start.elapsed();
    let lattice = scpqca_core::candidates::candidate_count_bound(t.schema(), &a.factor_set, Some(4));
    let rss = peak_rss_kib();
    let bounded = rss.is_none_or(|k| k < 1024 * 1024);
    let s = &a.solution;
    let pass = s.consistency.value() >= 0.95 && s.coverage.value() >= 0.95 && took < Duration::from_secs(600) && bounded;
    report(
        3,
        Some(pass),
        format!(
            "consistency {:.4}, coverage {:.4}, {} candidates kept of a {} lattice, peak RSS {} KiB, {:.0} ms",
            s.consistency.value(),
            s.coverage.value(),
            a.candidates.len(),
            lattice,
            rss.map_or("?".into(), |k| k.to_string()),
            took.as_secs_f64() * 1e3
        ),
    );
}

#[test]
fn criterion_04_multi_value() {
    let s = letter_schema(5, &[3]).unwrap();
    let spec = ExperimentSpec { pathway: parse_pathway("A0*B0+B1*C1+C2*D2+D0*E0", &s).unwrap(), sample_size: 200, confound_count: 0, seed: 0 };
    let t = generate(&spec).unwrap();
    let a = parallel::analyze(&t, &AnalysisParams::default()).unwrap();
    let s = &a.solution;
    let planted_found = spec
        .pathway
        .terms()
        .iter()
        .filter(|term| a.candidates.iter().any(|r| &r.conjunction == *term && r.consistency().numerator() == r.consistency().denominator()))
        .count();
    let exact = s.consistency.numerator() == s.consistency.denominator();
    let pass = exact && s.coverage.value() >= 0.90 && planted_found == 4;
    report(
        4,
        Some(pass),
        format!(
            "consistency {:.4}, coverage {:.4}, planted terms among candidates at 1.0: {planted_found}/4",
            s.consistency.value(),
            s.coverage.value()
        ),
    );
}

#[test]
fn criterion_05_pban() {
    let path = data("pban.csv");
    if !path.exists() {
        report(5, None, format!("{} absent; run scripts/fetch_pban.py", path.display()));
        return;
    }
    let out = bin().args(["solve", "--format", "json", "--outcome", "PB", "--consistency", "0.8", "--data"]).arg(&path).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
    let sol = &v["solution"];
    let configs = sol["configurations"].as_array().cloned().unwrap_or_default();
    let find = |e: &str| configs.iter().find(|c| c["expression"] == e).cloned();
    let want = [("C1", 17), ("F2", 26), ("T2", 34), ("V0", 7)];
    let mut ok = configs.len() == 4;
    let mut detail = Vec::new();
    for (e, cov) in want {
        match find(e) {
            Some(c) => {
                let pos = c["positives"].as_u64().unwrap_or(0);
                detail.push(format!("{e}:{pos}"));
                ok &= pos == cov;
            }
            None => {
                detail.push(format!("{e}:missing"));
                ok = false;
            }
        }
    }
    let t_cons = find("T2").and_then(|c| c["consistency"]["value"].as_f64()).unwrap_or(f64::NAN);
    let s_cov = sol["coverage"]["value"].as_f64().unwrap_or(f64::NAN);
    let s_cons = sol["consistency"]["value"].as_f64().unwrap_or(f64::NAN);
    ok &= (t_cons - 0.94).abs() <= 0.005 && s_cov == 1.0 && (s_cons - 0.9545).abs() <= 0.001;
    report(5, Some(ok), format!("{} | T consistency {t_cons:.4}, solution {s_cons:.4}/{s_cov:.4}", detail.join(" ")));
}

#[test]
fn criterion_06_candidate_list() {
    let out = bin()
        .args(["candidates", "--format", "json", "--consistency", "0.8", "--cutoff", "4", "--data"])
        .arg(data("remote_conditions.csv"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rules = v["candidates"].as_array().unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for (e, n) in [("ms*PI*LP", 4), ("ms*MC*pv", 6), ("MC*LP", 6)] {
        match rules.iter().find(|r| r["expression"] == e) {
            Some(r) => {
                let c = &r["consistency"];
                let exact = c["num"] == c["den"];
                let m = r["matched"].as_u64().unwrap();
                ok &= exact && m == n;
                detail.push(format!("{e} @ {}/{} n={m}", c["num"], c["den"]));
            }
            None => {
                ok = false;
                detail.push(format!("{e} missing"));
            }
        }
    }
    report(6, Some(ok), detail.join(", "));
}

/// A candidate list from the real filter over a random small table: a
/// random DNF outcome over 3–5 binary factors with a little noise.
fn random_cover_instance(rng: &mut ExperimentRng) -> Option<(Vec<CandidateRule>, CaseSet, usize)> {
    let nf = 3 + rng.below(3) as usize;
    let names: Vec<String> = (0..nf).map(|i| format!("F{i}")).collect();
    let spec: Vec<(&str, u32)> = names.iter().map(|n| (n.as_str(), 2)).collect();
    let schema = FactorSchema::simple(&spec, "O", 2).unwrap();
    let mut terms = Vec::new();
    for _ in 0..1 + rng.below(3) {
        let a = rng.below(nf as u64) as usize;
        let b = (a + 1 + rng.below(nf as u64 - 1) as usize) % nf;
        terms.push(Conjunction::new(vec![Literal::new(a, rng.below(2) as u32), Literal::new(b, rng.below(2) as u32)]).unwrap());
    }
    let n = 15 + rng.below(26) as usize;
    let mut cases = Vec::with_capacity(n);
    for i in 0..n {
        let values: Vec<u32> = (0..nf).map(|_| rng.below(2) as u32).collect();
        let mut o = terms.iter().any(|t| t.matches_values(&values)) as u32;
        if rng.below(10) == 0 {
            o = 1 - o;
        }
        cases.push(Case::new(format!("c{i}"), values, o));
    }
    let t = CaseTable::new(schema, cases).unwrap();
    let positives = t.outcome_set(1).unwrap().clone();
    let factors: Vec<usize> = (0..nf).collect();
    let p = scpqca_core::candidates::CandidateParams::new(1, 0.8, 2);
    let rules = scpqca_core::candidates::enumerate_candidates(&t, &factors, &p).unwrap();
    let ok = !rules.is_empty() && rules.len() <= 12 && positives.len() <= 30;
    ok.then(|| (rules, positives, 1 + rng.below(3) as usize))
}

#[test]
fn criterion_07_oracle_equivalence() {
    let mut rng = ExperimentRng::new(7);
    let (mut equal, mut worse_than_oracle_violations) = (0, 0);
    let mut instances = 0;
    while instances < 200 {
        let Some((rules, positives, u)) = random_cover_instance(&mut rng) else {
            continue;
        };
        instances += 1;
        let params = CoverParams::new(u, 1);
        let covered = |idx: &mut dyn Iterator<Item = usize>| {
            let mut s = CaseSet::empty(positives.capacity());
            for i in idx {
                s.union_with(&rules[i].positives);
            }
            s.intersection_len(&positives)
        };
        let g = covered(&mut greedy_cover(&rules, &positives, &params).unwrap().into_iter().map(|p| p.index));
        let o = covered(&mut exhaustive_cover_oracle(&rules, &positives, &params, rules.len()).unwrap().into_iter());
        if g > o {
            worse_than_oracle_violations += 1;
        }
        if g == o {
            equal += 1;
        }
    }
    let pass = worse_than_oracle_violations == 0 && equal * 100 >= 60 * 200;
    report(7, Some(pass), format!("greedy > oracle on {worse_than_oracle_violations}/200, greedy = oracle on {equal}/200 (floor 120)"));
}

fn random_table(rng: &mut ExperimentRng) -> CaseTable {
    let nf = 1 + rng.below(5) as usize;
    let levels: Vec<u32> = (0..nf).map(|_| 2 + rng.below(2) as u32).collect();
    let names: Vec<String> = (0..nf).map(|i| format!("F{i}")).collect();
    let spec: Vec<(&str, u32)> = names.iter().map(String::as_str).zip(levels.iter().copied()).collect();
    let schema = FactorSchema::simple(&spec, "O", 2).unwrap();
    let n = 1 + rng.below(25) as usize;
    let cases = (0..n)
        .map(|i| {
            let values = levels.iter().map(|&l| rng.below(l as u64) as u32).collect();
            Case::new(format!("c{i}"), values, rng.below(2) as u32)
        })
        .collect();
    CaseTable::new(schema, cases).unwrap()
}

fn random_conjunction(rng: &mut ExperimentRng, schema: &FactorSchema) -> Conjunction {
    let mut lits = Vec::new();
    for (i, f) in schema.factors().iter().enumerate() {
        if rng.below(2) == 0 {
            lits.push(Literal::new(i, rng.below(f.levels as u64) as u32));
        }
    }
    Conjunction::new(lits).unwrap()
}

fn count(table: &CaseTable, cons: f64, cutoff: usize) -> usize {
    let factors: Vec<usize> = (0..table.schema().len()).collect();
    let p = scpqca_core::candidates::CandidateParams::new(1, cons, cutoff);
    scpqca_core::candidates::CandidateEnumerator::new(table, &factors, &p).unwrap().count()
}

#[test]
fn criterion_08_metric_properties() {
    let mut rng = ExperimentRng::new(8);
    let mut failures = Vec::new();
    for draw in 0..10_000 {
        let t = random_table(&mut rng);
        let c = random_conjunction(&mut rng, t.schema());
        if let Ok(r) = sufficiency_consistency(&c, &t, 1) {
            if !(0.0..=1.0).contains(&r.value()) {
                failures.push(format!("draw {draw}: sufficiency {}", r.value()));
            }
        }
        for lit in t.schema().literals() {
            if let Ok(r) = necessity_consistency(lit, &t, 1) {
                if !(0.0..=1.0).contains(&r.value()) {
                    failures.push(format!("draw {draw}: necessity {}", r.value()));
                }
            }
        }
        // add one literal on a free factor: matches may only shrink
        if let Some(f) = (0..t.schema().len()).find(|&f| c.value_of(f).is_none()) {
            let v = rng.below(t.schema().factors()[f].levels as u64) as u32;
            let bigger = c.merge(&Conjunction::new(vec![Literal::new(f, v)]).unwrap()).unwrap();
            for case in t.cases() {
                if matches(&bigger, case, t.schema()).unwrap() && !matches(&c, case, t.schema()).unwrap() {
                    failures.push(format!("draw {draw}: anti-monotonicity"));
                }
            }
        }
        if draw % 20 == 0 && !t.outcome_set(1).unwrap().is_empty() {
            let by_cons: Vec<usize> = [0.9, 0.8, 0.7, 0.5].iter().map(|&x| count(&t, x, 1)).collect();
            let by_cut: Vec<usize> = (1..=5).map(|k| count(&t, 0.6, k)).collect();
            if by_cons.windows(2).any(|w| w[0] > w[1]) || by_cut.windows(2).any(|w| w[0] < w[1]) {
                failures.push(format!("draw {draw}: candidate counts {by_cons:?} {by_cut:?}"));
            }
        }
    }
    // fixture directions: lowering consistency adds rules, raising the cutoff removes them
    let fixture = scpqca::ingest::load_csv(&data("remote_conditions.csv"), &Default::default()).unwrap();
    let sweep = |cons: f64, cut: usize| {
        let p = AnalysisParams { consistency_threshold: cons, cutoff: cut, ..Default::default() };
        let a = scpqca_core::pipeline::analyze(&fixture, &p);
        a.map(|a| a.candidates.len()).unwrap_or(0)
    };
    let by_cons: Vec<usize> = [0.8, 0.75, 0.7].iter().map(|&c| sweep(c, 2)).collect();
    let by_cut: Vec<usize> = (2..=5).map(|k| sweep(0.8, k)).collect();
    if by_cons.windows(2).any(|w| w[0] > w[1]) || by_cut.windows(2).any(|w| w[0] < w[1]) {
        failures.push(format!("fixture sweep {by_cons:?} {by_cut:?}"));
    }
    report(
        8,
        Some(failures.is_empty()),
        format!(
            "10000 draws, {} violations; fixture counts by consistency 0.8/0.75/0.7: {by_cons:?}, by cutoff 2..5: {by_cut:?}{}",
            failures.len(),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    );
}

#[test]
fn criterion_09_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let synth = dir.path().join("synth.csv");
    let out = bin().args(["synth", "--pathway", "ab+CD+ace+BDF", "--samples", "200", "--confound", "10", "--seed", "4"]).output().unwrap();
    std::fs::write(&synth, &out.stdout).unwrap();
    let remote = data("remote_conditions.csv");
    let r = remote.to_str().unwrap();
    let s = synth.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["necessity", "--data", r],
        vec!["candidates", "--data", r, "--cutoff", "4", "--format", "json"],
        vec!["solve", "--data", s, "--format", "json"],
        vec!["solve", "--data", s],
        vec!["solve", "--data", "crates/none.csv"],
        vec!["synth", "--pathway", "ab+CD", "--factors", "4", "--seed", "9", "--confound", "3"],
        vec!["synth", "--pathway", "A0*B1", "--factors", "3", "--levels", "3", "--emit", "json"],
        vec!["experiment", "--pathway", "ab+CD+ace+BDF", "--confound", "0,20", "--seeds", "3", "--format", "csv"],
        vec!["sweep", "--data", s, "--consistency-grid", "0.8,0.75,0.7", "--cutoff-grid", "2,5"],
        vec!["xval", "--data", s, "--format", "json", "--seed", "11"],
    ];
    let mut bad = Vec::new();
    for args in &commands {
        let run = |threads: &str| {
            let o = bin().args(args).args(["--threads", threads]).output().unwrap();
            (o.status.code(), o.stdout, o.stderr)
        };
        let a = run("1");
        let b = run("1");
        let c = run("4");
        if a != b || a != c {
            bad.push(args[0]);
        }
    }
    report(9, Some(bad.is_empty()), format!("{} invocations twice at 1 thread and once at 4; differing: {bad:?}", commands.len()));
}

#[test]
fn criterion_10_external_validity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clean.csv");
    let (_, t) = six_factor(0, 0);
    let mut buf = Vec::new();
    scpqca::ingest::write_csv(&t, &mut buf).unwrap();
    std::fs::write(&path, buf).unwrap();
    let out = bin().args(["xval", "--fraction", "0.10", "--reps", "10", "--format", "json", "--data"]).arg(&path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let get = |k: &str| v[k].as_u64().unwrap();
    let total = get("replicated") + get("superset") + get("subset") + get("not_identified");
    let good = get("replicated") + get("superset");

    // MS, MC, PI, LE, LP, PV, ED
    let schema = FactorSchema::simple(&[("MS", 2), ("MC", 2), ("PI", 2), ("LE", 2), ("LP", 2), ("PV", 2), ("ED", 2)], "O", 2).unwrap();
    let c = |text: &str| parse_conj(&schema, text);
    let footnotes = classify_configuration(&c("MC=1*LP=1"), &[c("MC=1*LP=1"), c("MS=0*PI=1*LP=1")]) == ValidityClass::Replicated
        && classify_configuration(&c("MC=1"), &[c("MC=1*PV=0")]) == ValidityClass::Superset
        && classify_configuration(&c("MC=1*PV=0*MS=0"), &[c("MC=1*PV=0")]) == ValidityClass::Subset;
    let pass = total > 0 && good * 100 >= 80 * total && footnotes;
    report(
        10,
        Some(pass),
        format!(
            "replicated+superset {good}/{total} ({:.1}%), footnote examples {}",
            100.0 * good as f64 / total.max(1) as f64,
            if footnotes { "exact" } else { "WRONG" }
        ),
    );
}

fn parse_conj(schema: &FactorSchema, text: &str) -> Conjunction {
    let p = parse_pathway(text, schema).unwrap();
    p.terms()[0].clone()
}
