//! One checker per acceptance criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use jvmfuzz::campaign::{self, CampaignConfig, DifferentialPair, Finding, FindingStatus};
use jvmfuzz::generator::{generate_ir_program, CountRange, GenConfig};
use jvmfuzz::harness::{
    self, fingerprint, CompileOutcome, CompileStatus, CompilerSpec, PlanOutcome, RunDirs, TestMode, TestResult,
    TestVerdict, ToolchainPlan,
};
use jvmfuzz::ir::{
    inheritance_depth, inheritance_width, validate, validate_with, Builtin, ClassModifier, DeclKind, IrProgram, Lang,
    MethodKind, ProgramMetrics, TypeRef, ValidationMode,
};
use jvmfuzz::minimizer::{
    apply_pass, candidate_passes, minimize, replay_trail, MinimizeConfig, PassOutcome, PredicateOracle, SizeMeasure,
};
use jvmfuzz::mutators::{self, json_diff_paths, MutatorConfig, MutatorKind};
use jvmfuzz::override_rules::{classify_override, InterfaceMethodConfig, OverrideVerdict, SuperMethodKind};
use jvmfuzz::render;
use jvmfuzz::rng::Rng;

use super::conformance::{self, Table};
use super::{all_figures, fixtures_dir, mock, tokens};

#[derive(Debug)]
pub enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(errors: Vec<String>, ok: String) -> Outcome {
    if errors.is_empty() {
        Outcome::Pass(ok)
    } else {
        let shown: Vec<_> = errors.iter().take(5).cloned().collect();
        Outcome::Fail(format!("{} problem(s): {}", errors.len(), shown.join("; ")))
    }
}

pub fn generator_soundness() -> Outcome {
    let table = Table::load();
    let start = Instant::now();
    let mut errors = Vec::new();
    for seed in 0..1000u64 {
        let p = match generate_ir_program(&GenConfig::default().with_seed(seed)) {
            Ok(p) => p,
            Err(e) => {
                errors.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let report = validate(&p);
        if !report.is_valid() {
            errors.push(format!("seed {seed}: {:?}", report.violations[0]));
        }
        for e in conformance::check(&p, &table) {
            errors.push(format!("seed {seed}: {e}"));
        }
    }
    let took = start.elapsed();
    if took > Duration::from_secs(30) {
        errors.push(format!("took {took:?}"));
    }
    verdict(errors, format!("1000 programs valid and conformant in {:.1}s", took.as_secs_f64()))
}

pub fn table_equivalence() -> Outcome {
    let table = Table::load();
    let mut errors = Vec::new();
    let mut cells = 0;
    for row in table.row_names() {
        let s: SuperMethodKind = serde_json::from_value(serde_json::json!(row)).unwrap();
        for col in table.columns() {
            let c: InterfaceMethodConfig = serde_json::from_value(serde_json::json!(col)).unwrap();
            let want: OverrideVerdict = serde_json::from_value(serde_json::json!(table.cell(row, col))).unwrap();
            cells += 1;
            let got = classify_override(s, c);
            if got != want {
                errors.push(format!("({row}, {col}): got {got:?}, want {want:?}"));
            }
        }
    }
    if cells != 20 {
        errors.push(format!("fixture has {cells} cells"));
    }
    verdict(errors, "20/20 cells".into())
}

pub fn campaign_config(out: &Path, workers: usize) -> CampaignConfig {
    let gen = GenConfig { decl_count: CountRange::new(3, 7), ..GenConfig::default() };
    CampaignConfig {
        gen,
        toolchains: vec![
            mock::spec("javac", Lang::Java, &mock::rules("pass")),
            mock::spec("kotlinc-2", Lang::Kotlin, &mock::rules("campaign_k2")),
            mock::spec("kotlinc-1", Lang::Kotlin, &mock::rules("pass")),
        ],
        differential_pairs: vec![DifferentialPair {
            language: Lang::Kotlin,
            latest: "kotlinc-2".into(),
            earlier: "kotlinc-1".into(),
        }],
        output_dir: out.to_path_buf(),
        campaign_seed: 20240611,
        max_programs: 8,
        mutants_per_program: 2,
        workers,
        minimize: true,
        minimizer: MinimizeConfig { budget: 300, ..MinimizeConfig::default() },
        ..CampaignConfig::default()
    }
}

/// Relative path to content for every JSON file under `corpus/` plus the summary.
pub fn deterministic_files(out: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![out.join("corpus")];
    while let Some(dir) = stack.pop() {
        let Ok(entries) = std::fs::read_dir(&dir) else { continue };
        for e in entries.flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "json") {
                files.insert(p.strip_prefix(out).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    files.insert("summary.json".into(), std::fs::read(out.join("summary.json")).unwrap_or_default());
    files
}

pub fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for (name, workers) in [("a", 1), ("b", 1), ("c", 3)] {
        let out = tmp.path().join(name);
        if let Err(e) = campaign::run_campaign(&campaign_config(&out, workers)) {
            return Outcome::Fail(format!("campaign {name}: {e}"));
        }
        runs.push(deterministic_files(&out));
    }
    let mut errors = Vec::new();
    for (i, other) in runs.iter().enumerate().skip(1) {
        if *other != runs[0] {
            let keys: BTreeSet<_> = runs[0].keys().chain(other.keys()).collect();
            let differing: Vec<_> = keys.into_iter().filter(|k| runs[0].get(*k) != other.get(*k)).take(3).collect();
            errors.push(format!("run {i} differs in {differing:?}"));
        }
    }
    let summary: campaign::CampaignSummary = serde_json::from_slice(&runs[0]["summary.json"]).unwrap();
    if summary.programs == 0 {
        errors.push("empty campaign".into());
    }
    verdict(
        errors,
        format!(
            "{} files identical across 3 runs (1 and 3 workers), {} findings",
            runs[0].len(),
            summary.findings.len()
        ),
    )
}

pub fn mutator_safety() -> Outcome {
    let cfg = MutatorConfig { enabled: MutatorKind::ALL.into_iter().collect(), ..MutatorConfig::default() };
    let mut errors = Vec::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut done = 0;
    let mut seed = 0u64;
    while done < 10_000 {
        seed += 1;
        let p = generate_ir_program(&GenConfig::default().with_seed(seed / 4)).unwrap();
        let mut rng = Rng::from_seed(seed);
        let Ok((q, rec)) = mutators::mutate_random(&p, &mut rng, &cfg) else { continue };
        done += 1;
        *counts.entry(rec.mutator.to_string()).or_default() += 1;
        let report = validate_with(&q, ValidationMode::StructuralOnly);
        if !report.is_valid() {
            errors.push(format!("seed {seed} {}: {:?}", rec.mutator, report.violations[0]));
        }
        let touched = rec.touched_paths(&p);
        let diff = json_diff_paths(&p.structure_value(), &q.structure_value());
        let under = |d: &String, t: &String| d == t || d.starts_with(&format!("{t}/"));
        if diff.iter().any(|d| !touched.iter().any(|t| under(d, t))) || touched.iter().any(|t| !diff.iter().any(|d| under(d, t))) {
            errors.push(format!("seed {seed} {}: diff {diff:?} vs recorded {touched:?}", rec.mutator));
        }
        match rec.revert(&q) {
            Ok(back) if back.to_canonical_json() == p.to_canonical_json() => {}
            _ => errors.push(format!("seed {seed} {}: revert does not restore", rec.mutator)),
        }
    }
    verdict(errors, format!("10000 mutations {counts:?}"))
}

/// Which language each figure's compiler pair varies, whether it is a
/// control, and the rules of the side documented to behave differently.
pub fn figure_pairs() -> Vec<(&'static str, Lang, &'static str, TestResult)> {
    vec![
        ("fig2", Lang::Kotlin, "fig2", TestResult::Discrepancy),
        ("fig3", Lang::Kotlin, "fig3", TestResult::Discrepancy),
        ("fig6a", Lang::Kotlin, "fig6a", TestResult::Discrepancy),
        ("fig6b", Lang::Scala, "fig6b", TestResult::Discrepancy),
        ("fig7a", Lang::Groovy, "fig7a", TestResult::Discrepancy),
        ("fig7b", Lang::Groovy, "fig7a", TestResult::Ok),
        ("fig8", Lang::Kotlin, "fig8", TestResult::Discrepancy),
        ("fig9", Lang::Kotlin, "fig9", TestResult::Discrepancy),
        ("fig11", Lang::Groovy, "fig11", TestResult::Discrepancy),
        ("fig12", Lang::Scala, "fig12", TestResult::Discrepancy),
    ]
}

pub fn golden_mismatches(name: &str, program: &IrProgram) -> Vec<String> {
    let mut errors = Vec::new();
    let dir = fixtures_dir().join("golden").join(name);
    let bundle = match render::render(program) {
        Ok(b) => b,
        Err(e) => return vec![format!("{name}: {e}")],
    };
    let mut expected: BTreeSet<String> = std::fs::read_dir(&dir)
        .map(|r| r.flatten().map(|e| e.file_name().to_string_lossy().into_owned()).collect())
        .unwrap_or_default();
    for f in &bundle.files {
        let path = f.path.clone();
        if !expected.remove(&path) {
            errors.push(format!("{name}: no golden for {path}"));
            continue;
        }
        let golden = std::fs::read_to_string(dir.join(&path)).unwrap();
        let (a, b) = (tokens(&f.content), tokens(&golden));
        if a != b {
            let at = a.iter().zip(&b).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
            errors.push(format!("{name}/{path}: token {at} differs: {:?} vs golden {:?}", a.get(at), b.get(at)));
        }
    }
    for left in expected {
        errors.push(format!("{name}: golden {left} not rendered"));
    }
    errors
}

pub fn figure_verdict(name: &str, program: &IrProgram, lang: Lang, rules: &str, work: &Path) -> Result<TestVerdict, String> {
    let bundle = render::render(program).map_err(|e| e.to_string())?;
    let a = mock::plan("latest", lang, &mock::rules(rules));
    let b = mock::plan("earlier", lang, &mock::rules("pass"));
    let dirs = RunDirs::new(work, "fixtures");
    harness::differential_test(&bundle, (&a, &b), &dirs, name).map_err(|e| e.to_string())
}

pub fn fixture_regression() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let figures: BTreeMap<&str, IrProgram> = all_figures().into_iter().collect();
    let mut errors = Vec::new();
    for (name, lang, rules, want) in figure_pairs() {
        let p = &figures[name];
        errors.extend(golden_mismatches(name, p));
        match figure_verdict(name, p, lang, rules, tmp.path()) {
            Ok(v) if v.result == want => {}
            Ok(v) => errors.push(format!("{name}: {:?}, want {want:?}", v.result)),
            Err(e) => errors.push(format!("{name}: {e}")),
        }
    }
    verdict(errors, format!("{} fixtures token-equivalent and classified", figures.len()))
}

fn installed(tool: &str, arg: &str) -> bool {
    Command::new(tool).arg(arg).output().map(|o| o.status.success()).unwrap_or(false)
}

fn real_spec(id: &str, lang: Lang, exe: &str, extra: &[&str]) -> CompilerSpec {
    let mut inv = vec![exe.to_string()];
    inv.extend(extra.iter().map(|s| s.to_string()));
    inv.extend(["-cp", "{classpath}", "-d", "{outDir}", "{sources}"].map(String::from));
    let mut s = CompilerSpec::new(id, lang, inv);
    s.timeout_secs = 300.0;
    s
}

pub fn real_compilers() -> Outcome {
    let has_javac = installed("javac", "-version");
    let has_kotlinc = installed("kotlinc", "-version");
    if !has_javac {
        return Outcome::Skip("javac not installed".into());
    }
    let tmp = tempfile::tempdir().unwrap();
    let dirs = RunDirs::new(tmp.path(), "real");
    let javac = real_spec("javac", Lang::Java, "javac", &[]);
    let java_plan = ToolchainPlan::new("java").with(javac.clone());
    let start = Instant::now();
    let mut errors = Vec::new();
    let mut notes = Vec::new();
    let java_only = GenConfig { languages: [Lang::Java].into_iter().collect(), ..GenConfig::default() };
    for seed in 0..100 {
        let p = generate_ir_program(&java_only.clone().with_seed(seed)).unwrap();
        let bundle = render::render(&p).unwrap();
        match harness::normal_test(&bundle, &java_plan, &dirs, &format!("j{seed}")) {
            Ok(v) if v.result == TestResult::Ok => {}
            Ok(v) => errors.push(format!("java seed {seed}: {:?} {}", v.result, v.outcomes[0].outcome.diagnostics)),
            Err(e) => errors.push(format!("java seed {seed}: {e}")),
        }
    }
    if start.elapsed() > Duration::from_secs(300) {
        errors.push(format!("java batch took {:?}", start.elapsed()));
    }
    notes.push("100 Java programs".to_string());
    if has_kotlinc {
        let kplan = java_plan.clone().with(real_spec("kotlinc", Lang::Kotlin, "kotlinc", &[]));
        for seed in 0..50 {
            let p = generate_ir_program(&GenConfig::default().with_seed(seed)).unwrap();
            let bundle = render::render(&p).unwrap();
            match harness::normal_test(&bundle, &kplan, &dirs, &format!("k{seed}")) {
                Ok(v) if v.result == TestResult::Ok => {}
                Ok(v) => errors.push(format!("kotlin seed {seed}: {:?}", v.result)),
                Err(e) => errors.push(format!("kotlin seed {seed}: {e}")),
            }
        }
        notes.push("50 Kotlin+Java programs".into());
        let k2 = java_plan.clone().with(real_spec("k2", Lang::Kotlin, "kotlinc", &["-language-version", "2.0"]));
        let k1 = java_plan.with(real_spec("k1", Lang::Kotlin, "kotlinc", &["-language-version", "1.9"]));
        let bundle = render::render(&super::fig3()).unwrap();
        match harness::differential_test(&bundle, (&k2, &k1), &dirs, "fig3") {
            Ok(v) if v.result == TestResult::Discrepancy => notes.push("fig3 K1/K2 discrepancy".into()),
            Ok(v) => errors.push(format!("fig3 K1/K2: {:?}", v.result)),
            Err(e) => errors.push(format!("fig3 K1/K2: {e}")),
        }
    } else {
        notes.push("kotlinc absent, Kotlin part skipped".into());
    }
    verdict(errors, notes.join(", "))
}

type Pred = fn(&IrProgram) -> bool;

fn any_type(p: &IrProgram, f: impl Fn(&TypeRef) -> bool) -> bool {
    p.declarations.iter().any(|d| d.type_usages().any(|t| {
        let mut hit = false;
        t.walk(&mut |n| hit |= f(n));
        hit
    }))
}

/// Structural predicates standing in for compiler bugs.
pub fn synthetic_predicates() -> Vec<(&'static str, Pred)> {
    vec![
        ("multi-super", |p| p.declarations.iter().any(|d| d.supertypes.len() >= 2)),
        ("cross-lang-edge", |p| {
            p.declarations.iter().any(|d| d.supertypes.iter().any(|s| p.decl(&s.target).is_some_and(|t| t.lang != d.lang)))
        }),
        ("generic-super", |p| p.declarations.iter().any(|d| d.supertypes.iter().any(|s| !s.args.is_empty()))),
        ("override-chain", |p| {
            p.declarations.iter().flat_map(|d| &d.methods).any(|m| {
                m.overrides.iter().any(|r| p.decl(&r.decl).and_then(|d| d.method(&r.method)).is_some_and(|t| !t.overrides.is_empty()))
            })
        }),
        ("abstract-method", |p| {
            p.declarations.iter().any(|d| d.modifier == ClassModifier::Abstract && d.kind == DeclKind::Class && d.methods.iter().any(|m| m.kind == MethodKind::Abstract))
        }),
        ("int-usage", |p| any_type(p, |t| *t == TypeRef::builtin(Builtin::Int))),
        ("kotlin-default", |p| {
            p.declarations.iter().any(|d| d.lang == Lang::Kotlin && d.is_interface() && d.methods.iter().any(|m| m.kind == MethodKind::Normal))
        }),
        ("param-usage", |p| any_type(p, |t| matches!(t, TypeRef::TypeParam { .. }))),
        ("final-method", |p| p.declarations.iter().flat_map(|d| &d.methods).any(|m| m.kind == MethodKind::Final)),
        ("two-targets", |p| p.declarations.iter().flat_map(|d| &d.methods).any(|m| m.overrides.len() >= 2)),
    ]
}

pub fn minimizer_correctness() -> Outcome {
    let preds = synthetic_predicates();
    let cfg = MinimizeConfig::default();
    let gen = GenConfig { decl_count: CountRange::new(5, 10), ..GenConfig::default() };
    let start = Instant::now();
    let mut errors = Vec::new();
    let mut cases = 0;
    let mut seed = 0;
    let mut shrink = (0usize, 0usize);
    while cases < 50 {
        seed += 1;
        let p = generate_ir_program(&gen.clone().with_seed(seed)).unwrap();
        let Some(&(name, pred)) = (0..preds.len()).map(|k| &preds[(cases + k) % preds.len()]).find(|(_, f)| f(&p)) else {
            continue;
        };
        cases += 1;
        let mut oracle = PredicateOracle(|q: &IrProgram| pred(q).then(|| name.to_string()));
        let result = match minimize(&p, &mut oracle, &cfg) {
            Ok(r) => r,
            Err(e) => {
                errors.push(format!("seed {seed} {name}: {e}"));
                continue;
            }
        };
        let m = &result.minimized;
        shrink.0 += p.declarations.len();
        shrink.1 += m.declarations.len();
        if !pred(m) {
            errors.push(format!("seed {seed} {name}: minimized program lost the bug"));
        }
        let here = SizeMeasure::of(m, cfg.pivot);
        for kind in &cfg.enabled {
            for pass in candidate_passes(m, *kind, cfg.pivot) {
                let Some(q) = apply_pass(m, &pass, cfg.pivot) else { continue };
                if SizeMeasure::of(&q, cfg.pivot).strictly_below(&here) && pred(&q) {
                    errors.push(format!("seed {seed} {name}: not 1-minimal, {pass:?} keeps the bug"));
                }
            }
        }
        match replay_trail(&p, &result.trail, cfg.pivot) {
            Some(r) if r.to_canonical_json() == m.to_canonical_json() => {}
            _ => errors.push(format!("seed {seed} {name}: kept passes do not replay to the result")),
        }
        let before = p.to_canonical_json();
        let mut cur = p.clone();
        for e in &result.trail {
            let snapshot = cur.to_canonical_json();
            let Some(next) = apply_pass(&cur, &e.pass, cfg.pivot) else {
                errors.push(format!("seed {seed} {name}: trail pass no longer applies"));
                break;
            };
            if e.outcome == PassOutcome::Kept {
                cur = next;
            } else if cur.to_canonical_json() != snapshot {
                errors.push(format!("seed {seed} {name}: rollback changed state"));
            }
        }
        if p.to_canonical_json() != before {
            errors.push(format!("seed {seed} {name}: input was modified"));
        }
    }
    let took = start.elapsed();
    if took > Duration::from_secs(60) {
        errors.push(format!("took {took:?}"));
    }
    verdict(
        errors,
        format!("50 oracles, declarations {} -> {}, {:.1}s", shrink.0, shrink.1, took.as_secs_f64()),
    )
}

fn fake_finding(id: &str, program: &IrProgram, status: FindingStatus) -> Finding {
    let outcome = CompileOutcome::new(CompileStatus::Reject, Some(1), format!("error in {id}"), 1);
    Finding {
        id: id.into(),
        program: program.clone(),
        minimized: None,
        bundle_ref: format!("corpus/{}", program.id()),
        verdict: TestVerdict {
            mode: TestMode::Differential,
            result: TestResult::Discrepancy,
            outcomes: vec![PlanOutcome { plan: "a".into(), outcome }],
        },
        fingerprint: id.into(),
        metrics: ProgramMetrics::of(program),
        mutation_trail: Vec::new(),
        attribution: campaign::ATTRIBUTION_GENERATOR.into(),
        status,
        forked_from: None,
    }
}

pub fn metrics() -> Outcome {
    let figs: BTreeMap<&str, IrProgram> = all_figures().into_iter().collect();
    let mut errors = Vec::new();
    for (name, want) in [("fig6a", (3, 3)), ("fig7a", (2, 2))] {
        let got = (inheritance_depth(&figs[name]), inheritance_width(&figs[name]));
        if got != want {
            errors.push(format!("{name}: {got:?}, want {want:?}"));
        }
    }
    // Hand-counted over the fixture set.
    let all: Vec<Finding> =
        figs.iter().map(|(n, p)| fake_finding(n, p, FindingStatus::New)).collect();
    let r = campaign::build_report(&all);
    let c = r.characteristics;
    let want = (6, 4, 6, 4, 2.0, 2.0);
    let got = (c.cross_language, c.single_language, c.generics_related, c.not_generics_related, c.average_depth, c.average_width);
    if got != want {
        errors.push(format!("fixture set: {got:?}, want {want:?}"));
    }
    let subset = vec![
        fake_finding("fig3", &figs["fig3"], FindingStatus::New),
        fake_finding("fig3-dup", &figs["fig3"], FindingStatus::Duplicate),
        fake_finding("fig6b", &figs["fig6b"], FindingStatus::Minimized),
        fake_finding("fig11", &figs["fig11"], FindingStatus::New),
    ];
    let r = campaign::build_report(&subset);
    let c = r.characteristics;
    let want = (1, 2, 2, 1, 1.67, 2.0);
    let got = (c.cross_language, c.single_language, c.generics_related, c.not_generics_related, c.average_depth, c.average_width);
    if got != want {
        errors.push(format!("subset: {got:?}, want {want:?}"));
    }
    let md = campaign::render_markdown(&r);
    if !md.contains("| Average Inheritance Depth | 1.67 |") {
        errors.push("markdown average not rendered to 2 decimals".into());
    }
    verdict(errors, "fig6a (3,3), fig7a (2,2), averages 2.00/2.00 and 1.67/2.00".into())
}

pub fn fingerprint_dedup() -> Outcome {
    let text = std::fs::read_to_string(fixtures_dir().join("fingerprints.json")).unwrap();
    let cases: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    let fps: Vec<(String, String)> = cases
        .iter()
        .map(|c| (c["group"].as_str().unwrap().to_string(), fingerprint(c["text"].as_str().unwrap())))
        .collect();
    let mut errors = Vec::new();
    for (i, (g1, f1)) in fps.iter().enumerate() {
        for (j, (g2, f2)) in fps.iter().enumerate().skip(i + 1) {
            if (g1 == g2) != (f1 == f2) {
                errors.push(format!("cases {i} ({g1}) and {j} ({g2}): same group {}, same fingerprint {}", g1 == g2, f1 == f2));
            }
        }
    }
    if fps.len() != 20 {
        errors.push(format!("fixture has {} cases", fps.len()));
    }
    verdict(errors, format!("{} cases, {} groups", fps.len(), fps.iter().map(|f| &f.0).collect::<BTreeSet<_>>().len()))
}
