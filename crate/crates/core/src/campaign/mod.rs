//! Campaign driver: generate, test, mutate, differential-test, dedup and
//! minimize, persisting everything under the output directory.
//!
//! Layout of the output directory:
//!
//! ```text
//! corpus/<programId>/program.json     canonical IR
//! corpus/<programId>/src/...          rendered sources
//! corpus/<programId>/bundle.json
//! findings/<findingId>.json
//! minimized/<findingId>/              reduced bundle, trail.json, report.md
//! runs/<runId>/<programId>/          compiler work directories and
//!                                     outcomes.json
//! summary.json
//! ```

mod config;
mod report;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::thread;

use serde::{Deserialize, Serialize};

pub use config::{env_override_name, CampaignConfig, ConfigError, DifferentialPair};
pub use report::{build_report, load_findings, render_markdown, write_report, Characteristics, Report};

use crate::generator::{generate_ir_program, GenError};
use crate::harness::{self, HarnessError, RunDirs, TestMode, TestResult, TestVerdict, ToolchainPlan};
use crate::ir::{IrProgram, ProgramMetrics};
use crate::minimizer::{self, verdict_signature, HarnessOracle, MinimizationResult};
use crate::mutators::{self, MutationRecord};
use crate::render::{self, RenderError};
use crate::rng::{derive_seed, Rng};

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CampaignError + '_ {
    move |source| CampaignError::Io { path: path.to_path_buf(), source }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CampaignError> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    fs::write(path, text).map_err(io_err(path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FindingStatus {
    New,
    Duplicate,
    Minimized,
}

/// Process credited with a finding.
pub const ATTRIBUTION_GENERATOR: &str = "Generator";
pub const ATTRIBUTION_MINIMIZATION: &str = "Minimization";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub id: String,
    pub program: IrProgram,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimized: Option<IrProgram>,
    /// Corpus directory of the program, relative to the output directory.
    pub bundle_ref: String,
    pub verdict: TestVerdict,
    /// Result class plus diagnostic fingerprint.
    pub fingerprint: String,
    /// Characteristics of the minimized program when there is one.
    pub metrics: ProgramMetrics,
    pub mutation_trail: Vec<MutationRecord>,
    pub attribution: String,
    pub status: FindingStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forked_from: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindingSummary {
    pub id: String,
    pub program: String,
    pub result: Option<TestResult>,
    pub fingerprint: String,
    pub status: Option<FindingStatus>,
    pub attribution: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub campaign_seed: u64,
    pub programs: usize,
    pub mutants: usize,
    pub normal_tests: usize,
    pub differential_tests: usize,
    /// Verdict counts keyed by result class.
    pub results: BTreeMap<String, usize>,
    pub harness_errors: Vec<String>,
    pub findings_new: usize,
    pub findings_duplicate: usize,
    pub findings_minimized: usize,
    pub findings: Vec<FindingSummary>,
}

impl CampaignSummary {
    pub fn has_findings(&self) -> bool {
        !self.findings.is_empty()
    }
}

struct Flagged {
    program: IrProgram,
    verdict: TestVerdict,
    signature: String,
    attribution: String,
    plans: Vec<ToolchainPlan>,
}

#[derive(Default)]
struct ProgramRun {
    mutants: usize,
    normal_tests: usize,
    differential_tests: usize,
    results: Vec<TestResult>,
    errors: Vec<String>,
    flagged: Vec<Flagged>,
}

struct Ctx<'a> {
    config: &'a CampaignConfig,
    latest: ToolchainPlan,
    pairs: Vec<(DifferentialPair, ToolchainPlan, ToolchainPlan)>,
    dirs: RunDirs,
    corpus: PathBuf,
}

fn persist_program(ctx: &Ctx, program: &IrProgram, verdicts: &[TestVerdict]) -> Result<(), CampaignError> {
    let dir = ctx.corpus.join(program.id());
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let path = dir.join("program.json");
    fs::write(&path, program.to_canonical_json()).map_err(io_err(&path))?;
    render::render(program)?.write_to(&dir).map_err(io_err(&dir))?;
    let runs = ctx.dirs.root().join(program.id());
    fs::create_dir_all(&runs).map_err(io_err(&runs))?;
    write_json(&runs.join("outcomes.json"), &verdicts)
}

fn record(run: &mut ProgramRun, r: Result<TestVerdict, HarnessError>) -> Option<TestVerdict> {
    match r {
        Ok(v) => {
            run.results.push(v.result);
            Some(v)
        }
        Err(e) => {
            run.errors.push(e.to_string());
            None
        }
    }
}

/// Generation, normal testing and mutant differential testing of one
/// program. Independent of every other program.
fn run_program(ctx: &Ctx, index: u64) -> Result<ProgramRun, CampaignError> {
    let cfg = ctx.config;
    let seed = derive_seed(cfg.campaign_seed, index);
    let program = generate_ir_program(&cfg.gen.clone().with_seed(seed))?;
    let bundle = render::render(&program)?;
    let mut run = ProgramRun::default();
    let pid = program.id();

    run.normal_tests += 1;
    let normal = record(&mut run, harness::normal_test(&bundle, &ctx.latest, &ctx.dirs, &pid));
    let parent_signature = normal.as_ref().and_then(verdict_signature);
    if let (Some(v), Some(sig)) = (&normal, &parent_signature) {
        run.flagged.push(Flagged {
            program: program.clone(),
            verdict: v.clone(),
            signature: sig.clone(),
            attribution: ATTRIBUTION_GENERATOR.into(),
            plans: vec![ctx.latest.clone()],
        });
    }
    persist_program(ctx, &program, normal.as_slice())?;

    let mcfg = cfg.mutator_config();
    for k in 0..cfg.mutants_per_program {
        let mut rng = Rng::from_seed(derive_seed(seed, k as u64 + 1));
        let Ok((mutant, rec)) = mutators::mutate_random(&program, &mut rng, &mcfg) else { continue };
        run.mutants += 1;
        let mid = mutant.id();
        let mbundle = render::render(&mutant)?;
        let langs = mutant.languages();
        let mut verdicts = Vec::new();
        for (pair, a, b) in ctx.pairs.iter().filter(|(p, _, _)| langs.contains(&p.language)) {
            run.differential_tests += 1;
            let work = format!("{mid}-{}", pair.language.extension());
            let Some(v) = record(&mut run, harness::differential_test(&mbundle, (a, b), &ctx.dirs, &work)) else { continue };
            if let Some(sig) = verdict_signature(&v) {
                let attribution = if parent_signature.as_deref() == Some(sig.as_str()) {
                    ATTRIBUTION_GENERATOR.to_string()
                } else {
                    rec.mutator.display_name().to_string()
                };
                run.flagged.push(Flagged {
                    program: mutant.clone(),
                    verdict: v.clone(),
                    signature: sig,
                    attribution,
                    plans: vec![a.clone(), b.clone()],
                });
            }
            verdicts.push(v);
        }
        persist_program(ctx, &mutant, &verdicts)?;
    }
    Ok(run)
}

fn make_finding(id: String, f: &Flagged, status: FindingStatus) -> Finding {
    Finding {
        id,
        program: f.program.clone(),
        minimized: None,
        bundle_ref: format!("corpus/{}", f.program.id()),
        verdict: f.verdict.clone(),
        fingerprint: f.signature.clone(),
        metrics: ProgramMetrics::of(&f.program),
        mutation_trail: f.program.provenance.clone(),
        attribution: f.attribution.clone(),
        status,
        forked_from: None,
    }
}

fn persist_minimization(dir: &Path, finding: &Finding, result: &MinimizationResult) -> Result<(), CampaignError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    render::render(&result.minimized)?.write_to(dir).map_err(io_err(dir))?;
    let path = dir.join("program.json");
    fs::write(&path, result.minimized.to_canonical_json()).map_err(io_err(&path))?;
    write_json(&dir.join("trail.json"), &result.trail)?;
    let kept = result.trail.iter().filter(|e| e.outcome == minimizer::PassOutcome::Kept).count();
    let before = ProgramMetrics::of(&finding.program);
    let after = ProgramMetrics::of(&result.minimized);
    let md = format!(
        "# Minimized {}\n\nSignature: `{}`\n\n| | declarations | methods | depth | width |\n|---|---|---|---|---|\n| original | {} | {} | {} | {} |\n| minimized | {} | {} | {} | {} |\n\nPasses kept: {kept} of {} tried. Oracle calls: {}. Budget exhausted: {}. Forked findings: {}.\n",
        finding.id,
        finding.fingerprint,
        finding.program.declarations.len(),
        finding.program.method_count(),
        before.depth,
        before.width,
        result.minimized.declarations.len(),
        result.minimized.method_count(),
        after.depth,
        after.width,
        result.trail.len(),
        result.oracle_calls,
        result.budget_exhausted,
        result.forked_findings.len(),
    );
    let path = dir.join("report.md");
    fs::write(&path, md).map_err(io_err(&path))
}

/// Runs a whole campaign. Identical configs produce identical corpus and
/// summary files.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignSummary, CampaignError> {
    config.validate()?;
    let out = &config.output_dir;
    let corpus = out.join("corpus");
    let findings_dir = out.join("findings");
    for d in [&corpus, &findings_dir] {
        fs::create_dir_all(d).map_err(io_err(d))?;
    }
    let mut pairs = Vec::new();
    for p in &config.differential_pairs {
        let (a, b) = config.pair_plans(p)?;
        pairs.push((p.clone(), a, b));
    }
    let runs_dir = out.join("runs");
    let ctx = Ctx { config, latest: config.latest_plan(), pairs, dirs: RunDirs::new(&runs_dir, &config.run_id), corpus };

    let n = config.max_programs as u64;
    let workers = config.workers.max(1) as u64;
    let mut runs: Vec<Option<Result<ProgramRun, CampaignError>>> = (0..n).map(|_| None).collect();
    thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let ctx = &ctx;
                s.spawn(move || {
                    (0..n).filter(|i| i % workers == w).map(|i| (i, run_program(ctx, i))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("campaign worker panicked") {
                runs[i as usize] = Some(r);
            }
        }
    });

    let mut summary = CampaignSummary { campaign_seed: config.campaign_seed, programs: n as usize, ..Default::default() };
    let mut flagged = Vec::new();
    for r in runs.into_iter().flatten() {
        let r = r?;
        summary.mutants += r.mutants;
        summary.normal_tests += r.normal_tests;
        summary.differential_tests += r.differential_tests;
        for res in r.results {
            *summary.results.entry(format!("{res:?}").to_uppercase()).or_default() += 1;
        }
        summary.harness_errors.extend(r.errors);
        flagged.extend(r.flagged);
    }

    let mut seen: HashSet<String> = HashSet::new();
    let mut findings: Vec<Finding> = Vec::new();
    let mut queue: Vec<(Flagged, Option<String>)> = flagged.into_iter().map(|f| (f, None)).collect();
    queue.reverse();
    while let Some((f, parent)) = queue.pop() {
        let id = format!("F{:04}", findings.len());
        let status = if seen.insert(f.signature.clone()) { FindingStatus::New } else { FindingStatus::Duplicate };
        let mut finding = make_finding(id.clone(), &f, status);
        finding.forked_from = parent.clone();
        if status == FindingStatus::New && config.minimize && parent.is_none() {
            let mode = if f.plans.len() == 2 { TestMode::Differential } else { TestMode::Normal };
            let mut oracle = HarnessOracle::new(mode, f.plans.clone(), runs_dir.join(&config.run_id).join("minimize"), &id);
            if let Ok(result) = minimizer::minimize_towards(&f.program, &f.signature, &mut oracle, &config.minimizer) {
                finding.status = FindingStatus::Minimized;
                finding.metrics = ProgramMetrics::of(&result.minimized);
                finding.minimized = Some(result.minimized.clone());
                persist_minimization(&out.join("minimized").join(&id), &finding, &result)?;
                // Forks go to the front so ids follow discovery order.
                for fork in result.forked_findings.iter().rev() {
                    let Some(verdict) = fork.verdict.clone() else { continue };
                    queue.push((
                        Flagged {
                            program: fork.program.clone(),
                            verdict,
                            signature: fork.signature.clone(),
                            attribution: ATTRIBUTION_MINIMIZATION.into(),
                            plans: f.plans.clone(),
                        },
                        Some(id.clone()),
                    ));
                }
            }
        }
        write_json(&findings_dir.join(format!("{id}.json")), &finding)?;
        findings.push(finding);
    }

    for f in &findings {
        match f.status {
            FindingStatus::New => summary.findings_new += 1,
            FindingStatus::Duplicate => summary.findings_duplicate += 1,
            FindingStatus::Minimized => summary.findings_minimized += 1,
        }
        summary.findings.push(FindingSummary {
            id: f.id.clone(),
            program: f.program.id(),
            result: Some(f.verdict.result),
            fingerprint: f.fingerprint.clone(),
            status: Some(f.status),
            attribution: f.attribution.clone(),
        });
    }
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}
