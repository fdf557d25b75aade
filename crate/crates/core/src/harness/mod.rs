//! Compiling rendered bundles under real or scripted compilers and
//! classifying the outcomes.

mod fingerprint;
pub mod mock;
mod process;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ir::Lang;
use crate::render::SourceBundle;

pub use fingerprint::{fingerprint, normalize_diagnostics};
pub use process::{run_with_timeout, ProcessOutput};

pub const PLACEHOLDERS: [&str; 3] = ["{sources}", "{classpath}", "{outDir}"];

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("toolchain unavailable: {0}")]
    ToolchainUnavailable(String),
    #[error("unsupported language mix {0:?}: at most one non-Java language per bundle")]
    UnsupportedLanguageMix(Vec<Lang>),
    #[error("invalid compiler spec `{id}`: {reason}")]
    InvalidSpec { id: String, reason: String },
    #[error("work directory {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn default_timeout() -> f64 {
    60.0
}

pub fn default_crash_patterns() -> Vec<String> {
    vec![
        r"(?m)^\s*at [\w$.<>/]+\(.*\)\s*$".into(),
        r"(?i)internal (compiler )?error".into(),
        r"(?i)exception in thread".into(),
        r"(?i)\w*exception:\s".into(),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompilerSpec {
    pub id: String,
    pub language: Lang,
    /// Argument vector. A lone `{sources}` argument expands to one argument
    /// per source file.
    pub invocation: Vec<String>,
    #[serde(default)]
    pub version: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_crash_patterns")]
    pub crash_patterns: Vec<String>,
    #[serde(default)]
    pub env: BTreeMap<String, String>,
}

impl CompilerSpec {
    pub fn new(id: impl Into<String>, language: Lang, invocation: Vec<String>) -> Self {
        CompilerSpec {
            id: id.into(),
            language,
            invocation,
            version: String::new(),
            timeout_secs: default_timeout(),
            crash_patterns: default_crash_patterns(),
            env: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let invalid = |reason: String| HarnessError::InvalidSpec { id: self.id.clone(), reason };
        if self.invocation.is_empty() {
            return Err(invalid("empty invocation".into()));
        }
        for ph in PLACEHOLDERS {
            if !self.invocation.iter().any(|a| a.contains(ph)) {
                return Err(invalid(format!("invocation lacks {ph}")));
            }
        }
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(invalid("timeout must be positive".into()));
        }
        for p in &self.crash_patterns {
            Regex::new(p).map_err(|e| invalid(e.to_string()))?;
        }
        Ok(())
    }

    fn command(&self, sources: &[PathBuf], classpath: &Path, out_dir: &Path) -> Command {
        let joined = sources.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(" ");
        let mut args = Vec::new();
        for a in &self.invocation {
            if a == "{sources}" {
                args.extend(sources.iter().map(|p| p.display().to_string()));
            } else {
                args.push(
                    a.replace("{sources}", &joined)
                        .replace("{classpath}", &classpath.display().to_string())
                        .replace("{outDir}", &out_dir.display().to_string()),
                );
            }
        }
        let mut cmd = Command::new(&args[0]);
        cmd.args(&args[1..]).envs(&self.env);
        cmd
    }

    fn is_crash(&self, diagnostics: &str) -> bool {
        self.crash_patterns.iter().any(|p| Regex::new(p).map(|re| re.is_match(diagnostics)).unwrap_or(false))
    }
}

/// One compiler per language; Java is always required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolchainPlan {
    pub id: String,
    pub compilers: BTreeMap<Lang, CompilerSpec>,
}

impl ToolchainPlan {
    pub fn new(id: impl Into<String>) -> Self {
        ToolchainPlan { id: id.into(), compilers: BTreeMap::new() }
    }

    pub fn with(mut self, spec: CompilerSpec) -> Self {
        self.compilers.insert(spec.language, spec);
        self
    }

    fn compiler(&self, lang: Lang) -> Result<&CompilerSpec, HarnessError> {
        self.compilers
            .get(&lang)
            .ok_or_else(|| HarnessError::ToolchainUnavailable(format!("plan `{}` has no {lang} compiler", self.id)))
    }

    /// The single language whose compiler differs between the plans.
    pub fn varied_language(&self, other: &ToolchainPlan) -> Option<Lang> {
        let langs: Vec<Lang> = Lang::ALL
            .into_iter()
            .filter(|l| self.compilers.get(l).map(|c| &c.id) != other.compilers.get(l).map(|c| &c.id))
            .collect();
        match langs.as_slice() {
            [l] => Some(*l),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CompileStatus {
    Pass,
    Reject,
    Crash,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileOutcome {
    pub status: CompileStatus,
    pub exit_code: Option<i32>,
    pub diagnostics: String,
    pub duration_ms: u64,
    pub fingerprint: String,
}

impl CompileOutcome {
    pub fn new(status: CompileStatus, exit_code: Option<i32>, diagnostics: String, duration_ms: u64) -> Self {
        let fingerprint = fingerprint(&diagnostics);
        CompileOutcome { status, exit_code, diagnostics, duration_ms, fingerprint }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TestMode {
    Normal,
    Differential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TestResult {
    Ok,
    NormalReject,
    Discrepancy,
    CrashFound,
    Inconclusive,
}

impl TestResult {
    pub fn is_flagged(self) -> bool {
        matches!(self, TestResult::NormalReject | TestResult::Discrepancy | TestResult::CrashFound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub plan: String,
    pub outcome: CompileOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub mode: TestMode,
    pub result: TestResult,
    pub outcomes: Vec<PlanOutcome>,
}

impl TestVerdict {
    /// Fingerprint of the failing side, for flagged verdicts.
    pub fn fingerprint(&self) -> Option<String> {
        if !self.result.is_flagged() {
            return None;
        }
        let wanted = match self.result {
            TestResult::CrashFound => CompileStatus::Crash,
            _ => CompileStatus::Reject,
        };
        self.outcomes.iter().find(|o| o.outcome.status == wanted).map(|o| o.outcome.fingerprint.clone())
    }
}

pub fn classify_normal(outcome: &CompileOutcome) -> TestResult {
    match outcome.status {
        CompileStatus::Pass => TestResult::Ok,
        CompileStatus::Reject => TestResult::NormalReject,
        CompileStatus::Crash => TestResult::CrashFound,
        CompileStatus::Timeout => TestResult::Inconclusive,
    }
}

pub fn classify_differential(a: &CompileOutcome, b: &CompileOutcome) -> TestResult {
    use CompileStatus::*;
    match (a.status, b.status) {
        (Timeout, _) | (_, Timeout) => TestResult::Inconclusive,
        (Crash, _) | (_, Crash) => TestResult::CrashFound,
        (Pass, Reject) | (Reject, Pass) => TestResult::Discrepancy,
        _ => TestResult::Ok,
    }
}

/// Per-run work directory layout: `<runs>/<runId>/<programId>/<planId>/`.
#[derive(Debug, Clone)]
pub struct RunDirs {
    root: PathBuf,
}

impl RunDirs {
    pub fn new(runs_dir: &Path, run_id: &str) -> Self {
        RunDirs { root: runs_dir.join(run_id) }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn dir(&self, program_id: &str, plan_id: &str) -> PathBuf {
        self.root.join(program_id).join(plan_id)
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

fn run_step(spec: &CompilerSpec, sources: &[PathBuf], out_dir: &Path) -> Result<CompileOutcome, HarnessError> {
    let mut cmd = spec.command(sources, out_dir, out_dir);
    let timeout = Duration::from_secs_f64(spec.timeout_secs);
    let r = run_with_timeout(&mut cmd, timeout).map_err(|e| {
        if e.kind() == io::ErrorKind::NotFound {
            HarnessError::ToolchainUnavailable(format!("`{}` not found for compiler `{}`", spec.invocation[0], spec.id))
        } else {
            HarnessError::Io { path: PathBuf::from(&spec.invocation[0]), source: e }
        }
    })?;
    let status = if r.timed_out {
        CompileStatus::Timeout
    } else if r.exit_code == Some(0) {
        CompileStatus::Pass
    } else if r.exit_code.is_none() || spec.is_crash(&r.output) {
        CompileStatus::Crash
    } else {
        CompileStatus::Reject
    };
    Ok(CompileOutcome::new(status, r.exit_code, r.output, r.duration.as_millis() as u64))
}

/// Compiles the bundle in a fresh `work_dir`. Mixed bundles use the
/// non-Java compiler's joint mode; Kotlin and Scala are followed by javac
/// over the Java sources with the first step's classes on the classpath.
pub fn compile_bundle(bundle: &SourceBundle, plan: &ToolchainPlan, work_dir: &Path) -> Result<CompileOutcome, HarnessError> {
    let others: Vec<Lang> = bundle.languages().into_iter().filter(|l| *l != Lang::Java).collect();
    if others.len() > 1 {
        return Err(HarnessError::UnsupportedLanguageMix(bundle.languages()));
    }
    let steps: Vec<(&CompilerSpec, bool)> = match others.first() {
        None => vec![(plan.compiler(Lang::Java)?, true)],
        Some(Lang::Groovy) => vec![(plan.compiler(Lang::Groovy)?, false)],
        Some(&l) => {
            let mut v = vec![(plan.compiler(l)?, false)];
            if bundle.files_in(Lang::Java).next().is_some() {
                v.push((plan.compiler(Lang::Java)?, true));
            }
            v
        }
    };
    if work_dir.exists() {
        fs::remove_dir_all(work_dir).map_err(io_err(work_dir))?;
    }
    let src = bundle.write_to(work_dir).map_err(io_err(work_dir))?;
    let out = work_dir.join("out");
    fs::create_dir_all(&out).map_err(io_err(&out))?;
    if bundle.files.is_empty() {
        return Ok(CompileOutcome::new(CompileStatus::Pass, Some(0), String::new(), 0));
    }
    let mut diagnostics = String::new();
    let mut total_ms = 0;
    let mut last = None;
    for (spec, java_only) in steps {
        let sources: Vec<PathBuf> = bundle
            .files
            .iter()
            .filter(|f| !java_only || f.lang == Lang::Java)
            .map(|f| src.join(&f.path))
            .collect();
        let o = run_step(spec, &sources, &out)?;
        diagnostics.push_str(&o.diagnostics);
        total_ms += o.duration_ms;
        let stop = o.status != CompileStatus::Pass;
        last = Some((o.status, o.exit_code));
        if stop {
            break;
        }
    }
    let (status, exit_code) = last.expect("at least one step");
    Ok(CompileOutcome::new(status, exit_code, diagnostics, total_ms))
}

pub fn normal_test(
    bundle: &SourceBundle,
    plan: &ToolchainPlan,
    dirs: &RunDirs,
    program_id: &str,
) -> Result<TestVerdict, HarnessError> {
    let outcome = compile_bundle(bundle, plan, &dirs.dir(program_id, &plan.id))?;
    Ok(TestVerdict {
        mode: TestMode::Normal,
        result: classify_normal(&outcome),
        outcomes: vec![PlanOutcome { plan: plan.id.clone(), outcome }],
    })
}

pub fn differential_test(
    bundle: &SourceBundle,
    pair: (&ToolchainPlan, &ToolchainPlan),
    dirs: &RunDirs,
    program_id: &str,
) -> Result<TestVerdict, HarnessError> {
    let a = compile_bundle(bundle, pair.0, &dirs.dir(program_id, &pair.0.id))?;
    let b = compile_bundle(bundle, pair.1, &dirs.dir(program_id, &pair.1.id))?;
    Ok(TestVerdict {
        mode: TestMode::Differential,
        result: classify_differential(&a, &b),
        outcomes: vec![PlanOutcome { plan: pair.0.id.clone(), outcome: a }, PlanOutcome { plan: pair.1.id.clone(), outcome: b }],
    })
}
