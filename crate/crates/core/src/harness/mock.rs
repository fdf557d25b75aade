//! Scripted stand-in for a real compiler, driven by a TOML rule file.
//!
//! ```toml
//! default_action = "pass"
//!
//! [[rules]]
//! when_regex = "class A3"
//! when_ext = "kt"
//! action = "reject"
//! message = "error: Class 'A3' must override func"
//! ```
//!
//! The first rule whose conditions all hold decides the outcome. Sources
//! are read from the command line; a passing run writes one empty `.class`
//! file per source into the `-d` directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockAction {
    #[default]
    Pass,
    Reject,
    Crash,
    Timeout,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    /// Matched against every source file's text; any match counts.
    pub when_regex: Option<String>,
    pub when_min_files: Option<usize>,
    pub when_max_files: Option<usize>,
    /// Some source file has this extension.
    pub when_ext: Option<String>,
    pub action: MockAction,
    pub message: Option<String>,
    pub exit_code: Option<i32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRules {
    #[serde(default)]
    pub default_action: MockAction,
    #[serde(default)]
    pub rules: Vec<MockRule>,
}

#[derive(Debug, thiserror::Error)]
pub enum MockError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad rule file: {0}")]
    Rules(String),
}

impl MockRules {
    pub fn parse(text: &str) -> Result<Self, MockError> {
        let rules: MockRules = toml::from_str(text).map_err(|e| MockError::Rules(e.to_string()))?;
        for r in &rules.rules {
            if let Some(re) = &r.when_regex {
                Regex::new(re).map_err(|e| MockError::Rules(e.to_string()))?;
            }
        }
        Ok(rules)
    }

    /// The first matching rule, if any.
    pub fn decide(&self, sources: &[(PathBuf, String)]) -> Option<&MockRule> {
        self.rules.iter().find(|r| {
            r.when_min_files.is_none_or(|n| sources.len() >= n)
                && r.when_max_files.is_none_or(|n| sources.len() <= n)
                && r.when_ext.as_ref().is_none_or(|ext| {
                    sources.iter().any(|(p, _)| p.extension().and_then(|e| e.to_str()) == Some(ext.as_str()))
                })
                && r.when_regex.as_ref().is_none_or(|re| {
                    let re = Regex::new(re).expect("validated at parse");
                    sources.iter().any(|(_, text)| re.is_match(text))
                })
        })
    }
}

struct Args {
    rules: PathBuf,
    name: String,
    out_dir: Option<PathBuf>,
    sources: Vec<PathBuf>,
}

fn parse_args(args: &[String]) -> Result<Args, MockError> {
    let mut rules = None;
    let mut name = "mockc".to_string();
    let mut out_dir = None;
    let mut sources = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let mut value = |flag: &str| it.next().cloned().ok_or_else(|| MockError::Usage(format!("{flag} needs a value")));
        match a.as_str() {
            "--rules" => rules = Some(PathBuf::from(value("--rules")?)),
            "--name" => name = value("--name")?,
            "-d" => out_dir = Some(PathBuf::from(value("-d")?)),
            "-cp" | "-classpath" => {
                value(a)?;
            }
            "--" => sources.extend(it.by_ref().map(PathBuf::from)),
            s if s.starts_with('-') => {}
            s => sources.push(PathBuf::from(s)),
        }
    }
    let rules = rules.ok_or_else(|| MockError::Usage("--rules <file> is required".into()))?;
    Ok(Args { rules, name, out_dir, sources })
}

fn read(path: &Path) -> Result<String, MockError> {
    fs::read_to_string(path).map_err(|source| MockError::Io { path: path.to_path_buf(), source })
}

/// Runs the mock with command-line `args` (program name excluded) and
/// returns the process exit code.
pub fn run(args: &[String]) -> Result<i32, MockError> {
    let args = parse_args(args)?;
    let rules = MockRules::parse(&read(&args.rules)?)?;
    let mut sources = Vec::new();
    for p in &args.sources {
        sources.push((p.clone(), read(p)?));
    }
    let rule = rules.decide(&sources);
    let action = rule.map_or(rules.default_action, |r| r.action);
    let first = args.sources.first().map(|p| p.display().to_string()).unwrap_or_default();
    let message = rule
        .and_then(|r| r.message.clone())
        .map(|m| m.replace("{file}", &first).replace("{name}", &args.name));
    match action {
        MockAction::Pass => {
            if let Some(m) = message {
                println!("{m}");
            }
            if let Some(out) = &args.out_dir {
                fs::create_dir_all(out).map_err(|source| MockError::Io { path: out.clone(), source })?;
                for p in &args.sources {
                    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
                    let target = out.join(format!("{stem}.class"));
                    fs::write(&target, b"").map_err(|source| MockError::Io { path: target, source })?;
                }
            }
            Ok(rule.and_then(|r| r.exit_code).unwrap_or(0))
        }
        MockAction::Reject => {
            eprintln!("{}", message.unwrap_or_else(|| format!("error: rejected by {}", args.name)));
            Ok(rule.and_then(|r| r.exit_code).unwrap_or(1))
        }
        MockAction::Crash => {
            eprintln!(
                "{}",
                message.unwrap_or_else(|| format!(
                    "exception: java.lang.IllegalStateException: internal error in {}\n\tat mock.Compiler.run(Compiler.java:42)",
                    args.name
                ))
            );
            Ok(rule.and_then(|r| r.exit_code).unwrap_or(3))
        }
        MockAction::Timeout => loop {
            thread::sleep(Duration::from_secs(3600));
        },
    }
}

/// Entry point shared by the mock binaries.
pub fn main_with_args(args: &[String]) -> i32 {
    match run(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mockc: {e}");
            2
        }
    }
}
