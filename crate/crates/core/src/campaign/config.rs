use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::generator::GenConfig;
use crate::harness::{CompilerSpec, ToolchainPlan};
use crate::ir::{Builtin, Lang};
use crate::minimizer::MinimizeConfig;
use crate::mutators::{MutatorConfig, MutatorKind};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Two compilers for one language; every other language uses its latest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferentialPair {
    pub language: Lang,
    pub latest: String,
    pub earlier: String,
}

fn default_mutators() -> BTreeSet<MutatorKind> {
    MutatorConfig::default().enabled
}

fn default_builtins() -> Vec<Builtin> {
    Builtin::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default)]
    pub gen: GenConfig,
    #[serde(default = "default_mutators")]
    pub enabled_mutators: BTreeSet<MutatorKind>,
    #[serde(default = "default_builtins")]
    pub mutator_builtins: Vec<Builtin>,
    #[serde(default = "CampaignConfig::default_mutants")]
    pub mutants_per_program: usize,
    #[serde(default)]
    pub toolchains: Vec<CompilerSpec>,
    /// Compiler id used for normal testing, per language. Defaults to the
    /// first listed toolchain of each language.
    #[serde(default)]
    pub latest: BTreeMap<Lang, String>,
    #[serde(default)]
    pub differential_pairs: Vec<DifferentialPair>,
    #[serde(default = "CampaignConfig::default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub campaign_seed: u64,
    #[serde(default)]
    pub max_programs: usize,
    #[serde(default = "CampaignConfig::default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub minimize: bool,
    #[serde(default)]
    pub minimizer: MinimizeConfig,
    #[serde(default = "CampaignConfig::default_run_id")]
    pub run_id: String,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            gen: GenConfig::default(),
            enabled_mutators: default_mutators(),
            mutator_builtins: default_builtins(),
            mutants_per_program: Self::default_mutants(),
            toolchains: Vec::new(),
            latest: BTreeMap::new(),
            differential_pairs: Vec::new(),
            output_dir: Self::default_output(),
            campaign_seed: 0,
            max_programs: 0,
            workers: Self::default_workers(),
            minimize: false,
            minimizer: MinimizeConfig::default(),
            run_id: Self::default_run_id(),
        }
    }
}

/// Environment variable that replaces the executable of compiler `id`.
pub fn env_override_name(id: &str) -> String {
    let key: String = id.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_uppercase() } else { '_' }).collect();
    format!("JVMFUZZ_COMPILER_{key}")
}

impl CampaignConfig {
    fn default_mutants() -> usize {
        4
    }

    fn default_output() -> PathBuf {
        PathBuf::from("jvmfuzz-out")
    }

    fn default_workers() -> usize {
        1
    }

    fn default_run_id() -> String {
        "run".into()
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))
    }

    /// Loads a config file. Relative paths inside it are resolved against
    /// the file's directory, then environment overrides are applied and
    /// the result is validated.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        cfg.apply_env_overrides(|k| std::env::var(k).ok());
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_env_overrides(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        for t in &mut self.toolchains {
            if let Some(exe) = lookup(&env_override_name(&t.id)) {
                if let Some(first) = t.invocation.first_mut() {
                    *first = exe;
                }
            }
        }
    }

    pub fn mutator_config(&self) -> MutatorConfig {
        MutatorConfig {
            languages: self.gen.languages.clone(),
            builtins: self.mutator_builtins.clone(),
            enabled: self.enabled_mutators.clone(),
        }
    }

    fn compiler(&self, id: &str) -> Result<&CompilerSpec, ConfigError> {
        self.toolchains
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown compiler id `{id}`")))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        self.gen.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let mut ids = BTreeSet::new();
        for t in &self.toolchains {
            if !ids.insert(t.id.as_str()) {
                return invalid(format!("duplicate compiler id `{}`", t.id));
            }
            t.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        for (lang, id) in &self.latest {
            if self.compiler(id)?.language != *lang {
                return invalid(format!("latest {lang} compiler `{id}` compiles another language"));
            }
        }
        for p in &self.differential_pairs {
            for id in [&p.latest, &p.earlier] {
                if self.compiler(id)?.language != p.language {
                    return invalid(format!("pair compiler `{id}` is not a {} compiler", p.language));
                }
            }
            if p.latest == p.earlier {
                return invalid(format!("pair for {} compares `{}` with itself", p.language, p.latest));
            }
        }
        if self.mutants_per_program > 0 && self.enabled_mutators.is_empty() {
            return invalid("mutants requested but no mutator enabled".into());
        }
        if self.max_programs > 0 {
            let plan = self.latest_plan();
            for l in &self.gen.languages {
                if !plan.compilers.contains_key(l) {
                    return invalid(format!("no {l} compiler configured"));
                }
            }
        }
        if self.workers == 0 {
            return invalid("workers must be at least 1".into());
        }
        Ok(())
    }

    /// The latest compiler of every configured language.
    pub fn latest_plan(&self) -> ToolchainPlan {
        let mut plan = ToolchainPlan::new("latest");
        for t in &self.toolchains {
            let chosen = match self.latest.get(&t.language) {
                Some(id) => *id == t.id,
                None => !plan.compilers.contains_key(&t.language),
            };
            if chosen {
                plan.compilers.insert(t.language, t.clone());
            }
        }
        plan
    }

    /// The two plans of a pair: latest compilers everywhere, with the
    /// pair's language set to each side.
    pub fn pair_plans(&self, pair: &DifferentialPair) -> Result<(ToolchainPlan, ToolchainPlan), ConfigError> {
        let base = self.latest_plan();
        let mut a = base.clone();
        a.id = pair.latest.clone();
        a.compilers.insert(pair.language, self.compiler(&pair.latest)?.clone());
        let mut b = base;
        b.id = pair.earlier.clone();
        b.compilers.insert(pair.language, self.compiler(&pair.earlier)?.clone());
        Ok((a, b))
    }
}
