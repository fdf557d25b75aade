//! Toolchain plans backed by the scripted `mockc` compiler.

use std::path::Path;

use jvmfuzz::harness::{CompilerSpec, ToolchainPlan};
use jvmfuzz::ir::Lang;

pub const MOCKC: &str = env!("CARGO_BIN_EXE_mockc");

pub fn spec(id: &str, lang: Lang, rules: &Path) -> CompilerSpec {
    let args = [
        MOCKC,
        "--rules",
        rules.to_str().unwrap(),
        "--name",
        id,
        "-d",
        "{outDir}",
        "-cp",
        "{classpath}",
        "{sources}",
    ];
    CompilerSpec::new(id, lang, args.iter().map(|s| s.to_string()).collect())
}

pub fn rules(name: &str) -> std::path::PathBuf {
    super::fixtures_dir().join("mock").join(format!("{name}.toml"))
}

/// A plan where every language compiles with the pass-all rules except
/// `lang`, which uses `rules_file`.
pub fn plan(id: &str, lang: Lang, rules_file: &Path) -> ToolchainPlan {
    let mut p = ToolchainPlan::new(id);
    for l in Lang::ALL {
        let s = if l == lang { spec(&format!("{id}-{l}"), l, rules_file) } else { spec(&format!("{l}c"), l, &rules("pass")) };
        p = p.with(s);
    }
    p
}
