//! Diagnostic normalization for deduplication.

use std::sync::OnceLock;

use regex::Regex;
use sha2::{Digest, Sha256};

struct Rules {
    paths: Regex,
    files: Regex,
    quoted: Regex,
    pool: Regex,
    numbers: Regex,
    spaces: Regex,
}

fn rules() -> &'static Rules {
    static R: OnceLock<Rules> = OnceLock::new();
    R.get_or_init(|| Rules {
        paths: Regex::new(r"(?:[A-Za-z]:\\|/)(?:[\w.\-]+[/\\])*[\w.\-]+|(?:[\w.\-]+[/\\])+[\w.\-]+").unwrap(),
        files: Regex::new(r"\b[\w$\-]+\.(?:java|kt|groovy|scala|class)\b").unwrap(),
        quoted: Regex::new(r"(['`\x{2018}\x{2019}])[A-Za-z_$][\w$]*(['`\x{2018}\x{2019}])").unwrap(),
        pool: Regex::new(r"\b(?:A\d+|I\d+|func\d*|arg\d+|T\d+)\b").unwrap(),
        numbers: Regex::new(r"\d+").unwrap(),
        spaces: Regex::new(r"[ \t]+").unwrap(),
    })
}

/// Strips paths, file names, generated and quoted identifiers, and numbers.
pub fn normalize_diagnostics(text: &str) -> String {
    let r = rules();
    let mut lines = Vec::new();
    for line in text.lines() {
        let s = r.paths.replace_all(line, "<path>");
        let s = r.files.replace_all(&s, "<file>");
        let s = r.quoted.replace_all(&s, "'<id>'");
        let s = r.pool.replace_all(&s, "<id>");
        let s = r.numbers.replace_all(&s, "<n>");
        let s = r.spaces.replace_all(&s, " ");
        let s = s.trim();
        if !s.is_empty() {
            lines.push(s.to_string());
        }
    }
    lines.join("\n")
}

/// Hex SHA-256 of the normalized diagnostics.
pub fn fingerprint(diagnostics: &str) -> String {
    let digest = Sha256::digest(normalize_diagnostics(diagnostics).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
