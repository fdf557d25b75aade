use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, write_json, CampaignError, Finding, FindingStatus};

/// Characteristics of the distinct trigger programs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Characteristics {
    #[serde(rename = "Cross-Language")]
    pub cross_language: usize,
    #[serde(rename = "Single-Language")]
    pub single_language: usize,
    #[serde(rename = "Generic Related")]
    pub generics_related: usize,
    #[serde(rename = "Not Generics Related")]
    pub not_generics_related: usize,
    #[serde(rename = "Average Inheritance Depth")]
    pub average_depth: f64,
    #[serde(rename = "Average Inheritance Width")]
    pub average_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub id: String,
    pub status: FindingStatus,
    pub result: String,
    pub attribution: String,
    pub cross_language: bool,
    pub generics_related: bool,
    pub depth: usize,
    pub width: usize,
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub findings: Vec<ReportRow>,
    pub characteristics: Characteristics,
    /// Distinct findings credited to each mutator or process.
    pub attribution: BTreeMap<String, usize>,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Aggregates over distinct findings; duplicates appear in the table only.
pub fn build_report(findings: &[Finding]) -> Report {
    let distinct: Vec<&Finding> = findings.iter().filter(|f| f.status != FindingStatus::Duplicate).collect();
    let n = distinct.len();
    let cross = distinct.iter().filter(|f| f.metrics.cross_language).count();
    let generic = distinct.iter().filter(|f| f.metrics.generics_related).count();
    let avg = |get: fn(&Finding) -> usize| {
        if n == 0 {
            0.0
        } else {
            round2(distinct.iter().map(|f| get(f) as f64).sum::<f64>() / n as f64)
        }
    };
    let mut attribution = BTreeMap::new();
    for f in &distinct {
        *attribution.entry(f.attribution.clone()).or_default() += 1;
    }
    Report {
        findings: findings
            .iter()
            .map(|f| ReportRow {
                id: f.id.clone(),
                status: f.status,
                result: format!("{:?}", f.verdict.result),
                attribution: f.attribution.clone(),
                cross_language: f.metrics.cross_language,
                generics_related: f.metrics.generics_related,
                depth: f.metrics.depth,
                width: f.metrics.width,
                fingerprint: f.fingerprint.clone(),
            })
            .collect(),
        characteristics: Characteristics {
            cross_language: cross,
            single_language: n - cross,
            generics_related: generic,
            not_generics_related: n - generic,
            average_depth: avg(|f| f.metrics.depth),
            average_width: avg(|f| f.metrics.width),
        },
        attribution,
    }
}

pub fn render_markdown(report: &Report) -> String {
    let c = &report.characteristics;
    let mut s = String::from("# Campaign report\n\n## Trigger program characteristics\n\n| | Count |\n|---|---|\n");
    s.push_str(&format!("| Cross-Language | {} |\n", c.cross_language));
    s.push_str(&format!("| Single-Language | {} |\n", c.single_language));
    s.push_str(&format!("| Generic Related | {} |\n", c.generics_related));
    s.push_str(&format!("| Not Generics Related | {} |\n", c.not_generics_related));
    s.push_str(&format!("| Average Inheritance Depth | {:.2} |\n", c.average_depth));
    s.push_str(&format!("| Average Inheritance Width | {:.2} |\n", c.average_width));
    s.push_str("\n## Findings by mutator or process\n\n| Source | Findings |\n|---|---|\n");
    for (k, v) in &report.attribution {
        s.push_str(&format!("| {k} | {v} |\n"));
    }
    s.push_str("\n## Findings\n\n| Id | Status | Result | Source | Cross-language | Generics | Depth | Width | Fingerprint |\n");
    s.push_str("|---|---|---|---|---|---|---|---|---|\n");
    for r in &report.findings {
        let short: String = r.fingerprint.chars().take(24).collect();
        s.push_str(&format!(
            "| {} | {:?} | {} | {} | {} | {} | {} | {} | `{short}` |\n",
            r.id, r.status, r.result, r.attribution, r.cross_language, r.generics_related, r.depth, r.width
        ));
    }
    s
}

/// Reads `findings/*.json` in id order.
pub fn load_findings(output_dir: &Path) -> Result<Vec<Finding>, CampaignError> {
    let dir = output_dir.join("findings");
    let mut paths: Vec<_> = fs::read_dir(&dir)
        .map_err(io_err(&dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            serde_json::from_str(&text)
                .map_err(|e| CampaignError::Io { path: p.clone(), source: std::io::Error::new(std::io::ErrorKind::InvalidData, e) })
        })
        .collect()
}

/// Writes `report.json` and `report.md` into the output directory.
pub fn write_report(output_dir: &Path) -> Result<Report, CampaignError> {
    let report = build_report(&load_findings(output_dir)?);
    write_json(&output_dir.join("report.json"), &report)?;
    let md = output_dir.join("report.md");
    fs::write(&md, render_markdown(&report)).map_err(io_err(&md))?;
    Ok(report)
}
