//! Report assembly and the text, JSON and SARIF renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;
use serde_json::json;

use crate::config::{OutputFormat, Rule};
use crate::raceanalysis::{Alert, Location, Note};

use super::oracle::{OracleResult, OracleStatus};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileError {
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Stats {
    pub files_parsed: usize,
    pub files_failed: usize,
    pub classes_analyzed: usize,
    pub annotated_classes: usize,
    /// Alert count per rule id; every rule is present.
    pub alerts_by_rule: BTreeMap<String, usize>,
    /// Not serialized, so that reports of identical inputs are identical.
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub alerts: Vec<Alert>,
    pub notes: Vec<Note>,
    pub errors: Vec<FileError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<OracleResult>>,
    pub stats: Stats,
}

impl Report {
    pub fn count(&self, rule: Rule) -> usize {
        self.alerts.iter().filter(|a| a.rule == rule).count()
    }

    pub fn oracle_disagrees(&self) -> bool {
        self.oracle.iter().flatten().any(|o| o.status == OracleStatus::Disagree)
    }

    /// 2 on parse errors, 1 on alerts or oracle disagreement, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        if !self.errors.is_empty() {
            2
        } else if !self.alerts.is_empty() || self.oracle_disagrees() {
            1
        } else {
            0
        }
    }
}

pub fn serialize_report(r: &Report, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => to_text(r),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("report serializes");
            s.push('\n');
            s
        }
        OutputFormat::Sarif => {
            let mut s = serde_json::to_string_pretty(&to_sarif(r)).expect("sarif serializes");
            s.push('\n');
            s
        }
    }
}

fn to_text(r: &Report) -> String {
    let mut s = String::new();
    for a in &r.alerts {
        let p = &a.primary;
        let _ = write!(s, "{}:{}:{} {} {} {}", p.file, p.line, p.col, a.rule, a.field, a.message);
        if let Some(q) = &a.secondary {
            let _ = write!(s, " (with {}:{})", q.line, q.col);
        }
        s.push('\n');
    }
    for n in &r.notes {
        let l = &n.location;
        let _ = writeln!(s, "{}:{}:{} note {}", l.file, l.line, l.col, n.message);
    }
    for e in &r.errors {
        let _ = writeln!(s, "{}:{}:{} error {}", e.file, e.line, e.col, e.message);
    }
    for o in r.oracle.iter().flatten() {
        let _ = write!(s, "oracle {} {}: {}", o.class, o.status.as_str(), o.message);
        s.push('\n');
        for step in &o.witness {
            let _ = writeln!(s, "    {step}");
        }
    }
    let st = &r.stats;
    let per_rule: Vec<String> = st.alerts_by_rule.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    let _ = writeln!(
        s,
        "{} alert(s) ({}) in {} file(s), {} annotated of {} class(es)",
        r.alerts.len(),
        per_rule.join(", "),
        st.files_parsed,
        st.annotated_classes,
        st.classes_analyzed
    );
    s
}

fn sarif_location(l: &Location) -> serde_json::Value {
    json!({
        "physicalLocation": {
            "artifactLocation": { "uri": l.file },
            "region": {
                "startLine": l.line,
                "startColumn": l.col,
                "endLine": l.end_line,
                "endColumn": l.end_col,
            }
        }
    })
}

fn to_sarif(r: &Report) -> serde_json::Value {
    let rules: Vec<serde_json::Value> = Rule::ALL
        .iter()
        .map(|rule| {
            json!({
                "id": rule.id(),
                "name": rule.name(),
                "shortDescription": { "text": rule_description(*rule) },
            })
        })
        .collect();
    let results: Vec<serde_json::Value> = r
        .alerts
        .iter()
        .map(|a| {
            let mut result = json!({
                "ruleId": a.rule.id(),
                "ruleIndex": Rule::ALL.iter().position(|x| *x == a.rule).unwrap_or(0),
                "level": "warning",
                "message": { "text": a.message },
                "locations": [sarif_location(&a.primary)],
                "properties": { "field": a.field, "class": a.class_id },
            });
            if let Some(q) = &a.secondary {
                let mut related = sarif_location(q);
                related["id"] = json!(1);
                related["message"] = json!({ "text": "conflicting access" });
                result["relatedLocations"] = json!([related]);
            }
            result
        })
        .collect();
    json!({
        "$schema": "https://json.schemastore.org/sarif-2.1.0.json",
        "version": "2.1.0",
        "runs": [{
            "tool": {
                "driver": {
                    "name": "threadlint",
                    "version": env!("CARGO_PKG_VERSION"),
                    "rules": rules,
                }
            },
            "results": results,
        }]
    })
}

fn rule_description(rule: Rule) -> &'static str {
    match rule {
        Rule::P1 => "Fields of a thread-safe class must be private.",
        Rule::P2 => "Fields must be default-initialized, final or volatile.",
        Rule::P3 => "Conflicting field accesses must hold a common monitor.",
    }
}
