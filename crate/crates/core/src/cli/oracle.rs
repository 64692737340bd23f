//! Cross-check of the static rules against the happens-before oracle.

use serde::Serialize;

use crate::classmodel::ClassModel;
use crate::config::Rule;
use crate::hboracle::{driver_from_class, program_races};
use crate::raceanalysis::analyze_class;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleStatus {
    /// Static alerts and a racy execution, or neither.
    Agree,
    /// Static alerts but no racy execution; the rules are conservative.
    StaticOnly,
    /// No static alert but a racy execution.
    Disagree,
    /// The class is outside what the driver can model.
    Unsupported,
}

impl OracleStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            OracleStatus::Agree => "agree",
            OracleStatus::StaticOnly => "static-only",
            OracleStatus::Disagree => "disagree",
            OracleStatus::Unsupported => "unsupported",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleResult {
    pub class: String,
    pub file: String,
    pub status: OracleStatus,
    pub static_alerts: usize,
    pub programs: usize,
    pub executions: usize,
    pub racy_executions: usize,
    pub message: String,
    /// Actions of the first racy execution found.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<String>,
}

/// Runs the two-thread drivers of an annotated class and compares with the
/// static result under all rules.
pub fn oracle_check_class(cm: &ClassModel<'_>, bound: usize) -> OracleResult {
    let static_alerts = analyze_class(cm, &Rule::ALL).alerts.len();
    let mut out = OracleResult {
        class: cm.qualified_name(),
        file: cm.ast.file.path.clone(),
        status: OracleStatus::Unsupported,
        static_alerts,
        programs: 0,
        executions: 0,
        racy_executions: 0,
        message: String::new(),
        witness: Vec::new(),
    };
    let driver = match driver_from_class(cm) {
        Ok(d) => d,
        Err(e) => {
            out.message = e.to_string();
            return out;
        }
    };
    out.programs = driver.programs.len();
    let mut racy_pair = None;
    for dp in &driver.programs {
        let r = match program_races(&dp.program, Some(bound)) {
            Ok(r) => r,
            Err(e) => {
                out.message = e.to_string();
                return out;
            }
        };
        out.executions += r.executions + r.deadlocked;
        out.racy_executions += r.racy_executions;
        if let (Some(w), None) = (&r.witness, &racy_pair) {
            let m = &cm.decl.methods;
            racy_pair = Some(format!("{} || {}", m[dp.first].name, m[dp.second].name));
            let racing: Vec<usize> = r.witness_races.iter().flat_map(|&(a, b)| [a, b]).collect();
            out.witness = w
                .actions
                .iter()
                .enumerate()
                .map(|(i, a)| if racing.contains(&i) { format!("{a}  <- race") } else { a.to_string() })
                .collect();
        }
    }
    let racy = racy_pair.is_some();
    out.status = match (static_alerts > 0, racy) {
        (true, true) | (false, false) => OracleStatus::Agree,
        (true, false) => OracleStatus::StaticOnly,
        (false, true) => OracleStatus::Disagree,
    };
    out.message = match racy_pair {
        Some(pair) => format!(
            "{} static alert(s); {} of {} execution(s) racy, first in {}",
            static_alerts, out.racy_executions, out.executions, pair
        ),
        None => format!("{} static alert(s); {} execution(s), none racy", static_alerts, out.executions),
    };
    out
}
