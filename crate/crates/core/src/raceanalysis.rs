//! Conflicting access pairs, the correct-synchronization rule, and per-class
//! orchestration of all three rules.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::accesspaths::{non_public_entry_points, provides_access, public_access, AccessPaths};
use crate::classmodel::{is_modifying, ClassModel};
use crate::config::Rule;
use crate::frontend::Span;
use crate::monitors::{ClassMonitors, Monitor};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Location {
    pub file: String,
    pub line: u32,
    pub col: u32,
    #[serde(rename = "endLine")]
    pub end_line: u32,
    #[serde(rename = "endCol")]
    pub end_col: u32,
}

impl Location {
    pub fn new(file: &str, span: Span) -> Location {
        Location {
            file: file.to_string(),
            line: span.start.line,
            col: span.start.col,
            end_line: span.end.line,
            end_col: span.end.col,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Alert {
    pub rule: Rule,
    #[serde(rename = "location")]
    pub primary: Location,
    #[serde(rename = "relatedLocation", skip_serializing_if = "Option::is_none")]
    pub secondary: Option<Location>,
    pub field: String,
    #[serde(rename = "class")]
    pub class_id: String,
    pub message: String,
}

impl Alert {
    fn sort_key(&self) -> (&str, u32, u32, Rule, Option<(u32, u32)>, &str, &str) {
        (
            &self.primary.file,
            self.primary.line,
            self.primary.col,
            self.rule,
            self.secondary.as_ref().map(|s| (s.line, s.col)),
            &self.field,
            &self.message,
        )
    }
}

pub fn sort_alerts(alerts: &mut [Alert]) {
    alerts.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// A diagnostic that is not a rule violation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Note {
    pub location: Location,
    #[serde(rename = "class")]
    pub class_id: String,
    pub message: String,
}

/// Two exposed accesses to the same field, `a` modifying. Indices into
/// `ClassModel::accesses`; `a == b` is a modifying access racing with itself
/// on two threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConflictPair {
    pub a: usize,
    pub b: usize,
}

/// Unordered pairs of exposed accesses to one field with at least one
/// modifying access, the modifying access first (the earlier one when both
/// modify), in file order of `a` then `b`.
pub fn conflicting_pairs(cm: &ClassModel<'_>) -> Vec<ConflictPair> {
    let exposed: Vec<usize> = (0..cm.accesses.len()).filter(|&i| cm.is_exposed(&cm.accesses[i])).collect();
    let mut out = Vec::new();
    for (xi, &x) in exposed.iter().enumerate() {
        for &y in &exposed[xi..] {
            let (ax, ay) = (&cm.accesses[x], &cm.accesses[y]);
            if ax.field != ay.field {
                continue;
            }
            if is_modifying(ax) {
                out.push(ConflictPair { a: x, b: y });
            } else if is_modifying(ay) {
                out.push(ConflictPair { a: y, b: x });
            }
        }
    }
    out.sort();
    out
}

fn describe(set: &BTreeSet<Monitor>) -> String {
    if set.is_empty() {
        "none".to_string()
    } else {
        set.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", ")
    }
}

/// One alert per conflicting pair whose accesses share no monitor.
pub fn check_correct_synchronization(cm: &ClassModel<'_>, paths: &AccessPaths, mons: &ClassMonitors) -> Vec<Alert> {
    let pairs = conflicting_pairs(cm);
    let mut cache: Vec<Option<BTreeSet<Monitor>>> = vec![None; cm.accesses.len()];
    let mut monitors_of = |i: usize| -> BTreeSet<Monitor> {
        cache[i].get_or_insert_with(|| mons.monitors(cm, paths, i)).clone()
    };
    let mut alerts = Vec::new();
    for p in pairs {
        let (a, b) = (&cm.accesses[p.a], &cm.accesses[p.b]);
        let (ma, mb) = (monitors_of(p.a), monitors_of(p.b));
        if ma.intersection(&mb).next().is_some() {
            continue;
        }
        let field = &cm.field(a).name;
        let unreachable: Vec<&str> = [p.a, p.b]
            .iter()
            .filter(|&&i| public_access(cm, paths, i).is_empty())
            .map(|&i| cm.accesses[i].kind.as_str())
            .collect();
        let message = if !unreachable.is_empty() {
            format!(
                "conflicting {} and {} of `{}`: no public access path to the {}, so no monitor is established",
                a.kind.as_str(),
                b.kind.as_str(),
                field,
                unreachable[0]
            )
        } else {
            format!(
                "conflicting {} and {} of `{}` are not protected by a common monitor (held: {}; {})",
                a.kind.as_str(),
                b.kind.as_str(),
                field,
                describe(&ma),
                describe(&mb)
            )
        };
        alerts.push(Alert {
            rule: Rule::P3,
            primary: cm.location(a.span),
            secondary: Some(cm.location(b.span)),
            field: field.clone(),
            class_id: cm.qualified_name(),
            message,
        });
    }
    sort_alerts(&mut alerts);
    alerts
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassResult {
    pub alerts: Vec<Alert>,
    pub notes: Vec<Note>,
}

/// All enabled rules on one class. Unannotated classes yield nothing.
pub fn analyze_class(cm: &ClassModel<'_>, rules: &[Rule]) -> ClassResult {
    let mut out = ClassResult::default();
    if !cm.annotated {
        return out;
    }
    if rules.contains(&Rule::P1) {
        out.alerts.extend(cm.check_no_escaping());
    }
    if rules.contains(&Rule::P2) {
        out.alerts.extend(cm.check_safe_publication());
    }
    if rules.contains(&Rule::P3) {
        let paths = provides_access(cm);
        let mons = ClassMonitors::build(cm);
        out.alerts.extend(check_correct_synchronization(cm, &paths, &mons));
        for m in non_public_entry_points(cm, &paths) {
            let decl = &cm.decl.methods[m];
            out.notes.push(Note {
                location: cm.location(decl.name_span),
                class_id: cm.qualified_name(),
                message: format!(
                    "{} method `{}` reaches exposed field accesses but is not treated as a public entry point",
                    decl.visibility(),
                    decl.name
                ),
            });
        }
    }
    sort_alerts(&mut out.alerts);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classmodel::tests::{COUNTER_DR, COUNTER_TS};
    use crate::config::AnalysisConfig;
    use crate::frontend::*;

    fn analyze(src: &str, config: &AnalysisConfig) -> ClassResult {
        let ast = parse_compilation_unit(&SourceFile::new("T.java", src)).unwrap();
        let cm = ClassModel::build(&ast, &ast.classes[0], config);
        analyze_class(&cm, &Rule::ALL)
    }

    fn count(r: &ClassResult, rule: Rule) -> usize {
        r.alerts.iter().filter(|a| a.rule == rule).count()
    }

    #[test]
    fn counter_dr_pairs() {
        let ast = parse_compilation_unit(&SourceFile::new("T.java", COUNTER_DR)).unwrap();
        let config = AnalysisConfig::default();
        let cm = ClassModel::build(&ast, &ast.classes[0], &config);
        let pairs: Vec<(u32, u32)> = conflicting_pairs(&cm)
            .iter()
            .map(|p| (cm.accesses[p.a].span.start.line, cm.accesses[p.b].span.start.line))
            .collect();
        assert_eq!(pairs, vec![(7, 5), (7, 7)]);
    }

    #[test]
    fn counter_dr_alerts() {
        let r = analyze(COUNTER_DR, &AnalysisConfig::default());
        assert_eq!((count(&r, Rule::P1), count(&r, Rule::P2), count(&r, Rule::P3)), (1, 0, 2));
        let p3: Vec<_> = r
            .alerts
            .iter()
            .filter(|a| a.rule == Rule::P3)
            .map(|a| (a.primary.line, a.secondary.as_ref().unwrap().line))
            .collect();
        assert_eq!(p3, vec![(7, 5), (7, 7)]);
    }

    #[test]
    fn counter_ts_clean() {
        assert!(analyze(COUNTER_TS, &AnalysisConfig::default()).alerts.is_empty());
    }

    #[test]
    fn volatile_and_read_only_fields_never_pair() {
        let src = "@ThreadSafe class A { private volatile int v; private int r;\n public void f() { v = v + 1; int x = r + r; } }";
        let r = analyze(src, &AnalysisConfig::default());
        assert_eq!(count(&r, Rule::P3), 0);
    }

    #[test]
    fn two_different_monitors_alert() {
        let src = "@ThreadSafe class A { private final Lock l = new ReentrantLock(); private int x;\n\
                   public synchronized int get() { return x; }\n\
                   public void set(int v) { l.lock(); x = v; l.unlock(); } }";
        let r = analyze(src, &AnalysisConfig::default());
        let p3: Vec<_> = r.alerts.iter().filter(|a| a.rule == Rule::P3).collect();
        // the write/write self pair shares `l`; the write/read pair does not
        assert_eq!(p3.len(), 1);
        assert_eq!((p3[0].primary.line, p3[0].secondary.as_ref().unwrap().line), (3, 2));
        assert!(p3[0].message.contains("not protected by a common monitor"));
    }

    #[test]
    fn dead_private_writer_only_alerts_on_conflict() {
        let quiet = "@ThreadSafe class A { private int x; private int read() { return x; } }";
        assert_eq!(count(&analyze(quiet, &AnalysisConfig::default()), Rule::P3), 0);
        let loud = "@ThreadSafe class A { private int x; private void w() { x = 1; } }";
        let r = analyze(loud, &AnalysisConfig::default());
        assert_eq!(count(&r, Rule::P3), 1);
        assert!(r.alerts[0].message.contains("no public access path"));
    }

    #[test]
    fn unannotated_class_is_ignored() {
        let src = "class A { int x; public void f() { x = 1; } }";
        assert_eq!(analyze(src, &AnalysisConfig::default()), ClassResult::default());
    }

    #[test]
    fn package_private_entry_points_get_a_note() {
        let src = "@ThreadSafe class A { private int x; void f() { x = 1; } }";
        let r = analyze(src, &AnalysisConfig::default());
        assert_eq!(r.notes.len(), 1);
        assert!(r.notes[0].message.starts_with("package-private method `f`"));
    }

    #[test]
    fn test_class_listing() {
        let r = analyze(crate::accesspaths::tests::TEST_CLASS, &AnalysisConfig::default());
        let y_p3 = r.alerts.iter().filter(|a| a.rule == Rule::P3 && a.field == "y").count();
        assert_eq!(y_p3, 0);
        let p2: Vec<_> = r.alerts.iter().filter(|a| a.rule == Rule::P2).map(|a| a.field.as_str()).collect();
        assert_eq!(p2, vec!["lock"]);
    }
}
