//! Monitor recognition: explicit `Lock` fields used with lock/unlock calls
//! whose scope is established by (post-)dominance, synchronized methods, and
//! `synchronized` blocks.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::accesspaths::{public_access, AccessPathFact, AccessPaths};
use crate::cfg::{Cfg, DomInfo, NodeIx};
use crate::classmodel::{Callable, ClassModel};
use crate::config::AnalysisConfig;
use crate::frontend::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum MonitorKind {
    LockField,
    ThisMonitor,
    ClassMonitor,
    SyncExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Monitor {
    pub kind: MonitorKind,
    pub identity: String,
}

impl Monitor {
    pub fn lock_field(class: &ClassDecl, field: &FieldDecl) -> Monitor {
        Monitor { kind: MonitorKind::LockField, identity: format!("{}.{}", class.name, field.name) }
    }

    pub fn this() -> Monitor {
        Monitor { kind: MonitorKind::ThisMonitor, identity: "this".to_string() }
    }

    pub fn class(class: &ClassDecl) -> Monitor {
        Monitor { kind: MonitorKind::ClassMonitor, identity: format!("Class<{}>", class.name) }
    }
}

impl fmt::Display for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MonitorKind::LockField => write!(f, "lock {}", self.identity),
            MonitorKind::ThisMonitor => f.write_str("monitor of this"),
            MonitorKind::ClassMonitor => write!(f, "monitor of {}", self.identity),
            MonitorKind::SyncExpr => write!(f, "monitor of {}", self.identity),
        }
    }
}

/// `true` if the type, written simple or qualified, names a configured lock
/// type. A qualified configured name only matches a simple written name
/// through its last segment, and vice versa.
pub fn is_lock_type(type_name: &str, config: &AnalysisConfig) -> bool {
    let base = type_name.split(['<', '[']).next().unwrap_or("").trim();
    if base.is_empty() || type_name.contains('[') {
        return false;
    }
    let simple = base.rsplit('.').next().unwrap_or(base);
    config.lock_types.iter().any(|entry| {
        let entry_simple = entry.rsplit('.').next().unwrap_or(entry);
        entry_simple == simple && (!base.contains('.') || !entry.contains('.') || entry == base)
    })
}

/// Local variables of a method that alias a field: assigned exactly once,
/// directly from a read of the field, never reassigned. Maps the variable
/// name to the field index.
pub fn local_aliases(cm: &ClassModel<'_>, m: &MethodDecl) -> HashMap<String, usize> {
    let mut defs: HashMap<String, Vec<Option<&Expr>>> = HashMap::new();
    for p in &m.params {
        defs.entry(p.name.clone()).or_default().push(None);
    }
    fn visit_expr<'e>(e: &'e Expr, defs: &mut HashMap<String, Vec<Option<&'e Expr>>>) {
        match &e.kind {
            ExprKind::Assign { target, value, op } => {
                if let ExprKind::Name(n) = &target.unparen().kind {
                    let v = if op.is_none() { Some(&**value) } else { None };
                    defs.entry(n.clone()).or_default().push(v);
                }
            }
            ExprKind::Unary { op, operand } if op.is_update() => {
                if let ExprKind::Name(n) = &operand.unparen().kind {
                    defs.entry(n.clone()).or_default().push(None);
                }
            }
            _ => {}
        }
        for c in e.children() {
            visit_expr(c, defs);
        }
    }
    fn visit_stmt<'e>(s: &'e Stmt, defs: &mut HashMap<String, Vec<Option<&'e Expr>>>) {
        match &s.kind {
            StmtKind::LocalVar { declarators, .. } => {
                for d in declarators {
                    let entry = defs.entry(d.name.clone()).or_default();
                    if let Some(init) = &d.init {
                        entry.push(Some(init));
                    }
                }
            }
            StmtKind::Try { catches, .. } => {
                for c in catches {
                    defs.entry(c.name.clone()).or_default().push(None);
                }
            }
            _ => {}
        }
        for e in s.child_exprs() {
            visit_expr(e, defs);
        }
        for c in s.child_stmts() {
            visit_stmt(c, defs);
        }
    }
    if let Some(body) = &m.body {
        for s in &body.stmts {
            visit_stmt(s, &mut defs);
        }
    }
    let read_of: HashMap<NodeId, usize> = cm
        .accesses
        .iter()
        .filter(|a| a.call_name.is_none() && !a.is_initializer_write)
        .map(|a| (a.expr, a.field))
        .collect();
    defs.into_iter()
        .filter_map(|(name, d)| match d.as_slice() {
            [Some(v)] => read_of.get(&v.unparen().id).map(|&f| (name, f)),
            _ => None,
        })
        .collect()
}

/// Whether the variable `local` (a field name or local variable name used as
/// a call qualifier) stands for `lock_field` in method `m`.
pub fn represents(cm: &ClassModel<'_>, lock_field: usize, m: &MethodDecl, local: &str) -> bool {
    let aliases = local_aliases(cm, m);
    match aliases.get(local) {
        Some(&f) => f == lock_field,
        None => {
            let declared_locally = m.params.iter().any(|p| p.name == local) || declares_local(m, local);
            !declared_locally && cm.decl.fields.get(lock_field).is_some_and(|f| f.name == local)
        }
    }
}

fn declares_local(m: &MethodDecl, name: &str) -> bool {
    fn walk(s: &Stmt, name: &str) -> bool {
        let here = match &s.kind {
            StmtKind::LocalVar { declarators, .. } => declarators.iter().any(|d| d.name == name),
            StmtKind::Try { catches, .. } => catches.iter().any(|c| c.name == name),
            _ => false,
        };
        here || s.child_stmts().into_iter().any(|c| walk(c, name))
    }
    m.body.as_ref().is_some_and(|b| b.stmts.iter().any(|s| walk(s, name)))
}

/// Lock and unlock calls of one method, resolved to the lock field they act
/// on.
#[derive(Debug, Clone, Default)]
pub struct LockCalls {
    pub locks: Vec<(usize, NodeIx)>,
    pub unlocks: Vec<(usize, NodeIx)>,
}

/// Control-flow and monitor information for one method.
#[derive(Debug)]
pub struct MethodInfo {
    pub cfg: Cfg,
    pub dom: DomInfo,
    pub lock_calls: LockCalls,
    /// `synchronized` blocks: body span and monitor.
    pub sync_blocks: Vec<(Span, Monitor)>,
    pub method_monitor: Option<Monitor>,
}

impl MethodInfo {
    pub fn build(cm: &ClassModel<'_>, index: usize) -> MethodInfo {
        let m = &cm.decl.methods[index];
        let cfg = Cfg::build(m);
        let dom = DomInfo::compute(&cfg);
        let lock_calls = find_lock_calls(cm, index, &cfg);
        let mut sync_blocks = Vec::new();
        if let Some(b) = &m.body {
            for s in &b.stmts {
                collect_sync_blocks(cm, s, &mut sync_blocks);
            }
        }
        let method_monitor = if m.is_synchronized() {
            Some(if m.is_static() { Monitor::class(cm.decl) } else { Monitor::this() })
        } else {
            None
        };
        MethodInfo { cfg, dom, lock_calls, sync_blocks, method_monitor }
    }

    /// `e` lies between a lock call and an unlock call on a variable
    /// representing `lock_field`: the lock call dominates the unlock call and
    /// `e`, and the unlock call post-dominates `e`.
    pub fn locally_locked_on(&self, e: NodeIx, lock_field: usize) -> bool {
        self.lock_calls.locks.iter().filter(|(f, _)| *f == lock_field).any(|&(_, lock)| {
            self.lock_calls.unlocks.iter().filter(|(f, _)| *f == lock_field).any(|&(_, unlock)| {
                self.dom.dominates(lock, unlock).unwrap_or(false)
                    && self.dom.dominates(lock, e).unwrap_or(false)
                    && self.dom.post_dominates(unlock, e).unwrap_or(false)
            })
        })
    }

    /// Monitors held through `synchronized` at an expression with span `at`:
    /// the method's own monitor plus every enclosing `synchronized` block.
    pub fn locally_synchronized_on(&self, at: Span) -> BTreeSet<Monitor> {
        let mut out: BTreeSet<Monitor> = self.method_monitor.iter().cloned().collect();
        for (span, mon) in &self.sync_blocks {
            if span.contains(&at) {
                out.insert(mon.clone());
            }
        }
        out
    }

    /// All monitors protecting the expression `id` with span `at`.
    pub fn protections(&self, cm: &ClassModel<'_>, id: NodeId, at: Span) -> BTreeSet<Monitor> {
        let mut out = self.locally_synchronized_on(at);
        if let Some(node) = self.cfg.node_of(id) {
            let mut fields: Vec<usize> = self.lock_calls.locks.iter().map(|(f, _)| *f).collect();
            fields.sort_unstable();
            fields.dedup();
            for f in fields {
                if self.locally_locked_on(node, f) {
                    out.insert(Monitor::lock_field(cm.decl, &cm.decl.fields[f]));
                }
            }
        }
        out
    }
}

fn find_lock_calls(cm: &ClassModel<'_>, index: usize, cfg: &Cfg) -> LockCalls {
    let m = &cm.decl.methods[index];
    let config = cm.config;
    let lock_fields: Vec<bool> = cm.decl.fields.iter().map(|f| is_lock_type(&f.ty.text, config)).collect();
    let mut out = LockCalls::default();
    let mut classify = |name: &str, field: usize, call: NodeId| {
        if !lock_fields[field] {
            return;
        }
        let Some(node) = cfg.node_of(call) else { return };
        if config.lock_methods.iter().any(|n| n == name) {
            out.locks.push((field, node));
        } else if config.unlock_methods.iter().any(|n| n == name) {
            out.unlocks.push((field, node));
        }
    };
    // calls directly on the field
    for a in &cm.accesses {
        if a.callable != Callable::Method(index) {
            continue;
        }
        if let (Some(name), Some(call)) = (&a.call_name, a.call_expr) {
            classify(name, a.field, call);
        }
    }
    // calls on local aliases
    let aliases = local_aliases(cm, m);
    if !aliases.is_empty() {
        let mut calls = Vec::new();
        if let Some(b) = &m.body {
            for s in &b.stmts {
                collect_alias_calls(s, &aliases, &mut calls);
            }
        }
        for (name, field, id) in calls {
            classify(&name, field, id);
        }
    }
    out
}

fn collect_alias_calls(s: &Stmt, aliases: &HashMap<String, usize>, out: &mut Vec<(String, usize, NodeId)>) {
    fn expr(e: &Expr, aliases: &HashMap<String, usize>, out: &mut Vec<(String, usize, NodeId)>) {
        if let ExprKind::MethodCall { target: Some(t), name, .. } = &e.kind {
            if let ExprKind::Name(q) = &t.unparen().kind {
                if let Some(&f) = aliases.get(q) {
                    out.push((name.clone(), f, e.id));
                }
            }
        }
        for c in e.children() {
            expr(c, aliases, out);
        }
    }
    for e in s.child_exprs() {
        expr(e, aliases, out);
    }
    for c in s.child_stmts() {
        collect_alias_calls(c, aliases, out);
    }
}

fn collect_sync_blocks(cm: &ClassModel<'_>, s: &Stmt, out: &mut Vec<(Span, Monitor)>) {
    if let StmtKind::Synchronized { lock, body } = &s.kind {
        out.push((body.span, sync_monitor(cm, lock)));
    }
    for c in s.child_stmts() {
        collect_sync_blocks(cm, c, out);
    }
}

/// The monitor of `synchronized (lock)`. `this` and `C.class` of the own
/// class are the same monitors as synchronized instance and static methods.
pub fn sync_monitor(cm: &ClassModel<'_>, lock: &Expr) -> Monitor {
    let e = lock.unparen();
    match &e.kind {
        ExprKind::This => return Monitor::this(),
        ExprKind::ClassLit(ty) if ty.text == cm.decl.name || ty.text == cm.qualified_name() => {
            return Monitor::class(cm.decl)
        }
        _ => {}
    }
    Monitor { kind: MonitorKind::SyncExpr, identity: canonical_text(cm, e) }
}

/// Canonical text of a monitor expression: whitespace-free, with the implicit
/// `this.` (or `C.` for static fields) made explicit for the class's fields.
pub fn canonical_text(cm: &ClassModel<'_>, e: &Expr) -> String {
    let own_field = |id: NodeId| cm.accesses.iter().find(|a| a.expr == id && !a.is_initializer_write).map(|a| cm.field(a));
    match &e.kind {
        ExprKind::Paren(inner) => canonical_text(cm, inner),
        ExprKind::This => "this".to_string(),
        ExprKind::Name(n) => match own_field(e.id) {
            Some(f) if f.is_static() => format!("{}.{}", cm.decl.name, n),
            Some(_) => format!("this.{n}"),
            None => n.clone(),
        },
        ExprKind::FieldAccess { target, name, .. } => match own_field(e.id) {
            Some(f) if f.is_static() => format!("{}.{}", cm.decl.name, name),
            Some(_) => format!("this.{name}"),
            None => format!("{}.{}", canonical_text(cm, target), name),
        },
        ExprKind::ClassLit(ty) => format!("{}.class", ty.text.replace(' ', "")),
        _ => {
            let text = reconstruct_span(cm.ast, e.span).unwrap_or("");
            text.split_whitespace().collect()
        }
    }
}

/// Monitor analysis for one class: per-method information plus the monitor
/// sets of exposed accesses.
#[derive(Debug)]
pub struct ClassMonitors {
    pub methods: Vec<MethodInfo>,
}

impl ClassMonitors {
    pub fn build(cm: &ClassModel<'_>) -> ClassMonitors {
        ClassMonitors { methods: (0..cm.decl.methods.len()).map(|i| MethodInfo::build(cm, i)).collect() }
    }

    pub fn fact_protections(&self, cm: &ClassModel<'_>, fact: &AccessPathFact) -> BTreeSet<Monitor> {
        self.methods[fact.method].protections(cm, fact.expr, fact.expr_span)
    }

    /// Monitors that protect every public expression leading to `access`;
    /// empty when there is no such expression.
    pub fn monitors(&self, cm: &ClassModel<'_>, paths: &AccessPaths, access: usize) -> BTreeSet<Monitor> {
        let public = public_access(cm, paths, access);
        let mut iter = public.iter();
        let Some(first) = iter.next() else { return BTreeSet::new() };
        let mut acc = self.fact_protections(cm, first);
        for f in iter {
            if acc.is_empty() {
                break;
            }
            let p = self.fact_protections(cm, f);
            acc = acc.intersection(&p).cloned().collect();
        }
        acc
    }
}
