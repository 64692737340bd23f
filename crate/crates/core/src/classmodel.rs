//! Per-class model: field accesses, call sites, and the two declaration-level
//! rules (no escaping, safe publication).

use std::collections::HashMap;

use serde::Serialize;

use crate::config::{AnalysisConfig, Rule, ThreadSafeTypeAllowlist};
use crate::frontend::*;
use crate::raceanalysis::{Alert, Location};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum AccessKind {
    Read,
    Write,
    ArrayElementWrite,
    MutatorCall,
}

impl AccessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AccessKind::Read => "read",
            AccessKind::Write => "write",
            AccessKind::ArrayElementWrite => "array element write",
            AccessKind::MutatorCall => "mutator call",
        }
    }
}

/// The method, constructor or field initializer a piece of code belongs to.
/// Indices refer to the lists of the [`ClassDecl`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Callable {
    Method(usize),
    Constructor(usize),
    FieldInitializer(usize),
}

impl Callable {
    /// Constructors and field initializers run while the object is being
    /// built, before it can be shared.
    pub fn is_construction(self) -> bool {
        matches!(self, Callable::Constructor(_) | Callable::FieldInitializer(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldAccess {
    /// Index into `ClassDecl::fields`.
    pub field: usize,
    pub kind: AccessKind,
    /// The expression naming the field (`cnt`, `this.cnt`, `C.cnt`), or the
    /// declarator name for an initializer write.
    pub span: Span,
    pub expr: NodeId,
    pub callable: Callable,
    pub is_initializer_write: bool,
    /// Method name for accesses that are call qualifiers (`list.add(x)`).
    pub call_name: Option<String>,
    /// The call expression when `call_name` is set.
    pub call_expr: Option<NodeId>,
}

/// A call to a method of the same class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSite {
    pub callable: Callable,
    pub name: String,
    pub arity: usize,
    pub expr: NodeId,
    pub span: Span,
}

#[derive(Debug)]
pub struct ClassModel<'a> {
    pub ast: &'a Ast,
    pub decl: &'a ClassDecl,
    pub config: &'a AnalysisConfig,
    /// In file order.
    pub accesses: Vec<FieldAccess>,
    pub calls: Vec<CallSite>,
    pub annotated: bool,
}

impl<'a> ClassModel<'a> {
    pub fn build(ast: &'a Ast, decl: &'a ClassDecl, config: &'a AnalysisConfig) -> Self {
        let mut c = Collector { decl, mutators: &config.mutator_methods, accesses: Vec::new(), calls: Vec::new(), scopes: Vec::new(), callable: Callable::Method(0) };
        for (i, f) in decl.fields.iter().enumerate() {
            if let Some(init) = &f.initializer {
                c.callable = Callable::FieldInitializer(i);
                c.accesses.push(FieldAccess {
                    field: i,
                    kind: AccessKind::Write,
                    span: f.name_span,
                    expr: init.id,
                    callable: c.callable,
                    is_initializer_write: true,
                    call_name: None,
                    call_expr: None,
                });
                c.expr(init);
            }
        }
        for (i, m) in decl.methods.iter().enumerate() {
            c.callable = Callable::Method(i);
            c.callable_body(m);
        }
        for (i, m) in decl.constructors.iter().enumerate() {
            c.callable = Callable::Constructor(i);
            c.callable_body(m);
        }
        let mut accesses = c.accesses;
        accesses.sort_by_key(|a| (a.span.start.offset, a.span.end.offset, a.kind));
        let mut calls = c.calls;
        calls.sort_by_key(|s| s.span.start.offset);
        ClassModel { ast, decl, config, accesses, calls, annotated: has_annotation(decl, &config.annotation_names) }
    }

    pub fn field(&self, a: &FieldAccess) -> &'a FieldDecl {
        &self.decl.fields[a.field]
    }

    pub fn method(&self, callable: Callable) -> &'a MethodDecl {
        match callable {
            Callable::Method(i) => &self.decl.methods[i],
            Callable::Constructor(i) => &self.decl.constructors[i],
            Callable::FieldInitializer(_) => panic!("field initializers have no method declaration"),
        }
    }

    pub fn qualified_name(&self) -> String {
        self.decl.qualified_name(self.ast.package.as_ref().map(|p| p.name.as_str()))
    }

    pub fn location(&self, span: Span) -> Location {
        Location::new(&self.ast.file.path, span)
    }

    /// Accesses that need synchronization: to non-volatile fields of an
    /// annotated class, outside construction, and not of a thread-safe type.
    pub fn exposed_accesses(&self) -> Vec<&FieldAccess> {
        if !self.annotated {
            return Vec::new();
        }
        self.accesses.iter().filter(|a| self.is_exposed(a)).collect()
    }

    pub fn is_exposed(&self, a: &FieldAccess) -> bool {
        let f = self.field(a);
        self.annotated
            && !f.is_volatile()
            && !a.is_initializer_write
            && !a.callable.is_construction()
            && !is_thread_safe_type(self.ast, &f.ty, &self.config.allowlist)
    }

    pub fn check_no_escaping(&self) -> Vec<Alert> {
        if !self.annotated {
            return Vec::new();
        }
        self.decl
            .fields
            .iter()
            .filter(|f| f.visibility() != Visibility::Private)
            .map(|f| Alert {
                rule: Rule::P1,
                primary: self.location(f.name_span),
                secondary: None,
                field: f.name.clone(),
                class_id: self.qualified_name(),
                message: format!("field `{}` is {} and can be accessed without synchronization from outside the class", f.name, f.visibility()),
            })
            .collect()
    }

    pub fn check_safe_publication(&self) -> Vec<Alert> {
        if !self.annotated {
            return Vec::new();
        }
        self.decl
            .fields
            .iter()
            .filter(|f| !(is_default_initialized(f) || f.is_final() || f.is_volatile()))
            .map(|f| Alert {
                rule: Rule::P2,
                primary: self.location(f.name_span),
                secondary: None,
                field: f.name.clone(),
                class_id: self.qualified_name(),
                message: format!("field `{}` is initialized to a non-default value but is neither final nor volatile", f.name),
            })
            .collect()
    }
}

pub fn is_modifying(a: &FieldAccess) -> bool {
    a.kind != AccessKind::Read
}

/// `true` if the field has no initializer or is initialized with the literal
/// default value of its declared type. No constant folding: `1 - 1` is not a
/// default value.
pub fn is_default_initialized(f: &FieldDecl) -> bool {
    let Some(init) = &f.initializer else { return true };
    let ExprKind::Literal { kind, text } = &init.unparen().kind else { return false };
    let ty = f.ty.text.as_str();
    match ty {
        "byte" | "short" | "int" | "long" => *kind == LitKind::Int && is_zero_int(text),
        "char" => match kind {
            LitKind::Char => matches!(text.as_str(), "'\\u0000'" | "'\\0'" | "'\\000'"),
            LitKind::Int => is_zero_int(text),
            _ => false,
        },
        "float" | "double" => matches!(kind, LitKind::Int | LitKind::Float) && is_zero_float(text),
        "boolean" => *kind == LitKind::Bool && text == "false",
        _ => *kind == LitKind::Null,
    }
}

fn is_zero_int(text: &str) -> bool {
    let t = text.trim_end_matches(['l', 'L']).replace('_', "");
    let digits = t
        .strip_prefix("0x")
        .or_else(|| t.strip_prefix("0X"))
        .or_else(|| t.strip_prefix("0b"))
        .or_else(|| t.strip_prefix("0B"))
        .unwrap_or(&t);
    !digits.is_empty() && digits.chars().all(|c| c == '0')
}

fn is_zero_float(text: &str) -> bool {
    let lower = text.to_ascii_lowercase();
    if lower.starts_with("0x") {
        return false;
    }
    let t = lower.trim_end_matches(['f', 'd']).replace('_', "");
    let mantissa = t.split('e').next().unwrap_or("");
    mantissa.chars().any(|c| c.is_ascii_digit()) && mantissa.chars().all(|c| c == '0' || c == '.')
}

/// Resolves a type as written to candidate qualified names using the file's
/// package and imports. Wildcard imports are used only when there is exactly
/// one, since with several the owning package cannot be decided.
pub fn qualified_candidates(ast: &Ast, base: &str) -> Vec<String> {
    if base.contains('.') {
        return vec![base.to_string()];
    }
    let mut out: Vec<String> = ast
        .imports
        .iter()
        .filter(|i| !i.is_static && !i.is_wildcard && i.path.rsplit('.').next() == Some(base))
        .map(|i| i.path.clone())
        .collect();
    if out.is_empty() {
        let wild: Vec<&Import> = ast.imports.iter().filter(|i| !i.is_static && i.is_wildcard).collect();
        if wild.len() == 1 {
            out.push(format!("{}.{}", wild[0].path, base));
        }
    }
    out
}

pub fn is_thread_safe_type(ast: &Ast, ty: &TypeRef, allowlist: &ThreadSafeTypeAllowlist) -> bool {
    if ty.is_array() {
        return false;
    }
    let base = ty.base_name();
    let simple = ty.simple_name();
    let candidates = qualified_candidates(ast, base);
    let exact = allowlist.exact_types.iter().any(|e| {
        e == base || e == simple || candidates.iter().any(|c| c == e)
    });
    exact || candidates.iter().any(|c| allowlist.qualified_prefixes.iter().any(|p| c.starts_with(p.as_str())))
}

struct Collector<'a, 'c> {
    decl: &'a ClassDecl,
    mutators: &'c [String],
    accesses: Vec<FieldAccess>,
    calls: Vec<CallSite>,
    /// Local variables and parameters in scope, with their declared types.
    scopes: Vec<HashMap<String, String>>,
    callable: Callable,
}

impl<'a, 'c> Collector<'a, 'c> {
    fn callable_body(&mut self, m: &MethodDecl) {
        let params = m.params.iter().map(|p| (p.name.clone(), p.ty.text.clone())).collect();
        self.scopes.push(params);
        if let Some(b) = &m.body {
            self.block(b);
        }
        self.scopes.pop();
    }

    fn declare(&mut self, name: &str, ty: &str) {
        if let Some(s) = self.scopes.last_mut() {
            s.insert(name.to_string(), ty.to_string());
        }
    }

    fn local_type(&self, name: &str) -> Option<&str> {
        self.scopes.iter().rev().find_map(|s| s.get(name)).map(String::as_str)
    }

    fn block(&mut self, b: &Block) {
        self.scopes.push(HashMap::new());
        for s in &b.stmts {
            self.stmt(s);
        }
        self.scopes.pop();
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Block(b) => self.block(b),
            StmtKind::LocalVar { ty, declarators, .. } => {
                for d in declarators {
                    if let Some(init) = &d.init {
                        self.expr(init);
                    }
                    self.declare(&d.name, &ty.text);
                }
            }
            StmtKind::For { init, cond, update, body } => {
                self.scopes.push(HashMap::new());
                for i in init {
                    self.stmt(i);
                }
                if let Some(c) = cond {
                    self.expr(c);
                }
                self.stmt(body);
                for u in update {
                    self.expr(u);
                }
                self.scopes.pop();
            }
            StmtKind::ForEach { var, iterable, body } => {
                self.expr(iterable);
                self.scopes.push(HashMap::new());
                self.stmt(var);
                self.stmt(body);
                self.scopes.pop();
            }
            StmtKind::Synchronized { lock, body } => {
                self.expr(lock);
                self.block(body);
            }
            StmtKind::Try { body, catches, finally } => {
                self.block(body);
                for c in catches {
                    self.scopes.push(HashMap::new());
                    self.declare(&c.name, &c.types[0].text);
                    self.block(&c.body);
                    self.scopes.pop();
                }
                if let Some(f) = finally {
                    self.block(f);
                }
            }
            _ => {
                for e in s.child_exprs() {
                    self.expr(e);
                }
                for c in s.child_stmts() {
                    self.stmt(c);
                }
            }
        }
    }

    fn is_own_class_name(&self, name: &str) -> bool {
        name == self.decl.name && self.local_type(name).is_none()
    }

    /// If `e` names one of the class's fields, returns the field index.
    fn field_ref(&self, e: &Expr) -> Option<usize> {
        match &e.kind {
            ExprKind::Name(n) if self.local_type(n).is_none() => self.decl.field(n).map(|(i, _)| i),
            ExprKind::FieldAccess { target, name, .. } => {
                let own = match &target.unparen().kind {
                    ExprKind::This => true,
                    ExprKind::Name(q) => {
                        self.is_own_class_name(q)
                            || self.local_type(q).is_some_and(|t| t == self.decl.name)
                    }
                    _ => false,
                };
                if own {
                    self.decl.field(name).map(|(i, _)| i)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn push(&mut self, field: usize, kind: AccessKind, e: &Expr, call: Option<(String, NodeId)>) {
        self.accesses.push(FieldAccess {
            field,
            kind,
            span: e.span,
            expr: e.id,
            callable: self.callable,
            is_initializer_write: false,
            call_expr: call.as_ref().map(|c| c.1),
            call_name: call.map(|c| c.0),
        });
    }

    /// Visits the target of an assignment or increment.
    fn store_target(&mut self, target: &Expr) {
        let t = target.unparen();
        if let Some(f) = self.field_ref(t) {
            self.push(f, AccessKind::Write, t, None);
            return;
        }
        if let ExprKind::ArrayAccess { array, index } = &t.kind {
            let arr = array.unparen();
            if let Some(f) = self.field_ref(arr) {
                self.push(f, AccessKind::ArrayElementWrite, arr, None);
            } else {
                self.expr(array);
            }
            self.expr(index);
            return;
        }
        self.expr(target);
    }

    fn expr(&mut self, e: &Expr) {
        if let Some(f) = self.field_ref(e) {
            self.push(f, AccessKind::Read, e, None);
            return;
        }
        match &e.kind {
            ExprKind::Assign { target, value, .. } => {
                self.store_target(target);
                self.expr(value);
            }
            ExprKind::Unary { op, operand } if op.is_update() => self.store_target(operand),
            ExprKind::MethodCall { target, name, name_span, args } => {
                match target {
                    Some(t) => {
                        let tu = t.unparen();
                        if let Some(f) = self.field_ref(tu) {
                            let kind = if self.mutators.iter().any(|m| m == name) {
                                AccessKind::MutatorCall
                            } else {
                                AccessKind::Read
                            };
                            self.push(f, kind, tu, Some((name.clone(), e.id)));
                        } else {
                            self.expr(t);
                        }
                        let same_class = match &tu.kind {
                            ExprKind::This => true,
                            ExprKind::Name(q) => self.is_own_class_name(q),
                            _ => false,
                        };
                        if same_class {
                            self.call(name, args.len(), e, *name_span);
                        }
                    }
                    None if name != "this" && name != "super" => self.call(name, args.len(), e, *name_span),
                    None => {}
                }
                for a in args {
                    self.expr(a);
                }
            }
            _ => {
                for c in e.children() {
                    self.expr(c);
                }
            }
        }
    }

    fn call(&mut self, name: &str, arity: usize, e: &Expr, name_span: Span) {
        self.calls.push(CallSite {
            callable: self.callable,
            name: name.to_string(),
            arity,
            expr: e.id,
            span: Span::new(name_span.start, e.span.end),
        });
    }
}
