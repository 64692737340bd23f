//! Two-thread driver programs for a class: for every pair of public methods
//! (a method paired with itself included), one thread calls each, after the
//! main thread has initialized the fields.
//!
//! Each statement becomes the field, lock and volatile actions it performs,
//! in evaluation order, or a single `other` action if it performs none.
//! Calls to methods of the same class are inlined. Only straight-line code
//! is supported; constructors are not run.

use std::collections::HashMap;

use crate::accesspaths::resolve_call;
use crate::classmodel::{is_default_initialized, is_thread_safe_type, AccessKind, ClassModel, FieldAccess};
use crate::frontend::*;
use crate::monitors::{is_lock_type, local_aliases, sync_monitor, Monitor};

use super::{Op, OracleError, ThreadProgram, TraceAction};

#[derive(Debug, Clone)]
pub struct DriverProgram {
    /// Indices into `ClassDecl::methods` run by threads 1 and 2.
    pub first: usize,
    pub second: usize,
    pub program: ThreadProgram,
}

#[derive(Debug, Clone)]
pub struct Driver {
    pub class: String,
    pub programs: Vec<DriverProgram>,
}

pub fn driver_from_class(cm: &ClassModel<'_>) -> Result<Driver, OracleError> {
    let main = init_actions(cm);
    let public: Vec<usize> = (0..cm.decl.methods.len()).filter(|&i| cm.decl.methods[i].is_public()).collect();
    let mut bodies = HashMap::new();
    for &m in &public {
        bodies.insert(m, thread_actions(cm, m)?);
    }
    let mut programs = Vec::new();
    for (i, &a) in public.iter().enumerate() {
        for &b in &public[i..] {
            programs.push(DriverProgram {
                first: a,
                second: b,
                program: ThreadProgram::new(vec![main.clone(), bodies[&a].clone(), bodies[&b].clone()]),
            });
        }
    }
    Ok(Driver { class: cm.qualified_name(), programs })
}

/// Default and final initializations first, then the remaining initializer
/// writes, so that only the former are ordered before the other threads.
fn init_actions(cm: &ClassModel<'_>) -> Vec<TraceAction> {
    let mut inits = Vec::new();
    let mut writes = Vec::new();
    for f in &cm.decl.fields {
        let label = format!("initialize {}", f.name);
        if f.is_final() {
            inits.push(TraceAction::new(0, Op::FinalInit, &f.name).with_label(label));
        } else if is_default_initialized(f) {
            inits.push(TraceAction::new(0, Op::DefaultInit, &f.name).with_label(label));
        } else if f.is_volatile() {
            writes.push(TraceAction::new(0, Op::VolatileWrite, &f.name).with_label(label));
        } else {
            writes.push(TraceAction::new(0, Op::Write, &f.name).with_label(label));
        }
    }
    inits.extend(writes);
    inits
}

fn thread_actions(cm: &ClassModel<'_>, method: usize) -> Result<Vec<TraceAction>, OracleError> {
    let mut t = Translator { cm, by_expr: HashMap::new(), stack: Vec::new(), out: Vec::new() };
    for a in &cm.accesses {
        if !a.is_initializer_write {
            t.by_expr.insert(a.expr, a);
        }
    }
    t.call(method)?;
    let mut held: HashMap<&str, usize> = HashMap::new();
    for a in &t.out {
        match a.op {
            Op::Lock => *held.entry(&a.target).or_default() += 1,
            Op::Unlock => {
                let n = held.entry(&a.target).or_default();
                if *n == 0 {
                    return Err(unsupported(cm, method, format!("releases {} without holding it", a.target)));
                }
                *n -= 1;
            }
            _ => {}
        }
    }
    if let Some((m, _)) = held.iter().find(|(_, &n)| n > 0) {
        return Err(unsupported(cm, method, format!("returns holding {m}")));
    }
    Ok(t.out)
}

fn unsupported(cm: &ClassModel<'_>, method: usize, what: String) -> OracleError {
    OracleError::UnsupportedForOracle(format!("{}.{}: {}", cm.decl.name, cm.decl.methods[method].name, what))
}

struct Translator<'c, 'a> {
    cm: &'c ClassModel<'a>,
    by_expr: HashMap<NodeId, &'c FieldAccess>,
    /// Methods being translated, innermost last.
    stack: Vec<usize>,
    out: Vec<TraceAction>,
}

impl<'c, 'a> Translator<'c, 'a> {
    fn current(&self) -> usize {
        *self.stack.last().unwrap_or(&0)
    }

    fn fail(&self, what: impl Into<String>) -> OracleError {
        unsupported(self.cm, self.current(), what.into())
    }

    fn emit(&mut self, op: Op, target: &str, span: Span) {
        let text = reconstruct_span(self.cm.ast, span).unwrap_or("");
        let text: String = text.split_whitespace().collect::<Vec<_>>().join(" ");
        let label = format!("line {}: {}", span.start.line, text);
        self.out.push(TraceAction::new(0, op, target).with_label(label));
    }

    fn call(&mut self, method: usize) -> Result<(), OracleError> {
        if self.stack.contains(&method) {
            return Err(self.fail(format!("recursive call to {}", self.cm.decl.methods[method].name)));
        }
        self.stack.push(method);
        let m = &self.cm.decl.methods[method];
        let monitor = m.is_synchronized().then(|| if m.is_static() { Monitor::class(self.cm.decl) } else { Monitor::this() });
        if let Some(mon) = &monitor {
            self.emit(Op::Lock, &mon.identity, m.name_span);
        }
        if let Some(body) = &m.body {
            self.block(body, true)?;
        }
        if let Some(mon) = &monitor {
            self.emit(Op::Unlock, &mon.identity, m.name_span);
        }
        self.stack.pop();
        Ok(())
    }

    /// `tail`: the block ends the method, so it may end with `return`.
    fn block(&mut self, b: &Block, tail: bool) -> Result<(), OracleError> {
        let n = b.stmts.len();
        for (i, s) in b.stmts.iter().enumerate() {
            self.stmt(s, tail && i + 1 == n)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt, tail: bool) -> Result<(), OracleError> {
        match &s.kind {
            StmtKind::Block(b) => self.block(b, tail),
            StmtKind::Empty => Ok(()),
            StmtKind::LocalVar { .. } | StmtKind::Expr(_) | StmtKind::Return(_) => {
                if matches!(s.kind, StmtKind::Return(_)) && !tail {
                    return Err(self.fail(format!("early return on line {}", s.span.start.line)));
                }
                let before = self.out.len();
                for e in s.child_exprs() {
                    self.expr(e)?;
                }
                let bare_return = matches!(s.kind, StmtKind::Return(None));
                if self.out.len() == before && !bare_return {
                    self.emit(Op::Other, "", s.span);
                }
                Ok(())
            }
            StmtKind::Synchronized { lock, body } => {
                self.expr(lock)?;
                let mon = sync_monitor(self.cm, lock);
                self.emit(Op::Lock, &mon.identity, lock.span);
                self.block(body, tail)?;
                self.emit(Op::Unlock, &mon.identity, lock.span);
                Ok(())
            }
            // catch clauses are entered only by an explicit throw, which is
            // not supported, so they never run
            StmtKind::Try { body, finally, .. } => {
                self.block(body, tail && finally.is_none())?;
                if let Some(f) = finally {
                    self.block(f, tail)?;
                }
                Ok(())
            }
            StmtKind::If { .. } | StmtKind::While { .. } | StmtKind::For { .. } | StmtKind::ForEach { .. } => {
                Err(self.fail(format!("branching on line {}", s.span.start.line)))
            }
            StmtKind::Break | StmtKind::Continue | StmtKind::Throw(_) => {
                Err(self.fail(format!("jump on line {}", s.span.start.line)))
            }
        }
    }

    fn access(&mut self, id: NodeId) {
        let Some(a) = self.by_expr.get(&id).copied() else { return };
        let f = self.cm.field(a);
        let op = match a.kind {
            AccessKind::Read if f.is_volatile() => Op::VolatileRead,
            AccessKind::Read => Op::Read,
            AccessKind::Write if f.is_volatile() => Op::VolatileWrite,
            AccessKind::Write | AccessKind::ArrayElementWrite => Op::Write,
            AccessKind::MutatorCall if is_thread_safe_type(self.cm.ast, &f.ty, &self.cm.config.allowlist) => {
                if f.is_volatile() {
                    Op::VolatileRead
                } else {
                    Op::Read
                }
            }
            AccessKind::MutatorCall => Op::Write,
        };
        self.emit(op, &f.name, a.span);
    }

    /// Read then write of an updated field (`x += 1`, `x++`).
    fn update(&mut self, target: &Expr) -> Result<(), OracleError> {
        let t = target.unparen();
        for c in t.children() {
            self.expr(c)?;
        }
        if let Some(a) = self.by_expr.get(&t.id).copied() {
            if a.kind == AccessKind::Write {
                let f = self.cm.field(a);
                let (r, w) = if f.is_volatile() { (Op::VolatileRead, Op::VolatileWrite) } else { (Op::Read, Op::Write) };
                self.emit(r, &f.name, a.span);
                self.emit(w, &f.name, a.span);
                return Ok(());
            }
        }
        self.access(t.id);
        Ok(())
    }

    fn expr(&mut self, e: &Expr) -> Result<(), OracleError> {
        match &e.kind {
            ExprKind::Conditional { .. } => Err(self.fail(format!("conditional expression on line {}", e.span.start.line))),
            ExprKind::Binary { op, .. } if op.is_short_circuit() => {
                Err(self.fail(format!("short-circuit operator on line {}", e.span.start.line)))
            }
            ExprKind::Assign { op, target, value } => {
                if op.is_some() {
                    self.update(target)?;
                    return self.expr(value);
                }
                let t = target.unparen();
                for c in t.children() {
                    self.expr(c)?;
                }
                self.expr(value)?;
                self.access(t.id);
                Ok(())
            }
            ExprKind::Unary { op, operand } if op.is_update() => self.update(operand),
            ExprKind::MethodCall { target, name, args, .. } => self.method_call(e, target.as_deref(), name, args),
            _ => {
                for c in e.children() {
                    self.expr(c)?;
                }
                self.access(e.id);
                Ok(())
            }
        }
    }

    /// The lock field that a `lock()`/`unlock()` qualifier stands for.
    fn lock_field(&self, q: &Expr) -> Option<usize> {
        let q = q.unparen();
        let cfg = self.cm.config;
        if let Some(a) = self.by_expr.get(&q.id) {
            let f = self.cm.field(a);
            return is_lock_type(&f.ty.text, cfg).then_some(a.field);
        }
        if let ExprKind::Name(n) = &q.kind {
            let m = &self.cm.decl.methods[self.current()];
            let f = *local_aliases(self.cm, m).get(n)?;
            return is_lock_type(&self.cm.decl.fields[f].ty.text, cfg).then_some(f);
        }
        None
    }

    fn method_call(&mut self, e: &Expr, target: Option<&Expr>, name: &str, args: &[Expr]) -> Result<(), OracleError> {
        let cfg = self.cm.config;
        let lock_op = if cfg.lock_methods.iter().any(|m| m == name) {
            Some(Op::Lock)
        } else if cfg.unlock_methods.iter().any(|m| m == name) {
            Some(Op::Unlock)
        } else {
            None
        };
        if let (Some(op), Some(q)) = (lock_op, target) {
            if args.is_empty() || op == Op::Lock {
                if let Some(f) = self.lock_field(q) {
                    for a in args {
                        self.expr(a)?;
                    }
                    let mon = Monitor::lock_field(self.cm.decl, &self.cm.decl.fields[f]);
                    self.emit(op, &mon.identity, e.span);
                    return Ok(());
                }
            }
        }
        if let Some(t) = target {
            self.expr(t)?;
        }
        for a in args {
            self.expr(a)?;
        }
        let own = match target.map(Expr::unparen) {
            None => true,
            Some(t) => matches!(t.kind, ExprKind::This),
        };
        if own {
            match resolve_call(self.cm, name, args.len()).as_slice() {
                [] => {}
                [m] => self.call(*m)?,
                _ => return Err(self.fail(format!("overloaded call to {name} on line {}", e.span.start.line))),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classmodel::tests::{COUNTER_DR, COUNTER_TS};
    use crate::config::AnalysisConfig;
    use crate::hboracle::{enumerate_executions, program_races};

    fn with_driver<R>(src: &str, f: impl FnOnce(Result<Driver, OracleError>) -> R) -> R {
        let ast = parse_compilation_unit(&SourceFile::new("T.java", src)).unwrap();
        let cfg = AnalysisConfig::default();
        let cm = ClassModel::build(&ast, &ast.classes[0], &cfg);
        f(driver_from_class(&cm))
    }

    fn ops(actions: &[TraceAction]) -> Vec<String> {
        actions
            .iter()
            .map(|a| if a.target.is_empty() { a.op.keyword().to_string() } else { format!("{} {}", a.op.keyword(), a.target) })
            .collect()
    }

    #[test]
    fn counter_dr_driver() {
        with_driver(COUNTER_DR, |d| {
            let d = d.unwrap();
            assert_eq!(d.programs.len(), 1);
            let p = &d.programs[0].program;
            assert_eq!(ops(&p.threads[0]), vec!["init-default cnt"]);
            assert_eq!(ops(&p.threads[1]), vec!["read cnt", "other", "write cnt"]);
            assert_eq!(enumerate_executions(p, None).unwrap().count(), 20);
            let r = program_races(p, None).unwrap();
            assert_eq!(r.racy_executions, 20);
        });
    }

    #[test]
    fn counter_ts_driver() {
        with_driver(COUNTER_TS, |d| {
            let d = d.unwrap();
            let p = &d.programs[0].program;
            assert_eq!(ops(&p.threads[1]), vec!["lock CounterTS.l", "read cnt", "other", "write cnt", "unlock CounterTS.l"]);
            let r = program_races(p, None).unwrap();
            assert_eq!((r.executions, r.racy), (2, false));
        });
    }

    #[test]
    fn inlining_and_synchronized_methods() {
        with_driver(crate::accesspaths::tests::TEST_CLASS, |d| {
            let d = d.unwrap();
            let p = &d.programs[0].program;
            assert_eq!(ops(&p.threads[0]), vec!["init-default y", "write lock"]);
            assert_eq!(ops(&p.threads[1]), vec!["lock Test.lock", "write y", "unlock Test.lock"]);
            assert!(!program_races(p, None).unwrap().racy);
        });
        let src = "class A { private int x; public synchronized void f() { g(); } private void g() { x++; } public static synchronized void h() { } }";
        with_driver(src, |d| {
            let d = d.unwrap();
            assert_eq!(d.programs.len(), 3);
            let p = &d.programs[0].program;
            assert_eq!(ops(&p.threads[1]), vec!["lock this", "read x", "write x", "unlock this"]);
            assert_eq!(ops(&d.programs[2].program.threads[1]), vec!["lock Class<A>", "unlock Class<A>"]);
        });
    }

    #[test]
    fn publication_writes_follow_initialization() {
        let src = "class A { private int a = 1; private final int b = 2; private volatile int c = 3; private int d; public int get() { return a; } }";
        with_driver(src, |d| {
            let d = d.unwrap();
            let p = &d.programs[0].program;
            assert_eq!(ops(&p.threads[0]), vec!["init-final b", "init-default d", "write a", "vwrite c"]);
            assert!(program_races(p, None).unwrap().racy);
        });
    }

    #[test]
    fn unsupported_shapes() {
        for body in ["if (x > 0) { x = 1; }", "while (true) { }", "f();", "return; ", "int y = x > 0 ? 1 : 2;", "throw new RuntimeException();"] {
            let src = format!("class A {{ private int x; public void f() {{ {body} x = 2; }} }}");
            with_driver(&src, |d| {
                assert!(matches!(d, Err(OracleError::UnsupportedForOracle(_))), "{body}");
            });
        }
    }

    #[test]
    fn lock_discipline_is_checked() {
        let src = "class A { private final Lock l = new ReentrantLock(); public void f() { l.lock(); } }";
        with_driver(src, |d| assert!(matches!(d, Err(OracleError::UnsupportedForOracle(_)))));
        let src = "class A { private final Lock l = new ReentrantLock(); private int x;\n\
                   public void f() { Lock k = l; k.lock(); try { x = 1; } finally { k.unlock(); } } }";
        with_driver(src, |d| {
            let d = d.unwrap();
            let t = &d.programs[0].program.threads[1];
            assert_eq!(ops(t), vec!["read l", "lock A.l", "write x", "unlock A.l"]);
        });
    }

    #[test]
    fn mutators_on_thread_safe_types_are_reads() {
        let src = "import java.util.concurrent.ConcurrentHashMap; import java.util.List;\n\
                   class A { private final ConcurrentHashMap<String, String> m = new ConcurrentHashMap<>();\n\
                   private final List<String> l = null;\n\
                   public void f() { m.put(\"a\", \"b\"); l.add(\"c\"); } }";
        with_driver(src, |d| {
            let d = d.unwrap();
            assert_eq!(ops(&d.programs[0].program.threads[1]), vec!["read m", "write l"]);
        });
    }
}
