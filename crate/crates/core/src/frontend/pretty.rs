//! Prints an [`Ast`] back to Java source. Tokens are separated by single
//! spaces so the output always re-lexes to the same token sequence as the
//! parsed input.

use super::ast::*;

pub fn print_ast(ast: &Ast) -> String {
    let mut p = Printer::default();
    if let Some(pkg) = &ast.package {
        for a in &pkg.annotations {
            p.word(&a.text);
        }
        p.word("package");
        p.word(&pkg.name);
        p.word(";");
        p.newline();
    }
    for imp in &ast.imports {
        p.word("import");
        if imp.is_static {
            p.word("static");
        }
        p.word(&imp.path);
        if imp.is_wildcard {
            p.word(".*");
        }
        p.word(";");
        p.newline();
    }
    for c in &ast.classes {
        p.class(c);
    }
    p.out
}

#[derive(Default)]
struct Printer {
    out: String,
    indent: usize,
    line_start: bool,
}

impl Printer {
    fn word(&mut self, w: &str) {
        if self.line_start {
            for _ in 0..self.indent {
                self.out.push_str("    ");
            }
            self.line_start = false;
        } else if !self.out.is_empty() {
            self.out.push(' ');
        }
        self.out.push_str(w);
    }

    fn newline(&mut self) {
        self.out.push('\n');
        self.line_start = true;
    }

    fn modifiers(&mut self, mods: &Modifiers) {
        for item in &mods.items {
            match item {
                ModifierItem::Keyword(m, _) => self.word(m.keyword()),
                ModifierItem::Annotation(a) => self.word(&a.text),
            }
        }
    }

    fn open(&mut self) {
        self.word("{");
        self.indent += 1;
        self.newline();
    }

    fn close(&mut self) {
        self.indent -= 1;
        self.word("}");
        self.newline();
    }

    fn class(&mut self, c: &ClassDecl) {
        self.modifiers(&c.modifiers);
        self.word("class");
        self.word(&c.name);
        if let Some(tp) = &c.type_params {
            self.word(tp);
        }
        if let Some(e) = &c.extends {
            self.word("extends");
            self.word(&e.text);
        }
        for (i, t) in c.implements.iter().enumerate() {
            self.word(if i == 0 { "implements" } else { "," });
            self.word(&t.text);
        }
        self.open();
        for m in &c.members {
            match m {
                Member::Fields(range) => self.fields(&c.fields[range.clone()]),
                Member::Method(i) => self.method(&c.methods[*i]),
                Member::Constructor(i) => self.method(&c.constructors[*i]),
                Member::Class(i) => self.class(&c.classes[*i]),
                Member::Empty(_) => {
                    self.word(";");
                    self.newline();
                }
            }
        }
        self.close();
    }

    fn fields(&mut self, fields: &[FieldDecl]) {
        let first = &fields[0];
        self.modifiers(&first.modifiers);
        let strip = 2 * first.extra_dims as usize;
        self.word(&first.ty.text[..first.ty.text.len() - strip]);
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.word(",");
            }
            self.word(&f.name);
            self.dims(f.extra_dims);
            if let Some(init) = &f.initializer {
                self.word("=");
                self.expr(init);
            }
        }
        self.word(";");
        self.newline();
    }

    fn dims(&mut self, n: u32) {
        for _ in 0..n {
            self.word("[");
            self.word("]");
        }
    }

    fn method(&mut self, m: &MethodDecl) {
        self.modifiers(&m.modifiers);
        if let Some(tp) = &m.type_params {
            self.word(tp);
        }
        if let Some(rt) = &m.return_type {
            self.word(&rt.text);
        }
        self.word(&m.name);
        self.word("(");
        for (i, p) in m.params.iter().enumerate() {
            if i > 0 {
                self.word(",");
            }
            self.modifiers(&p.modifiers);
            self.word(&p.ty.text);
            if p.varargs {
                self.word("...");
            }
            self.word(&p.name);
            self.dims(p.extra_dims);
        }
        self.word(")");
        self.dims(m.extra_dims);
        for (i, t) in m.throws.iter().enumerate() {
            self.word(if i == 0 { "throws" } else { "," });
            self.word(&t.text);
        }
        match &m.body {
            Some(b) => self.block(b),
            None => {
                self.word(";");
                self.newline();
            }
        }
    }

    fn block(&mut self, b: &Block) {
        self.open();
        for s in &b.stmts {
            self.stmt(s);
        }
        self.close();
    }

    fn local_var(&mut self, s: &Stmt) {
        if let StmtKind::LocalVar { modifiers, ty, declarators } = &s.kind {
            self.modifiers(modifiers);
            self.word(&ty.text);
            for (i, d) in declarators.iter().enumerate() {
                if i > 0 {
                    self.word(",");
                }
                self.word(&d.name);
                self.dims(d.extra_dims);
                if let Some(init) = &d.init {
                    self.word("=");
                    self.expr(init);
                }
            }
        } else if let StmtKind::Expr(e) = &s.kind {
            self.expr(e);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Block(b) => self.block(b),
            StmtKind::LocalVar { .. } => {
                self.local_var(s);
                self.word(";");
                self.newline();
            }
            StmtKind::Expr(e) => {
                self.expr(e);
                self.word(";");
                self.newline();
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                self.word("if");
                self.paren(cond);
                self.stmt(then_branch);
                if let Some(e) = else_branch {
                    self.word("else");
                    self.stmt(e);
                }
            }
            StmtKind::While { cond, body } => {
                self.word("while");
                self.paren(cond);
                self.stmt(body);
            }
            StmtKind::For { init, cond, update, body } => {
                self.word("for");
                self.word("(");
                for (i, s) in init.iter().enumerate() {
                    if i > 0 {
                        self.word(",");
                    }
                    self.local_var(s);
                }
                self.word(";");
                if let Some(c) = cond {
                    self.expr(c);
                }
                self.word(";");
                for (i, u) in update.iter().enumerate() {
                    if i > 0 {
                        self.word(",");
                    }
                    self.expr(u);
                }
                self.word(")");
                self.stmt(body);
            }
            StmtKind::ForEach { var, iterable, body } => {
                self.word("for");
                self.word("(");
                self.local_var(var);
                self.word(":");
                self.expr(iterable);
                self.word(")");
                self.stmt(body);
            }
            StmtKind::Return(e) => {
                self.word("return");
                if let Some(e) = e {
                    self.expr(e);
                }
                self.word(";");
                self.newline();
            }
            StmtKind::Break | StmtKind::Continue => {
                self.word(if matches!(s.kind, StmtKind::Break) { "break" } else { "continue" });
                self.word(";");
                self.newline();
            }
            StmtKind::Throw(e) => {
                self.word("throw");
                self.expr(e);
                self.word(";");
                self.newline();
            }
            StmtKind::Synchronized { lock, body } => {
                self.word("synchronized");
                self.paren(lock);
                self.block(body);
            }
            StmtKind::Try { body, catches, finally } => {
                self.word("try");
                self.block(body);
                for c in catches {
                    self.word("catch");
                    self.word("(");
                    self.modifiers(&c.modifiers);
                    for (i, t) in c.types.iter().enumerate() {
                        if i > 0 {
                            self.word("|");
                        }
                        self.word(&t.text);
                    }
                    self.word(&c.name);
                    self.word(")");
                    self.block(&c.body);
                }
                if let Some(f) = finally {
                    self.word("finally");
                    self.block(f);
                }
            }
            StmtKind::Empty => {
                self.word(";");
                self.newline();
            }
        }
    }

    fn paren(&mut self, e: &Expr) {
        self.word("(");
        self.expr(e);
        self.word(")");
    }

    fn args(&mut self, args: &[Expr]) {
        self.word("(");
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                self.word(",");
            }
            self.expr(a);
        }
        self.word(")");
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Literal { text, .. } => self.word(text),
            ExprKind::Name(n) => self.word(n),
            ExprKind::This => self.word("this"),
            ExprKind::Super => self.word("super"),
            ExprKind::FieldAccess { target, name, .. } => {
                self.expr(target);
                self.word(".");
                self.word(name);
            }
            ExprKind::MethodCall { target, name, args, .. } => {
                if let Some(t) = target {
                    self.expr(t);
                    self.word(".");
                }
                self.word(name);
                self.args(args);
            }
            ExprKind::New { ty, args } => {
                self.word("new");
                self.word(&ty.text);
                self.args(args);
            }
            ExprKind::NewArray { ty, dims, extra_dims, init } => {
                self.word("new");
                self.word(&ty.text);
                for d in dims {
                    self.word("[");
                    self.expr(d);
                    self.word("]");
                }
                self.dims(*extra_dims);
                if let Some(i) = init {
                    self.expr(i);
                }
            }
            ExprKind::ArrayInit(items) => {
                self.word("{");
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        self.word(",");
                    }
                    self.expr(item);
                }
                self.word("}");
            }
            ExprKind::ArrayAccess { array, index } => {
                self.expr(array);
                self.word("[");
                self.expr(index);
                self.word("]");
            }
            ExprKind::Unary { op, operand } => {
                if op.is_postfix() {
                    self.expr(operand);
                    self.word(op.symbol());
                } else {
                    self.word(op.symbol());
                    self.expr(operand);
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                self.expr(lhs);
                self.word(op.symbol());
                self.expr(rhs);
            }
            ExprKind::Assign { op, target, value } => {
                self.expr(target);
                match op {
                    None => self.word("="),
                    Some(b) => self.word(&format!("{}=", b.symbol())),
                }
                self.expr(value);
            }
            ExprKind::Conditional { cond, then_expr, else_expr } => {
                self.expr(cond);
                self.word("?");
                self.expr(then_expr);
                self.word(":");
                self.expr(else_expr);
            }
            ExprKind::InstanceOf { expr, ty } => {
                self.expr(expr);
                self.word("instanceof");
                self.word(&ty.text);
            }
            ExprKind::Cast { ty, expr } => {
                self.word("(");
                self.word(&ty.text);
                self.word(")");
                self.expr(expr);
            }
            ExprKind::Paren(inner) => self.paren(inner),
            ExprKind::ClassLit(ty) => {
                self.word(&ty.text);
                self.word(".");
                self.word("class");
            }
        }
    }
}
