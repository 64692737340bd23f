//! Syntax tree for the supported Java subset.
//!
//! Every node carries a [`Span`]. Expressions, statements, variable
//! declarators and catch clauses additionally carry a [`NodeId`] that is
//! unique within one parsed file; the control-flow graph and the analyses
//! refer to nodes by id.

use std::fmt;

use serde::Serialize;

/// A position in a source file. `line` and `col` are 1-based, `col` counts
/// characters. `offset` is a byte offset into the file content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Pos {
    pub offset: usize,
    pub line: u32,
    pub col: u32,
}

/// A half-open source range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn new(start: Pos, end: Pos) -> Self {
        Span { start, end }
    }

    /// Zero-width span at `pos`.
    pub fn empty(pos: Pos) -> Self {
        Span { start: pos, end: pos }
    }

    pub fn to(self, other: Span) -> Span {
        Span { start: self.start, end: other.end }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start.offset <= other.start.offset && other.end.offset <= self.end.offset
    }

    pub fn is_empty(&self) -> bool {
        self.start.offset == self.end.offset
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start.line, self.start.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub path: String,
    pub content: String,
}

impl SourceFile {
    pub fn new(path: impl Into<String>, content: impl Into<String>) -> Self {
        SourceFile { path: path.into(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ast {
    pub file: SourceFile,
    pub package: Option<Package>,
    pub imports: Vec<Import>,
    pub classes: Vec<ClassDecl>,
    pub span: Span,
}

impl Ast {
    /// All class declarations in the file, outer classes before the classes
    /// nested in them.
    pub fn all_classes(&self) -> Vec<&ClassDecl> {
        fn walk<'a>(c: &'a ClassDecl, out: &mut Vec<&'a ClassDecl>) {
            out.push(c);
            for nested in &c.classes {
                walk(nested, out);
            }
        }
        let mut out = Vec::new();
        for c in &self.classes {
            walk(c, &mut out);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Package {
    pub name: String,
    pub annotations: Vec<Annotation>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Import {
    pub path: String,
    pub is_static: bool,
    pub is_wildcard: bool,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modifier {
    Public,
    Protected,
    Private,
    Static,
    Final,
    Volatile,
    Synchronized,
    Abstract,
    Native,
    Transient,
    Strictfp,
    Default,
}

impl Modifier {
    pub fn from_keyword(word: &str) -> Option<Modifier> {
        Some(match word {
            "public" => Modifier::Public,
            "protected" => Modifier::Protected,
            "private" => Modifier::Private,
            "static" => Modifier::Static,
            "final" => Modifier::Final,
            "volatile" => Modifier::Volatile,
            "synchronized" => Modifier::Synchronized,
            "abstract" => Modifier::Abstract,
            "native" => Modifier::Native,
            "transient" => Modifier::Transient,
            "strictfp" => Modifier::Strictfp,
            "default" => Modifier::Default,
            _ => return None,
        })
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Modifier::Public => "public",
            Modifier::Protected => "protected",
            Modifier::Private => "private",
            Modifier::Static => "static",
            Modifier::Final => "final",
            Modifier::Volatile => "volatile",
            Modifier::Synchronized => "synchronized",
            Modifier::Abstract => "abstract",
            Modifier::Native => "native",
            Modifier::Transient => "transient",
            Modifier::Strictfp => "strictfp",
            Modifier::Default => "default",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Visibility {
    Public,
    Protected,
    Package,
    Private,
}

impl fmt::Display for Visibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Visibility::Public => "public",
            Visibility::Protected => "protected",
            Visibility::Package => "package-private",
            Visibility::Private => "private",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    /// Name as written, simple (`ThreadSafe`) or qualified
    /// (`javax.annotation.concurrent.ThreadSafe`).
    pub name: String,
    /// Full annotation text including arguments, whitespace-normalized.
    pub text: String,
    pub span: Span,
}

impl Annotation {
    pub fn simple_name(&self) -> &str {
        self.name.rsplit('.').next().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModifierItem {
    Keyword(Modifier, Span),
    Annotation(Annotation),
}

/// Modifiers and annotations in source order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Modifiers {
    pub items: Vec<ModifierItem>,
}

impl Modifiers {
    pub fn has(&self, m: Modifier) -> bool {
        self.items.iter().any(|i| matches!(i, ModifierItem::Keyword(k, _) if *k == m))
    }

    pub fn annotations(&self) -> impl Iterator<Item = &Annotation> {
        self.items.iter().filter_map(|i| match i {
            ModifierItem::Annotation(a) => Some(a),
            ModifierItem::Keyword(..) => None,
        })
    }

    pub fn visibility(&self) -> Visibility {
        if self.has(Modifier::Public) {
            Visibility::Public
        } else if self.has(Modifier::Protected) {
            Visibility::Protected
        } else if self.has(Modifier::Private) {
            Visibility::Private
        } else {
            Visibility::Package
        }
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn span(&self) -> Option<Span> {
        let first = self.items.first()?;
        let last = self.items.last()?;
        Some(item_span(first).to(item_span(last)))
    }
}

fn item_span(item: &ModifierItem) -> Span {
    match item {
        ModifierItem::Keyword(_, s) => *s,
        ModifierItem::Annotation(a) => a.span,
    }
}

/// A type as written. Type arguments are kept as opaque text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRef {
    pub text: String,
    pub span: Span,
}

impl TypeRef {
    /// The type name without type arguments or array dimensions, e.g.
    /// `java.util.Map` for `java.util.Map<K, V>[]`.
    pub fn base_name(&self) -> &str {
        let end = self.text.find(['<', '[']).unwrap_or(self.text.len());
        self.text[..end].trim()
    }

    /// Last segment of [`TypeRef::base_name`].
    pub fn simple_name(&self) -> &str {
        let base = self.base_name();
        base.rsplit('.').next().unwrap_or(base)
    }

    pub fn is_array(&self) -> bool {
        self.text.ends_with(']')
    }
}

/// Index into the member lists of a [`ClassDecl`], in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Member {
    /// A field declaration statement; covers `fields[range]`.
    Fields(std::ops::Range<usize>),
    Method(usize),
    Constructor(usize),
    Class(usize),
    Empty(Span),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub name: String,
    pub name_span: Span,
    pub modifiers: Modifiers,
    pub type_params: Option<String>,
    pub extends: Option<TypeRef>,
    pub implements: Vec<TypeRef>,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub constructors: Vec<MethodDecl>,
    pub classes: Vec<ClassDecl>,
    pub members: Vec<Member>,
    /// Enclosing class names, outermost first.
    pub outer: Vec<String>,
    pub span: Span,
}

impl ClassDecl {
    pub fn annotations(&self) -> impl Iterator<Item = &Annotation> {
        self.modifiers.annotations()
    }

    pub fn field(&self, name: &str) -> Option<(usize, &FieldDecl)> {
        self.fields.iter().enumerate().find(|(_, f)| f.name == name)
    }

    /// `pkg.Outer.Inner` style name.
    pub fn qualified_name(&self, package: Option<&str>) -> String {
        let mut parts: Vec<&str> = Vec::new();
        if let Some(p) = package {
            parts.push(p);
        }
        parts.extend(self.outer.iter().map(String::as_str));
        parts.push(&self.name);
        parts.join(".")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecl {
    pub name: String,
    pub name_span: Span,
    /// Declared type, including any array dimensions written after the name.
    pub ty: TypeRef,
    /// Dimensions written after the declarator name (`int a[]`).
    pub extra_dims: u32,
    pub modifiers: Modifiers,
    pub initializer: Option<Expr>,
    /// The declarator: name through the end of the initializer.
    pub declarator_span: Span,
    /// The whole declaration statement, shared by all declarators in it.
    pub span: Span,
}

impl FieldDecl {
    pub fn visibility(&self) -> Visibility {
        self.modifiers.visibility()
    }
    pub fn is_final(&self) -> bool {
        self.modifiers.has(Modifier::Final)
    }
    pub fn is_volatile(&self) -> bool {
        self.modifiers.has(Modifier::Volatile)
    }
    pub fn is_static(&self) -> bool {
        self.modifiers.has(Modifier::Static)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub modifiers: Modifiers,
    pub ty: TypeRef,
    pub varargs: bool,
    pub name: String,
    pub name_span: Span,
    pub extra_dims: u32,
    pub span: Span,
}

/// A method or constructor. Constructors have no return type.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodDecl {
    pub name: String,
    pub name_span: Span,
    pub modifiers: Modifiers,
    pub type_params: Option<String>,
    pub return_type: Option<TypeRef>,
    pub params: Vec<Param>,
    pub extra_dims: u32,
    pub throws: Vec<TypeRef>,
    pub body: Option<Block>,
    pub span: Span,
}

impl MethodDecl {
    pub fn is_constructor(&self) -> bool {
        self.return_type.is_none()
    }
    pub fn visibility(&self) -> Visibility {
        self.modifiers.visibility()
    }
    pub fn is_public(&self) -> bool {
        self.visibility() == Visibility::Public
    }
    pub fn is_static(&self) -> bool {
        self.modifiers.has(Modifier::Static)
    }
    pub fn is_synchronized(&self) -> bool {
        self.modifiers.has(Modifier::Synchronized)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub id: NodeId,
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub id: NodeId,
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDeclarator {
    pub id: NodeId,
    pub name: String,
    pub name_span: Span,
    pub extra_dims: u32,
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatchClause {
    pub id: NodeId,
    pub modifiers: Modifiers,
    pub types: Vec<TypeRef>,
    pub name: String,
    pub name_span: Span,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Block(Block),
    LocalVar {
        modifiers: Modifiers,
        ty: TypeRef,
        declarators: Vec<VarDeclarator>,
    },
    Expr(Expr),
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    For {
        init: Vec<Stmt>,
        cond: Option<Expr>,
        update: Vec<Expr>,
        body: Box<Stmt>,
    },
    ForEach {
        var: Box<Stmt>,
        iterable: Expr,
        body: Box<Stmt>,
    },
    Return(Option<Expr>),
    Break,
    Continue,
    Throw(Expr),
    Synchronized {
        lock: Expr,
        body: Block,
    },
    Try {
        body: Block,
        catches: Vec<CatchClause>,
        finally: Option<Block>,
    },
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LitKind {
    Int,
    Float,
    Char,
    Str,
    Bool,
    Null,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Plus,
    Not,
    BitNot,
    PreInc,
    PreDec,
    PostInc,
    PostDec,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Plus => "+",
            UnaryOp::Not => "!",
            UnaryOp::BitNot => "~",
            UnaryOp::PreInc | UnaryOp::PostInc => "++",
            UnaryOp::PreDec | UnaryOp::PostDec => "--",
        }
    }

    pub fn is_update(self) -> bool {
        matches!(self, UnaryOp::PreInc | UnaryOp::PreDec | UnaryOp::PostInc | UnaryOp::PostDec)
    }

    pub fn is_postfix(self) -> bool {
        matches!(self, UnaryOp::PostInc | UnaryOp::PostDec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Or,
    And,
    BitOr,
    BitXor,
    BitAnd,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    Shl,
    Shr,
    UShr,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "||",
            BinaryOp::And => "&&",
            BinaryOp::BitOr => "|",
            BinaryOp::BitXor => "^",
            BinaryOp::BitAnd => "&",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Gt => ">",
            BinaryOp::Le => "<=",
            BinaryOp::Ge => ">=",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::UShr => ">>>",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
        }
    }

    pub fn is_short_circuit(self) -> bool {
        matches!(self, BinaryOp::Or | BinaryOp::And)
    }
}

/// `None` is plain `=`; otherwise the compound operator (`+=` is `Some(Add)`).
pub type AssignOp = Option<BinaryOp>;

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub id: NodeId,
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Literal { kind: LitKind, text: String },
    Name(String),
    This,
    Super,
    FieldAccess { target: Box<Expr>, name: String, name_span: Span },
    MethodCall { target: Option<Box<Expr>>, name: String, name_span: Span, args: Vec<Expr> },
    New { ty: TypeRef, args: Vec<Expr> },
    NewArray { ty: TypeRef, dims: Vec<Expr>, extra_dims: u32, init: Option<Box<Expr>> },
    ArrayInit(Vec<Expr>),
    ArrayAccess { array: Box<Expr>, index: Box<Expr> },
    Unary { op: UnaryOp, operand: Box<Expr> },
    Binary { op: BinaryOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Assign { op: AssignOp, target: Box<Expr>, value: Box<Expr> },
    Conditional { cond: Box<Expr>, then_expr: Box<Expr>, else_expr: Box<Expr> },
    InstanceOf { expr: Box<Expr>, ty: TypeRef },
    Cast { ty: TypeRef, expr: Box<Expr> },
    Paren(Box<Expr>),
    ClassLit(TypeRef),
}

impl Expr {
    /// Strips any number of enclosing parentheses.
    pub fn unparen(&self) -> &Expr {
        let mut e = self;
        while let ExprKind::Paren(inner) = &e.kind {
            e = inner;
        }
        e
    }

    /// Direct subexpressions in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Literal { .. }
            | ExprKind::Name(_)
            | ExprKind::This
            | ExprKind::Super
            | ExprKind::ClassLit(_) => Vec::new(),
            ExprKind::FieldAccess { target, .. } => vec![target],
            ExprKind::MethodCall { target, args, .. } => {
                target.iter().map(|t| &**t).chain(args.iter()).collect()
            }
            ExprKind::New { args, .. } => args.iter().collect(),
            ExprKind::NewArray { dims, init, .. } => {
                dims.iter().chain(init.iter().map(|i| &**i)).collect()
            }
            ExprKind::ArrayInit(items) => items.iter().collect(),
            ExprKind::ArrayAccess { array, index } => vec![array, index],
            ExprKind::Unary { operand, .. } => vec![operand],
            ExprKind::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            ExprKind::Assign { target, value, .. } => vec![target, value],
            ExprKind::Conditional { cond, then_expr, else_expr } => {
                vec![cond, then_expr, else_expr]
            }
            ExprKind::InstanceOf { expr, .. } => vec![expr],
            ExprKind::Cast { expr, .. } => vec![expr],
            ExprKind::Paren(inner) => vec![inner],
        }
    }
}

impl Stmt {
    /// Direct child statements (not expressions).
    pub fn child_stmts(&self) -> Vec<&Stmt> {
        match &self.kind {
            StmtKind::Block(b) => b.stmts.iter().collect(),
            StmtKind::If { then_branch, else_branch, .. } => {
                let mut v: Vec<&Stmt> = vec![then_branch];
                if let Some(e) = else_branch {
                    v.push(e);
                }
                v
            }
            StmtKind::While { body, .. } => vec![body],
            StmtKind::For { init, body, .. } => init.iter().chain(std::iter::once(&**body)).collect(),
            StmtKind::ForEach { var, body, .. } => vec![var, body],
            StmtKind::Synchronized { body, .. } => body.stmts.iter().collect(),
            StmtKind::Try { body, catches, finally } => {
                let mut v: Vec<&Stmt> = body.stmts.iter().collect();
                for c in catches {
                    v.extend(c.body.stmts.iter());
                }
                if let Some(f) = finally {
                    v.extend(f.stmts.iter());
                }
                v
            }
            _ => Vec::new(),
        }
    }

    /// Expressions owned directly by this statement.
    pub fn child_exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::LocalVar { declarators, .. } => {
                declarators.iter().filter_map(|d| d.init.as_ref()).collect()
            }
            StmtKind::Expr(e) | StmtKind::Throw(e) => vec![e],
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::For { cond, update, .. } => cond.iter().chain(update.iter()).collect(),
            StmtKind::ForEach { iterable, .. } => vec![iterable],
            StmtKind::Return(e) => e.iter().collect(),
            StmtKind::Synchronized { lock, .. } => vec![lock],
            _ => Vec::new(),
        }
    }
}
