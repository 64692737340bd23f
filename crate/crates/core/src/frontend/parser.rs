use super::ast::*;
use super::lexer::{join_tokens, tokenize, Token, TokenKind};
use super::ParseError;

type PResult<T> = Result<T, ParseError>;

const RESERVED: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long", "native",
    "new", "package", "private", "protected", "public", "return", "short", "static", "strictfp",
    "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try", "void",
    "volatile", "while", "true", "false", "null",
];

const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double", "void"];

fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

pub(super) struct Parser<'a> {
    file: &'a SourceFile,
    tokens: Vec<Token>,
    pos: usize,
    next_id: u32,
}

impl<'a> Parser<'a> {
    pub(super) fn new(file: &'a SourceFile) -> PResult<Self> {
        Ok(Parser { file, tokens: tokenize(&file.content)?, pos: 0, next_id: 0 })
    }

    // ---- token helpers ----

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Token {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_punct(p)
    }

    fn at_word(&self, w: &str) -> bool {
        self.peek().is_word(w)
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.peek().span.start, message)
    }

    fn found(&self) -> String {
        let t = self.peek();
        if t.kind == TokenKind::Eof {
            "end of input".to_string()
        } else {
            format!("`{}`", t.text)
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Token> {
        if self.at_punct(p) {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected `{p}`, found {}", self.found())))
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<Token> {
        if self.at_word(w) {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected `{w}`, found {}", self.found())))
        }
    }

    fn at_ident(&self) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Ident && !is_reserved(&t.text)
    }

    fn expect_ident(&mut self) -> PResult<Token> {
        if self.at_ident() {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected identifier, found {}", self.found())))
        }
    }

    fn start(&self) -> Pos {
        self.peek().span.start
    }

    fn prev_end(&self) -> Pos {
        if self.pos == 0 {
            self.tokens[0].span.start
        } else {
            self.tokens[self.pos - 1].span.end
        }
    }

    fn span_from(&self, start: Pos) -> Span {
        Span::new(start, self.prev_end())
    }

    fn id(&mut self) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        id
    }

    fn unsupported(&self, what: &str) -> ParseError {
        self.error_here(format!("{what} are not supported"))
    }

    /// `true` if the token at `self.pos + n` directly follows the one before it.
    fn adjacent(&self, n: usize) -> bool {
        let i = self.pos + n;
        i > 0 && i < self.tokens.len() && self.tokens[i - 1].span.end.offset == self.tokens[i].span.start.offset
    }

    // ---- compilation unit ----

    pub(super) fn parse_unit(mut self) -> PResult<Ast> {
        let start = Pos { offset: 0, line: 1, col: 1 };
        let mut package = None;
        let save = self.pos;
        let annotations = self.parse_annotations()?;
        if self.at_word("package") {
            let pstart = annotations.first().map(|a| a.span.start).unwrap_or(self.start());
            self.bump();
            let name = self.parse_qualified_name()?;
            self.expect_punct(";")?;
            package = Some(Package { name, annotations, span: self.span_from(pstart) });
        } else {
            self.pos = save;
        }
        let mut imports = Vec::new();
        while self.at_word("import") {
            let istart = self.start();
            self.bump();
            let is_static = self.eat_word("static");
            let mut path = self.expect_ident()?.text;
            let mut is_wildcard = false;
            while self.eat_punct(".") {
                if self.eat_punct("*") {
                    is_wildcard = true;
                    break;
                }
                path.push('.');
                path.push_str(&self.expect_ident()?.text);
            }
            self.expect_punct(";")?;
            imports.push(Import { path, is_static, is_wildcard, span: self.span_from(istart) });
        }
        let mut classes = Vec::new();
        while !self.at_eof() {
            if self.eat_punct(";") {
                continue;
            }
            let tstart = self.start();
            let modifiers = self.parse_modifiers()?;
            classes.push(self.parse_class_rest(tstart, modifiers, Vec::new())?);
        }
        let end = self.peek().span.end;
        Ok(Ast { file: self.file.clone(), package, imports, classes, span: Span::new(start, end) })
    }

    fn parse_qualified_name(&mut self) -> PResult<String> {
        let mut name = self.expect_ident()?.text;
        while self.at_punct(".") && self.peek_at(1).kind == TokenKind::Ident {
            self.bump();
            name.push('.');
            name.push_str(&self.expect_ident()?.text);
        }
        Ok(name)
    }

    fn parse_annotation(&mut self) -> PResult<Annotation> {
        let first = self.pos;
        let start = self.start();
        self.expect_punct("@")?;
        let name = self.parse_qualified_name()?;
        if self.at_punct("(") {
            self.skip_balanced("(", ")")?;
        }
        let text = join_tokens(&self.tokens[first..self.pos]);
        Ok(Annotation { name, text, span: self.span_from(start) })
    }

    fn parse_annotations(&mut self) -> PResult<Vec<Annotation>> {
        let mut out = Vec::new();
        while self.at_punct("@") && !self.peek_at(1).is_word("interface") {
            out.push(self.parse_annotation()?);
        }
        Ok(out)
    }

    fn skip_balanced(&mut self, open: &str, close: &str) -> PResult<()> {
        let start = self.start();
        self.expect_punct(open)?;
        let mut depth = 1;
        while depth > 0 {
            if self.at_eof() {
                return Err(ParseError::new(start, format!("unclosed `{open}`")));
            }
            let t = self.bump();
            if t.is_punct(open) {
                depth += 1;
            } else if t.is_punct(close) {
                depth -= 1;
            }
        }
        Ok(())
    }

    fn parse_modifiers(&mut self) -> PResult<Modifiers> {
        let mut items = Vec::new();
        loop {
            if self.at_punct("@") && !self.peek_at(1).is_word("interface") {
                items.push(ModifierItem::Annotation(self.parse_annotation()?));
                continue;
            }
            let t = self.peek();
            if t.kind == TokenKind::Ident {
                // `default` only acts as a modifier when a declaration follows
                if t.text == "default" {
                    break;
                }
                if let Some(m) = Modifier::from_keyword(&t.text) {
                    // `synchronized (` starts a statement, not a declaration
                    if m == Modifier::Synchronized && self.peek_at(1).is_punct("(") {
                        break;
                    }
                    let span = t.span;
                    self.bump();
                    items.push(ModifierItem::Keyword(m, span));
                    continue;
                }
            }
            break;
        }
        Ok(Modifiers { items })
    }

    fn check_field_modifiers(&self, mods: &Modifiers, at: Pos) -> PResult<()> {
        let vis = [Modifier::Public, Modifier::Protected, Modifier::Private]
            .iter()
            .filter(|m| mods.has(**m))
            .count();
        if vis > 1 {
            return Err(ParseError::new(at, "conflicting visibility modifiers"));
        }
        if mods.has(Modifier::Final) && mods.has(Modifier::Volatile) {
            return Err(ParseError::new(at, "a field cannot be both final and volatile"));
        }
        Ok(())
    }

    fn parse_opaque_angle(&mut self) -> PResult<String> {
        let first = self.pos;
        self.parse_type_args()?;
        Ok(join_tokens(&self.tokens[first..self.pos]))
    }

    // ---- classes ----

    fn parse_class_rest(&mut self, start: Pos, modifiers: Modifiers, outer: Vec<String>) -> PResult<ClassDecl> {
        if self.at_word("interface") || self.at_word("enum") || self.at_word("record") || self.at_punct("@") {
            return Err(self.error_here(format!("{} declarations are not supported", self.peek().text)));
        }
        let start = modifiers.span().map(|s| s.start).unwrap_or(start);
        self.expect_word("class")?;
        let name_tok = self.expect_ident()?;
        let type_params = if self.at_punct("<") { Some(self.parse_opaque_angle()?) } else { None };
        let extends = if self.eat_word("extends") { Some(self.parse_type()?) } else { None };
        let mut implements = Vec::new();
        if self.eat_word("implements") {
            loop {
                implements.push(self.parse_type()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct("{")?;
        let mut class = ClassDecl {
            name: name_tok.text.clone(),
            name_span: name_tok.span,
            modifiers,
            type_params,
            extends,
            implements,
            fields: Vec::new(),
            methods: Vec::new(),
            constructors: Vec::new(),
            classes: Vec::new(),
            members: Vec::new(),
            outer: outer.clone(),
            span: Span::empty(start),
        };
        let mut inner_outer = outer;
        inner_outer.push(class.name.clone());
        while !self.at_punct("}") {
            if self.at_eof() {
                return Err(self.error_here(format!("expected `}}` to close class `{}`, found end of input", class.name)));
            }
            self.parse_member(&mut class, &inner_outer)?;
        }
        self.bump();
        class.span = self.span_from(start);
        Ok(class)
    }

    fn parse_member(&mut self, class: &mut ClassDecl, inner_outer: &[String]) -> PResult<()> {
        if self.at_punct(";") {
            let t = self.bump();
            class.members.push(Member::Empty(t.span));
            return Ok(());
        }
        if self.at_punct("{") || (self.at_word("static") && self.peek_at(1).is_punct("{")) {
            return Err(self.unsupported("initializer blocks"));
        }
        let start = self.start();
        let modifiers = self.parse_modifiers()?;
        let start = modifiers.span().map(|s| s.start).unwrap_or(start);
        if self.at_word("class") || self.at_word("interface") || self.at_word("enum") || self.at_word("record") || self.at_punct("@") {
            let nested = self.parse_class_rest(start, modifiers, inner_outer.to_vec())?;
            class.members.push(Member::Class(class.classes.len()));
            class.classes.push(nested);
            return Ok(());
        }
        let type_params = if self.at_punct("<") { Some(self.parse_opaque_angle()?) } else { None };
        if self.at_ident() && self.peek().text == class.name && self.peek_at(1).is_punct("(") {
            let name_tok = self.bump();
            let ctor = self.parse_method_rest(start, modifiers, type_params, None, name_tok)?;
            class.members.push(Member::Constructor(class.constructors.len()));
            class.constructors.push(ctor);
            return Ok(());
        }
        let ty = self.parse_type()?;
        let name_tok = self.expect_ident()?;
        if self.at_punct("(") {
            let method = self.parse_method_rest(start, modifiers, type_params, Some(ty), name_tok)?;
            class.members.push(Member::Method(class.methods.len()));
            class.methods.push(method);
            return Ok(());
        }
        if type_params.is_some() {
            return Err(self.error_here("type parameters on a field"));
        }
        self.check_field_modifiers(&modifiers, start)?;
        let first = class.fields.len();
        let mut name_tok = name_tok;
        loop {
            let extra_dims = self.parse_dims();
            let initializer = if self.eat_punct("=") { Some(self.parse_var_init()?) } else { None };
            let mut field_ty = ty.clone();
            for _ in 0..extra_dims {
                field_ty.text.push_str("[]");
            }
            class.fields.push(FieldDecl {
                name: name_tok.text.clone(),
                name_span: name_tok.span,
                ty: field_ty,
                extra_dims,
                modifiers: modifiers.clone(),
                initializer,
                declarator_span: self.span_from(name_tok.span.start),
                span: Span::empty(start),
            });
            if !self.eat_punct(",") {
                break;
            }
            name_tok = self.expect_ident()?;
        }
        self.expect_punct(";")?;
        let span = self.span_from(start);
        for f in &mut class.fields[first..] {
            f.span = span;
        }
        class.members.push(Member::Fields(first..class.fields.len()));
        Ok(())
    }

    fn parse_dims(&mut self) -> u32 {
        let mut n = 0;
        while self.at_punct("[") && self.peek_at(1).is_punct("]") {
            self.bump();
            self.bump();
            n += 1;
        }
        n
    }

    fn parse_method_rest(
        &mut self,
        start: Pos,
        modifiers: Modifiers,
        type_params: Option<String>,
        return_type: Option<TypeRef>,
        name_tok: Token,
    ) -> PResult<MethodDecl> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.at_punct(")") {
            loop {
                params.push(self.parse_param()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        let extra_dims = self.parse_dims();
        let mut throws = Vec::new();
        if self.eat_word("throws") {
            loop {
                throws.push(self.parse_type()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        let body = if self.eat_punct(";") { None } else { Some(self.parse_block()?) };
        Ok(MethodDecl {
            name: name_tok.text,
            name_span: name_tok.span,
            modifiers,
            type_params,
            return_type,
            params,
            extra_dims,
            throws,
            body,
            span: self.span_from(start),
        })
    }

    fn parse_param(&mut self) -> PResult<Param> {
        let start = self.start();
        let modifiers = self.parse_modifiers()?;
        let start = modifiers.span().map(|s| s.start).unwrap_or(start);
        let ty = self.parse_type()?;
        let varargs = self.eat_punct("...");
        let name_tok = self.expect_ident()?;
        let extra_dims = self.parse_dims();
        Ok(Param {
            modifiers,
            ty,
            varargs,
            name: name_tok.text,
            name_span: name_tok.span,
            extra_dims,
            span: self.span_from(start),
        })
    }

    // ---- types ----

    fn parse_type(&mut self) -> PResult<TypeRef> {
        let first = self.pos;
        let start = self.start();
        let t = self.peek();
        if t.kind != TokenKind::Ident || (is_reserved(&t.text) && !PRIMITIVES.contains(&t.text.as_str())) {
            return Err(self.error_here(format!("expected type, found {}", self.found())));
        }
        let primitive = PRIMITIVES.contains(&t.text.as_str());
        self.bump();
        if !primitive {
            if self.at_punct("<") {
                self.parse_type_args()?;
            }
            while self.at_punct(".") && self.peek_at(1).kind == TokenKind::Ident && !is_reserved(&self.peek_at(1).text) {
                self.bump();
                self.bump();
                if self.at_punct("<") {
                    self.parse_type_args()?;
                }
            }
        }
        self.parse_dims();
        Ok(TypeRef { text: join_tokens(&self.tokens[first..self.pos]), span: self.span_from(start) })
    }

    /// Consumes `<...>`, allowing only tokens that can appear in type
    /// arguments. Accepts the diamond `<>`.
    fn parse_type_args(&mut self) -> PResult<()> {
        let start = self.start();
        self.expect_punct("<")?;
        let mut depth = 1;
        while depth > 0 {
            let t = self.peek();
            let ok = match t.kind {
                TokenKind::Ident => true,
                TokenKind::Punct => matches!(t.text.as_str(), "<" | ">" | "," | "?" | "." | "[" | "]" | "&" | "@"),
                _ => false,
            };
            if !ok {
                return Err(ParseError::new(start, "malformed type arguments"));
            }
            if t.is_punct("<") {
                depth += 1;
            } else if t.is_punct(">") {
                depth -= 1;
            }
            self.bump();
        }
        Ok(())
    }

    fn speculate<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> Option<T> {
        let save = self.pos;
        let save_id = self.next_id;
        match f(self) {
            Ok(v) => Some(v),
            Err(_) => {
                self.pos = save;
                self.next_id = save_id;
                None
            }
        }
    }

    // ---- statements ----

    fn parse_block(&mut self) -> PResult<Block> {
        let start = self.start();
        self.expect_punct("{")?;
        let id = self.id();
        let mut stmts = Vec::new();
        while !self.at_punct("}") {
            if self.at_eof() {
                return Err(self.error_here("expected `}`, found end of input"));
            }
            stmts.push(self.parse_stmt()?);
        }
        self.bump();
        Ok(Block { id, stmts, span: self.span_from(start) })
    }

    fn mk_stmt(&mut self, start: Pos, kind: StmtKind) -> Stmt {
        let id = self.id();
        Stmt { id, kind, span: self.span_from(start) }
    }

    fn parse_stmt(&mut self) -> PResult<Stmt> {
        let start = self.start();
        let t = self.peek().clone();
        if t.is_punct("{") {
            let block = self.parse_block()?;
            return Ok(self.mk_stmt(start, StmtKind::Block(block)));
        }
        if t.is_punct(";") {
            self.bump();
            return Ok(self.mk_stmt(start, StmtKind::Empty));
        }
        if t.kind == TokenKind::Ident {
            match t.text.as_str() {
                "if" => {
                    self.bump();
                    let cond = self.parse_paren_expr()?;
                    let then_branch = Box::new(self.parse_stmt()?);
                    let else_branch = if self.eat_word("else") { Some(Box::new(self.parse_stmt()?)) } else { None };
                    return Ok(self.mk_stmt(start, StmtKind::If { cond, then_branch, else_branch }));
                }
                "while" => {
                    self.bump();
                    let cond = self.parse_paren_expr()?;
                    let body = Box::new(self.parse_stmt()?);
                    return Ok(self.mk_stmt(start, StmtKind::While { cond, body }));
                }
                "for" => return self.parse_for(start),
                "return" => {
                    self.bump();
                    let value = if self.at_punct(";") { None } else { Some(self.parse_expr()?) };
                    self.expect_punct(";")?;
                    return Ok(self.mk_stmt(start, StmtKind::Return(value)));
                }
                "break" | "continue" => {
                    self.bump();
                    if self.at_ident() {
                        return Err(self.unsupported("labeled jumps"));
                    }
                    self.expect_punct(";")?;
                    let kind = if t.text == "break" { StmtKind::Break } else { StmtKind::Continue };
                    return Ok(self.mk_stmt(start, kind));
                }
                "throw" => {
                    self.bump();
                    let e = self.parse_expr()?;
                    self.expect_punct(";")?;
                    return Ok(self.mk_stmt(start, StmtKind::Throw(e)));
                }
                "synchronized" if self.peek_at(1).is_punct("(") => {
                    self.bump();
                    let lock = self.parse_paren_expr()?;
                    let body = self.parse_block()?;
                    return Ok(self.mk_stmt(start, StmtKind::Synchronized { lock, body }));
                }
                "try" => return self.parse_try(start),
                "do" => return Err(self.unsupported("do/while loops")),
                "switch" => return Err(self.unsupported("switch statements")),
                "assert" => return Err(self.unsupported("assert statements")),
                "class" | "interface" | "enum" | "record" if self.peek_at(1).kind == TokenKind::Ident => {
                    return Err(self.unsupported("local classes"))
                }
                "else" | "catch" | "finally" | "case" => {
                    return Err(self.error_here(format!("unexpected `{}`", t.text)))
                }
                _ => {}
            }
            if self.at_ident() && self.peek_at(1).is_punct(":") {
                return Err(self.unsupported("labeled statements"));
            }
        }
        if let Some(kind) = self.try_local_var()? {
            self.expect_punct(";")?;
            return Ok(self.mk_stmt(start, kind));
        }
        let e = self.parse_expr()?;
        self.expect_punct(";")?;
        Ok(self.mk_stmt(start, StmtKind::Expr(e)))
    }

    /// Parses `[mods] Type name [= init], ...` (without the trailing `;`) if
    /// the upcoming tokens form a local variable declaration.
    fn try_local_var(&mut self) -> PResult<Option<StmtKind>> {
        let save = self.pos;
        let has_mods = self.at_word("final") || (self.at_punct("@") && !self.peek_at(1).is_word("interface"));
        let modifiers = if has_mods { self.parse_modifiers()? } else { Modifiers::default() };
        let ty = match self.speculate(|p| p.parse_type()) {
            Some(ty) if self.at_ident() => ty,
            _ => {
                if has_mods {
                    return Err(self.error_here(format!("expected local variable declaration, found {}", self.found())));
                }
                self.pos = save;
                return Ok(None);
            }
        };
        let mut declarators = Vec::new();
        loop {
            let name_tok = self.expect_ident()?;
            let extra_dims = self.parse_dims();
            let init = if self.eat_punct("=") { Some(self.parse_var_init()?) } else { None };
            let id = self.id();
            declarators.push(VarDeclarator {
                id,
                name: name_tok.text,
                name_span: name_tok.span,
                extra_dims,
                init,
                span: self.span_from(name_tok.span.start),
            });
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(Some(StmtKind::LocalVar { modifiers, ty, declarators }))
    }

    fn parse_var_init(&mut self) -> PResult<Expr> {
        if self.at_punct("{") {
            self.parse_array_init()
        } else {
            self.parse_expr()
        }
    }

    fn parse_array_init(&mut self) -> PResult<Expr> {
        let start = self.start();
        self.expect_punct("{")?;
        let mut items = Vec::new();
        while !self.at_punct("}") {
            items.push(self.parse_var_init()?);
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct("}")?;
        Ok(self.mk_expr(start, ExprKind::ArrayInit(items)))
    }

    fn parse_for(&mut self, start: Pos) -> PResult<Stmt> {
        self.expect_word("for")?;
        self.expect_punct("(")?;
        // enhanced for: [mods] Type name :
        let save = self.pos;
        let var_start = self.start();
        let mods = self.parse_modifiers()?;
        if let Some(ty) = self.speculate(|p| p.parse_type()) {
            if self.at_ident() && self.peek_at(1).is_punct(":") {
                let name_tok = self.bump();
                let id = self.id();
                let decl = VarDeclarator {
                    id,
                    name: name_tok.text.clone(),
                    name_span: name_tok.span,
                    extra_dims: 0,
                    init: None,
                    span: name_tok.span,
                };
                let var_start = mods.span().map(|s| s.start).unwrap_or(var_start);
                let var = self.mk_stmt(var_start, StmtKind::LocalVar { modifiers: mods, ty, declarators: vec![decl] });
                self.expect_punct(":")?;
                let iterable = self.parse_expr()?;
                self.expect_punct(")")?;
                let body = Box::new(self.parse_stmt()?);
                return Ok(self.mk_stmt(start, StmtKind::ForEach { var: Box::new(var), iterable, body }));
            }
        }
        self.pos = save;
        let mut init = Vec::new();
        if !self.at_punct(";") {
            let istart = self.start();
            if let Some(kind) = self.try_local_var()? {
                init.push(self.mk_stmt(istart, kind));
            } else {
                loop {
                    let estart = self.start();
                    let e = self.parse_expr()?;
                    init.push(self.mk_stmt(estart, StmtKind::Expr(e)));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
        }
        self.expect_punct(";")?;
        let cond = if self.at_punct(";") { None } else { Some(self.parse_expr()?) };
        self.expect_punct(";")?;
        let mut update = Vec::new();
        if !self.at_punct(")") {
            loop {
                update.push(self.parse_expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        let body = Box::new(self.parse_stmt()?);
        Ok(self.mk_stmt(start, StmtKind::For { init, cond, update, body }))
    }

    fn parse_try(&mut self, start: Pos) -> PResult<Stmt> {
        self.expect_word("try")?;
        if self.at_punct("(") {
            return Err(self.unsupported("try-with-resources statements"));
        }
        let body = self.parse_block()?;
        let mut catches = Vec::new();
        while self.at_word("catch") {
            let cstart = self.start();
            self.bump();
            self.expect_punct("(")?;
            let modifiers = self.parse_modifiers()?;
            let mut types = vec![self.parse_type()?];
            while self.eat_punct("|") {
                types.push(self.parse_type()?);
            }
            let name_tok = self.expect_ident()?;
            self.expect_punct(")")?;
            let body = self.parse_block()?;
            let id = self.id();
            catches.push(CatchClause {
                id,
                modifiers,
                types,
                name: name_tok.text,
                name_span: name_tok.span,
                body,
                span: self.span_from(cstart),
            });
        }
        let finally = if self.eat_word("finally") { Some(self.parse_block()?) } else { None };
        if catches.is_empty() && finally.is_none() {
            return Err(self.error_here("`try` without `catch` or `finally`"));
        }
        Ok(self.mk_stmt(start, StmtKind::Try { body, catches, finally }))
    }

    // ---- expressions ----

    fn mk_expr(&mut self, start: Pos, kind: ExprKind) -> Expr {
        let id = self.id();
        Expr { id, kind, span: self.span_from(start) }
    }

    fn parse_paren_expr(&mut self) -> PResult<Expr> {
        self.expect_punct("(")?;
        let e = self.parse_expr()?;
        self.expect_punct(")")?;
        Ok(e)
    }

    pub(super) fn parse_expr(&mut self) -> PResult<Expr> {
        self.reject_lambda()?;
        let start = self.start();
        let lhs = self.parse_conditional()?;
        if let Some((op, n)) = self.peek_assign_op() {
            match &lhs.unparen().kind {
                ExprKind::Name(_) | ExprKind::FieldAccess { .. } | ExprKind::ArrayAccess { .. } => {}
                _ => return Err(self.error_here("invalid assignment target")),
            }
            for _ in 0..n {
                self.bump();
            }
            let value = self.parse_expr()?;
            return Ok(self.mk_expr(start, ExprKind::Assign { op, target: Box::new(lhs), value: Box::new(value) }));
        }
        Ok(lhs)
    }

    fn reject_lambda(&self) -> PResult<()> {
        if self.at_ident() && self.peek_at(1).is_punct("->") {
            return Err(self.unsupported("lambda expressions"));
        }
        if self.at_punct("(") {
            let mut depth = 0usize;
            let mut i = self.pos;
            while i < self.tokens.len() {
                let t = &self.tokens[i];
                if t.is_punct("(") {
                    depth += 1;
                } else if t.is_punct(")") {
                    depth -= 1;
                    if depth == 0 {
                        if self.tokens.get(i + 1).is_some_and(|n| n.is_punct("->")) {
                            return Err(self.unsupported("lambda expressions"));
                        }
                        break;
                    }
                } else if t.kind == TokenKind::Eof || t.is_punct(";") || t.is_punct("{") {
                    break;
                }
                i += 1;
            }
        }
        Ok(())
    }

    fn peek_assign_op(&self) -> Option<(AssignOp, usize)> {
        let t = self.peek();
        if t.kind != TokenKind::Punct {
            return None;
        }
        let simple = match t.text.as_str() {
            "=" => Some(None),
            "+=" => Some(Some(BinaryOp::Add)),
            "-=" => Some(Some(BinaryOp::Sub)),
            "*=" => Some(Some(BinaryOp::Mul)),
            "/=" => Some(Some(BinaryOp::Div)),
            "%=" => Some(Some(BinaryOp::Rem)),
            "&=" => Some(Some(BinaryOp::BitAnd)),
            "|=" => Some(Some(BinaryOp::BitOr)),
            "^=" => Some(Some(BinaryOp::BitXor)),
            "<<=" => Some(Some(BinaryOp::Shl)),
            _ => None,
        };
        if let Some(op) = simple {
            return Some((op, 1));
        }
        if t.text == ">" && self.adjacent(1) {
            if self.peek_at(1).is_punct(">=") {
                return Some((Some(BinaryOp::Shr), 2));
            }
            if self.peek_at(1).is_punct(">") && self.adjacent(2) && self.peek_at(2).is_punct(">=") {
                return Some((Some(BinaryOp::UShr), 3));
            }
        }
        None
    }

    fn parse_conditional(&mut self) -> PResult<Expr> {
        let start = self.start();
        let cond = self.parse_binary(1)?;
        if self.eat_punct("?") {
            let then_expr = self.parse_expr()?;
            self.expect_punct(":")?;
            self.reject_lambda()?;
            let else_expr = self.parse_conditional()?;
            return Ok(self.mk_expr(
                start,
                ExprKind::Conditional { cond: Box::new(cond), then_expr: Box::new(then_expr), else_expr: Box::new(else_expr) },
            ));
        }
        Ok(cond)
    }

    /// Binary operator at the cursor: operator, precedence, token count.
    fn peek_binop(&self) -> Option<(BinaryOp, u8, usize)> {
        let t = self.peek();
        if t.kind != TokenKind::Punct {
            return None;
        }
        let op = match t.text.as_str() {
            "||" => (BinaryOp::Or, 1),
            "&&" => (BinaryOp::And, 2),
            "|" => (BinaryOp::BitOr, 3),
            "^" => (BinaryOp::BitXor, 4),
            "&" => (BinaryOp::BitAnd, 5),
            "==" => (BinaryOp::Eq, 6),
            "!=" => (BinaryOp::Ne, 6),
            "<" => (BinaryOp::Lt, 7),
            "<=" => (BinaryOp::Le, 7),
            ">=" => (BinaryOp::Ge, 7),
            "<<" => (BinaryOp::Shl, 8),
            "+" => (BinaryOp::Add, 9),
            "-" => (BinaryOp::Sub, 9),
            "*" => (BinaryOp::Mul, 10),
            "/" => (BinaryOp::Div, 10),
            "%" => (BinaryOp::Rem, 10),
            ">" => {
                if self.adjacent(1) && self.peek_at(1).is_punct(">") {
                    if self.adjacent(2) && self.peek_at(2).is_punct(">") {
                        return Some((BinaryOp::UShr, 8, 3));
                    }
                    if self.adjacent(2) && self.peek_at(2).is_punct(">=") {
                        return None;
                    }
                    return Some((BinaryOp::Shr, 8, 2));
                }
                if self.adjacent(1) && self.peek_at(1).is_punct(">=") {
                    return None;
                }
                (BinaryOp::Gt, 7)
            }
            _ => return None,
        };
        Some((op.0, op.1, 1))
    }

    fn parse_binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let start = self.start();
        let mut lhs = self.parse_unary()?;
        loop {
            if self.at_word("instanceof") && min_prec <= 7 {
                self.bump();
                self.eat_word("final");
                let ty = self.parse_type()?;
                if self.at_ident() {
                    return Err(self.unsupported("instanceof patterns"));
                }
                lhs = self.mk_expr(start, ExprKind::InstanceOf { expr: Box::new(lhs), ty });
                continue;
            }
            let Some((op, prec, n)) = self.peek_binop() else { break };
            if prec < min_prec {
                break;
            }
            for _ in 0..n {
                self.bump();
            }
            let rhs = self.parse_binary(prec + 1)?;
            lhs = self.mk_expr(start, ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) });
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        let start = self.start();
        let prefix = match self.peek().text.as_str() {
            "++" => Some(UnaryOp::PreInc),
            "--" => Some(UnaryOp::PreDec),
            "+" => Some(UnaryOp::Plus),
            "-" => Some(UnaryOp::Neg),
            "!" => Some(UnaryOp::Not),
            "~" => Some(UnaryOp::BitNot),
            _ => None,
        };
        if let (Some(op), TokenKind::Punct) = (prefix, self.peek().kind) {
            self.bump();
            let operand = self.parse_unary()?;
            return Ok(self.mk_expr(start, ExprKind::Unary { op, operand: Box::new(operand) }));
        }
        if self.at_punct("(") {
            if let Some(ty) = self.try_cast_prefix() {
                let expr = self.parse_unary()?;
                return Ok(self.mk_expr(start, ExprKind::Cast { ty, expr: Box::new(expr) }));
            }
        }
        let primary = self.parse_primary()?;
        self.parse_postfix(start, primary)
    }

    /// If the cursor is at `(Type)` followed by a cast operand, consumes the
    /// parenthesized type and returns it.
    fn try_cast_prefix(&mut self) -> Option<TypeRef> {
        let save = self.pos;
        self.bump();
        let ty = match self.speculate(|p| p.parse_type()) {
            Some(ty) if self.at_punct(")") => ty,
            _ => {
                self.pos = save;
                return None;
            }
        };
        self.bump();
        let next = self.peek();
        let primitive = PRIMITIVES.contains(&ty.text.as_str());
        let operand_start = match next.kind {
            TokenKind::Number | TokenKind::Char | TokenKind::Str => true,
            TokenKind::Ident => !is_reserved(&next.text) || matches!(next.text.as_str(), "this" | "super" | "new" | "true" | "false" | "null"),
            TokenKind::Punct => {
                matches!(next.text.as_str(), "(" | "!" | "~")
                    || (primitive && matches!(next.text.as_str(), "+" | "-" | "++" | "--"))
            }
            TokenKind::Eof => false,
        };
        if operand_start {
            Some(ty)
        } else {
            self.pos = save;
            None
        }
    }

    fn parse_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if !self.at_punct(")") {
            loop {
                args.push(self.parse_expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        Ok(args)
    }

    fn parse_primary(&mut self) -> PResult<Expr> {
        let start = self.start();
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Number => {
                self.bump();
                let lower = t.text.to_ascii_lowercase();
                let is_hex = lower.starts_with("0x");
                let float = if is_hex {
                    false
                } else {
                    lower.contains('.') || lower.contains('e') || lower.ends_with('f') || lower.ends_with('d')
                };
                let kind = if float { LitKind::Float } else { LitKind::Int };
                return Ok(self.mk_expr(start, ExprKind::Literal { kind, text: t.text }));
            }
            TokenKind::Str => {
                self.bump();
                return Ok(self.mk_expr(start, ExprKind::Literal { kind: LitKind::Str, text: t.text }));
            }
            TokenKind::Char => {
                self.bump();
                return Ok(self.mk_expr(start, ExprKind::Literal { kind: LitKind::Char, text: t.text }));
            }
            TokenKind::Punct if t.text == "(" => {
                self.bump();
                let inner = self.parse_expr()?;
                self.expect_punct(")")?;
                return Ok(self.mk_expr(start, ExprKind::Paren(Box::new(inner))));
            }
            TokenKind::Punct | TokenKind::Eof => {
                return Err(self.error_here(format!("expected expression, found {}", self.found())));
            }
            TokenKind::Ident => {}
        }
        match t.text.as_str() {
            "true" | "false" => {
                self.bump();
                Ok(self.mk_expr(start, ExprKind::Literal { kind: LitKind::Bool, text: t.text }))
            }
            "null" => {
                self.bump();
                Ok(self.mk_expr(start, ExprKind::Literal { kind: LitKind::Null, text: t.text }))
            }
            "this" | "super" => {
                self.bump();
                if self.at_punct("(") {
                    let args = self.parse_args()?;
                    return Ok(self.mk_expr(start, ExprKind::MethodCall { target: None, name: t.text, name_span: t.span, args }));
                }
                let kind = if t.text == "this" { ExprKind::This } else { ExprKind::Super };
                Ok(self.mk_expr(start, kind))
            }
            "new" => self.parse_new(start),
            "switch" => Err(self.unsupported("switch expressions")),
            w if PRIMITIVES.contains(&w) => {
                let ty = self.parse_type()?;
                self.expect_punct(".")?;
                self.expect_word("class")?;
                Ok(self.mk_expr(start, ExprKind::ClassLit(ty)))
            }
            w if is_reserved(w) => Err(self.error_here(format!("expected expression, found `{w}`"))),
            _ => {
                self.bump();
                if self.at_punct("(") {
                    let args = self.parse_args()?;
                    return Ok(self.mk_expr(start, ExprKind::MethodCall { target: None, name: t.text, name_span: t.span, args }));
                }
                Ok(self.mk_expr(start, ExprKind::Name(t.text)))
            }
        }
    }

    fn parse_new(&mut self, start: Pos) -> PResult<Expr> {
        self.expect_word("new")?;
        if self.at_punct("<") {
            return Err(self.unsupported("explicit constructor type arguments"));
        }
        let tstart = self.start();
        let first = self.pos;
        let t = self.peek().clone();
        if t.kind != TokenKind::Ident || (is_reserved(&t.text) && !PRIMITIVES.contains(&t.text.as_str())) {
            return Err(self.error_here(format!("expected type after `new`, found {}", self.found())));
        }
        self.bump();
        if !PRIMITIVES.contains(&t.text.as_str()) {
            if self.at_punct("<") {
                self.parse_type_args()?;
            }
            while self.at_punct(".") && self.at_ident_at(1) {
                self.bump();
                self.bump();
                if self.at_punct("<") {
                    self.parse_type_args()?;
                }
            }
        }
        let ty = TypeRef { text: join_tokens(&self.tokens[first..self.pos]), span: self.span_from(tstart) };
        if self.at_punct("(") {
            let args = self.parse_args()?;
            if self.at_punct("{") {
                return Err(self.unsupported("anonymous classes"));
            }
            return Ok(self.mk_expr(start, ExprKind::New { ty, args }));
        }
        if !self.at_punct("[") {
            return Err(self.error_here(format!("expected `(` or `[` after `new {}`", ty.text)));
        }
        let mut dims = Vec::new();
        let mut extra_dims = 0;
        while self.at_punct("[") {
            if self.peek_at(1).is_punct("]") {
                self.bump();
                self.bump();
                extra_dims += 1;
            } else {
                if extra_dims > 0 {
                    return Err(self.error_here("array dimension after empty dimension"));
                }
                self.bump();
                dims.push(self.parse_expr()?);
                self.expect_punct("]")?;
            }
        }
        let init = if dims.is_empty() {
            if !self.at_punct("{") {
                return Err(self.error_here("array creation needs a dimension or an initializer"));
            }
            Some(Box::new(self.parse_array_init()?))
        } else {
            None
        };
        Ok(self.mk_expr(start, ExprKind::NewArray { ty, dims, extra_dims, init }))
    }

    fn at_ident_at(&self, n: usize) -> bool {
        let t = self.peek_at(n);
        t.kind == TokenKind::Ident && !is_reserved(&t.text)
    }

    fn parse_postfix(&mut self, start: Pos, mut expr: Expr) -> PResult<Expr> {
        loop {
            if self.at_punct(".") {
                let next = self.peek_at(1).clone();
                if next.is_word("class") {
                    let ty = self.expr_as_type(&expr)?;
                    self.bump();
                    self.bump();
                    expr = self.mk_expr(start, ExprKind::ClassLit(ty));
                    continue;
                }
                if next.is_punct("<") {
                    return Err(self.unsupported("explicit method type arguments"));
                }
                if next.is_word("this") || next.is_word("new") {
                    return Err(self.unsupported(&format!("qualified `{}` expressions", next.text)));
                }
                self.bump();
                let name_tok = self.expect_ident()?;
                if self.at_punct("(") {
                    let args = self.parse_args()?;
                    expr = self.mk_expr(
                        start,
                        ExprKind::MethodCall { target: Some(Box::new(expr)), name: name_tok.text, name_span: name_tok.span, args },
                    );
                } else {
                    expr = self.mk_expr(
                        start,
                        ExprKind::FieldAccess { target: Box::new(expr), name: name_tok.text, name_span: name_tok.span },
                    );
                }
            } else if self.at_punct("[") {
                if self.peek_at(1).is_punct("]") {
                    // `Type[].class`
                    let mut ty = self.expr_as_type(&expr)?;
                    let dims = self.parse_dims();
                    for _ in 0..dims {
                        ty.text.push_str("[]");
                    }
                    ty.span = self.span_from(ty.span.start);
                    self.expect_punct(".")?;
                    self.expect_word("class")?;
                    expr = self.mk_expr(start, ExprKind::ClassLit(ty));
                    continue;
                }
                self.bump();
                let index = self.parse_expr()?;
                self.expect_punct("]")?;
                expr = self.mk_expr(start, ExprKind::ArrayAccess { array: Box::new(expr), index: Box::new(index) });
            } else if self.at_punct("++") || self.at_punct("--") {
                let op = if self.at_punct("++") { UnaryOp::PostInc } else { UnaryOp::PostDec };
                self.bump();
                expr = self.mk_expr(start, ExprKind::Unary { op, operand: Box::new(expr) });
            } else if self.at_punct("::") {
                return Err(self.unsupported("method references"));
            } else {
                return Ok(expr);
            }
        }
    }

    fn expr_as_type(&self, expr: &Expr) -> PResult<TypeRef> {
        fn path(e: &Expr, out: &mut Vec<String>) -> bool {
            match &e.kind {
                ExprKind::Name(n) => {
                    out.push(n.clone());
                    true
                }
                ExprKind::FieldAccess { target, name, .. } => {
                    let ok = path(target, out);
                    out.push(name.clone());
                    ok
                }
                _ => false,
            }
        }
        let mut parts = Vec::new();
        if path(expr, &mut parts) {
            Ok(TypeRef { text: parts.join("."), span: expr.span })
        } else {
            Err(ParseError::new(expr.span.start, "expected a type name"))
        }
    }
}
