mod common;

use common::*;
use proptest::prelude::*;
use threadlint::frontend::lexer::{tokenize, TokenKind};
use threadlint::frontend::pretty::print_ast;
use threadlint::frontend::*;

fn token_texts(src: &str) -> Vec<String> {
    tokenize(src).unwrap().into_iter().filter(|t| t.kind != TokenKind::Eof).map(|t| t.text).collect()
}

fn parse(src: &str) -> Ast {
    parse_compilation_unit(&SourceFile::new("Gen.java", src)).unwrap_or_else(|e| panic!("{e}\n{src}"))
}

fn check_expr_nesting(ast: &Ast, parent: Span, e: &Expr) {
    assert!(parent.contains(&e.span), "{:?} outside {:?}", e.span, parent);
    assert!(reconstruct_span(ast, e.span).is_ok());
    for c in e.children() {
        check_expr_nesting(ast, e.span, c);
    }
}

fn check_stmt_nesting(ast: &Ast, parent: Span, s: &Stmt) {
    assert!(parent.contains(&s.span), "{:?} outside {:?}", s.span, parent);
    for e in s.child_exprs() {
        check_expr_nesting(ast, s.span, e);
    }
    for c in s.child_stmts() {
        check_stmt_nesting(ast, s.span, c);
    }
}

fn all_ids(ast: &Ast) -> Vec<NodeId> {
    fn expr(e: &Expr, out: &mut Vec<NodeId>) {
        out.push(e.id);
        for c in e.children() {
            expr(c, out);
        }
    }
    fn stmt(s: &Stmt, out: &mut Vec<NodeId>) {
        out.push(s.id);
        for e in s.child_exprs() {
            expr(e, out);
        }
        for c in s.child_stmts() {
            stmt(c, out);
        }
    }
    let mut out = Vec::new();
    for c in ast.all_classes() {
        for m in c.methods.iter().chain(&c.constructors) {
            for s in m.body.iter().flat_map(|b| &b.stmts) {
                stmt(s, &mut out);
            }
        }
        for f in &c.fields {
            if let Some(i) = &f.initializer {
                expr(i, &mut out);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printing_preserves_tokens(seed in any::<u64>()) {
        let src = gen_class(&mut rng(seed), "Gen", 4);
        let ast = parse(&src);
        let printed = print_ast(&ast);
        prop_assert_eq!(token_texts(&printed), token_texts(&src));
        // printing is a fixpoint after one round
        let again = print_ast(&parse(&printed));
        prop_assert_eq!(again, printed);
    }

    #[test]
    fn spans_nest(seed in any::<u64>()) {
        let src = gen_class(&mut rng(seed), "Gen", 4);
        let ast = parse(&src);
        for c in ast.all_classes() {
            assert!(ast.span.contains(&c.span));
            for f in &c.fields {
                assert!(c.span.contains(&f.span));
                if let Some(i) = &f.initializer {
                    check_expr_nesting(&ast, f.declarator_span, i);
                }
            }
            for m in c.methods.iter().chain(&c.constructors) {
                assert!(c.span.contains(&m.span));
                if let Some(b) = &m.body {
                    assert!(m.span.contains(&b.span));
                    for s in &b.stmts {
                        check_stmt_nesting(&ast, b.span, s);
                    }
                }
            }
        }
    }

    #[test]
    fn node_ids_are_unique(seed in any::<u64>()) {
        let ast = parse(&gen_class(&mut rng(seed), "Gen", 4));
        let mut ids = all_ids(&ast);
        let n = ids.len();
        ids.sort();
        ids.dedup();
        prop_assert_eq!(ids.len(), n);
    }

    #[test]
    fn truncated_input_never_panics(seed in any::<u64>(), cut in 0usize..4000) {
        let src = gen_class(&mut rng(seed), "Gen", 2);
        let mut end = cut.min(src.len());
        while !src.is_char_boundary(end) {
            end -= 1;
        }
        let _ = parse_compilation_unit(&SourceFile::new("Cut.java", &src[..end]));
    }
}

#[test]
fn spans_are_one_based_and_count_characters() {
    let src = "@ThreadSafe class A {\n  String s = \"é\"; int x;\n}\n";
    let ast = parse(src);
    let x = &ast.classes[0].fields[1];
    assert_eq!((x.name_span.start.line, x.name_span.start.col), (2, 23));
    assert_eq!(reconstruct_span(&ast, x.name_span).unwrap(), "x");
}

#[test]
fn fixtures_round_trip() {
    for rel in ["counter_dr/CounterDR.java", "counter_ts/CounterTS.java", "listing/Test.java", "remediation/Remediation.java"] {
        let src = std::fs::read_to_string(fixture(rel)).unwrap();
        let printed = print_ast(&parse(&src));
        assert_eq!(token_texts(&printed), token_texts(&src), "{rel}");
    }
}

#[test]
fn unsupported_constructs_are_rejected() {
    for body in [
        "Runnable r = () -> { };",
        "switch (x) { case 1: break; }",
        "do { } while (true);",
        "Object o = new Object() { };",
        "outer: while (true) { }",
    ] {
        let src = format!("class A {{ int x; void f() {{ {body} }} }}");
        let err = parse_compilation_unit(&SourceFile::new("A.java", src.as_str())).unwrap_err();
        assert!(err.line >= 1 && err.col >= 1, "{body}: {err}");
    }
    assert!(parse_compilation_unit(&SourceFile::new("I.java", "interface I { }")).is_err());
    assert!(parse_compilation_unit(&SourceFile::new("E.java", "enum E { A }")).is_err());
}
