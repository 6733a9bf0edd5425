use std::path::PathBuf;

use acs_core::lang::*;
use proptest::prelude::*;

fn fixture_sources() -> Vec<(String, String)> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let mut out = Vec::new();
    for dir in [root.clone(), root.join("corpus")] {
        let mut files: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        for f in files {
            let name = f.file_name().unwrap().to_string_lossy().into_owned();
            if name.ends_with(".mini") && !name.ends_with(".test.mini") && name != "broken.mini" {
                let tests = f.with_file_name(name.replace(".mini", ".test.mini"));
                let tests = std::fs::read_to_string(tests).unwrap_or_default();
                out.push((std::fs::read_to_string(&f).unwrap(), tests));
            }
        }
    }
    out
}

#[test]
fn fixtures_round_trip() {
    let sources = fixture_sources();
    assert!(sources.len() >= 10);
    for (src, tests) in sources {
        let p = parse_program_with_tests(&src, &tests).unwrap();
        let printed = pretty_print(&p);
        let q = parse_program(&printed).unwrap();
        assert_eq!(p, q, "{printed}");
        assert_eq!(pretty_print(&q), printed);
    }
}

#[test]
fn node_ids_are_stable() {
    for (src, tests) in fixture_sources() {
        let a = parse_program_with_tests(&src, &tests).unwrap();
        let b = parse_program_with_tests(&src, &tests).unwrap();
        assert_eq!(a, b);
        let ids = |p: &Program| p.statements().iter().map(|s| s.id).collect::<Vec<_>>();
        assert_eq!(ids(&a), ids(&b));
    }
}

fn node(kind: ExprKind) -> Expr {
    Expr::new(NodeId(0), kind)
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..1000).prop_map(|v| node(ExprKind::Int(v))),
        (0u32..400).prop_map(|v| node(ExprKind::Float(v as f64 / 8.0))),
        any::<bool>().prop_map(|b| node(ExprKind::Bool(b))),
        prop::sample::select(vec!["x", "y", "rate", "len"]).prop_map(|v| node(ExprKind::Var(v.into()))),
        Just(node(ExprKind::Named(NamedConst::MinInt))),
        "[a-z \"]{0,4}".prop_map(|s| node(ExprKind::Str(s))),
    ];
    let ops = vec![
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Div,
        BinaryOp::Rem,
        BinaryOp::Eq,
        BinaryOp::Ne,
        BinaryOp::Lt,
        BinaryOp::Le,
        BinaryOp::Gt,
        BinaryOp::Ge,
        BinaryOp::And,
        BinaryOp::Or,
    ];
    leaf.prop_recursive(4, 24, 3, move |inner| {
        prop_oneof![
            (prop::sample::select(ops.clone()), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| node(ExprKind::Binary(op, Box::new(l), Box::new(r)))),
            inner.clone().prop_map(|e| node(ExprKind::Unary(UnaryOp::Not, Box::new(e)))),
            inner.clone().prop_map(|e| node(ExprKind::Unary(UnaryOp::Neg, Box::new(e)))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| node(ExprKind::Call("max".into(), vec![a, b]))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| node(ExprKind::Index(Box::new(a), Box::new(b)))),
            inner.clone().prop_map(|e| node(ExprKind::Is(Box::new(e), "Circle".into()))),
            prop::collection::vec(inner, 1..3).prop_map(|v| node(ExprKind::Array(v))),
        ]
    })
}

fn strip(e: &Expr) -> Expr {
    let mut e = e.clone();
    e.walk_mut(&mut |x| {
        while let ExprKind::Paren(inner) = &x.kind {
            *x = (**inner).clone();
        }
        x.id = NodeId(0);
    });
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn expressions_round_trip(e in arb_expr()) {
        let text = print_expr(&e);
        let back = parse_expr(&text).unwrap_or_else(|err| panic!("{text}: {err}"));
        prop_assert_eq!(print_expr(&back), text.clone());
        prop_assert_eq!(strip(&back), strip(&e), "{}", text);
    }

    #[test]
    fn guard_insertion_is_local(stmt_index in 0usize..16, k in -3i64..3) {
        let sources = fixture_sources();
        let (src, tests) = sources.iter().find(|(s, _)| s.contains("fn lcm")).unwrap();
        let p = parse_program_with_tests(src, tests).unwrap();
        let stmts = p.statements();
        let anchor = stmts[stmt_index % stmts.len()];
        let f = p.function_containing(anchor.id).unwrap();
        let var = f.params[0].name.clone();
        let cond = parse_expr(&format!("{var} == {k}")).unwrap();
        let patch = Patch {
            kind: PatchKind::OracleThrowing,
            anchor: anchor.id,
            condition: cond,
            payload: PatchPayload::Throw { exception: "E".into() },
            textual_diff: String::new(),
        };
        let q = apply_patch(&p, &patch).unwrap();
        let old: Vec<_> = p.statements().into_iter().cloned().collect();
        let new: Vec<_> = q.statements().into_iter().filter(|s| s.id.0 < p_next(&p)).cloned().collect();
        // Exactly one new top-level entry appears in one statement list.
        let added: Vec<_> = q.statements().into_iter().filter(|s| s.id.0 >= p_next(&p)).collect();
        let is_guard = matches!(added[0].kind, StmtKind::If { .. });
        prop_assert!(is_guard);
        prop_assert_eq!(added.len(), 2);
        prop_assert_eq!(old.iter().map(|s| s.id).collect::<Vec<_>>(), new.iter().map(|s| s.id).collect::<Vec<_>>());
        for (a, b) in old.iter().zip(&new) {
            if a.blocks().is_empty() {
                prop_assert_eq!(a, b);
            }
        }
    }
}

/// First id handed out to synthesized nodes.
fn p_next(p: &Program) -> u32 {
    let mut max = 0;
    for s in p.statements() {
        max = max.max(s.id.0);
        for e in s.exprs() {
            e.walk(&mut |x| max = max.max(x.id.0));
        }
    }
    for t in &p.tests {
        max = max.max(t.id.0);
        t.body.walk(&mut |s| {
            max = max.max(s.id.0);
            for e in s.exprs() {
                e.walk(&mut |x| max = max.max(x.id.0));
            }
        });
    }
    max + 1
}

#[test]
fn condition_rewrite_is_local() {
    let p = parse_program("fn f(x: int) -> int { if (x > 0) { return 1; } let y: int = x; return y; }").unwrap();
    let site = &p.functions[0].body.stmts[0];
    let original = site.condition().unwrap();
    let patch = Patch {
        kind: PatchKind::Widening,
        anchor: site.id,
        condition: parse_expr("x == 0").unwrap(),
        payload: PatchPayload::Rewrite { original: original.id },
        textual_diff: String::new(),
    };
    let q = apply_patch(&p, &patch).unwrap();
    let (a, b) = (&p.functions[0].body.stmts, &q.functions[0].body.stmts);
    assert_eq!(a[1..], b[1..]);
    let (StmtKind::If { then_block: t1, .. }, StmtKind::If { then_block: t2, cond, .. }) = (&a[0].kind, &b[0].kind)
    else {
        panic!()
    };
    assert_eq!(t1, t2);
    assert_eq!(print_expr(cond), "(x > 0) || (x == 0)");
}
