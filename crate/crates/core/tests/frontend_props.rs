//! Property tests for the lexer, parser and printer.

use mwc_core::frontend::token::KEYWORDS;
use mwc_core::frontend::{parse_source, pretty_print};
use proptest::prelude::*;

fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        "[a-z][a-z0-9_]{0,6}".prop_filter("keyword", |s| !KEYWORDS.contains(&s.as_str())),
        (0u64..1_000_000).prop_map(|n| n.to_string()),
        Just("true".to_string()),
        Just("false".to_string()),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">", ">=", "&&", "||"]), inner.clone())
                .prop_map(|(a, op, b)| format!("{a} {op} {b}")),
            inner.clone().prop_map(|a| format!("({a})")),
            inner.clone().prop_map(|a| format!("!{a}")),
            prop::collection::vec(inner.clone(), 0..3).prop_map(|args| format!("M::call({})", args.join(", "))),
            inner.clone().prop_map(|a| format!("({a}).field")),
            inner.prop_map(|a| format!("&mut ({a})")),
        ]
    })
}

fn wrap(e: &str) -> String {
    format!("module M {{\n    fun f() {{\n        let x = {e};\n        assert({e}, 1);\n    }}\n}}\n")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn expressions_round_trip(e in expr()) {
        let src = wrap(&e);
        let first = parse_source("p.move", &src).map_err(|errs| TestCaseError::fail(format!("{src}: {errs:?}")))?;
        let printed = pretty_print(&first.ast);
        let second = parse_source("p.move", &printed).map_err(|errs| TestCaseError::fail(format!("{printed}: {errs:?}")))?;
        prop_assert!(first.ast.structurally_eq(&second.ast), "{src}\n---\n{printed}");
        prop_assert_eq!(pretty_print(&second.ast), printed);
    }

    #[test]
    fn arbitrary_input_never_panics(src in "\\PC{0,200}") {
        if let Err(errs) = parse_source("p.move", &src) {
            prop_assert!(!errs.is_empty());
            let lines = src.lines().count().max(1) as u32 + 1;
            for e in errs {
                prop_assert!(e.span().line >= 1 && e.span().line <= lines, "{e}");
            }
        }
    }

    #[test]
    fn token_soup_never_panics(toks in prop::collection::vec(prop::sample::select(vec![
        "module", "fun", "{", "}", "(", ")", "<", ">", "let", "x", "=", ";", "if", "while", "::", ",", "&mut", "1", "assert", "."
    ]), 0..40)) {
        let _ = parse_source("p.move", &toks.join(" "));
    }
}
