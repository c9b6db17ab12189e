use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use mwc_core::frontend::{parse, parse_source, pretty_print, tokenize, Span, TokenKind};

fn box_files() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/boxes");
    let mut files: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
}

fn corpus_files() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut out = Vec::new();
    let mut stack = vec![dir];
    while let Some(d) = stack.pop() {
        let Ok(entries) = fs::read_dir(&d) else { continue };
        for e in entries {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "move") {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

#[test]
fn all_code_boxes_are_present() {
    assert_eq!(box_files().len(), 38);
}

#[test]
fn code_boxes_lex_and_parse_without_errors() {
    for f in box_files() {
        let src = fs::read_to_string(&f).unwrap();
        let toks = tokenize(&src, &f.to_string_lossy()).unwrap_or_else(|e| panic!("{}: {e:?}", f.display()));
        assert_eq!(toks.last().unwrap().kind, TokenKind::Eof);
        parse(&toks).unwrap_or_else(|e| panic!("{}: {e:?}", f.display()));
    }
}

#[test]
fn token_texts_and_gaps_reproduce_source() {
    for f in box_files().into_iter().chain(corpus_files()) {
        let src = fs::read_to_string(&f).unwrap();
        let toks = tokenize(&src, "x").unwrap();
        let mut rebuilt = String::new();
        let mut at = 0;
        for t in &toks {
            rebuilt.push_str(&src[at..t.span.offset]);
            assert!(src[at..t.span.offset].chars().all(char::is_whitespace));
            rebuilt.push_str(&t.text);
            at = t.span.offset + t.text.len();
        }
        rebuilt.push_str(&src[at..]);
        assert_eq!(rebuilt, src, "{}", f.display());
    }
}

fn roundtrip_ok(path: &Path) {
    let src = fs::read_to_string(path).unwrap();
    let first = parse_source("a", &src).unwrap_or_else(|e| panic!("{}: {e:?}", path.display()));
    let printed = pretty_print(&first.ast);
    let second = parse_source("b", &printed).unwrap_or_else(|e| panic!("{}:\n{printed}\n{e:?}", path.display()));
    assert!(first.ast.structurally_eq(&second.ast), "{}:\n{printed}", path.display());
}

#[test]
fn code_boxes_roundtrip_through_printer() {
    for f in box_files() {
        roundtrip_ok(&f);
    }
}

#[test]
fn corpus_parses_and_roundtrips() {
    let files = corpus_files();
    for f in &files {
        roundtrip_ok(f);
    }
}

fn byte_len(src: &str, span: &Span) -> usize {
    src[span.offset..].chars().take(span.length as usize).map(char::len_utf8).sum()
}

#[test]
fn every_node_span_starts_and_ends_on_token_boundaries() {
    for f in box_files().into_iter().chain(corpus_files()) {
        let src = fs::read_to_string(&f).unwrap();
        let toks = tokenize(&src, "x").unwrap();
        let starts: HashSet<usize> = toks.iter().map(|t| t.span.offset).collect();
        let ends: HashSet<usize> = toks.iter().map(|t| t.span.offset + t.text.len()).collect();
        let parsed = parse_source("x", &src).unwrap();
        parsed.ast.for_each_span(&mut |s| {
            assert!(s.line >= 1 && s.column >= 1);
            assert!(starts.contains(&s.offset), "{}: span {s:?} not at token start", f.display());
            let tok = toks.iter().find(|t| t.span.offset == s.offset).unwrap();
            assert!(src[s.offset..].starts_with(&tok.text));
            let end = s.offset + byte_len(&src, s);
            assert!(ends.contains(&end), "{}: span {s:?} not at token end", f.display());
        });
    }
}

#[test]
fn mwc_101_box_shape() {
    let src = fs::read_to_string(box_files().into_iter().find(|p| p.ends_with("mwc_101.move")).unwrap()).unwrap();
    let ast = parse_source("b", &src).unwrap().ast;
    let m = &ast.modules[0];
    assert_eq!(m.name, "Counter");
    assert_eq!(m.structs[0].name, "State");
    assert_eq!(m.functions[0].name, "increment");
}
