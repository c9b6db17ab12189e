//! Inputs shared by the analysis benchmarks.

use std::fmt::Write as _;
use std::path::PathBuf;

use mwc_core::{parse_source, resolve, Config, ParsedFile, SemanticModel};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Every `.move` file under the shipped corpus as `(path, source)`, sorted.
pub fn corpus_sources() -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut stack = vec![corpus_dir()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).expect("corpus directory is readable") {
            let path = entry.expect("directory entry").path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "move") {
                let src = std::fs::read_to_string(&path).expect("fixture is readable");
                out.push((path.display().to_string(), src));
            }
        }
    }
    out.sort();
    out
}

/// A module with `functions` functions mixing storage access, external
/// calls, guarded branches and loops.
pub fn synthetic_module(functions: usize) -> String {
    let mut s = String::from("module Bench {\n    use 0x1::Coin;\n    struct Vault has key { balance: u64 }\n");
    for i in 0..functions {
        let _ = write!(
            s,
            "    public fun step_{i}(account: &signer, amount: u64) {{\n\
             \x20       assert(amount > {i}, 7);\n\
             \x20       let v = borrow_global_mut<Vault>(@0x1);\n\
             \x20       let n: u64 = 0;\n\
             \x20       while (n < amount) {{\n\
             \x20           if (n > 10) {{ v.balance = v.balance + 1; }} else {{ Coin::transfer(account, n); }}\n\
             \x20           n = n + 1;\n\
             \x20       }}\n\
             \x20       ExternalModule::call();\n\
             \x20       v.balance = v.balance - amount;\n\
             \x20   }}\n"
        );
    }
    s.push_str("}\n");
    s
}

pub fn parse_all(sources: &[(String, String)]) -> Vec<ParsedFile> {
    sources.iter().map(|(p, s)| parse_source(p, s).expect("benchmark input parses")).collect()
}

pub fn model_for(sources: &[(String, String)], config: &Config) -> SemanticModel {
    resolve(parse_all(sources), &config.call_patterns).expect("benchmark input resolves")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_parse() {
        let cfg = Config::default();
        assert!(corpus_sources().len() >= 60);
        let model = model_for(&[("s.move".into(), synthetic_module(5))], &cfg);
        assert_eq!(model.functions.len(), 5);
        model_for(&corpus_sources(), &cfg);
    }
}
