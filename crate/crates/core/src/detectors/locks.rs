//! Lock acquisition order across functions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::frontend::Span;
use crate::semantics::{Effect, FnRef, SemanticModel};

use super::guards::order_of;

/// Two functions that together order a pair of locks both ways.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LockConflict {
    /// Orders `locks.0` before `locks.1`.
    pub first: FnRef,
    /// Orders `locks.1` before `locks.0`, possibly through other locks.
    pub second: FnRef,
    /// Sorted lock names.
    pub locks: (String, String),
    /// The acquisition in `second` that starts the reverse order.
    pub site: Span,
}

fn locks_of(effects: &crate::semantics::EffectSet) -> Vec<&str> {
    effects
        .iter()
        .filter_map(|e| match e {
            Effect::LockAcquire(n) => Some(n.as_str()),
            _ => None,
        })
        .collect()
}

type Labels = BTreeMap<FnRef, Span>;

/// Ordered edges `x -> y` between lock names, labelled with each function
/// that acquires `y` after `x` and the acquisition site.
fn lock_graph(model: &SemanticModel) -> BTreeMap<String, BTreeMap<String, Labels>> {
    let mut g: BTreeMap<String, BTreeMap<String, Labels>> = BTreeMap::new();
    for f in &model.functions {
        let cfg = &f.cfg;
        let is_lock = |s: &crate::semantics::CfgStmt| !locks_of(&s.effects).is_empty();
        for (a, b) in order_of(cfg, is_lock, is_lock) {
            let (sa, sb) = (cfg.stmt(a), cfg.stmt(b));
            for x in locks_of(&sa.effects) {
                for y in locks_of(&sb.effects) {
                    if x == y {
                        continue;
                    }
                    g.entry(x.to_string())
                        .or_default()
                        .entry(y.to_string())
                        .or_default()
                        .entry(f.id)
                        .or_insert_with(|| sb.span.clone());
                }
            }
        }
    }
    g
}

/// Labels on the first edge of a shortest path `from -> to`.
fn first_edge<'g>(g: &'g BTreeMap<String, BTreeMap<String, Labels>>, from: &str, to: &str) -> Option<&'g Labels> {
    let mut first: BTreeMap<&str, &str> = BTreeMap::new();
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::new();
    for next in g.get(from).into_iter().flat_map(|m| m.keys()) {
        if seen.insert(next) {
            first.insert(next, next);
            queue.push_back(next.as_str());
        }
    }
    while let Some(at) = queue.pop_front() {
        if at == to {
            return g.get(from).and_then(|m| m.get(first[at]));
        }
        for next in g.get(at).into_iter().flat_map(|m| m.keys()) {
            if seen.insert(next) {
                first.insert(next, first[at]);
                queue.push_back(next.as_str());
            }
        }
    }
    None
}

/// For every pair of locks ordered both ways by the union of all functions'
/// acquisition orders, one pair of distinct functions responsible.
pub fn lock_order_conflicts(model: &SemanticModel) -> Vec<LockConflict> {
    let g = lock_graph(model);
    let names: BTreeSet<&str> =
        g.iter().flat_map(|(x, m)| std::iter::once(x.as_str()).chain(m.keys().map(String::as_str))).collect();
    let names: Vec<&str> = names.into_iter().collect();
    let mut out = Vec::new();
    for (i, x) in names.iter().enumerate() {
        for y in &names[i + 1..] {
            let (Some(fwd), Some(rev)) = (first_edge(&g, x, y), first_edge(&g, y, x)) else { continue };
            let pick = fwd.keys().flat_map(|f| rev.iter().map(move |(r, site)| (*f, *r, site))).find(|(f, r, _)| f != r);
            if let Some((first, second, site)) = pick {
                out.push(LockConflict {
                    first,
                    second,
                    locks: (x.to_string(), y.to_string()),
                    site: site.clone(),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CallPatterns;
    use crate::frontend::parse_source;
    use crate::semantics::resolve;

    fn model(src: &str) -> SemanticModel {
        resolve(vec![parse_source("t.move", src).unwrap()], &CallPatterns::default()).unwrap()
    }

    #[test]
    fn opposite_orders_conflict_once() {
        let m = model("fun f() { lock_a(); lock_b(); }\nfun g() { lock_b(); lock_a(); }");
        let c = lock_order_conflicts(&m);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].locks, ("lock_a".into(), "lock_b".into()));
        assert_eq!((m.info(c[0].first).name.as_str(), m.info(c[0].second).name.as_str()), ("f", "g"));
        assert_eq!(c[0].site.line, 2);
    }

    #[test]
    fn consistent_order_has_no_conflict() {
        let m = model("fun f() { lock_a(); lock_b(); }\nfun g() { lock_a(); lock_b(); }");
        assert!(lock_order_conflicts(&m).is_empty());
    }

    #[test]
    fn three_lock_cycle_gives_three_conflicts() {
        let m = model("fun f() { lock_a(); lock_b(); }\nfun g() { lock_b(); lock_c(); }\nfun h() { lock_c(); lock_a(); }");
        assert_eq!(lock_order_conflicts(&m).len(), 3);
    }

    #[test]
    fn single_function_reacquire_is_not_a_conflict() {
        let m = model("fun f() { lock_a(); lock_b(); lock_a(); }");
        assert!(lock_order_conflicts(&m).is_empty());
    }
}
