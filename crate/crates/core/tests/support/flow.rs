//! Brute-force path-enumeration oracles and CFG generators.

#![allow(dead_code)]

use std::collections::BTreeSet;

use mwc_core::detectors::guards::{check_dominating_guard, Guard, GuardKind};
use mwc_core::frontend::ast::{Expr, Stmt, StmtKind};
use mwc_core::frontend::parse_source;
use mwc_core::semantics::{reachable_set, Cfg, CfgStmt, CondKind, EdgeKind, Node, StmtId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------- oracles ----------

/// Every simple path from `entry`, as block sequences.
pub fn simple_paths(n: usize, edges: &[(usize, usize, EdgeKind)], entry: usize) -> Vec<Vec<(usize, Option<EdgeKind>)>> {
    fn go(
        at: usize,
        edges: &[(usize, usize, EdgeKind)],
        path: &mut Vec<(usize, Option<EdgeKind>)>,
        on: &mut Vec<bool>,
        out: &mut Vec<Vec<(usize, Option<EdgeKind>)>>,
    ) {
        out.push(path.clone());
        for &(f, t, k) in edges {
            if f == at && !on[t] {
                // record the edge kind on the source entry
                let last = path.len() - 1;
                let saved = path[last].1;
                path[last].1 = Some(k);
                path.push((t, None));
                on[t] = true;
                go(t, edges, path, on, out);
                on[t] = false;
                path.pop();
                path[last].1 = saved;
            }
        }
    }
    let mut out = Vec::new();
    let mut on = vec![false; n];
    on[entry] = true;
    go(entry, edges, &mut vec![(entry, None)], &mut on, &mut out);
    out
}

pub fn oracle_reachable(n: usize, edges: &[(usize, usize, EdgeKind)]) -> BTreeSet<usize> {
    simple_paths(n, edges, 0).iter().map(|p| p.last().unwrap().0).collect()
}

pub struct Scenario {
    pub n: usize,
    pub edges: Vec<(usize, usize, EdgeKind)>,
    /// Per block: statements, each either a guard assert (true), other assert (false), or plain (None).
    pub stmts: Vec<Vec<Option<bool>>>,
    /// Per block with two successors: whether the condition is the guarded one.
    pub cond_is_guard: Vec<bool>,
    pub use_site: (usize, usize),
}

pub fn oracle_guarded(s: &Scenario) -> bool {
    for path in simple_paths(s.n, &s.edges, 0) {
        let (last, _) = *path.last().unwrap();
        if last != s.use_site.0 {
            continue;
        }
        // the first arrival at the use block
        if path[..path.len() - 1].iter().any(|(b, _)| *b == last) {
            continue;
        }
        let mut guarded = false;
        for (i, &(b, kind)) in path.iter().enumerate() {
            let limit = if i == path.len() - 1 { s.use_site.1 } else { s.stmts[b].len() };
            if s.stmts[b][..limit].contains(&Some(true)) {
                guarded = true;
            }
            if i < path.len() - 1 && s.cond_is_guard[b] && matches!(kind, Some(EdgeKind::BranchTrue)) {
                guarded = true;
            }
        }
        if !guarded {
            return false;
        }
    }
    true
}

// ---------- scenario → Cfg ----------

pub struct Templates {
    guard_assert: Stmt,
    other_assert: Stmt,
    plain: Stmt,
    g: Expr,
    h: Expr,
}

pub fn templates() -> Templates {
    let src = "fun t() { assert(g, 1); assert(h, 1); a(); if (g) { } if (h) { } }";
    let ast = parse_source("t.move", src).unwrap().ast;
    let stmts = ast.modules[0].functions[0].body.clone().unwrap().stmts;
    let cond = |s: &Stmt| match &s.kind {
        StmtKind::If { cond, .. } => cond.clone(),
        _ => unreachable!(),
    };
    Templates {
        guard_assert: stmts[0].clone(),
        other_assert: stmts[1].clone(),
        plain: stmts[2].clone(),
        g: cond(&stmts[3]),
        h: cond(&stmts[4]),
    }
}

pub fn to_cfg(s: &Scenario, t: &Templates) -> Cfg {
    let mut cfg = Cfg::from_edges(s.n, s.edges.iter().copied());
    for (b, list) in s.stmts.iter().enumerate() {
        for (i, kind) in list.iter().enumerate() {
            let stmt = match kind {
                Some(true) => t.guard_assert.clone(),
                Some(false) => t.other_assert.clone(),
                None => t.plain.clone(),
            };
            let span = stmt.span.clone();
            cfg.blocks[b].stmts.push(CfgStmt {
                id: StmtId { block: b, index: i },
                node: Node::Stmt(stmt),
                span,
                effects: Default::default(),
            });
        }
        if s.edges.iter().any(|e| e.0 == b && e.2 == EdgeKind::BranchTrue) {
            let cond = if s.cond_is_guard[b] { t.g.clone() } else { t.h.clone() };
            let index = cfg.blocks[b].stmts.len();
            let span = cond.span.clone();
            cfg.blocks[b].stmts.push(CfgStmt {
                id: StmtId { block: b, index },
                node: Node::Cond { kind: CondKind::If, cond },
                span,
                effects: Default::default(),
            });
        }
    }
    cfg
}

pub fn mentions_g(g: &Guard<'_>) -> bool {
    g.kind != GuardKind::BranchFalse && g.cond.mentions("g")
}

/// Random graph shaped like lowered code: each block has 0, 1 or 2 successors,
/// two-way blocks end in a condition with true/false edges.
pub fn random_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let n = rng.random_range(1..=12);
    let mut edges = Vec::new();
    let mut cond_is_guard = vec![false; n];
    for b in 0..n {
        if n == 1 {
            break;
        }
        let pick = |rng: &mut ChaCha8Rng| loop {
            let t = rng.random_range(1..n);
            if t != b {
                return t;
            }
        };
        if n == 2 && b == 1 {
            break;
        }
        match rng.random_range(0..10) {
            0 => {}
            1..=5 => {
                let kind = if rng.random_bool(0.15) { EdgeKind::LoopBack } else { EdgeKind::Fallthrough };
                edges.push((b, pick(rng), kind));
            }
            _ => {
                let a = pick(rng);
                let c = pick(rng);
                edges.push((b, a, EdgeKind::BranchTrue));
                edges.push((b, c, EdgeKind::BranchFalse));
                cond_is_guard[b] = rng.random_bool(0.3);
            }
        }
    }
    let stmts: Vec<Vec<Option<bool>>> = (0..n)
        .map(|_| {
            let k = rng.random_range(0..=3);
            (0..k)
                .map(|_| match rng.random_range(0..10) {
                    0 | 1 => Some(true),
                    2 => Some(false),
                    _ => None,
                })
                .collect()
        })
        .collect();
    let candidates: Vec<(usize, usize)> =
        (0..n).flat_map(|b| (0..stmts[b].len()).map(move |i| (b, i))).collect();
    let use_site = if candidates.is_empty() {
        (0, 0)
    } else {
        candidates[rng.random_range(0..candidates.len())]
    };
    let mut s = Scenario { n, edges, stmts, cond_is_guard, use_site };
    if s.stmts[s.use_site.0].is_empty() {
        s.stmts[s.use_site.0].push(None);
    }
    s
}

pub struct Tally {
    pub checked: usize,
    pub disagreements: usize,
}

/// `reachable_set` vs the oracle on `count` random graphs plus every
/// fallthrough graph with up to 5 blocks.
pub fn reachability_tally(seed: u64, count: usize) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally { checked: 0, disagreements: 0 };
    let mut check = |n: usize, edges: &[(usize, usize, EdgeKind)]| {
        let cfg = Cfg::from_edges(n, edges.iter().copied());
        t.checked += 1;
        t.disagreements += (reachable_set(&cfg) != oracle_reachable(n, edges)) as usize;
    };
    for _ in 0..count {
        let s = random_scenario(&mut rng);
        check(s.n, &s.edges);
    }
    for n in 1..=5usize {
        let possible = all_edges(n);
        for mask in 0u32..(1 << possible.len()) {
            check(n, &subset(&possible, mask));
        }
    }
    t
}

/// `check_dominating_guard` vs the oracle on `count` random scenarios plus
/// every 4-block fallthrough graph with every guard placement.
pub fn guard_tally(seed: u64, count: usize) -> Tally {
    let tpl = templates();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally { checked: 0, disagreements: 0 };
    let mut check = |s: &Scenario| {
        let cfg = to_cfg(s, &tpl);
        let site = StmtId { block: s.use_site.0, index: s.use_site.1 };
        t.checked += 1;
        t.disagreements += (check_dominating_guard(&cfg, site, mentions_g) != oracle_guarded(s)) as usize;
    };
    for _ in 0..count {
        check(&random_scenario(&mut rng));
    }
    for s in small_guard_scenarios() {
        check(&s);
    }
    t
}

pub fn all_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|f| (1..n).filter(move |&t| t != f).map(move |t| (f, t))).collect()
}

pub fn subset(possible: &[(usize, usize)], mask: u32) -> Vec<(usize, usize, EdgeKind)> {
    possible
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, &(f, t))| (f, t, EdgeKind::Fallthrough))
        .collect()
}

/// Every 4-block fallthrough graph, guard placement and use block. In the
/// use block the guard, if any, follows the use.
pub fn small_guard_scenarios() -> Vec<Scenario> {
    let n = 4usize;
    let possible = all_edges(n);
    let mut out = Vec::new();
    for mask in 0u32..(1 << possible.len()) {
        let edges = subset(&possible, mask);
        for guards in 0u32..(1 << n) {
            for use_block in 0..n {
                let stmts: Vec<Vec<Option<bool>>> = (0..n)
                    .map(|b| {
                        let g = guards & (1 << b) != 0;
                        if b == use_block {
                            vec![None, if g { Some(true) } else { None }]
                        } else {
                            vec![if g { Some(true) } else { None }]
                        }
                    })
                    .collect();
                out.push(Scenario { n, edges: edges.clone(), stmts, cond_is_guard: vec![false; n], use_site: (use_block, 0) });
            }
        }
    }
    out
}
