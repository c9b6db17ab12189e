//! Reachability and guard dominance checked against brute-force path
//! enumeration on generated graphs.

#[path = "support/flow.rs"]
mod flow;

use flow::*;
use mwc_core::detectors::guards::check_dominating_guard;
use mwc_core::semantics::{reachable_set, Cfg, EdgeKind, StmtId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn reachable_set_matches_oracle_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..1500 {
        let s = random_scenario(&mut rng);
        let cfg = Cfg::from_edges(s.n, s.edges.iter().copied());
        assert_eq!(reachable_set(&cfg), oracle_reachable(s.n, &s.edges), "edges {:?}", s.edges);
    }
}

#[test]
fn reachable_set_matches_oracle_on_all_small_graphs() {
    for n in 1..=5usize {
        let possible = all_edges(n);
        for mask in 0u32..(1 << possible.len()) {
            let edges = subset(&possible, mask);
            let cfg = Cfg::from_edges(n, edges.iter().copied());
            assert_eq!(reachable_set(&cfg), oracle_reachable(n, &edges), "n={n} edges {edges:?}");
        }
    }
}

#[test]
fn dominating_guard_matches_oracle_on_random_graphs() {
    let t = templates();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut disagreements = 0;
    let mut true_count = 0;
    for _ in 0..2000 {
        let s = random_scenario(&mut rng);
        let cfg = to_cfg(&s, &t);
        let site = StmtId { block: s.use_site.0, index: s.use_site.1 };
        let want = oracle_guarded(&s);
        disagreements += (check_dominating_guard(&cfg, site, mentions_g) != want) as usize;
        true_count += want as usize;
    }
    assert_eq!(disagreements, 0);
    // the generator exercises both outcomes
    assert!(true_count > 100 && true_count < 1900, "{true_count}");
}

#[test]
fn dominating_guard_matches_oracle_on_all_small_graphs() {
    let t = templates();
    for s in small_guard_scenarios() {
        let cfg = to_cfg(&s, &t);
        let site = StmtId { block: s.use_site.0, index: s.use_site.1 };
        assert_eq!(check_dominating_guard(&cfg, site, mentions_g), oracle_guarded(&s), "edges {:?} use {:?}", s.edges, s.use_site);
    }
}

#[test]
fn diamond_with_guard_on_one_arm_is_not_dominated() {
    // 0 -> 1 (guard) -> 3, 0 -> 2 -> 3; use in 3
    let t = templates();
    let s = Scenario {
        n: 4,
        edges: vec![(0, 1, EdgeKind::BranchTrue), (0, 2, EdgeKind::BranchFalse), (1, 3, EdgeKind::Fallthrough), (2, 3, EdgeKind::Fallthrough)],
        stmts: vec![vec![], vec![Some(true)], vec![None], vec![None]],
        cond_is_guard: vec![false; 4],
        use_site: (3, 0),
    };
    let cfg = to_cfg(&s, &t);
    assert!(!oracle_guarded(&s));
    assert!(!check_dominating_guard(&cfg, StmtId { block: 3, index: 0 }, mentions_g));

    let mut both = s;
    both.stmts[2] = vec![Some(true)];
    let cfg = to_cfg(&both, &t);
    assert!(oracle_guarded(&both));
    assert!(check_dominating_guard(&cfg, StmtId { block: 3, index: 0 }, mentions_g));
}
