use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::assets::{FIG2_RIB, FIG2_TOPOLOGY};
use crate::bgp::{parse_rib, BetaAttrs, Origin, Prefix};
use crate::graph::{parse_topology, Distance, IgpEvent, Topology};

fn route(gateway: NodeId, lp: u32, aspath: u32, med: Option<u32>, asn: u32) -> Route {
    Route {
        prefix: Prefix::new("x"),
        gateway,
        beta: BetaAttrs {
            local_pref: lp,
            as_path_len: aspath,
            origin: Origin::Igp,
            med,
            origin_as: AsId(asn),
        },
        ebgp_local: false,
        router_id: gateway.0,
    }
}

fn fig2_leaves(prefix: &str) -> (Topology, LeafList) {
    let t = parse_topology(FIG2_TOPOLOGY).unwrap();
    let rib = parse_rib(FIG2_RIB, &t).unwrap();
    let mut leaves = LeafList::new(MedPolicy::default());
    for r in rib.routes(&Prefix::new(prefix)) {
        leaves.insert_route(r.clone()).unwrap();
    }
    (t, leaves)
}

fn names(t: &Topology, content: &OprContent) -> Vec<String> {
    let mut v: Vec<String> = content.records().map(|r| t.name(r.gateway).to_string()).collect();
    v.sort();
    v
}

#[test]
fn med_tied_routes_share_one_chain() {
    let (t, leaves) = fig2_leaves("p");
    assert_eq!(leaves.len(), 2);
    let second = leaves.leaves().nth(1).unwrap();
    let chains: Vec<&MedChain> = second.chains().collect();
    assert_eq!(chains.len(), 1);
    let order: Vec<&str> = chains[0].routes().iter().map(|r| t.name(r.gateway)).collect();
    assert_eq!(order, ["n4", "n5"]);
}

#[test]
fn first_insert_has_rank_one() {
    let mut leaves = LeafList::new(MedPolicy::default());
    assert_eq!(leaves.insert_route(route(NodeId(1), 100, 3, None, 1)).unwrap(), 1);
    // A better route takes rank 1 and pushes the other down.
    assert_eq!(leaves.insert_route(route(NodeId(2), 100, 1, None, 1)).unwrap(), 1);
    assert_eq!(leaves.rank_of(&route(NodeId(1), 100, 3, None, 1).beta_key()), Some(2));
    assert!(matches!(
        leaves.insert_route(route(NodeId(2), 50, 9, None, 1)),
        Err(Error::Conflict(_))
    ));
}

#[test]
fn removals() {
    let (t, mut leaves) = fig2_leaves("p");
    let n4 = t.resolve("n4").unwrap();
    let (rank, removed) = leaves
        .remove_route(&RouteKey {
            prefix: Prefix::new("p"),
            gateway: n4,
            origin_as: AsId(65004),
        })
        .unwrap();
    assert_eq!((rank, removed.gateway), (2, n4));
    let chain: Vec<&str> = leaves.leaves().nth(1).unwrap().routes().map(|r| t.name(r.gateway)).collect();
    assert_eq!(chain, ["n5"]);

    let mut single = LeafList::new(MedPolicy::default());
    let r = route(NodeId(3), 100, 1, None, 1);
    single.insert_route(r.clone()).unwrap();
    assert_eq!(single.remove_route(&r.key()).unwrap().0, 1);
    assert!(single.is_empty());
    assert!(matches!(single.remove_route(&r.key()), Err(Error::NotFound(_))));
}

#[test]
fn ignored_missing_med_gets_its_own_chain() {
    let mut leaves = LeafList::new(MedPolicy::Ignore);
    leaves.insert_route(route(NodeId(1), 100, 1, Some(5), 9)).unwrap();
    leaves.insert_route(route(NodeId(2), 100, 1, None, 9)).unwrap();
    leaves.insert_route(route(NodeId(3), 100, 1, Some(1), 9)).unwrap();
    let leaf = leaves.leaves().next().unwrap();
    let chains: Vec<Vec<u32>> = leaf.chains().map(|c| c.routes().iter().map(|r| r.gateway.0).collect()).collect();
    assert_eq!(chains, [vec![3, 1], vec![2]]);
}

#[test]
fn fifty_random_routes_keep_beta_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut leaves = LeafList::new(MedPolicy::default());
    let mut inserted: Vec<Route> = Vec::new();
    for g in 0..50 {
        let r = route(NodeId(g), rng.gen_range(1..4) * 100, rng.gen_range(1..5), Some(rng.gen_range(0..3)), rng.gen_range(0..3));
        let rank = leaves.insert_route(r.clone()).unwrap();
        inserted.push(r.clone());
        let mut keys: Vec<BetaKey> = inserted.iter().map(Route::beta_key).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(rank, keys.iter().position(|k| *k == r.beta_key()).unwrap() + 1);
        let leaf_keys: Vec<BetaKey> = leaves.leaves().map(MrSet::key).collect();
        assert_eq!(leaf_keys, keys);
    }
    for leaf in leaves.leaves() {
        assert!(leaf.routes().all(|r| r.beta_key() == leaf.key()));
        for chain in leaf.chains() {
            let meds: Vec<u32> = chain.routes().iter().map(|r| r.beta.med.unwrap()).collect();
            assert!(meds.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

#[test]
fn worked_example_extracts_three_gateways() {
    for prefix in ["p", "q"] {
        let (t, leaves) = fig2_leaves(prefix);
        let mut igp = IgpState::new(t.clone());
        let ext = extract_opr(&leaves, &mut igp, ExtractOptions::default()).unwrap();
        assert_eq!(names(&t, &ext.content), ["n1", "n2", "n3"]);
        assert_eq!(ext.leaves_used, 1);
        assert!(ext.protected && !ext.reduced);
    }
}

#[test]
fn gateways_behind_one_router_are_unprotected() {
    let t = parse_topology(FIG2_TOPOLOGY).unwrap();
    let rib = parse_rib(FIG2_RIB, &t).unwrap();
    let mut leaves = LeafList::new(MedPolicy::default());
    for r in rib.routes(&Prefix::new("p")).iter().filter(|r| t.name(r.gateway) >= "n4") {
        leaves.insert_route(r.clone()).unwrap();
    }
    let mut igp = IgpState::new(t.clone());
    let ext = extract_opr(&leaves, &mut igp, ExtractOptions::default()).unwrap();
    assert!(!ext.protected);
    assert_eq!(names(&t, &ext.content), ["n4", "n5"]);
    assert!(extract_opr(&LeafList::default(), &mut igp, ExtractOptions::default()).is_err());
}

/// Ring s-r1-r2-r3 with dual-homed g1, g2, g3.
fn ring() -> (Topology, [NodeId; 3]) {
    let mut t = Topology::new("s");
    let s = t.vantage();
    let r: Vec<NodeId> = (1..=3).map(|i| t.add_node(&format!("r{i}"), false).unwrap()).collect();
    t.add_link(s, r[0], 1, false).unwrap();
    t.add_link(r[0], r[1], 1, false).unwrap();
    t.add_link(r[1], r[2], 1, false).unwrap();
    t.add_link(r[2], s, 1, false).unwrap();
    let g1 = t.add_node("g1", true).unwrap();
    let g2 = t.add_node("g2", true).unwrap();
    let g3 = t.add_node("g3", true).unwrap();
    for (g, a, wa, b, wb) in [(g1, r[0], 1, r[1], 5), (g2, r[2], 1, r[1], 5), (g3, r[1], 1, r[0], 5)] {
        t.add_link(g, a, wa, false).unwrap();
        t.add_link(g, b, wb, false).unwrap();
    }
    (t, [g1, g2, g3])
}

#[test]
fn second_leaf_reduction_keeps_one_backup() {
    let (t, [g1, g2, g3]) = ring();
    assert!(t.is_biconnected());
    let mut leaves = LeafList::new(MedPolicy::default());
    leaves.insert_route(route(g1, 100, 1, None, 1)).unwrap();
    leaves.insert_route(route(g2, 100, 2, None, 2)).unwrap();
    leaves.insert_route(route(g3, 100, 2, None, 3)).unwrap();
    let mut igp = IgpState::new(t.clone());
    let plain = extract_opr(&leaves, &mut igp, ExtractOptions::default()).unwrap();
    assert_eq!(names(&t, &plain.content), ["g1", "g2", "g3"]);
    let opts = ExtractOptions {
        second_mr: true,
        drop_med: false,
    };
    let reduced = extract_opr(&leaves, &mut igp, opts).unwrap();
    assert_eq!(names(&t, &reduced.content), ["g1", "g2"]);
    assert!(reduced.reduced && reduced.protected);
}

#[test]
fn reduction_refused_when_failure_reorders_second_leaf() {
    let mut t = Topology::new("s");
    let s = t.vantage();
    let g: Vec<NodeId> = (1..=3).map(|i| t.add_node(&format!("g{i}"), true).unwrap()).collect();
    t.add_link(s, g[0], 1, false).unwrap();
    t.add_link(g[0], g[1], 1, false).unwrap();
    t.add_link(s, g[1], 10, false).unwrap();
    t.add_link(s, g[2], 5, false).unwrap();
    t.add_link(g[2], g[1], 10, false).unwrap();
    let mut leaves = LeafList::new(MedPolicy::default());
    leaves.insert_route(route(g[0], 100, 1, None, 1)).unwrap();
    leaves.insert_route(route(g[1], 100, 2, None, 2)).unwrap();
    leaves.insert_route(route(g[2], 100, 2, None, 3)).unwrap();
    let mut igp = IgpState::new(t.clone());
    // g2 is the best backup now and disjoint from g1, but once g1 fails
    // g2 is at 10 and g3 at 5.
    assert!(t.two_disjoint_paths(&[g[0], g[1]]).unwrap());
    let opts = ExtractOptions {
        second_mr: true,
        drop_med: false,
    };
    let ext = extract_opr(&leaves, &mut igp, opts).unwrap();
    assert!(!ext.reduced);
    assert_eq!(names(&t, &ext.content), ["g1", "g2", "g3"]);
}

#[test]
fn dropping_med_tiers() {
    let (mut t, leaves) = fig2_leaves("p");
    // Keep only the MED leaf so the chain is part of the set.
    let mut med_only = LeafList::new(MedPolicy::default());
    for r in leaves.leaves().nth(1).unwrap().routes() {
        med_only.insert_route(r.clone()).unwrap();
    }
    let opts = ExtractOptions {
        second_mr: false,
        drop_med: true,
    };
    let mut igp = IgpState::new(t.clone());
    let ext = extract_opr(&med_only, &mut igp, opts).unwrap();
    assert_eq!(names(&t, &ext.content), ["n4"]);
    assert!(ext.content.entries()[0].truncated);

    // With n4 down the unreachable head stays and n5's tier is kept.
    let n4 = t.resolve("n4").unwrap();
    t.apply_event(&IgpEvent::NodeDown(n4)).unwrap();
    let mut igp = IgpState::new(t.clone());
    let ext = extract_opr(&med_only, &mut igp, opts).unwrap();
    assert_eq!(names(&t, &ext.content), ["n4", "n5"]);
    assert!(!ext.content.entries()[0].truncated);
}

#[test]
fn top_tier_keeps_equal_meds() {
    let d = DistanceMap::from_vec(vec![Distance::Finite(0), Distance::Infinite, Distance::Finite(3), Distance::Finite(1), Distance::Finite(1)]);
    let mut leaves = LeafList::new(MedPolicy::default());
    leaves.insert_route(route(NodeId(1), 100, 1, Some(0), 7)).unwrap();
    leaves.insert_route(route(NodeId(2), 100, 1, Some(5), 7)).unwrap();
    leaves.insert_route(route(NodeId(3), 100, 1, Some(5), 7)).unwrap();
    leaves.insert_route(route(NodeId(4), 100, 1, Some(9), 7)).unwrap();
    let chain = leaves.leaves().next().unwrap().chains().next().unwrap();
    assert_eq!(chain.top_index(&d), Some(1));
    let tier: Vec<u32> = chain.top_tier(&d, MedPolicy::default()).map(|r| r.gateway.0).collect();
    assert_eq!(tier, [2, 3]);
}

fn random_case(seed: u64) -> (Topology, LeafList) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(5..12);
    let mut t = Topology::new("v");
    for i in 1..n {
        t.add_node(&format!("x{i}"), false).unwrap();
    }
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if rng.gen_bool(0.35) {
                t.add_link(NodeId(a), NodeId(b), rng.gen_range(1..6), false).unwrap();
            }
        }
    }
    let mut leaves = LeafList::new(MedPolicy::default());
    for g in 1..n as u32 {
        if rng.gen_bool(0.6) {
            leaves
                .insert_route(route(NodeId(g), 100, rng.gen_range(1..5), Some(rng.gen_range(0..2)), rng.gen_range(0..3)))
                .unwrap();
        }
    }
    (t, leaves)
}

proptest! {
    #[test]
    fn extraction_is_a_minimal_prefix_of_leaves(seed in any::<u64>()) {
        let (t, leaves) = random_case(seed);
        prop_assume!(!leaves.is_empty());
        let mut igp = IgpState::new(t.clone());
        let ext = extract_opr(&leaves, &mut igp, ExtractOptions::default()).unwrap();
        let union = |k: usize| -> Vec<NodeId> {
            leaves.leaves().take(k).flat_map(|l| l.routes().map(|r| r.gateway)).collect()
        };
        let x = ext.leaves_used;
        let expected: usize = leaves.leaves().take(x).map(MrSet::len).sum();
        prop_assert_eq!(ext.content.size(), expected);
        prop_assert_eq!(t.two_disjoint_paths(&union(x)).unwrap(), ext.protected);
        if ext.protected && x > 1 {
            prop_assert!(!t.two_disjoint_paths(&union(x - 1)).unwrap());
        }
        if !ext.protected {
            prop_assert_eq!(x, leaves.len());
        }
    }

    #[test]
    fn insert_then_remove_is_identity(seed in any::<u64>(), g in 20u32..30, lp in 1u32..4, path in 1u32..5, med in prop::option::of(0u32..3), asn in 0u32..3) {
        let (_, leaves) = random_case(seed);
        let mut changed = leaves.clone();
        let r = route(NodeId(g), lp * 100, path, med, asn);
        changed.insert_route(r.clone()).unwrap();
        prop_assert_ne!(&changed, &leaves);
        changed.remove_route(&r.key()).unwrap();
        prop_assert_eq!(changed, leaves);
    }
}
