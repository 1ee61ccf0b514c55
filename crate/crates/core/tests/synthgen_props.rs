mod common;

use common::{random_graph, simple_paths};
use grasp_core::attack::{pathattack, AttackOptions};
use grasp_core::graph::{EdgeMask, WeightedGraph};
use grasp_core::synthgen::{generate, sample_instance, GeneratorParams};
use grasp_core::Error;
use proptest::prelude::*;

#[test]
fn er_edge_count_within_four_sigma() {
    let (n, p) = (1000usize, 0.014);
    let pairs = (n * (n - 1) / 2) as f64;
    let mean = pairs * p;
    let sd = (pairs * p * (1.0 - p)).sqrt();
    assert!((mean - 6993.0).abs() < 0.5);
    for seed in 0..3 {
        let g = generate(&GeneratorParams::Er { n, p }, seed).unwrap();
        let m = g.edge_count() as f64;
        assert!((m - mean).abs() <= 4.0 * sd, "seed {seed}: {m} edges, mean {mean}, sd {sd}");
    }
}

#[test]
fn k_star_five_matches_enumeration() {
    let mut checked = 0;
    for seed in 0..40u64 {
        let g = random_graph(seed, 12, 20, &[1.0], false);
        let Ok(q) = sample_instance(&g, 5, seed) else { continue };
        let all = simple_paths(&g, &EdgeMask::new(), q.source, q.target);
        assert!(all.len() >= 5);
        assert_eq!(q.target_path.nodes, all[4].1, "seed {seed}");
        checked += 1;
    }
    assert!(checked >= 20);
}

#[test]
fn k_star_one_needs_no_attack() {
    for seed in 0..5 {
        let g = generate(&GeneratorParams::Ws { n: 200, k: 12, p_rewire: 0.02 }, seed).unwrap();
        let q = sample_instance(&g, 1, seed).unwrap();
        let r = pathattack(&g, &EdgeMask::new(), &q, &AttackOptions::default()).unwrap();
        assert_eq!(r.total_cost, 0.0);
    }
}

#[test]
fn samples_come_from_the_largest_component() {
    // two triangles and a 5-cycle: only the cycle should ever be sampled
    let g = WeightedGraph::unit(
        11,
        [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (6, 7), (7, 8), (8, 9), (9, 10), (10, 6)],
    )
    .unwrap();
    for seed in 0..20 {
        let q = sample_instance(&g, 2, seed).unwrap();
        assert!(q.source >= 6 && q.target >= 6);
    }
    let empty = WeightedGraph::unit(3, []).unwrap();
    assert!(matches!(sample_instance(&empty, 1, 0), Err(Error::Sampling(_))));
}

#[test]
fn every_family_satisfies_graph_invariants() {
    let params = [
        GeneratorParams::Lattice { rows: 7, cols: 9 },
        GeneratorParams::Er { n: 300, p: 0.015 },
        GeneratorParams::Ba { n: 300, m: 7 },
        GeneratorParams::Ws { n: 300, k: 13, p_rewire: 0.02 },
    ];
    for p in params {
        let g = generate(&p, 8).unwrap();
        assert_eq!(g.node_count(), p.node_count());
        for e in g.edges() {
            assert!(e.u < e.v && e.v < g.node_count());
            assert_eq!((e.weight, e.cost), (1.0, 1.0));
        }
        let mut pairs: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), g.edge_count());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn same_seed_same_instance(seed in any::<u64>(), which in 0usize..4) {
        let p = [
            GeneratorParams::Lattice { rows: 8, cols: 8 },
            GeneratorParams::Er { n: 150, p: 0.04 },
            GeneratorParams::Ba { n: 150, m: 5 },
            GeneratorParams::Ws { n: 150, k: 11, p_rewire: 0.02 },
        ][which];
        let a = generate(&p, seed).unwrap();
        let b = generate(&p, seed).unwrap();
        prop_assert_eq!(a.edges(), b.edges());
        let qa = sample_instance(&a, 7, seed).ok();
        let qb = sample_instance(&b, 7, seed).ok();
        prop_assert_eq!(qa, qb);
    }

    #[test]
    fn ba_graphs_are_connected(seed in any::<u64>(), m in 5usize..10) {
        let g = generate(&GeneratorParams::Ba { n: 200, m }, seed).unwrap();
        prop_assert_eq!(g.components().len(), 1);
    }
}
