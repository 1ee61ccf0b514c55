mod common;

use common::{bellman_ford, random_graph, simple_paths};
use grasp_core::graph::{EdgeMask, PathQuery, WeightedGraph};
use grasp_core::paths::{dijkstra, k_shortest_paths, shortest_path, shortest_path_between};
use proptest::prelude::*;

#[test]
fn dijkstra_matches_bellman_ford_on_fifty_graphs() {
    for seed in 0..50u64 {
        let n = 5 + (seed as usize % 30);
        let g = random_graph(seed, n, 2 * n, &[0.5, 1.0, 1.25, 3.0, 7.5], false);
        let mask: EdgeMask = (0..g.edge_count()).filter(|e| (e + seed as usize) % 6 == 0).collect();
        for s in [0, n / 2, n - 1] {
            let d = dijkstra(&g, &mask, s);
            let bf = bellman_ford(&g, &mask, s);
            for v in 0..n {
                assert!(
                    d.dist[v] == bf[v] || (d.dist[v] - bf[v]).abs() < 1e-9,
                    "seed {seed} s {s} v {v}: {} vs {}",
                    d.dist[v],
                    bf[v]
                );
            }
            // parent pointers reproduce the distances
            for v in 0..n {
                if let Some(p) = d.path_to(&g, v) {
                    let len: f64 = p.windows(2).map(|w| g.edge(g.edge_between(w[0], w[1]).unwrap()).weight).sum();
                    assert!((len - d.dist[v]).abs() < 1e-9);
                    assert!(p.windows(2).all(|w| !mask.contains(g.edge_between(w[0], w[1]).unwrap())));
                }
            }
        }
    }
}

#[test]
fn yen_matches_enumeration_on_thirty_graphs() {
    for seed in 0..30u64 {
        let n = 4 + (seed as usize % 7);
        let g = random_graph(1000 + seed, n, n + 5, &[1.0, 2.0, 3.0], false);
        let (s, t) = (0, n - 1);
        let all = simple_paths(&g, &EdgeMask::new(), s, t);
        let yen = k_shortest_paths(&g, &EdgeMask::new(), s, t, all.len() + 3);
        assert_eq!(yen.len(), all.len(), "seed {seed}");
        for (y, (len, nodes)) in yen.iter().zip(&all) {
            assert_eq!(&y.nodes, nodes, "seed {seed}");
            assert_eq!(y.length, *len);
        }
    }
}

#[test]
fn square_tie_order_is_lexicographic() {
    let g = WeightedGraph::unit(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    let ks = k_shortest_paths(&g, &EdgeMask::new(), 0, 2, 5);
    let nodes: Vec<Vec<usize>> = ks.into_iter().map(|p| p.nodes).collect();
    assert_eq!(nodes, vec![vec![0, 1, 2], vec![0, 3, 2]]);
    assert_eq!(shortest_path_between(&g, &EdgeMask::new(), 0, 2).unwrap().nodes, vec![0, 1, 2]);
}

#[test]
fn disconnected_and_degenerate_queries() {
    let g = WeightedGraph::unit(4, [(0, 1), (2, 3)]).unwrap();
    assert!(shortest_path_between(&g, &EdgeMask::new(), 0, 3).is_none());
    assert!(k_shortest_paths(&g, &EdgeMask::new(), 0, 3, 4).is_empty());
    assert!(k_shortest_paths(&g, &EdgeMask::new(), 0, 1, 0).is_empty());
    let d = dijkstra(&g, &EdgeMask::new(), 0);
    assert!(d.dist[3].is_infinite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn yen_prefix_property(seed in any::<u64>(), n in 4usize..12, k in 1usize..8, j in 1usize..6) {
        let g = random_graph(seed, n, 2 * n, &[1.0, 1.5, 2.0], false);
        let short = k_shortest_paths(&g, &EdgeMask::new(), 0, n - 1, k);
        let long = k_shortest_paths(&g, &EdgeMask::new(), 0, n - 1, k + j);
        prop_assert!(short.len() <= long.len());
        prop_assert_eq!(&long[..short.len()], &short[..]);
        for w in long.windows(2) {
            prop_assert!(w[0].length <= w[1].length + 1e-9);
        }
    }

    #[test]
    fn first_yen_path_is_the_shortest_path(seed in any::<u64>(), n in 3usize..20) {
        let g = random_graph(seed, n, 2 * n, &[1.0, 2.0], false);
        let first = k_shortest_paths(&g, &EdgeMask::new(), 0, n - 1, 1);
        match shortest_path_between(&g, &EdgeMask::new(), 0, n - 1) {
            None => prop_assert!(first.is_empty()),
            Some(p) => {
                prop_assert_eq!(&first[0].nodes, &p.nodes);
                let q = PathQuery::new(&g, p.nodes.clone()).unwrap();
                prop_assert_eq!(shortest_path(&g, &EdgeMask::new(), &q).unwrap().nodes, p.nodes);
            }
        }
    }

    #[test]
    fn relabeling_preserves_distances(seed in any::<u64>(), n in 3usize..20) {
        let g = random_graph(seed, n, 2 * n, &[1.0, 2.5], false);
        let perm: Vec<usize> = (0..n).map(|v| (v + 3) % n).collect();
        let h = g.relabel(&perm).unwrap();
        let a = dijkstra(&g, &EdgeMask::new(), 0);
        let b = dijkstra(&h, &EdgeMask::new(), perm[0]);
        for v in 0..n {
            prop_assert_eq!(a.dist[v], b.dist[perm[v]]);
        }
    }
}
