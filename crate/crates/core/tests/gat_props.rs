mod common;

use common::{dense_gat_oracle, random_graph, rng};
use grasp_core::features::{assemble, FeatureConfig, FeatureFamily, FeatureMatrix};
use grasp_core::gat::{Architecture, Layer, ModelWeights};
use grasp_core::graph::WeightedGraph;
use grasp_core::scoring::Scorer;
use grasp_core::synthgen::{generate, sample_instance, GeneratorParams};
use grasp_core::Error;
use proptest::prelude::*;
use rand::Rng;

const FIXTURE: &str = include_str!("fixtures/tiny_model.json");

fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix {
    let cols = rows.first().map_or(0, Vec::len);
    FeatureMatrix {
        rows: rows.len(),
        cols,
        values: rows.concat(),
        column_names: (0..cols).map(|c| format!("f{c}")).collect(),
        family_spans: Vec::new(),
    }
}

fn random_features(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..n).map(|_| (0..d).map(|_| r.gen_range(-2.0..2.0)).collect()).collect()
}

fn small_arch() -> Architecture {
    Architecture {
        gat: vec![(4, 3), (2, 2)],
        dense: vec![5, 3],
    }
}

#[test]
fn fixture_scores_are_frozen() {
    let w = ModelWeights::from_json(FIXTURE).unwrap();
    assert_eq!(w.metadata.extra["label_mode"], "cut_incidence");
    let g = WeightedGraph::unit(3, [(0, 1), (1, 2)]).unwrap();
    let x = matrix(vec![vec![0.0], vec![3.0], vec![6.0]]);
    let s = w.forward(&g, &x).unwrap().scores;
    let expected = [0.18242552380635635, 0.5, 0.8175744761936437];
    for (a, b) in s.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    let mut sharp = w.clone();
    if let Layer::Gat(l) = &mut sharp.layers[0] {
        l.att_src.data[0] = 1.0;
    }
    let s = sharp.forward(&g, &x).unwrap().scores;
    let expected = [0.46449047629057294, 0.9450037417468845, 0.9457164924311116];
    for (a, b) in s.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn forward_matches_dense_oracle() {
    for seed in 0..10u64 {
        let g = random_graph(seed, 15, 30, &[1.0], false);
        let feats = random_features(seed, 15, 6);
        let w = ModelWeights::random(6, &small_arch(), seed);
        let got = w.forward(&g, &matrix(feats.clone())).unwrap().scores;
        let want = dense_gat_oracle(&w, &g, &feats);
        for v in 0..15 {
            assert!((got[v] - want[v]).abs() < 1e-6, "seed {seed} node {v}");
        }
    }
}

#[test]
fn default_architecture_runs_on_assembled_features() {
    let g = generate(&GeneratorParams::Ba { n: 120, m: 5 }, 3).unwrap();
    let q = sample_instance(&g, 10, 3).unwrap();
    let families = [FeatureFamily::Structural, FeatureFamily::Flow, FeatureFamily::Ppr];
    let cfg = FeatureConfig::default();
    let x = assemble(&g, &q, &families, &cfg).unwrap();
    let w = ModelWeights::random(x.cols, &Architecture::default(), 1);
    let s = w.forward(&g, &x).unwrap();
    assert_eq!(s.len(), 120);
    assert!(s.scores.iter().all(|v| (0.0..=1.0).contains(v)));
    let feats: Vec<Vec<f64>> = (0..x.rows).map(|r| x.row(r).to_vec()).collect();
    let want = dense_gat_oracle(&w, &g, &feats);
    for v in 0..120 {
        assert!((s.scores[v] - want[v]).abs() < 1e-6);
    }
    let via_scorer = Scorer::Gat {
        weights: &w,
        families: &families,
        config: cfg,
    }
    .score(&g, &q)
    .unwrap();
    assert_eq!(via_scorer, s);
}

#[test]
fn width_mismatch_is_rejected() {
    let w = ModelWeights::random(4, &small_arch(), 0);
    let g = WeightedGraph::unit(2, [(0, 1)]).unwrap();
    assert!(matches!(
        w.forward(&g, &matrix(vec![vec![0.0; 5]; 2])),
        Err(Error::Validation(_))
    ));
}

#[test]
fn truncated_and_mislabeled_files_fail_with_schema_errors() {
    assert!(matches!(ModelWeights::from_json(&FIXTURE[..FIXTURE.len() / 2]), Err(Error::Schema(_))));
    let renamed = FIXTURE.replace("\"shape\": [1, 1], \"values\": [1.0]},\n        \"bias\": {\"shape\": [1], \"values\": [-3.0]}", "\"shape\": [2, 1], \"values\": [1.0, 1.0]},\n        \"bias\": {\"shape\": [1], \"values\": [-3.0]}");
    match ModelWeights::from_json(&renamed) {
        Err(Error::Schema(msg)) => assert!(msg.contains("output"), "{msg}"),
        other => panic!("expected schema error, got {other:?}"),
    }
}

#[test]
fn save_load_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let w = ModelWeights::random(7, &small_arch(), 11);
    let path = dir.path().join("w.json");
    w.save(&path).unwrap();
    assert_eq!(ModelWeights::load(&path).unwrap(), w);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn attention_rows_sum_to_one(seed in any::<u64>(), n in 2usize..30) {
        let g = random_graph(seed, n, 2 * n, &[1.0], false);
        let w = ModelWeights::random(5, &small_arch(), seed);
        let x = matrix(random_features(seed, n, 5));
        for layer in 0..2 {
            for a in w.attention(&g, &x, layer).unwrap() {
                prop_assert_eq!(a.neighborhood.len(), a.coefficients[0].len());
                for head in &a.coefficients {
                    let s: f64 = head.iter().sum();
                    prop_assert!((s - 1.0).abs() < 1e-6);
                    prop_assert!(head.iter().all(|c| *c >= 0.0));
                }
            }
        }
    }

    #[test]
    fn forward_is_permutation_equivariant(seed in any::<u64>(), n in 3usize..25, shift in 1usize..25) {
        let g = random_graph(seed, n, 2 * n, &[1.0], false);
        let perm: Vec<usize> = (0..n).map(|v| (v + shift) % n).rev().collect();
        let h = g.relabel(&perm).unwrap();
        let feats = random_features(seed ^ 1, n, 4);
        let mut permuted = vec![Vec::new(); n];
        for v in 0..n {
            permuted[perm[v]] = feats[v].clone();
        }
        let w = ModelWeights::random(4, &small_arch(), seed);
        let a = w.forward(&g, &matrix(feats)).unwrap().scores;
        let b = w.forward(&h, &matrix(permuted)).unwrap().scores;
        for v in 0..n {
            prop_assert!((a[v] - b[perm[v]]).abs() < 1e-6);
        }
    }
}
