mod common;

use proptest::prelude::*;

use treepersist::growth::{grow, parent_distribution, GrowthProcess};
use treepersist::{GrowingTree, ModelKind, ModelSpec, RngStream, SeedGraph};

fn model() -> impl Strategy<Value = ModelKind> {
    prop_oneof![
        Just(ModelKind::UniformAttachment),
        Just(ModelKind::PreferentialAttachment),
        (2usize..6).prop_map(|d| ModelKind::DiffusionRegular { d }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn centroids_stay_exact_while_growing(kind in model(), n in 2usize..60, seed in any::<u64>()) {
        let mut failures = Vec::new();
        grow(&ModelSpec::new(kind), n, &mut RngStream::new(seed, 0).rng(), |e, tree| {
            let adj = common::adjacency(tree.n(), &tree.edges());
            let (truth, _) = common::centroids_brute(&adj);
            if tree.cached_centroids().members != truth {
                failures.push(e.step);
            }
        }).unwrap();
        prop_assert!(failures.is_empty(), "{kind}: wrong centroids at sizes {failures:?}");
    }

    #[test]
    fn attachment_law_matches_model(kind in model(), n in 2usize..40, seed in any::<u64>()) {
        let tree = grow(&ModelSpec::new(kind), n, &mut RngStream::new(seed, 1).rng(), |_, _| {}).unwrap();
        let probs = parent_distribution(kind, &tree).unwrap();
        let total: f64 = probs.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let nf = n as f64;
        for (v, &p) in probs.iter().enumerate() {
            let deg = tree.degree(v) as f64;
            let want = match kind {
                ModelKind::UniformAttachment => 1.0 / nf,
                ModelKind::PreferentialAttachment => deg / (2.0 * nf - 2.0),
                ModelKind::DiffusionRegular { d } => (d as f64 - deg) / ((d as f64 - 2.0) * nf + 2.0),
            };
            prop_assert!((p - want).abs() < 1e-12, "vertex {v}: {p} vs {want}");
        }
        let process = GrowthProcess::new(kind, &tree).unwrap();
        match kind {
            ModelKind::PreferentialAttachment => prop_assert_eq!(process.slot_count(), 2 * (n - 1)),
            ModelKind::DiffusionRegular { d } => prop_assert_eq!(process.slot_count(), (d - 2) * n + 2),
            ModelKind::UniformAttachment => {}
        }
    }

    #[test]
    fn edge_list_text_round_trips(kind in model(), n in 1usize..80, seed in any::<u64>()) {
        let tree = grow(&ModelSpec::new(kind), n, &mut RngStream::new(seed, 2).rng(), |_, _| {}).unwrap();
        let text = treepersist::tree::format_edge_list(&tree.edges());
        let back = GrowingTree::new_tree(&treepersist::tree::parse_edge_list(&text).unwrap()).unwrap();
        prop_assert_eq!(back.edges(), tree.edges());
        prop_assert_eq!(back.cached_centroids(), tree.cached_centroids());
    }
}

#[test]
fn hub_seed_keeps_vertex_zero_central_at_start() {
    for k in 1..6 {
        let spec = ModelSpec::with_seed(ModelKind::PreferentialAttachment, SeedGraph::StarHub { k });
        let tree = grow(&spec, k + 1, &mut RngStream::new(0, 0).rng(), |_, _| {}).unwrap();
        assert!(tree.is_centroid(0));
        assert_eq!(tree.degree(0), k);
    }
}
