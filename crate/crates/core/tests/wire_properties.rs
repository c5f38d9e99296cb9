//! Property tests over the public wire formats and the partitioner.
//!
//! The unit tests pin hand-computed cases; these generate adversarial ones.
//! The properties that matter most: a model document survives a round trip
//! bit-for-bit (canonical form is a fixed point), merging conserves
//! cardinality no matter the geometry, and partitioning is a seeded
//! permutation dealt fairly.

use boundclust::boundary::{BoundaryMember, BoundarySet};
use boundclust::global_merge::{derive_global_params, merge, serialize_global};
use boundclust::harness::partition_indices;
use boundclust::local_model::{
    deserialize, serialize, ClusterRepresentative, LocalCluster, LocalModel, LocalParams,
};
use boundclust::spatial_index::GridIndex;
use proptest::prelude::*;

fn member(dim: usize) -> impl Strategy<Value = BoundaryMember> {
    let coord = prop_oneof![
        // Ordinary magnitudes, plus awkward ones that stress float printing.
        -1.0e3_f64..1.0e3,
        -1.0e-3_f64..1.0e-3,
        Just(0.0),
        Just(-0.0),
    ];
    (
        proptest::collection::vec(coord.clone(), dim),
        proptest::collection::vec(coord, dim),
    )
        .prop_map(|(point, balance)| BoundaryMember { balance, point })
}

fn model(node_id: u64) -> impl Strategy<Value = LocalModel> {
    (1usize..=3).prop_flat_map(move |dim| {
        proptest::collection::vec(
            (
                proptest::collection::vec(member(dim), 1..6),
                0u64..50,
                1.0f64..100.0,
            ),
            0..4,
        )
        .prop_map(move |clusters| LocalModel {
            node_id,
            params: LocalParams::default(),
            clusters: clusters
                .into_iter()
                .enumerate()
                .map(|(i, (members, extra, mean_density))| LocalCluster {
                    cluster_id: i as u64,
                    representative: ClusterRepresentative {
                        cardinality: members.len() as u64 + extra,
                        mean_density,
                    },
                    boundary: BoundarySet::new(members),
                })
                .collect(),
        })
    })
}

proptest! {
    #[test]
    fn model_documents_round_trip_bit_for_bit(m in model(3)) {
        let text = serialize(&m).unwrap();
        let back = deserialize(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(serialize(&back).unwrap(), text);
    }

    #[test]
    fn canonical_documents_are_a_fixed_point_of_reparsing(m in model(1)) {
        let text = serialize(&m).unwrap();
        // Through the generic JSON layer and back: float formatting must not
        // drift by even a bit, or documents would mutate on every hop.
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(value.to_string(), text);
    }

    #[test]
    fn merging_conserves_cardinality_for_arbitrary_geometry(
        a in model(0),
        b in model(1),
    ) {
        // Models may differ in dimension; merge must refuse that case, and
        // otherwise keep every point accounted for.
        let models = vec![a, b];
        let params = derive_global_params(&models).unwrap();
        let dims: std::collections::BTreeSet<usize> = models
            .iter()
            .flat_map(|m| m.dimension())
            .collect();
        match merge(&models, &params) {
            Ok(global) => {
                let local: u64 = models.iter().map(|m| m.total_cardinality()).sum();
                prop_assert_eq!(global.total_cardinality(), local);
                let text = serialize_global(&global).unwrap();
                let back = boundclust::global_merge::deserialize_global(&text).unwrap();
                prop_assert_eq!(serialize_global(&back).unwrap(), text);
            }
            Err(_) => prop_assert!(dims.len() > 1, "merge failed without a dimension clash"),
        }
    }

    #[test]
    fn partitioning_deals_every_index_once(
        n in 1usize..300,
        k in 1usize..10,
        seed in any::<u64>(),
    ) {
        prop_assume!(k <= n);
        let parts = partition_indices(n, k, seed).unwrap();
        prop_assert_eq!(parts.len(), k);
        let max = parts.iter().map(Vec::len).max().unwrap();
        let min = parts.iter().map(Vec::len).min().unwrap();
        prop_assert!(max - min <= 1);
        let mut seen: Vec<usize> = parts.into_iter().flatten().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn grid_queries_match_a_linear_scan(
        points in proptest::collection::vec(
            proptest::collection::vec(-5.0f64..5.0, 2), 1..60),
        q in proptest::collection::vec(-5.0f64..5.0, 2),
        radius in 0.01f64..3.0,
    ) {
        let index = GridIndex::new(points.clone(), radius).unwrap();
        let got = index.range_query(&q, radius);
        let mut want: Vec<usize> = (0..points.len())
            .filter(|&i| {
                boundclust::geometry::dist(&points[i], &q) <= radius
            })
            .collect();
        want.sort_unstable();
        prop_assert_eq!(got, want);
    }
}
