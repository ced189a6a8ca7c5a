//! Property tests for the engine-level invariants.

mod common;

use proptest::prelude::*;
use repliscope::vecstore::{read_vds, write_vds, SpaceTag, VectorDataset};
use repliscope::{knn, replication};

fn arb_space_tag() -> impl Strategy<Value = SpaceTag> {
    prop_oneof![
        Just(SpaceTag::PixelRaw0255),
        Just(SpaceTag::PixelZscored),
        Just(SpaceTag::ExternalEmbedding),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vds_roundtrip_is_bit_exact(
        count in 1usize..12,
        dim in 1usize..16,
        seed in any::<u64>(),
        with_ids in any::<bool>(),
        tag in arb_space_tag(),
    ) {
        let base = common::random_dataset_f32(count, dim, seed);
        let ids = with_ids.then(|| (0..count).map(|i| format!("img_{i}.png")).collect());
        let ds = VectorDataset::new(count, dim, base.values().to_vec(), ids, tag).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.vds");
        write_vds(&ds, &path).unwrap();
        let back = read_vds(&path).unwrap();
        prop_assert_eq!(ds, back);
    }

    #[test]
    fn blocked_min_matches_naive(
        nq in 1usize..20,
        nr in 1usize..20,
        dim in 1usize..8,
        seed in any::<u64>(),
    ) {
        let q = common::random_dataset_f32(nq, dim, seed);
        let r = common::random_dataset_f32(nr, dim, seed.wrapping_add(1));
        let fast = knn::min_distances(&q, &r).unwrap();
        let naive = common::naive_min_distances(&q, &r);
        for (i, &(d, idx)) in naive.iter().enumerate() {
            prop_assert_eq!(fast.indices[i], idx);
            prop_assert!((fast.distances[i] - d).abs() <= 1e-4 * d.max(1.0));
        }
    }

    #[test]
    fn sweep_is_monotone(
        nq in 1usize..10,
        nr in 1usize..10,
        seed in any::<u64>(),
        mut alphas in proptest::collection::vec(0.0f64..1000.0, 1..8),
    ) {
        alphas.sort_by(f64::total_cmp);
        alphas.dedup();
        let q = common::random_dataset_f32(nq, 6, seed);
        let r = common::random_dataset_f32(nr, 6, seed.wrapping_add(9));
        let sweep = replication::alpha_sweep(&q, &r, &alphas).unwrap();
        for w in sweep.points.windows(2) {
            prop_assert!(w[0].1 <= w[1].1);
        }
    }

    #[test]
    fn growing_training_set_never_lowers_percentage(
        nq in 1usize..8,
        nr in 2usize..12,
        seed in any::<u64>(),
        alpha in 0.0f64..500.0,
    ) {
        let q = common::random_dataset_f32(nq, 5, seed);
        let full = common::random_dataset_f32(nr, 5, seed.wrapping_add(3));
        let half = VectorDataset::new(
            nr / 2 + 1,
            5,
            full.values()[..(nr / 2 + 1) * 5].to_vec(),
            None,
            full.space_tag(),
        ).unwrap();
        let p_half = replication::replication_percentage(&q, &half, alpha).unwrap();
        let p_full = replication::replication_percentage(&q, &full, alpha).unwrap();
        prop_assert!(p_full.percentage >= p_half.percentage);
    }
}
