use kt_measure::hilbert::{apply, embed, LegSpace, StateVector};
use kt_measure::random::{random_matrix, random_state};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn space(dims: &[usize]) -> LegSpace {
    LegSpace::new(dims.iter().enumerate().map(|(i, &d)| (format!("l{i}"), d))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embedding_is_a_homomorphism(dims in prop::collection::vec(2usize..=3, 2..=4), seed in any::<u64>()) {
        let full = space(&dims);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let targets = ["l1", "l0"];
        let local = LegSpace::new([("a", dims[1]), ("b", dims[0])]).unwrap();
        let a = random_matrix(&mut rng, local.clone());
        let b = random_matrix(&mut rng, local);
        let lhs = embed(&a.matmul(&b).unwrap(), &targets, &full).unwrap();
        let rhs = embed(&a, &targets, &full).unwrap().matmul(&embed(&b, &targets, &full).unwrap()).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-10);
    }

    #[test]
    fn disjoint_legs_commute(dims in prop::collection::vec(2usize..=3, 2..=4), seed in any::<u64>()) {
        let full = space(&dims);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, LegSpace::single("a", dims[0]));
        let b = random_matrix(&mut rng, LegSpace::single("b", dims[1]));
        let (ea, eb) = (embed(&a, &["l0"], &full).unwrap(), embed(&b, &["l1"], &full).unwrap());
        let d = ea.matmul(&eb).unwrap().distance(&eb.matmul(&ea).unwrap()).unwrap();
        prop_assert!(d <= 1e-10);
    }

    #[test]
    fn lazy_local_action_matches_embedding(dims in prop::collection::vec(2usize..=3, 2..=4), seed in any::<u64>()) {
        let full = space(&dims);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = format!("l{}", dims.len() - 1);
        let op = random_matrix(&mut rng, LegSpace::new([("a", dims[dims.len() - 1]), ("b", dims[0])]).unwrap());
        let xi = random_state(&mut rng, full.clone());
        let dense = apply(&embed(&op, &[&last, "l0"], &full).unwrap(), &xi).unwrap();
        let mut lazy: StateVector = xi.clone();
        lazy.apply_local(&op, &[&last, "l0"]).unwrap();
        prop_assert!(lazy.distance(&dense).unwrap() <= 1e-12);
    }
}
