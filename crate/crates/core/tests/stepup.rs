use proptest::prelude::*;
use zfx_core::rng::seeded;
use zfx_core::stepup::*;
use zfx_core::treekit::random_tree;
use zfx_core::{Exec, Mode};

fn support(n_ground: usize, k: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(1..=n_ground, k).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn f1_matches_reference(s in support(64, 6)) {
        let p = StepUpParams::new(64, 6).unwrap();
        prop_assert_eq!(project_f1(&s, &p).unwrap(), project_f1_reference(&s, &p).unwrap());
        for sub in 1u64..1 << 6 {
            let x: Vec<usize> = zfx_core::combin::mask_elems(sub).map(|i| s[i]).collect();
            prop_assert_eq!(project_f1(&x, &p).unwrap(), project_f1_reference(&x, &p).unwrap());
        }
    }

    #[test]
    fn decomposition_exact_at_n64_k6(s in support(64, 6)) {
        let p = StepUpParams::new(64, 6).unwrap();
        let c = check_decomposition(&s, &p, DEFAULT_DELTA_HAT).unwrap();
        prop_assert!(c.distance <= 1e-12);
        prop_assert!(c.max_part_distance <= 1e-12);
        prop_assert_eq!(c.total_weight, 1.0);
    }

    #[test]
    fn fixing_uses_at_most_one_coin_per_leaf(leaves in 2usize..20, seed in any::<u64>(), coins in prop::collection::vec(any::<bool>(), 40)) {
        let t = random_tree(leaves, &mut seeded(seed)).unwrap();
        let tree = FixingTree::from_tree(&t).unwrap();
        let policy = FixingPolicy::for_tree(&tree);
        let (out, used) = skeleton_fixing(&tree, &policy, &coins, DEFAULT_DELTA_HAT).unwrap();
        prop_assert!(used <= 2 * leaves);
        prop_assert_eq!(out.fixed_count(), used);
    }
}

#[test]
fn decompositions_exact_exhaustive() {
    let ex = Exec::default();
    for (n, k) in [(16, 3), (16, 4), (32, 5)] {
        let s = verify_decompositions(n, k, DEFAULT_DELTA_HAT, Mode::Exhaustive, &ex).unwrap();
        assert_eq!(s.supports as u128, zfx_core::combin::binomial(n as u64, k as u64));
        assert!(s.max_distance <= 1e-12 && s.max_part_distance <= 1e-12, "{s:?}");
        assert!(s.weights_exact);
    }
}

#[test]
fn fixing_weights_sum_to_one_over_random_trees() {
    let mut rng = seeded(3);
    for leaves in 2..16 {
        let t = random_tree(leaves, &mut rng).unwrap();
        let tree = FixingTree::from_tree(&t).unwrap();
        let outs = enumerate_fixings(&tree, DEFAULT_DELTA_HAT).unwrap();
        let total: f64 = outs.iter().map(|o| o.weight).sum();
        assert_eq!(total, 1.0);
    }
}

#[test]
fn composition_bound_holds() {
    let ex = Exec::default();
    for (n, k) in [(16, 3), (16, 4), (32, 4)] {
        let p = StepUpParams::new(n, k).unwrap();
        let f2 = BitFixingExtractor::parity(p.n).unwrap();
        let r = measure_stepup(n, k, &f2, Mode::Exhaustive, DEFAULT_DELTA_HAT, &ex).unwrap();
        assert!(r.bound_holds && r.worst_eps <= r.f2_eps + r.residual_max + 1e-12, "{r:?}");
    }
}

#[test]
fn padded_ground_set() {
    let ex = Exec::default();
    let s = verify_decompositions(24, 3, DEFAULT_DELTA_HAT, Mode::Exhaustive, &ex).unwrap();
    assert_eq!(s.supports, 2024);
    assert!(s.max_distance <= 1e-12 && s.weights_exact);
    let p = StepUpParams::new(24, 3).unwrap();
    let f2 = BitFixingExtractor::parity(p.n).unwrap();
    let r = measure_stepup(24, 3, &f2, Mode::Exhaustive, DEFAULT_DELTA_HAT, &ex).unwrap();
    assert_eq!(r.supports, 2024);
    assert!(r.bound_holds);
}
