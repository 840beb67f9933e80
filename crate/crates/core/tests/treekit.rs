use proptest::prelude::*;
use zfx_core::rng::seeded;
use zfx_core::treekit::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn leaf_classification_counts(leaves in 2usize..60, seed in any::<u64>()) {
        let t = random_tree(leaves, &mut seeded(seed)).unwrap();
        let c = classify_leaves(&t);
        prop_assert_eq!(c.twins.len() + c.lone_leaves.len(), leaves);
        prop_assert_eq!(c.twins.len(), 2 * c.twin_pairs.len());
        prop_assert_eq!(c.twin_parents.len(), c.twin_pairs.len());
        prop_assert_eq!(c.lone_parents.len(), c.lone_leaves.len());
        prop_assert!(!c.twin_pairs.is_empty());
        prop_assert_eq!(t.edge_count(), 2 * leaves - 2);
    }

    #[test]
    fn skeleton_round_trip(leaves in 2usize..60, seed in any::<u64>()) {
        let t = random_tree(leaves, &mut seeded(seed)).unwrap();
        let sk = skeleton(&t).unwrap();
        let mut twins = classify_leaves(&t).twins;
        twins.sort_unstable();
        let mut got = sk.leaves();
        got.sort_unstable();
        prop_assert_eq!(got, twins);
        // skeleton leaves all come in twin pairs
        prop_assert!(classify_leaves(&sk).lone_leaves.is_empty());
        let dec = skeleton_decomposition(&t).unwrap();
        let attached: usize = dec.edge_attachments.iter().map(Vec::len).sum::<usize>() + dec.root_chain.len();
        prop_assert_eq!(attached, classify_leaves(&t).lone_leaves.len());
        prop_assert_eq!(dec.edge_attachments.len(), inner_edges(&sk).len());
        prop_assert!(reassemble(&dec).same_as(&t));
    }

    #[test]
    fn parens_round_trip(leaves in 1usize..40, seed in any::<u64>()) {
        let t = random_tree(leaves, &mut seeded(seed)).unwrap();
        let back = Tree::parse(&t.to_parens()).unwrap();
        prop_assert!(back.same_shape(&t));
        prop_assert_eq!(back.leaves(), t.leaves());
    }

    #[test]
    fn generated_subtree_has_requested_leaves(depth in 1usize..7, mask in any::<u64>()) {
        let t = complete_tree(depth).unwrap();
        let n = 1usize << depth;
        let x: Vec<usize> = (1..=n).filter(|&i| mask >> ((i - 1) % 64) & 1 == 1).collect();
        prop_assume!(!x.is_empty());
        let s = leaf_generated_subtree(&t, &x).unwrap();
        prop_assert_eq!(s.leaves(), x.clone());
        prop_assert_eq!(s.node_count(), 2 * x.len() - 1);
    }
}

#[test]
fn shapes_are_catalan() {
    let catalan = [1, 1, 2, 5, 14, 42, 132, 429];
    for (i, &c) in catalan.iter().enumerate() {
        let n = i + 1;
        let shapes = all_shapes(n);
        assert_eq!(shapes.len(), c);
        for (i, a) in shapes.iter().enumerate() {
            assert!(shapes[i + 1..].iter().all(|b| !a.same_shape(b)));
        }
    }
}

#[test]
fn skeleton_decomposition_over_all_shapes() {
    for n in 2..=8 {
        for t in all_shapes(n) {
            let dec = skeleton_decomposition(&t).unwrap();
            assert!(reassemble(&dec).same_as(&t), "{}", t.to_parens());
        }
    }
}

#[test]
fn subtrees_never_gain_twins() {
    for n in 1..=10 {
        for t in all_shapes(n) {
            let c = classify_leaves(&t);
            let twins = c.twins.len();
            let sk = skeleton(&t).map(|s| s.size()).unwrap_or(1);
            if n >= 2 {
                assert!(c.lone_leaves.len() <= n - 2);
            }
            for mask in 1u32..1 << n {
                let x: Vec<usize> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
                let s = leaf_generated_subtree(&t, &x).unwrap();
                assert!(classify_leaves(&s).twins.len() <= twins);
                if x.len() >= 2 {
                    assert!(skeleton(&s).unwrap().size() <= sk);
                }
            }
        }
    }
}

#[test]
fn reassembly_on_random_trees() {
    let mut rng = seeded(17);
    for i in 0..10_000 {
        let t = random_tree(2 + i % 11, &mut rng).unwrap();
        assert!(reassemble(&skeleton_decomposition(&t).unwrap()).same_as(&t));
    }
}

#[test]
fn inner_edges_ignore_labels() {
    let mut rng = seeded(5);
    for i in 0..500 {
        let t = random_tree(2 + i % 20, &mut rng).unwrap();
        let before = inner_edges(&skeleton(&t).unwrap());
        let after = inner_edges(&skeleton(&t.relabeled()).unwrap());
        assert_eq!(before, after);
    }
}
