use pairwise_mwrc::model::{build_client_graph, canonicalize, ClientGraph, Ordering, OrderingDoc};
use pairwise_mwrc::optimal::{
    chain_ordering, max_common_rate_closed_form, max_sum_rate_closed_form, star_ordering, sum_clamp_active,
    v_transform, weak_bound_equivalent,
};
use pairwise_mwrc::prufer::{enumerate_codes, enumerate_trees, prufer_encode, tree_count, PruferCode};
use pairwise_mwrc::rate::{binding_neighbor, d_bound, d_value, ds_product, evaluate, pair_rate_bound, BoundKind};
use pairwise_mwrc::verify::cycle_edges;
use proptest::prelude::*;

fn snrs(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    n.prop_flat_map(|n| prop::collection::vec(0.01f64..1000.0, n))
}

/// Random labelled tree via a random Prüfer code.
fn tree_and_profile(n: std::ops::RangeInclusive<usize>, lo: f64) -> impl Strategy<Value = (ClientGraph, Vec<f64>)> {
    n.prop_flat_map(move |n| {
        (prop::collection::vec(1..=n, n - 2), prop::collection::vec(lo..500.0, n))
            .prop_map(move |(code, x)| (PruferCode::new(n, code).unwrap().decode(), x))
    })
}

fn edge_subset(n: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
    prop::sample::subsequence(pairs, 0..=n * (n - 1) / 2)
}

proptest! {
    #[test]
    fn feasible_iff_tree_with_n_minus_one_edges(
        (n, edges) in (2usize..=8).prop_flat_map(|n| (Just(n), edge_subset(n)))
    ) {
        let g = ClientGraph::from_edges(n, edges).unwrap();
        if g.edge_count() == n - 1 {
            prop_assert_eq!(g.is_feasible(), g.is_tree());
        }
        if g.is_feasible() {
            prop_assert!(g.edge_count() >= n - 1);
        }
    }

    #[test]
    fn removing_a_cycle_edge_keeps_feasibility(
        (n, edges) in (3usize..=8).prop_flat_map(|n| (Just(n), edge_subset(n)))
    ) {
        let g = ClientGraph::from_edges(n, edges).unwrap();
        prop_assume!(g.is_feasible());
        for (a, b) in cycle_edges(&g) {
            prop_assert!(g.without_edge(a, b).unwrap().is_feasible());
        }
    }

    #[test]
    fn canonicalize_is_idempotent(raw in snrs(2..=10)) {
        let p = canonicalize(&raw).unwrap();
        prop_assert!(p.values().windows(2).all(|w| w[0] <= w[1]));
        let mut labels = p.original_label().to_vec();
        labels.sort_unstable();
        prop_assert_eq!(labels, (1..=raw.len()).collect::<Vec<_>>());
        let again = canonicalize(p.values()).unwrap();
        prop_assert_eq!(again.values(), p.values());
        prop_assert_eq!(again.original_label(), &(1..=raw.len()).collect::<Vec<_>>()[..]);
    }

    #[test]
    fn ds_product_matches_sum_rate((g, x) in tree_and_profile(2..=9, 0.01)) {
        let p = canonicalize(&x).unwrap();
        let sum = evaluate(&g, &p, BoundKind::Weak).unwrap().sum_rate;
        let ds = ds_product(&g, &p).unwrap();
        let direct = d_value(sum, p.len());
        prop_assert!((ds - direct).abs() <= 1e-12 * ds.abs().max(direct.abs()), "{} vs {}", ds, direct);
    }

    #[test]
    fn binding_neighbor_has_max_snr((g, x) in tree_and_profile(2..=9, 0.01)) {
        let p = canonicalize(&x).unwrap();
        for kind in [BoundKind::Weak, BoundKind::Exact] {
            let r = evaluate(&g, &p, kind).unwrap();
            for i in 1..=p.len() {
                let j = binding_neighbor(&g, i, &p).unwrap();
                let max_nb = g.neighbors(i).iter().map(|&v| p.x(v)).fold(0.0, f64::max);
                prop_assert_eq!(p.x(j), max_nb);
                prop_assert_eq!(r.per_user[i - 1], pair_rate_bound(p.x(i), p.x(j), p.len() - 1, kind).unwrap());
            }
        }
    }

    #[test]
    fn weak_and_exact_agree_in_regime((g, x) in tree_and_profile(2..=9, 0.05)) {
        let p = canonicalize(&x).unwrap();
        let weak = evaluate(&g, &p, BoundKind::Weak).unwrap();
        let exact = evaluate(&g, &p, BoundKind::Exact).unwrap();
        if weak_bound_equivalent(&p) {
            prop_assert_eq!(&weak.per_user, &exact.per_user);
        }
        prop_assert!(exact.per_user.iter().all(|&r| r >= 0.0));
        prop_assert_eq!(exact.common_rate, exact.per_user.iter().copied().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn closed_forms_match_evaluated_trees(x in snrs(2..=9)) {
        let p = canonicalize(&x).unwrap();
        let n = p.len();
        let chain = build_client_graph(&chain_ordering(n).unwrap(), n).unwrap();
        let star = build_client_graph(&star_ordering(n).unwrap(), n).unwrap();
        prop_assert_eq!(
            max_common_rate_closed_form(&p),
            evaluate(&chain, &p, BoundKind::Weak).unwrap().common_rate
        );
        prop_assert_eq!(max_sum_rate_closed_form(&p), evaluate(&star, &p, BoundKind::Exact).unwrap().sum_rate);
        if !sum_clamp_active(&p) {
            prop_assert_eq!(max_sum_rate_closed_form(&p), evaluate(&star, &p, BoundKind::Weak).unwrap().sum_rate);
        }
    }

    #[test]
    fn v_transform_preserves_trees((g, _x) in tree_and_profile(3..=9, 1.0), pick in any::<prop::sample::Index>()) {
        let n = g.vertex_count();
        let centres: Vec<usize> = (1..=n).filter(|&v| g.degree(v) >= 2).collect();
        let i = centres[pick.index(centres.len())];
        let nb = g.neighbors(i);
        let (j, k) = (nb[0], nb[nb.len() - 1]);
        let h = v_transform(&g, i, j, k).unwrap();
        prop_assert_eq!(h.vertex_count(), n);
        prop_assert!(h.is_tree());
        prop_assert!(h.has_edge(j, k) && !h.has_edge(i, k));
        let back = v_transform(&h, j, i, k).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn prufer_round_trip((g, _x) in tree_and_profile(2..=12, 1.0)) {
        let code = prufer_encode(&g).unwrap();
        prop_assert_eq!(code.decode(), g);
        prop_assert_eq!(PruferCode::from_index(code.n(), code.index()), code);
    }

    #[test]
    fn ordering_json_round_trip(
        (n, pairs) in (2usize..=12).prop_flat_map(|n| (Just(n), prop::collection::vec((1..=n, 1..=n), 1..20))),
        with_labels in any::<bool>()
    ) {
        let pairs: Vec<_> = pairs.into_iter().filter(|(a, b)| a != b).collect();
        prop_assume!(!pairs.is_empty());
        let mut doc = OrderingDoc::new(n, &Ordering::new(pairs).unwrap());
        if with_labels {
            doc.labels = Some((1..=n).map(|i| format!("user \"{i}\"")).collect());
        }
        let text = doc.to_json();
        let back = OrderingDoc::from_json(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.to_json(), text);
    }
}

#[test]
fn monotonicity_of_rate_terms() {
    // f(x) = x(1 + 1/(x+a)) increasing, g(x) = 1 + 1/(a+x) decreasing
    let grid: Vec<f64> = (0..400).map(|k| 10f64.powf(-3.0 + k as f64 * 0.015)).collect();
    for &a in &grid {
        for w in grid.windows(2) {
            assert!(d_bound(w[1], a) > d_bound(w[0], a));
            assert!(1.0 + 1.0 / (a + w[1]) < 1.0 + 1.0 / (a + w[0]));
        }
    }
}

#[test]
fn all_snrs_at_least_one_imply_weak_regime() {
    for x1 in [1.0, 1.5, 10.0] {
        for xn in [x1, 2.0 * x1, 1e6] {
            assert!(weak_bound_equivalent(&canonicalize(&[x1, xn]).unwrap()));
        }
    }
}

#[test]
fn cayley_counts_and_bijection() {
    let expected = [1usize, 3, 16, 125, 1296, 16807];
    for (n, &count) in (2..=7).zip(&expected) {
        assert_eq!(tree_count(n) as usize, count);
        let trees: Vec<_> = enumerate_trees(n, 9).unwrap().collect();
        assert_eq!(trees.len(), count);
        assert!(trees.iter().all(ClientGraph::is_tree));
        if n <= 6 {
            let mut seen = std::collections::BTreeSet::new();
            for (code, tree) in enumerate_codes(n, 9).unwrap().zip(&trees) {
                assert_eq!(&prufer_encode(tree).unwrap(), &code);
                assert!(seen.insert(tree.edges().to_vec()));
            }
        }
    }
}

#[test]
fn feasible_edge_subsets_are_exactly_trees() {
    for n in 3..=5 {
        let r = pairwise_mwrc::verify::check_tree_equivalence(n);
        assert!(r.passed());
        let total_pairs = n * (n - 1) / 2;
        let choose = (0..n - 1).fold(1u64, |acc, k| acc * (total_pairs - k) as u64 / (k as u64 + 1));
        assert_eq!(r.checked, choose);
    }
}
