use proptest::prelude::*;
use skewjoin::data::{read_relation, write_relation};
use skewjoin::rational::{int, ratio};
use skewjoin::{
    assign_classes, brute_force_join, build_frequency_tree, execute_plan_with, fk_classes,
    freqclass_plan, generate_histogram, hash_plan, hjps_plan, ideal_workload, join_cardinality,
    join_selectivity, materialize_relation, product_classes, prpd_plan, relative_frequencies,
    verify_output, Distribution, ExecuteOptions, OracleBudget, RouteAction, ValueHistogram,
};

fn dense(max_m: usize, max_count: u64) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..=max_count, 1..=max_m)
}

/// Two histograms over the same domain, each with at least one tuple.
fn pair(max_m: usize, max_count: u64) -> impl Strategy<Value = (ValueHistogram, ValueHistogram)> {
    (1..=max_m).prop_flat_map(move |m| {
        let side = prop::collection::vec(0..=max_count, m)
            .prop_filter("non-empty", |c| c.iter().any(|&x| x > 0));
        (side.clone(), side).prop_map(|(a, b)| {
            (
                ValueHistogram::from_dense(&a).unwrap(),
                ValueHistogram::from_dense(&b).unwrap(),
            )
        })
    })
}

proptest! {
    #[test]
    fn histogram_json_round_trip(counts in dense(40, 50)) {
        let h = ValueHistogram::from_dense(&counts).unwrap();
        let text = serde_json::to_string(&h).unwrap();
        let back: ValueHistogram = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn relation_binary_round_trip(counts in dense(20, 10), seed in any::<u64>()) {
        let h = ValueHistogram::from_dense(&counts).unwrap();
        let rel = materialize_relation(&h, "R", seed).unwrap();
        let mut buf = Vec::new();
        write_relation(&rel, &mut buf).unwrap();
        let back = read_relation(buf.as_slice(), "R", h.domain_size()).unwrap();
        prop_assert_eq!(back.tuples, rel.tuples);
    }

    #[test]
    fn frequencies_sum_to_one(counts in dense(40, 50).prop_filter("non-empty", |c| c.iter().any(|&x| x > 0))) {
        let h = ValueHistogram::from_dense(&counts).unwrap();
        prop_assert_eq!(relative_frequencies(&h).unwrap().sum(), int(1));
    }

    #[test]
    fn generator_hits_total_exactly(m in 1u32..200, total in 0u64..5000, theta in 0.0f64..2.5, seed in any::<u64>()) {
        let h = generate_histogram(m, total, &Distribution::Zipf { theta }, seed).unwrap();
        prop_assert_eq!(h.total(), total);
        prop_assert_eq!(h, generate_histogram(m, total, &Distribution::Zipf { theta }, seed).unwrap());
    }

    #[test]
    fn selectivity_matches_cardinality((hr, hs) in pair(24, 30)) {
        let mu = join_selectivity(&relative_frequencies(&hr).unwrap(), &relative_frequencies(&hs).unwrap()).unwrap();
        prop_assert!(*mu.value() >= int(0) && *mu.value() <= int(1));
        let card = join_cardinality(&hr, &hs).unwrap();
        prop_assert_eq!(mu.value() * int(hr.total()) * int(hs.total()), int(card));
    }

    #[test]
    fn cardinality_matches_brute_force((hr, hs) in pair(12, 12), seed in any::<u64>()) {
        let r = materialize_relation(&hr, "R", seed).unwrap();
        let s = materialize_relation(&hs, "S", seed ^ 1).unwrap();
        let joined = brute_force_join(&r, &s, OracleBudget::default()).unwrap();
        prop_assert_eq!(joined.len() as u128, join_cardinality(&hr, &hs).unwrap());
        prop_assert!(joined.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn product_class_workloads_sum_to_join_size((hr, hs) in pair(30, 40)) {
        let cs = product_classes(&relative_frequencies(&hr).unwrap(), &relative_frequencies(&hs).unwrap()).unwrap();
        let (class_loads, leaf_loads) = cs.workloads(hr.total(), hs.total());
        let total = int(join_cardinality(&hr, &hs).unwrap());
        prop_assert_eq!(class_loads.iter().sum::<skewjoin::rational::Ratio>(), total.clone());
        prop_assert_eq!(leaf_loads.values().sum::<skewjoin::rational::Ratio>(), total);
        for w in cs.classes.windows(2) {
            prop_assert!(w[0].key > w[1].key);
        }
    }

    #[test]
    fn fk_agrees_with_product_on_unique_keys(
        keys in prop::collection::vec(any::<bool>(), 1..30).prop_filter("some key", |k| k.iter().any(|&b| b)),
        fk in dense(30, 20),
    ) {
        let m = keys.len().min(fk.len());
        let pk = ValueHistogram::from_dense(&keys[..m].iter().map(|&b| u64::from(b)).collect::<Vec<_>>()).unwrap();
        let hs = ValueHistogram::from_dense(&fk[..m]).unwrap();
        prop_assume!(!pk.is_empty() && !hs.is_empty());
        let fk_set = fk_classes(&pk, &relative_frequencies(&hs).unwrap()).unwrap();
        let prod = product_classes(&relative_frequencies(&pk).unwrap(), &relative_frequencies(&hs).unwrap()).unwrap();
        let (fk_loads, _) = fk_set.workloads(pk.total(), hs.total());
        let (prod_loads, _) = prod.workloads(pk.total(), hs.total());
        let total = int(join_cardinality(&pk, &hs).unwrap());
        prop_assert_eq!(fk_loads.iter().sum::<skewjoin::rational::Ratio>(), total.clone());
        prop_assert_eq!(prod_loads.iter().sum::<skewjoin::rational::Ratio>(), total);
    }

    #[test]
    fn assignment_respects_bound((hr, hs) in pair(30, 40), n in 1usize..10) {
        let cs = product_classes(&relative_frequencies(&hr).unwrap(), &relative_frequencies(&hs).unwrap()).unwrap();
        let tree = build_frequency_tree(&cs);
        prop_assert_eq!(tree.leaf_count(), cs.support().len());
        let (class_loads, leaf_loads) = cs.workloads(hr.total(), hs.total());
        let a = assign_classes(&tree, &class_loads, &leaf_loads, n).unwrap();
        let ideal = ideal_workload(&cs, hr.total(), hs.total(), n).unwrap();
        let max_leaf = leaf_loads.values().max().cloned().unwrap_or_else(|| int(0));
        prop_assert!(a.max_load() <= ideal + max_leaf);
        prop_assert_eq!(a.owner.len(), tree.leaf_count());
        prop_assert_eq!(a.total_load(), class_loads.iter().sum::<skewjoin::rational::Ratio>());
    }

    #[test]
    fn every_strategy_reproduces_the_join((hr, hs) in pair(16, 25), n in 1usize..9, seed in any::<u64>()) {
        let r = materialize_relation(&hr, "R", seed).unwrap();
        let s = materialize_relation(&hs, "S", seed.wrapping_add(1)).unwrap();
        let plans = [
            hash_plan(hr.domain_size(), n).unwrap(),
            hjps_plan(&hr, &hs, n).unwrap(),
            prpd_plan(&hr, &hs, n, &ratio(1, n as u64)).unwrap(),
            freqclass_plan(&hr, &hs, n).unwrap(),
        ];
        for plan in plans {
            plan.validate().unwrap();
            let opts = ExecuteOptions { collect_output: true, ..Default::default() };
            let rep = execute_plan_with(&plan, &r, &s, opts).unwrap();
            prop_assert!(verify_output(&rep, &r, &s, OracleBudget::default()).unwrap(), "{}", plan.strategy);
            let digest_only = execute_plan_with(&plan, &r, &s, ExecuteOptions::default()).unwrap();
            prop_assert!(verify_output(&digest_only, &r, &s, OracleBudget::default()).unwrap());
            prop_assert_eq!(rep.output_digest, digest_only.output_digest);
        }
    }

    #[test]
    fn skew_set_matches_integer_threshold((hr, hs) in pair(20, 60), n in 1usize..12) {
        let plan = hjps_plan(&hr, &hs, n).unwrap();
        let stats = plan.skew_stats.as_ref().unwrap();
        for (v, &vwl) in &stats.vwl {
            let expected = vwl * n as u128 >= 2 * stats.tpc;
            prop_assert_eq!(stats.skewed.contains(v), expected);
        }
        for w in stats.skewed.windows(2) {
            prop_assert!(stats.vwl_of(w[0]) >= stats.vwl_of(w[1]));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (_, group) in plan.dedicated_groups() {
            for p in group {
                prop_assert!(seen.insert(*p));
                prop_assert!(!plan.residual_processors.contains(p) || plan.residual_processors.len() == n);
            }
        }
        prop_assert_eq!(&plan, &hjps_plan(&hr, &hs, n).unwrap());
    }

    #[test]
    fn dedicated_groups_account_for_broadcast((hr, hs) in pair(12, 60), n in 2usize..9, seed in any::<u64>()) {
        let plan = hjps_plan(&hr, &hs, n).unwrap();
        let r = materialize_relation(&hr, "R", seed).unwrap();
        let s = materialize_relation(&hs, "S", !seed).unwrap();
        let rep = execute_plan_with(&plan, &r, &s, ExecuteOptions::counts_only()).unwrap();
        // with no residual set, zero-work values may land inside a group
        prop_assume!(!plan.residual_processors.is_empty());
        for (v, group) in plan.dedicated_groups() {
            let d = plan.directive(v).unwrap();
            let recv_r: u64 = group.iter().map(|&p| rep.loads[p].received_r).sum();
            let recv_s: u64 = group.iter().map(|&p| rep.loads[p].received_s).sum();
            let g = group.len() as u64;
            if d.r == RouteAction::HashInto {
                prop_assert_eq!((recv_r, recv_s), (hr.count(v), g * hs.count(v)));
            } else {
                prop_assert_eq!((recv_r, recv_s), (g * hr.count(v), hs.count(v)));
            }
        }
        prop_assert_eq!(rep.total_joins, join_cardinality(&hr, &hs).unwrap());
    }
}
