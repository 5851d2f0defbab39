use combprism::combinatorics::{
    extend_matching_to_2matching, restrict_2matching_to_matching, OddSet, PerfectMatching, Tour,
};
use combprism::graph::{Edge, PrismGraph};
use combprism::inequalities::{
    comb_slack, enumerate_uniform_combs, odd_set_slack, CombInequality, OddSetInequality,
};
use combprism::protocol::{run_pm_protocol, LocalCombSlack, ProtocolConfig, WitnessRule};
use combprism::reduction::{reduce, witness_choices, ReductionInstance, TourPolicy};
use num_rational::Rational64;
use proptest::prelude::*;

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn matching_from(perm: &[usize]) -> PerfectMatching {
    let edges = perm
        .chunks(2)
        .map(|p| Edge::new(p[0], p[1]).unwrap())
        .collect();
    PerfectMatching::new(perm.len(), edges).unwrap()
}

/// Even `m`, a perfect matching of `K_m` and an odd set of size at least 5.
fn pm_instance(m_values: &'static [usize]) -> impl Strategy<Value = (PerfectMatching, OddSet)> {
    proptest::sample::select(m_values).prop_flat_map(|m| {
        let sizes: Vec<usize> = (5..m).step_by(2).collect();
        (
            permutation(m),
            permutation(m),
            proptest::sample::select(sizes),
        )
            .prop_map(|(pm, order, size)| {
                let set = OddSet::new(pm.len(), order[..size].to_vec()).unwrap();
                (matching_from(&pm), set)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prism_boundary_is_symmetric(base in 3usize..8, t in 2usize..6, bits in any::<u64>()) {
        let prism = PrismGraph::new(base, t).unwrap();
        let n = prism.vertex_count();
        let inside: Vec<usize> = (0..n).filter(|&v| bits >> (v % 64) & 1 == 1).collect();
        let outside: Vec<usize> = (0..n).filter(|&v| bits >> (v % 64) & 1 == 0).collect();
        let a = prism.graph().delta(&inside).unwrap();
        let b = prism.graph().delta(&outside).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn uniform_combs_hold_on_random_tours(
        (n, cycle) in (7usize..10).prop_flat_map(|n| (Just(n), permutation(n))),
        pick in any::<usize>(),
    ) {
        let combs = enumerate_uniform_combs(n, 1, 2, 2000).unwrap();
        let comb = combs[pick % combs.len()].clone();
        let tour = Tour::from_cycle(cycle).unwrap();
        prop_assert!(comb_slack(&CombInequality::new(comb), &tour).unwrap() >= 0);
    }

    #[test]
    fn seeded_tours_pass_every_condition(
        (matching, set) in pm_instance(&[6, 8, 10]),
        t in 2usize..5,
        seed in any::<u64>(),
    ) {
        let choices = witness_choices(&set, &matching);
        prop_assume!(!choices.is_empty());
        let (w1, w3) = choices[seed as usize % choices.len()];
        let h = 1 + seed as usize % (t - 1);
        let inst = ReductionInstance::from_choice(set, matching, w1, w3, h, t).unwrap();
        let r = reduce(&inst, TourPolicy::Seeded(seed)).unwrap();
        prop_assert!(r.report.passed(), "{:?}", r.report);
        prop_assert_eq!(r.sl_comb, r.sl_odd);
    }

    #[test]
    fn exact_protocol_matches_odd_set_slack(
        (matching, set) in pm_instance(&[6, 8, 10]),
        t in 2usize..5,
        seed in any::<u64>(),
    ) {
        let config = ProtocolConfig {
            witness_rule: WitnessRule::Random,
            seed,
            ..ProtocolConfig::exact(1, t)
        };
        let out = run_pm_protocol(&set, &matching, &config, &LocalCombSlack::default()).unwrap();
        let expected = odd_set_slack(&OddSetInequality::new(set), &matching).unwrap();
        prop_assert_eq!(out.output, Rational64::from_integer(expected));
    }

    #[test]
    fn extension_round_trips(pm in prop_oneof![permutation(2), permutation(4), permutation(8), permutation(10)]) {
        let matching = matching_from(&pm);
        let prism = PrismGraph::new(pm.len(), 3).unwrap();
        let x = extend_matching_to_2matching(&matching).unwrap();
        prop_assert!(x.edges().iter().all(|&e| prism.graph().contains_edge(e)));
        prop_assert_eq!(restrict_2matching_to_matching(&x, &prism).unwrap(), matching.edges().to_vec());
    }
}

#[test]
fn reduction_feeds_the_protocol() {
    // |S| = 7 on K_10 with three crossing matching edges.
    let matching = matching_from(&[0, 1, 2, 3, 4, 7, 5, 8, 6, 9]);
    let set = OddSet::new(10, vec![0, 1, 2, 3, 4, 5, 6]).unwrap();
    let expected = odd_set_slack(&OddSetInequality::new(set.clone()), &matching).unwrap();
    assert_eq!(expected, 2);
    for t in 2..=4 {
        for h in 1..t {
            let out = run_pm_protocol(
                &set,
                &matching,
                &ProtocolConfig::exact(h, t),
                &LocalCombSlack::default(),
            )
            .unwrap();
            assert_eq!(out.output, Rational64::from_integer(expected));
            let inst =
                ReductionInstance::new(set.clone(), matching.clone(), out.witnesses.unwrap(), h, t)
                    .unwrap();
            let r = reduce(&inst, TourPolicy::Lexicographic).unwrap();
            assert!(r.report.passed());
            assert_eq!(r.sl_comb, expected);
        }
    }
}
