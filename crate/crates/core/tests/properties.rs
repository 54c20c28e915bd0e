mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rce_core::election::committee_distance;
use rce_core::exact::{
    enumerate_winners, solve_rce_av, solve_rce_exhaustive, solve_rce_shrunk, DEFAULT_BUDGET,
};
use rce_core::greedy::{
    greedy_enumerate, greedy_run, lexicographic_order, selectable_prefix, solve_rce_greedycc_fpt_n,
    TiePolicy,
};
use rce_core::reduction::{reduce_is_to_rce, reduction_weights, Graph};
use rce_core::rule::{Rule, Weight};
use rce_core::solve::{committee_wins, solve, Solver};
use rce_core::{CandidateId, Committee, Election, RuleSpec};

fn rules() -> impl Strategy<Value = Rule> {
    prop_oneof![
        Just(Rule::Av),
        Just(Rule::Pav),
        Just(Rule::Cc),
        Just(Rule::Owa(vec![
            Weight::from_integer(1),
            Weight::from_integer(1),
            Weight::new(1, 3),
            Weight::new(1, 4),
            Weight::new(0, 1),
        ])),
    ]
}

fn rng_seed() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn winner_enumeration_matches_brute_force(seed in rng_seed(), rule in rules()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 7, 8, 4, &rule, false);
        let w = rule.weights(inst.k).unwrap();
        let got: Vec<Vec<usize>> = enumerate_winners(&inst.after, inst.k, &w, DEFAULT_BUDGET)
            .unwrap()
            .iter()
            .map(Committee::indices)
            .collect();
        prop_assert_eq!(got, brute_winners(&inst.after, inst.k, &rule));
    }

    #[test]
    fn solvers_match_brute_force(seed in rng_seed(), rule in rules()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 7, 8, 4, &rule, false);
        let w = rule.weights(inst.k).unwrap();
        let winners = brute_winners(&inst.after, inst.k, &rule);
        let best = closest(&inst.committee, winners.clone());
        let spec = RuleSpec { rule: rule.clone(), greedy: false };
        let mut answers = vec![
            solve_rce_exhaustive(&inst, &w, DEFAULT_BUDGET).unwrap(),
            solve_rce_shrunk(&inst, &w, DEFAULT_BUDGET).unwrap(),
            solve(&inst, &spec, Solver::Auto, DEFAULT_BUDGET).unwrap().1,
        ];
        if w.is_av() {
            answers.push(solve_rce_av(&inst, &w).unwrap());
        }
        for a in answers {
            prop_assert_eq!(a.min_distance, Some(best));
            prop_assert_eq!(a.feasible, best <= inst.ell);
            let witness = a.witness.unwrap();
            prop_assert!(winners.contains(&witness.indices()));
            prop_assert_eq!(committee_distance(&inst.committee, &witness).unwrap(), best);
        }
    }

    #[test]
    fn greedy_enumeration_is_complete(seed in rng_seed(), rule in rules()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 7, 8, 4, &rule, true);
        let w = rule.weights(inst.k).unwrap();
        let all = greedy_enumerate(&inst.after, inst.k, &w, usize::MAX, None).unwrap();
        prop_assert!(!all.truncated);
        let got: BTreeSet<Vec<usize>> = all.committees.iter().map(Committee::indices).collect();
        prop_assert_eq!(got.len(), all.committees.len());
        prop_assert_eq!(&got, &brute_greedy_winners(&inst.after, inst.k, &rule));
        // the first committee without a preference is the lexicographic one
        let lexi = Committee::new(lexicographic_order(&inst.after, inst.k, &w).unwrap()).unwrap();
        prop_assert_eq!(&all.committees[0], &lexi);
        // capped runs return at most `cap` of the winners
        let capped = greedy_enumerate(&inst.after, inst.k, &w, 2, Some(&inst.committee)).unwrap();
        prop_assert!(capped.committees.len() <= 2);
        prop_assert!(capped.committees.iter().all(|c| got.contains(&c.indices())));
    }

    #[test]
    fn subset_dp_matches_order_enumeration(seed in rng_seed(), rule in rules()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 7, 7, 4, &rule, true);
        let w = rule.weights(inst.k).unwrap();
        let e = &inst.after;
        for size in 1..=inst.k {
            for t in itertools::Itertools::combinations(0..e.num_candidates(), size) {
                let ids: Vec<CandidateId> = t.iter().map(|&c| CandidateId::from(c)).collect();
                let order = selectable_prefix(e, &w, &ids).unwrap();
                prop_assert_eq!(order.is_some(), brute_reachable(e, &rule, &t));
                if let Some(order) = order {
                    // the realizing order replays as a forced run of the same length
                    let run = greedy_run(e, size, &w, &TiePolicy::Forced(order.clone())).unwrap();
                    prop_assert_eq!(run.order, order);
                }
            }
        }
    }

    #[test]
    fn greedy_av_coincides_with_av(seed in rng_seed()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 7, 8, 4, &Rule::Av, false);
        let greedy = brute_greedy_winners(&inst.after, inst.k, &Rule::Av);
        let plain: BTreeSet<Vec<usize>> = brute_winners(&inst.after, inst.k, &Rule::Av).into_iter().collect();
        prop_assert_eq!(&greedy, &plain);
        let spec: RuleSpec = "greedy-av".parse().unwrap();
        let (_, a) = solve(&inst, &spec, Solver::Greedy, DEFAULT_BUDGET).unwrap();
        let (_, b) = solve(&inst, &spec, Solver::Av, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(a.min_distance, b.min_distance);
    }

    #[test]
    fn greedy_cc_solvers_agree(seed in rng_seed()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 3, 10, 10, &Rule::Cc, true);
        let w = Rule::Cc.weights(inst.k).unwrap();
        let best = closest(&inst.committee, brute_greedy_winners(&inst.after, inst.k, &Rule::Cc));
        let fpt = solve_rce_greedycc_fpt_n(&inst, &w, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(fpt.min_distance, Some(best));
        let witness = fpt.witness.unwrap();
        let spec: RuleSpec = "greedy-cc".parse().unwrap();
        prop_assert!(committee_wins(&inst.after, &witness, &spec, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn reduction_structure(
        nu in 1usize..=7,
        edges in prop::collection::btree_set((0usize..7, 0usize..7), 0..12),
        kappa in 1usize..=3,
        rule_idx in 0usize..3,
    ) {
        let edges: Vec<(usize, usize)> = edges
            .into_iter()
            .filter(|&(u, v)| u < v && v < nu)
            .collect();
        let g = Graph::new(nu, edges).unwrap();
        let rule = [Rule::Pav, Rule::Cc, Rule::Owa(vec![
            Weight::from_integer(1), Weight::from_integer(1), Weight::from_integer(1),
            Weight::new(1, 2), Weight::new(1, 2), Weight::new(1, 2),
        ])][rule_idx].clone();
        let w = reduction_weights(&rule, kappa).unwrap();
        let out = reduce_is_to_rce(&g, kappa, &w).unwrap();
        let inst = &out.instance;
        let s = w.unit_prefix();
        prop_assert_eq!(out.s_pad, s - 1);
        prop_assert_eq!(inst.k, kappa + s - 1);
        prop_assert_eq!(out.dummies.len(), kappa);
        prop_assert_eq!(
            rce_core::election::election_distance(&inst.before, &inst.after),
            Some(1)
        );
        prop_assert!(inst.before.ballots().iter().all(|b| b.len() <= s + 1));
        for c in out.vertex_candidates.iter().chain(&out.dummies) {
            prop_assert_eq!(inst.before.approvers(*c).len(), (nu + kappa) * out.t);
        }
    }
}

#[test]
fn class_shrinking_keeps_pav_answers_on_clone_heavy_elections() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        // few distinct ballots over many candidates produce large classes
        let base = random_ballots(&mut rng, 3, 4, 0.5);
        let m = 12;
        let widen = |b: &Vec<usize>| -> Vec<usize> {
            b.iter().flat_map(|&c| [c, c + 4, c + 8]).collect()
        };
        let before: Vec<Vec<usize>> = base.iter().map(widen).collect();
        let after = flip_pairs(&mut rng, &before, m, 2);
        let before = Election::from_lists(m, &before).unwrap();
        let after = Election::from_lists(m, &after).unwrap();
        let k = 4;
        let s = &brute_winners(&before, k, &Rule::Pav)[0];
        let inst = rce_core::RceInstance::new(before, after, Committee::from_indices(s).unwrap(), 1).unwrap();
        let w = Rule::Pav.weights(k).unwrap();
        let truth = solve_rce_exhaustive(&inst, &w, DEFAULT_BUDGET).unwrap();
        let shrunk = solve_rce_shrunk(&inst, &w, DEFAULT_BUDGET).unwrap();
        assert_eq!(truth.min_distance, shrunk.min_distance);
    }
}
