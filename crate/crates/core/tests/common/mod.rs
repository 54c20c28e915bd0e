//! Random instances and brute-force oracles shared by integration tests.
//! The oracles recompute everything from ballots with rational weights and
//! do not use the library's scoring code.

#![allow(dead_code)]

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rce_core::rule::{Rule, Weight};
use rce_core::{Committee, Election, RceInstance};

pub fn random_ballots(rng: &mut ChaCha8Rng, n: usize, m: usize, density: f64) -> Vec<Vec<usize>> {
    (0..n)
        .map(|_| loop {
            let b: Vec<usize> = (0..m).filter(|_| rng.gen_bool(density)).collect();
            if !b.is_empty() {
                break b;
            }
        })
        .collect()
}

/// Flips `flips` random (voter, candidate) pairs, keeping ballots non-empty.
pub fn flip_pairs(rng: &mut ChaCha8Rng, ballots: &[Vec<usize>], m: usize, flips: usize) -> Vec<Vec<usize>> {
    let mut sets: Vec<BTreeSet<usize>> = ballots.iter().map(|b| b.iter().copied().collect()).collect();
    for _ in 0..flips {
        let v = rng.gen_range(0..sets.len());
        let c = rng.gen_range(0..m);
        // re-insert when the flip would empty the ballot
        if !sets[v].remove(&c) || sets[v].is_empty() {
            sets[v].insert(c);
        }
    }
    sets.into_iter().map(|s| s.into_iter().collect()).collect()
}

pub fn rational_score(e: &Election, s: &[usize], rule: &Rule) -> Weight {
    let mut total = Weight::from_integer(0);
    for b in e.ballots() {
        let hits = b.approved().iter().filter(|c| s.contains(&c.index())).count();
        for j in 1..=hits {
            total += rule.lambda(j).unwrap();
        }
    }
    total
}

/// All maximum-score k-subsets, by full enumeration.
pub fn brute_winners(e: &Election, k: usize, rule: &Rule) -> Vec<Vec<usize>> {
    let mut best: Option<Weight> = None;
    let mut winners = Vec::new();
    for s in (0..e.num_candidates()).combinations(k) {
        let score = rational_score(e, &s, rule);
        match best {
            Some(b) if score < b => {}
            Some(b) if score == b => winners.push(s),
            _ => {
                best = Some(score);
                winners = vec![s];
            }
        }
    }
    winners
}

fn marginal(e: &Election, s: &[usize], c: usize, rule: &Rule) -> Weight {
    let mut with = s.to_vec();
    with.push(c);
    rational_score(e, &with, rule) - rational_score(e, s, rule)
}

/// Candidates of maximum marginal contribution after `s`, ascending.
pub fn brute_ties(e: &Election, s: &[usize], rule: &Rule) -> Vec<usize> {
    let gains: Vec<(usize, Weight)> = (0..e.num_candidates())
        .filter(|c| !s.contains(c))
        .map(|c| (c, marginal(e, s, c, rule)))
        .collect();
    let top = gains.iter().map(|(_, g)| *g).max().unwrap();
    gains.into_iter().filter(|(_, g)| *g == top).map(|(c, _)| c).collect()
}

/// Every committee some tie-breaking of the greedy rule produces.
pub fn brute_greedy_winners(e: &Election, k: usize, rule: &Rule) -> BTreeSet<Vec<usize>> {
    fn go(e: &Election, k: usize, rule: &Rule, s: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
        if s.len() == k {
            let mut c = s.clone();
            c.sort_unstable();
            out.insert(c);
            return;
        }
        for c in brute_ties(e, s, rule) {
            s.push(c);
            go(e, k, rule, s, out);
            s.pop();
        }
    }
    let mut out = BTreeSet::new();
    go(e, k, rule, &mut Vec::new(), &mut out);
    out
}

/// Whether some order of `t` is a valid greedy run. Enumerates the orders
/// of `t` depth first, abandoning a prefix as soon as it is not a valid run.
pub fn brute_reachable(e: &Election, rule: &Rule, t: &[usize]) -> bool {
    fn go(e: &Election, rule: &Rule, rest: &mut Vec<usize>, prefix: &mut Vec<usize>) -> bool {
        if rest.is_empty() {
            return true;
        }
        let ties = brute_ties(e, prefix, rule);
        for i in 0..rest.len() {
            let c = rest[i];
            if !ties.contains(&c) {
                continue;
            }
            rest.remove(i);
            prefix.push(c);
            let ok = go(e, rule, rest, prefix);
            prefix.pop();
            rest.insert(i, c);
            if ok {
                return true;
            }
        }
        false
    }
    go(e, rule, &mut t.to_vec(), &mut Vec::new())
}

pub fn distance(s: &[usize], t: &[usize]) -> usize {
    s.len() - s.iter().filter(|c| t.contains(c)).count()
}

/// Random instance whose committee is a random winner of `before` under a
/// non-greedy rule (or a random greedy winner when `greedy`).
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    n_max: usize,
    m_max: usize,
    k_max: usize,
    rule: &Rule,
    greedy: bool,
) -> RceInstance {
    let n = rng.gen_range(1..=n_max);
    let m = rng.gen_range(2..=m_max);
    let k = rng.gen_range(1..=k_max.min(m));
    let density = rng.gen_range(0.15..0.7);
    let before = random_ballots(rng, n, m, density);
    let flips = rng.gen_range(0..=n.max(2));
    let after = flip_pairs(rng, &before, m, flips);
    let before = Election::from_lists(m, &before).unwrap();
    let after = Election::from_lists(m, &after).unwrap();
    let winners: Vec<Vec<usize>> = if greedy {
        brute_greedy_winners(&before, k, rule).into_iter().collect()
    } else {
        brute_winners(&before, k, rule)
    };
    let s = &winners[rng.gen_range(0..winners.len())];
    let ell = rng.gen_range(0..=k);
    RceInstance::new(before, after, Committee::from_indices(s).unwrap(), ell).unwrap()
}

/// Closest winner distance according to a list of winners.
pub fn closest(s: &Committee, winners: impl IntoIterator<Item = Vec<usize>>) -> usize {
    let s = s.indices();
    winners.into_iter().map(|w| distance(&s, &w)).min().unwrap()
}
