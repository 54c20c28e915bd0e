//! Greedy (sequential) Thiele rules.
//!
//! A greedy rule adds, `k` times, a candidate of maximum marginal
//! contribution. Under parallel-universe tie-breaking every committee some
//! resolution of the ties produces is a winner. Since marginals depend only
//! on the set selected so far, searches over runs are searches over sets.

use std::collections::HashSet;

use itertools::Itertools;

use crate::election::{candidate_classes, committee_distance, CandidateId, Committee, Election};
use crate::error::{config, precondition, Error, Result};
use crate::exact::{binomial, check_budget, shrink_by_classes};
use crate::instance::{RceAnswer, RceInstance};
use crate::rule::OwaWeights;
use crate::score::Tally;

/// How ties between candidates of equal marginal contribution are broken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TiePolicy {
    /// Lowest candidate index first.
    Lexicographic,
    /// Explore ties, stopping after `cap` distinct committees. As a single
    /// run this follows the first branch, i.e. behaves lexicographically.
    Enumerate(usize),
    /// Pick exactly these candidates, in this order.
    Forced(Vec<CandidateId>),
}

/// Log of one greedy execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyRun {
    pub order: Vec<CandidateId>,
    /// Integer-scaled marginal contribution of each pick.
    pub round_marginals: Vec<i64>,
    /// Every candidate attaining the maximum marginal in each round, ascending.
    pub tie_sets: Vec<Vec<CandidateId>>,
}

impl GreedyRun {
    pub fn committee(&self) -> Committee {
        Committee::new(self.order.iter().copied()).expect("greedy picks are distinct")
    }
}

fn check_size(e: &Election, k: usize, w: &OwaWeights) -> Result<()> {
    if k > e.num_candidates() {
        return Err(precondition(format!(
            "committee size {k} exceeds {} candidates",
            e.num_candidates()
        )));
    }
    if k > w.len() {
        return Err(config(format!("committee size {k} but only {} weights", w.len())));
    }
    Ok(())
}

pub fn greedy_run(e: &Election, k: usize, w: &OwaWeights, policy: &TiePolicy) -> Result<GreedyRun> {
    check_size(e, k, w)?;
    if let TiePolicy::Forced(order) = policy {
        if order.len() != k {
            return Err(precondition(format!(
                "forced order has {} candidates, expected {k}",
                order.len()
            )));
        }
    }
    if let TiePolicy::Enumerate(0) = policy {
        return Err(precondition("enumeration cap must be at least 1"));
    }
    let mut tally = Tally::new(e, w);
    let mut run = GreedyRun {
        order: Vec::with_capacity(k),
        round_marginals: Vec::with_capacity(k),
        tie_sets: Vec::with_capacity(k),
    };
    for round in 0..k {
        let (best, ties) = tally.argmax();
        let pick = match policy {
            TiePolicy::Forced(order) => {
                let c = order[round];
                if ties.binary_search(&c).is_err() {
                    return Err(Error::NotRealizable {
                        round: round + 1,
                        candidate: c.index(),
                    });
                }
                c
            }
            _ => ties[0],
        };
        tally.add(pick);
        run.order.push(pick);
        run.round_marginals.push(best);
        run.tie_sets.push(ties);
    }
    Ok(run)
}

/// The resolute greedy committee under lexicographic tie-breaking, in
/// selection order. Hot path of the experiments.
pub fn lexicographic_order(e: &Election, k: usize, w: &OwaWeights) -> Result<Vec<CandidateId>> {
    check_size(e, k, w)?;
    let mut tally = Tally::new(e, w);
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best = i64::MIN;
        let mut pick = CandidateId(0);
        for c in 0..e.num_candidates() {
            let id = CandidateId::from(c);
            if !tally.is_selected(id) && tally.marginal(id) > best {
                best = tally.marginal(id);
                pick = id;
            }
        }
        tally.add(pick);
        order.push(pick);
    }
    Ok(order)
}

/// Result of a capped exploration of tie-breaking branches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    /// Distinct winning committees in discovery order.
    pub committees: Vec<Committee>,
    /// The cap stopped the search; more winners may exist.
    pub truncated: bool,
}

struct Explorer<'a> {
    tally: Tally<'a>,
    k: usize,
    cap: usize,
    prefer: Option<&'a Committee>,
    bits: Vec<u64>,
    visited: HashSet<Vec<u64>>,
    committees: Vec<Committee>,
    stack: Vec<CandidateId>,
}

impl Explorer<'_> {
    /// Returns true once the cap is hit.
    fn dfs(&mut self) -> bool {
        if self.tally.size() == self.k {
            let mut members = self.stack.clone();
            members.sort_unstable();
            self.committees.push(Committee::from_sorted_unchecked(members));
            return self.committees.len() >= self.cap;
        }
        let (_, ties) = self.tally.argmax();
        let branches: Vec<CandidateId> = match self.prefer {
            Some(p) => {
                let (first, rest): (Vec<_>, Vec<_>) = ties.into_iter().partition(|c| p.contains(*c));
                first.into_iter().chain(rest).collect()
            }
            None => ties,
        };
        for c in branches {
            self.bits[c.index() / 64] ^= 1 << (c.index() % 64);
            let fresh = self.visited.insert(self.bits.clone());
            if fresh {
                self.tally.add(c);
                self.stack.push(c);
                let stop = self.dfs();
                self.stack.pop();
                self.tally.remove(c);
                if stop {
                    self.bits[c.index() / 64] ^= 1 << (c.index() % 64);
                    return true;
                }
            }
            self.bits[c.index() / 64] ^= 1 << (c.index() % 64);
        }
        false
    }
}

/// Explores tie-breaking branches depth first (members of `prefer` first,
/// then ascending index) and collects up to `cap` distinct winners. Without
/// `prefer` the first committee found is the lexicographic one.
pub fn greedy_enumerate(
    e: &Election,
    k: usize,
    w: &OwaWeights,
    cap: usize,
    prefer: Option<&Committee>,
) -> Result<Enumeration> {
    check_size(e, k, w)?;
    if cap == 0 {
        return Err(precondition("enumeration cap must be at least 1"));
    }
    let mut explorer = Explorer {
        tally: Tally::new(e, w),
        k,
        cap,
        prefer,
        bits: vec![0; e.num_candidates().div_ceil(64).max(1)],
        visited: HashSet::new(),
        committees: Vec::new(),
        stack: Vec::with_capacity(k),
    };
    let truncated = explorer.dfs();
    Ok(Enumeration {
        committees: explorer.committees,
        truncated,
    })
}

/// Searches for an order in which the greedy rule can pick exactly the
/// members of `target` as its first `|target|` picks. Dynamic programming
/// over subsets of `target`: a set is reachable if removing some member `c`
/// leaves a reachable set relative to which `c` has the globally maximal
/// marginal contribution.
pub fn selectable_prefix(
    e: &Election,
    w: &OwaWeights,
    target: &[CandidateId],
) -> Result<Option<Vec<CandidateId>>> {
    if target.len() > w.len() {
        return Err(config("target larger than weight vector"));
    }
    if target.len() > 30 {
        return Err(precondition("subset search limited to 30 candidates"));
    }
    struct Dp<'a> {
        tally: Tally<'a>,
        target: &'a [CandidateId],
        full: u32,
        dead: HashSet<u32>,
        order: Vec<CandidateId>,
    }
    impl Dp<'_> {
        fn reach(&mut self, mask: u32) -> bool {
            if mask == self.full {
                return true;
            }
            let best = self.tally.max_marginal();
            for (j, &c) in self.target.iter().enumerate() {
                let next = mask | (1 << j);
                if next == mask || self.tally.marginal(c) != best || self.dead.contains(&next) {
                    continue;
                }
                self.tally.add(c);
                self.order.push(c);
                if self.reach(next) {
                    return true;
                }
                self.order.pop();
                self.tally.remove(c);
                self.dead.insert(next);
            }
            false
        }
    }
    let mut dp = Dp {
        tally: Tally::new(e, w),
        target,
        full: if target.is_empty() { 0 } else { u32::MAX >> (32 - target.len()) },
        dead: HashSet::new(),
        order: Vec::with_capacity(target.len()),
    };
    Ok(if dp.reach(0) { Some(dp.order) } else { None })
}

/// Whether some greedy run outputs exactly `t`; returns a realizing order.
pub fn greedy_reachable(
    e: &Election,
    k: usize,
    w: &OwaWeights,
    t: &Committee,
) -> Result<Option<Vec<CandidateId>>> {
    check_size(e, k, w)?;
    if t.len() != k {
        return Err(precondition(format!("target has {} members, expected {k}", t.len())));
    }
    t.check_range(e.num_candidates())?;
    selectable_prefix(e, w, t.members())
}

/// Closest-winner search for greedy rules by swapping `d` members of `S`
/// for `d` outsiders, `d = 0, 1, ...`, and testing each candidate committee
/// with [`greedy_reachable`]. With `shrink`, candidate classes are first
/// truncated (FPT in n + k).
pub fn solve_rce_greedy(
    inst: &RceInstance,
    w: &OwaWeights,
    shrink: bool,
    budget: u128,
) -> Result<RceAnswer> {
    if shrink {
        let shrunk = shrink_by_classes(&inst.after, &inst.committee, inst.k)?;
        let reduced = RceInstance {
            before: shrunk.election.clone(),
            after: shrunk.election.clone(),
            k: inst.k,
            committee: shrunk.map_in(&inst.committee)?,
            ell: inst.ell,
        };
        let answer = solve_rce_greedy(&reduced, w, false, budget)?;
        return Ok(RceAnswer {
            witness: answer.witness.map(|c| shrunk.map_out(&c)),
            ..answer
        });
    }

    let e = &inst.after;
    let (k, m, ell) = (inst.k, e.num_candidates(), inst.ell);
    check_size(e, k, w)?;
    let lexi = Committee::new(lexicographic_order(e, k, w)?)?;
    let lexi_distance = committee_distance(&inst.committee, &lexi)?;

    let pair_count = |d: usize| binomial(k, d).saturating_mul(binomial(m - k, d));
    let per_check: u128 = 1u128 << k.min(100);
    let needed = (0..=ell.min(lexi_distance))
        .map(|d| pair_count(d).saturating_mul(per_check))
        .fold(0u128, u128::saturating_add);
    check_budget(format!("greedy swap search (k={k}, ell={ell}, m={m})"), needed, budget)?;

    let outside: Vec<CandidateId> = (0..m)
        .map(CandidateId::from)
        .filter(|c| !inst.committee.contains(*c))
        .collect();
    let members = inst.committee.members();
    let mut spent: u128 = 0;
    for d in 0..=lexi_distance {
        if d > ell {
            spent = spent.saturating_add(pair_count(d).saturating_mul(per_check));
            if spent > budget {
                break;
            }
        }
        let mut best: Option<Committee> = None;
        for removed in (0..k).combinations(d) {
            let kept: Vec<CandidateId> = (0..k)
                .filter(|i| !removed.contains(i))
                .map(|i| members[i])
                .collect();
            for added in outside.iter().copied().combinations(d) {
                let candidate = Committee::new(kept.iter().copied().chain(added))?;
                if best.as_ref().is_some_and(|b| *b <= candidate) {
                    continue;
                }
                if selectable_prefix(e, w, candidate.members())?.is_some() {
                    best = Some(candidate);
                }
            }
        }
        if let Some(witness) = best {
            return Ok(RceAnswer::found(ell, d, witness));
        }
    }
    if lexi_distance > ell && spent > budget {
        // the lexicographic committee is a winner, but closer ones were not ruled out
        return Ok(RceAnswer {
            feasible: false,
            min_distance: None,
            witness: None,
        });
    }
    Ok(RceAnswer::found(ell, lexi_distance, lexi))
}

/// Greedy-CC solver that is FPT in the number of voters.
///
/// For `k ≤ 2^n` this is [`solve_rce_greedy`] with class shrinking. Otherwise
/// Greedy-CC covers every coverable voter within its first `n` picks, taking
/// at most one candidate per class, and afterwards every candidate ties at
/// zero. A closest winner is therefore a greedy-selectable covering prefix
/// of class representatives (members of `S` where possible) completed with
/// members of `S`.
pub fn solve_rce_greedycc_fpt_n(
    inst: &RceInstance,
    w: &OwaWeights,
    budget: u128,
) -> Result<RceAnswer> {
    if !w.is_cc() {
        return Err(Error::WrongSolver(
            "the Greedy-CC solver needs λ(j) = 0 for j ≥ 2".into(),
        ));
    }
    let e = &inst.after;
    let n = e.num_voters();
    let k = inst.k;
    check_size(e, k, w)?;
    if n >= 64 || (k as u128) <= (1u128 << n) {
        return solve_rce_greedy(inst, w, true, budget);
    }

    struct Rep {
        cover: u64,
        id: CandidateId,
        in_s: bool,
    }
    let reps: Vec<Rep> = candidate_classes(e)
        .into_iter()
        .filter(|class| !class.approvers.is_empty())
        .map(|class| {
            let from_s = class.members.iter().copied().find(|c| inst.committee.contains(*c));
            Rep {
                cover: class.approvers.iter().fold(0u64, |acc, &i| acc | (1 << i)),
                id: from_s.unwrap_or(class.members[0]),
                in_s: from_s.is_some(),
            }
        })
        .collect();
    let target = reps.iter().fold(0u64, |acc, r| acc | r.cover);
    let max_t = n.min(reps.len());
    let needed: u128 = (0..=max_t).map(|t| binomial(reps.len(), t)).sum::<u128>() << n.min(60);
    check_budget(format!("covering prefixes of {} classes", reps.len()), needed, budget)?;

    let complete = |prefix: &[CandidateId]| -> Committee {
        let fill: Vec<CandidateId> = inst
            .committee
            .members()
            .iter()
            .copied()
            .filter(|c| !prefix.contains(c))
            .take(k - prefix.len())
            .collect();
        Committee::new(prefix.iter().copied().chain(fill)).expect("distinct members")
    };

    let mut best: Option<(usize, Committee)> = None;
    for t in 0..=max_t {
        for family in reps.iter().combinations(t) {
            let cover = family.iter().fold(0u64, |acc, r| acc | r.cover);
            if cover != target {
                continue;
            }
            let d = family.iter().filter(|r| !r.in_s).count();
            if best.as_ref().is_some_and(|(bd, _)| d > *bd) {
                continue;
            }
            let prefix: Vec<CandidateId> = family.iter().map(|r| r.id).collect();
            if selectable_prefix(e, w, &prefix)?.is_none() {
                continue;
            }
            let committee = complete(&prefix);
            let improves = match &best {
                None => true,
                Some((bd, bc)) => d < *bd || committee < *bc,
            };
            if improves {
                best = Some((d, committee));
            }
        }
        if matches!(best, Some((0, _))) {
            break;
        }
    }
    let (d, witness) = best.expect("the greedy run's own covering prefix passes");
    Ok(RceAnswer::found(inst.ell, d, witness))
}

/// Closest winner among the lexicographic committee and up to `cap`
/// committees found by [`greedy_enumerate`] with `S` preferred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledClosest {
    pub committee: Committee,
    pub distance: usize,
    /// Number of distinct winners examined.
    pub found: usize,
    pub truncated: bool,
}

pub fn closest_winner_sampled(
    e: &Election,
    k: usize,
    w: &OwaWeights,
    s: &Committee,
    cap: usize,
) -> Result<SampledClosest> {
    let lexi = Committee::new(lexicographic_order(e, k, w)?)?;
    let found = greedy_enumerate(e, k, w, cap, Some(s))?;
    let mut pool = found.committees;
    if !pool.contains(&lexi) {
        pool.push(lexi);
    }
    let count = pool.len();
    let (distance, committee) = pool
        .into_iter()
        .map(|c| (committee_distance(s, &c).expect("equal sizes"), c))
        .min()
        .expect("pool is never empty");
    Ok(SampledClosest {
        committee,
        distance,
        found: count,
        truncated: found.truncated,
    })
}
