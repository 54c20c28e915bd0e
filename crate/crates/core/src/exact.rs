//! Winner enumeration and RCE solvers for Thiele rules (non-greedy).

use itertools::Itertools;

use crate::election::{
    candidate_classes, committee_distance, CandidateId, Committee, Election,
};
use crate::error::{config, precondition, Error, Result};
use crate::instance::{RceAnswer, RceInstance};
use crate::rule::OwaWeights;
use crate::score::Tally;

/// Default cap on the number of committees a search may evaluate.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// `n choose k`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

pub(crate) fn check_budget(what: impl Into<String>, needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        return Err(Error::Budget {
            what: what.into(),
            needed,
            budget,
        });
    }
    Ok(())
}

fn check_size(e: &Election, k: usize, w: &OwaWeights) -> Result<()> {
    if k == 0 || k > e.num_candidates() {
        return Err(precondition(format!(
            "committee size {k} not in [1, {}]",
            e.num_candidates()
        )));
    }
    if k > w.len() {
        return Err(config(format!("committee size {k} but only {} weights", w.len())));
    }
    Ok(())
}

/// Depth-first search over k-subsets in lexicographic order, pruned with the
/// bound "current score plus the best remaining singleton gains" (valid
/// because marginal gains only shrink as the committee grows).
struct WinnerSearch<'a> {
    tally: Tally<'a>,
    k: usize,
    m: usize,
    /// `suffix_top[s]` holds the singleton gains of candidates `s..m`, descending.
    suffix_top: Vec<Vec<i64>>,
    stack: Vec<CandidateId>,
    best: i64,
    winners: Vec<Committee>,
}

impl<'a> WinnerSearch<'a> {
    fn new(e: &'a Election, k: usize, w: &'a OwaWeights) -> Self {
        let m = e.num_candidates();
        let single: Vec<i64> = (0..m)
            .map(|c| w.int_weight(1) * e.approvers(CandidateId::from(c)).len() as i64)
            .collect();
        let suffix_top = (0..=m)
            .map(|s| {
                let mut v = single[s..].to_vec();
                v.sort_unstable_by(|a, b| b.cmp(a));
                v.truncate(k);
                v
            })
            .collect();
        WinnerSearch {
            tally: Tally::new(e, w),
            k,
            m,
            suffix_top,
            stack: Vec::with_capacity(k),
            best: i64::MIN,
            winners: Vec::new(),
        }
    }

    fn run(&mut self, start: usize) {
        let remaining = self.k - self.stack.len();
        if remaining == 0 {
            let score = self.tally.score();
            if score > self.best {
                self.best = score;
                self.winners.clear();
            }
            if score == self.best {
                self.winners
                    .push(Committee::from_sorted_unchecked(self.stack.clone()));
            }
            return;
        }
        let bound = self.tally.score() + self.suffix_top[start][..remaining].iter().sum::<i64>();
        if bound < self.best {
            return;
        }
        for c in start..=self.m - remaining {
            let id = CandidateId::from(c);
            self.tally.add(id);
            self.stack.push(id);
            self.run(c + 1);
            self.stack.pop();
            self.tally.remove(id);
        }
    }
}

/// All size-`k` committees of maximum λ-score, in lexicographic order.
pub fn enumerate_winners(
    e: &Election,
    k: usize,
    w: &OwaWeights,
    budget: u128,
) -> Result<Vec<Committee>> {
    check_size(e, k, w)?;
    check_budget(
        format!("enumerating {k}-subsets of {} candidates", e.num_candidates()),
        binomial(e.num_candidates(), k),
        budget,
    )?;
    let mut search = WinnerSearch::new(e, k, w);
    search.run(0);
    Ok(search.winners)
}

/// Winners of `after` closest to the committee; ties go to the
/// lexicographically first committee.
fn closest(inst: &RceInstance, winners: Vec<Committee>) -> Result<RceAnswer> {
    let mut best: Option<(usize, Committee)> = None;
    for w in winners {
        let d = committee_distance(&inst.committee, &w)?;
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, w));
        }
    }
    let (d, w) = best.expect("winner set is never empty");
    Ok(RceAnswer::found(inst.ell, d, w))
}

/// Ground truth: the closest of all winners of `after`.
pub fn solve_rce_exhaustive(
    inst: &RceInstance,
    w: &OwaWeights,
    budget: u128,
) -> Result<RceAnswer> {
    let winners = enumerate_winners(&inst.after, inst.k, w, budget)?;
    closest(inst, winners)
}

/// Polynomial algorithm for approval voting.
///
/// Every AV winner contains all candidates scoring above the k-th best score
/// and fills the rest from those tied with it; the closest winner takes as
/// many tied members of the original committee as fit.
pub fn solve_rce_av(inst: &RceInstance, w: &OwaWeights) -> Result<RceAnswer> {
    if !w.is_av() {
        return Err(Error::WrongSolver(
            "the AV solver needs all weights equal to one".into(),
        ));
    }
    let e = &inst.after;
    let k = inst.k;
    if k > e.num_candidates() {
        return Err(precondition("committee larger than candidate set"));
    }
    let scores = e.approval_scores();
    let mut order: Vec<usize> = (0..e.num_candidates()).collect();
    order.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(a.cmp(&b)));
    let threshold = scores[order[k - 1]];
    let above: Vec<usize> = order.iter().copied().filter(|&c| scores[c] > threshold).collect();
    let mut equal: Vec<usize> = order.iter().copied().filter(|&c| scores[c] == threshold).collect();
    equal.sort_unstable();
    let open = k - above.len();
    assert!(
        0 < open && open <= equal.len(),
        "seats left after the strictly better candidates must fit in the tied group"
    );

    let in_s = |c: &usize| inst.committee.contains(CandidateId::from(*c));
    let kept = equal.iter().copied().filter(in_s).take(open);
    let mut members: Vec<usize> = above.iter().copied().chain(kept).collect();
    let fill = open - (members.len() - above.len());
    members.extend(equal.iter().copied().filter(|c| !in_s(c)).take(fill));

    let witness = Committee::from_indices(&members)?;
    let d = committee_distance(&inst.committee, &witness)?;
    Ok(RceAnswer::found(inst.ell, d, witness))
}

/// An election restricted to a subset of candidates.
#[derive(Debug, Clone)]
pub struct ShrunkElection {
    pub election: Election,
    /// Original id of each kept candidate; ascending.
    pub mapping: Vec<CandidateId>,
}

impl ShrunkElection {
    /// Maps a committee of the original election into the shrunk one.
    /// Members that were dropped are an error.
    pub fn map_in(&self, s: &Committee) -> Result<Committee> {
        let ids = s
            .members()
            .iter()
            .map(|c| {
                self.mapping
                    .binary_search(c)
                    .map(CandidateId::from)
                    .map_err(|_| precondition(format!("candidate {c} was dropped")))
            })
            .collect::<Result<Vec<_>>>()?;
        Committee::new(ids)
    }

    pub fn map_out(&self, s: &Committee) -> Committee {
        Committee::from_sorted_unchecked(s.members().iter().map(|c| self.mapping[c.index()]).collect())
    }
}

/// Keeps `S` and, from every candidate class `K`, at most `k − |K ∩ S|`
/// further members (the lowest indices). Candidates within a class are
/// interchangeable, so some closest winner survives the restriction.
pub fn shrink_by_classes(e: &Election, s: &Committee, k: usize) -> Result<ShrunkElection> {
    s.check_range(e.num_candidates())?;
    let mut keep = Vec::new();
    for class in candidate_classes(e) {
        let (inside, outside): (Vec<CandidateId>, Vec<CandidateId>) =
            class.members.iter().partition(|c| s.contains(**c));
        let room = k.saturating_sub(inside.len());
        keep.extend(inside);
        keep.extend(outside.into_iter().take(room));
    }
    keep.sort_unstable();
    Ok(ShrunkElection {
        election: e.restrict(&keep)?,
        mapping: keep,
    })
}

fn shrunk_instance(inst: &RceInstance) -> Result<(ShrunkElection, RceInstance)> {
    let shrunk = shrink_by_classes(&inst.after, &inst.committee, inst.k)?;
    let committee = shrunk.map_in(&inst.committee)?;
    let reduced = RceInstance {
        // the "before" election plays no role in solving
        before: shrunk.election.clone(),
        after: shrunk.election.clone(),
        k: inst.k,
        committee,
        ell: inst.ell,
    };
    Ok((shrunk, reduced))
}

fn map_answer_out(shrunk: &ShrunkElection, answer: RceAnswer) -> RceAnswer {
    RceAnswer {
        witness: answer.witness.map(|w| shrunk.map_out(&w)),
        ..answer
    }
}

/// Exhaustive search after shrinking candidate classes (FPT in n + k).
pub fn solve_rce_shrunk(inst: &RceInstance, w: &OwaWeights, budget: u128) -> Result<RceAnswer> {
    let (shrunk, reduced) = shrunk_instance(inst)?;
    let answer = solve_rce_exhaustive(&reduced, w, budget)?;
    Ok(map_answer_out(&shrunk, answer))
}

/// Chamberlin–Courant solver that is FPT in the number of voters.
///
/// When `k ≤ 2^n` this is [`solve_rce_shrunk`]. Otherwise every winner covers
/// every voter with a non-empty ballot, and a closest winner consists of one
/// representative per class of some covering family of at most `n` classes
/// (taken from `S` where possible) filled up with members of `S`.
pub fn solve_rce_ccav_fpt_n(
    inst: &RceInstance,
    w: &OwaWeights,
    budget: u128,
) -> Result<RceAnswer> {
    if !w.is_cc() {
        return Err(Error::WrongSolver(
            "the CC solver needs λ(j) = 0 for j ≥ 2".into(),
        ));
    }
    let e = &inst.after;
    let n = e.num_voters();
    let k = inst.k;
    if k > e.num_candidates() {
        return Err(precondition("committee larger than candidate set"));
    }
    if n >= 64 || (k as u128) <= (1u128 << n) {
        return solve_rce_shrunk(inst, w, budget);
    }

    struct Rep {
        cover: u64,
        id: CandidateId,
        in_s: bool,
    }
    let reps: Vec<Rep> = candidate_classes(e)
        .into_iter()
        .filter(|k| !k.approvers.is_empty())
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
    let needed: u128 = (0..=max_t).map(|t| binomial(reps.len(), t)).sum();
    check_budget(format!("covering families of {} classes", reps.len()), needed, budget)?;

    let build = |chosen: &[&Rep]| -> Committee {
        let mut members: Vec<CandidateId> = chosen.iter().map(|r| r.id).collect();
        let fill = inst
            .committee
            .members()
            .iter()
            .copied()
            .filter(|c| !members.contains(c))
            .take(k - chosen.len())
            .collect::<Vec<_>>();
        members.extend(fill);
        Committee::new(members).expect("representatives are distinct")
    };

    let mut best: Option<(usize, Committee)> = None;
    'sizes: for t in 0..=max_t {
        for family in reps.iter().combinations(t) {
            let cover = family.iter().fold(0u64, |acc, r| acc | r.cover);
            if cover != target {
                continue;
            }
            let d = family.iter().filter(|r| !r.in_s).count();
            let improves = match &best {
                None => true,
                Some((bd, bw)) => d < *bd || (d == *bd && build(&family) < *bw),
            };
            if improves {
                best = Some((d, build(&family)));
            }
        }
        if matches!(best, Some((0, _))) {
            break 'sizes;
        }
    }
    let (d, witness) = best.expect("the family of all classes covers every coverable voter");
    Ok(RceAnswer::found(inst.ell, d, witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::Rule;
    use crate::score::thiele_score;

    fn instance(m: usize, before: &[Vec<usize>], after: &[Vec<usize>], s: &[usize], ell: usize) -> RceInstance {
        RceInstance::new(
            Election::from_lists(m, before).unwrap(),
            Election::from_lists(m, after).unwrap(),
            Committee::from_indices(s).unwrap(),
            ell,
        )
        .unwrap()
    }

    /// Oracle: score every k-subset directly.
    fn brute_winners(e: &Election, k: usize, w: &OwaWeights) -> Vec<Committee> {
        let all: Vec<Committee> = (0..e.num_candidates())
            .combinations(k)
            .map(|c| Committee::from_indices(&c).unwrap())
            .collect();
        let scores: Vec<i64> = all.iter().map(|c| thiele_score(e, c, w).unwrap().scaled).collect();
        let best = *scores.iter().max().unwrap();
        all.into_iter()
            .zip(scores)
            .filter(|(_, s)| *s == best)
            .map(|(c, _)| c)
            .collect()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(100, 10), 17_310_309_456_440);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(20, 0), 1);
    }

    #[test]
    fn enumerate_small() {
        let av = Rule::Av.weights(1).unwrap();
        let e = Election::from_lists(1, &[vec![0]]).unwrap();
        assert_eq!(
            enumerate_winners(&e, 1, &av, DEFAULT_BUDGET).unwrap(),
            vec![Committee::from_indices(&[0]).unwrap()]
        );
        let e = Election::from_lists(2, &[vec![0], vec![1]]).unwrap();
        let winners = enumerate_winners(&e, 1, &av, DEFAULT_BUDGET).unwrap();
        assert_eq!(winners, brute_winners(&e, 1, &av));
        assert_eq!(winners.len(), 2);
    }

    #[test]
    fn enumerate_matches_brute_force() {
        let e = Election::from_lists(
            6,
            &[vec![0, 1], vec![1, 2], vec![2, 3, 4], vec![5], vec![0, 5], vec![3]],
        )
        .unwrap();
        for rule in [Rule::Av, Rule::Pav, Rule::Cc] {
            for k in 1..=4 {
                let w = rule.weights(k).unwrap();
                assert_eq!(
                    enumerate_winners(&e, k, &w, DEFAULT_BUDGET).unwrap(),
                    brute_winners(&e, k, &w),
                    "{rule} k={k}"
                );
            }
        }
    }

    #[test]
    fn budget_refusal() {
        let e = Election::from_lists(30, &[vec![0]]).unwrap();
        let w = Rule::Pav.weights(10).unwrap();
        let err = enumerate_winners(&e, 10, &w, 1000).unwrap_err();
        assert!(matches!(err, Error::Budget { budget: 1000, .. }));
    }

    #[test]
    fn av_worked_example() {
        // before: a:2 b:2 c:1 d:0; after: a:2 b:2 c:3 d:0
        let before = [vec![0, 1], vec![0, 1, 2]];
        let after = [vec![0, 1, 2], vec![0, 1, 2], vec![2]];
        let inst = instance(4, &before, &after, &[0, 1], 2);
        let av = Rule::Av.weights(2).unwrap();
        let ans = solve_rce_av(&inst, &av).unwrap();
        assert_eq!(ans.min_distance, Some(1));
        assert_eq!(ans.witness, Some(Committee::from_indices(&[0, 2]).unwrap()));
        let oracle = solve_rce_exhaustive(&inst, &av, DEFAULT_BUDGET).unwrap();
        assert_eq!(oracle.min_distance, Some(1));

        let same = instance(4, &before, &before, &[0, 1], 0);
        let ans = solve_rce_av(&same, &av).unwrap();
        assert_eq!(ans.min_distance, Some(0));
        assert!(ans.feasible);
        assert_eq!(ans.witness, Some(Committee::from_indices(&[0, 1]).unwrap()));

        let pav = Rule::Pav.weights(2).unwrap();
        assert!(matches!(solve_rce_av(&inst, &pav), Err(Error::WrongSolver(_))));
    }

    #[test]
    fn shrink_examples() {
        let distinct = Election::from_lists(3, &[vec![0, 1], vec![1], vec![1, 2]]).unwrap();
        let s = Committee::from_indices(&[0]).unwrap();
        let shrunk = shrink_by_classes(&distinct, &s, 1).unwrap();
        assert_eq!(shrunk.mapping, vec![CandidateId(0), CandidateId(1), CandidateId(2)]);

        // 50 clones (0..50) plus candidates 50, 51, 52 forming S
        let ballots: Vec<Vec<usize>> = vec![(0..50).collect(), vec![50, 51, 52]];
        let clones = Election::from_lists(53, &ballots).unwrap();
        let s = Committee::from_indices(&[50, 51, 52]).unwrap();
        let shrunk = shrink_by_classes(&clones, &s, 3).unwrap();
        let kept_clones = shrunk.mapping.iter().filter(|c| c.index() < 50).count();
        assert_eq!(kept_clones, 3);
        assert_eq!(shrunk.election.num_candidates(), 6);
        assert_eq!(shrunk.map_out(&shrunk.map_in(&s).unwrap()), s);
    }

    #[test]
    fn ccav_worked_example() {
        // C = {a,b,c,d}, v1 = {a,b}, v2 = {c}, S = {a,c,d}, k = 3 > 2^n? n = 2 -> 2^2 = 4, so
        // this goes through the shrinking path; the class path is exercised below.
        let inst = instance(4, &[vec![0, 1], vec![2]], &[vec![0, 1], vec![2]], &[0, 2, 3], 0);
        let cc = Rule::Cc.weights(3).unwrap();
        let ans = solve_rce_ccav_fpt_n(&inst, &cc, DEFAULT_BUDGET).unwrap();
        assert_eq!(ans.min_distance, Some(0));
        assert_eq!(ans.witness, Some(Committee::from_indices(&[0, 2, 3]).unwrap()));
        assert!(ans.feasible);
    }

    #[test]
    fn ccav_class_path() {
        // n = 1 so any k > 2 takes the covering-family path
        let after = [vec![0, 1]];
        let inst = instance(6, &[vec![2]], &after, &[2, 3, 4], 1);
        let cc = Rule::Cc.weights(3).unwrap();
        let ans = solve_rce_ccav_fpt_n(&inst, &cc, DEFAULT_BUDGET).unwrap();
        let oracle = solve_rce_exhaustive(&inst, &cc, DEFAULT_BUDGET).unwrap();
        assert_eq!(ans.min_distance, oracle.min_distance);
        assert_eq!(ans.min_distance, Some(1));
        assert!(ans.feasible);

        // every voter approves everything
        let full = [vec![0, 1, 2, 3, 4, 5], vec![0, 1, 2, 3, 4, 5]];
        let inst = instance(6, &full, &full, &[1, 3, 5, 4, 0], 0);
        let cc = Rule::Cc.weights(5).unwrap();
        let ans = solve_rce_ccav_fpt_n(&inst, &cc, DEFAULT_BUDGET).unwrap();
        assert_eq!(ans.min_distance, Some(0));
    }
}
