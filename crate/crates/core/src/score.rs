//! Thiele scores and marginal contributions in integer-scaled arithmetic.

use crate::election::{CandidateId, Committee, Election};
use crate::error::{config, precondition, Result};
use crate::rule::{OwaWeights, Weight};

/// A λ-score multiplied by the weight scale L.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Score {
    pub scaled: i64,
    pub scale: i64,
}

impl Score {
    /// The exact rational value `scaled / scale`.
    pub fn value(self) -> Weight {
        Weight::new(self.scaled, self.scale)
    }
}

fn check_committee(e: &Election, s: &Committee, w: &OwaWeights) -> Result<()> {
    s.check_range(e.num_candidates())?;
    if s.len() > w.len() {
        return Err(config(format!(
            "committee of size {} but only {} weights",
            s.len(),
            w.len()
        )));
    }
    Ok(())
}

fn committee_bits(e: &Election, s: &Committee) -> Vec<u64> {
    let mut bits = vec![0u64; e.words()];
    for c in s.members() {
        bits[c.index() / 64] |= 1u64 << (c.index() % 64);
    }
    bits
}

fn overlap(bits: &[u64], ballot: &[u64]) -> usize {
    bits.iter()
        .zip(ballot)
        .map(|(a, b)| (a & b).count_ones() as usize)
        .sum()
}

/// L·Σ_i Σ_{j ≤ |S ∩ v_i|} λ(j).
pub fn thiele_score(e: &Election, s: &Committee, w: &OwaWeights) -> Result<Score> {
    check_committee(e, s, w)?;
    let bits = committee_bits(e, s);
    let mut prefix = vec![0i64; s.len() + 1];
    for j in 1..=s.len() {
        prefix[j] = prefix[j - 1] + w.int_weight(j);
    }
    let scaled = (0..e.num_voters())
        .map(|i| prefix[overlap(&bits, e.ballot_bits(i))])
        .sum();
    Ok(Score {
        scaled,
        scale: w.scale(),
    })
}

/// Integer-scaled `score(S ∪ {c}) − score(S)`, touching only the approvers of `c`.
pub fn marginal_contribution(
    e: &Election,
    s: &Committee,
    c: CandidateId,
    w: &OwaWeights,
) -> Result<i64> {
    check_committee(e, s, w)?;
    if c.index() >= e.num_candidates() {
        return Err(precondition(format!("candidate {c} out of range")));
    }
    if s.contains(c) {
        return Err(precondition(format!("candidate {c} already in the committee")));
    }
    if s.len() + 1 > w.len() {
        return Err(config("not enough weights for one more member"));
    }
    let bits = committee_bits(e, s);
    Ok(e.approvers(c)
        .iter()
        .map(|&i| w.int_weight(overlap(&bits, e.ballot_bits(i as usize)) + 1))
        .sum())
}

/// Incrementally maintained partial committee.
///
/// Tracks for every voter how many selected candidates they approve, the
/// current score, and the marginal contribution of every candidate. Adding
/// or removing `c` costs `O(Σ_{i approves c} |v_i|)`.
#[derive(Clone)]
pub(crate) struct Tally<'a> {
    election: &'a Election,
    weights: &'a OwaWeights,
    counts: Vec<u32>,
    selected: Vec<bool>,
    size: usize,
    score: i64,
    marginals: Vec<i64>,
}

impl<'a> Tally<'a> {
    pub(crate) fn new(election: &'a Election, weights: &'a OwaWeights) -> Self {
        let first = weights.int_weight(1);
        let marginals = (0..election.num_candidates())
            .map(|c| first * election.approvers(CandidateId::from(c)).len() as i64)
            .collect();
        Tally {
            election,
            weights,
            counts: vec![0; election.num_voters()],
            selected: vec![false; election.num_candidates()],
            size: 0,
            score: 0,
            marginals,
        }
    }

    /// λ(j) scaled, zero past the end of the weight vector. Only reached for
    /// marginals that are never read once the tally is full.
    #[inline]
    fn w(&self, j: usize) -> i64 {
        self.weights.int_weights().get(j - 1).copied().unwrap_or(0)
    }

    pub(crate) fn size(&self) -> usize {
        self.size
    }

    pub(crate) fn score(&self) -> i64 {
        self.score
    }

    pub(crate) fn is_selected(&self, c: CandidateId) -> bool {
        self.selected[c.index()]
    }

    /// Marginal contribution of an unselected candidate.
    #[inline]
    pub(crate) fn marginal(&self, c: CandidateId) -> i64 {
        debug_assert!(self.size < self.weights.len());
        self.marginals[c.index()]
    }

    pub(crate) fn add(&mut self, c: CandidateId) {
        debug_assert!(!self.selected[c.index()]);
        assert!(self.size < self.weights.len(), "committee exceeds weight vector");
        self.selected[c.index()] = true;
        self.size += 1;
        let e = self.election;
        for &i in e.approvers(c) {
            let i = i as usize;
            let old = self.counts[i] as usize;
            self.score += self.w(old + 1);
            self.counts[i] += 1;
            let delta = self.w(old + 2) - self.w(old + 1);
            if delta != 0 {
                for d in e.ballot(i).approved() {
                    self.marginals[d.index()] += delta;
                }
            }
        }
    }

    pub(crate) fn remove(&mut self, c: CandidateId) {
        debug_assert!(self.selected[c.index()]);
        self.selected[c.index()] = false;
        self.size -= 1;
        let e = self.election;
        for &i in e.approvers(c) {
            let i = i as usize;
            let old = self.counts[i] as usize;
            self.score -= self.w(old);
            self.counts[i] -= 1;
            let delta = self.w(old) - self.w(old + 1);
            if delta != 0 {
                for d in e.ballot(i).approved() {
                    self.marginals[d.index()] += delta;
                }
            }
        }
    }

    /// Highest marginal among unselected candidates and all candidates
    /// attaining it, ascending.
    pub(crate) fn argmax(&self) -> (i64, Vec<CandidateId>) {
        let mut best = i64::MIN;
        let mut ties = Vec::new();
        for c in 0..self.election.num_candidates() {
            if self.selected[c] {
                continue;
            }
            let g = self.marginals[c];
            if g > best {
                best = g;
                ties.clear();
                ties.push(CandidateId::from(c));
            } else if g == best {
                ties.push(CandidateId::from(c));
            }
        }
        (best, ties)
    }

    /// Highest marginal among unselected candidates.
    pub(crate) fn max_marginal(&self) -> i64 {
        (0..self.election.num_candidates())
            .filter(|&c| !self.selected[c])
            .map(|c| self.marginals[c])
            .max()
            .unwrap_or(i64::MIN)
    }
}
