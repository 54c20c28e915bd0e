//! Approval elections, committees and the distances between them.

use std::collections::HashMap;
use std::fmt;

use crate::error::{config, precondition, Result};

/// Index of a candidate in `[0, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateId(pub u32);

impl CandidateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for CandidateId {
    fn from(i: usize) -> Self {
        CandidateId(i as u32)
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The set of candidates approved by one voter, strictly ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ballot(Vec<CandidateId>);

impl Ballot {
    /// Builds a ballot from indices in any order. Duplicates are rejected.
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut ids: Vec<CandidateId> = indices.into_iter().map(CandidateId::from).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(config(format!("duplicate candidate {} in ballot", w[0])));
        }
        Ok(Ballot(ids))
    }

    pub(crate) fn from_sorted_unchecked(ids: Vec<CandidateId>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        Ballot(ids)
    }

    pub fn approved(&self) -> &[CandidateId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: CandidateId) -> bool {
        self.0.binary_search(&c).is_ok()
    }
}

/// An approval election: `m` candidates and one ballot per voter.
///
/// Besides the ballots, the election keeps two derived views used by the
/// scoring code: the list of approvers of every candidate and a fixed-width
/// bitset per ballot.
#[derive(Clone, PartialEq, Eq)]
pub struct Election {
    m: usize,
    ballots: Vec<Ballot>,
    allow_empty: bool,
    approvers: Vec<Vec<u32>>,
    words: usize,
    bits: Vec<u64>,
}

impl fmt::Debug for Election {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Election")
            .field("m", &self.m)
            .field("ballots", &self.ballots)
            .field("allow_empty", &self.allow_empty)
            .finish()
    }
}

impl Election {
    /// Builds an election in which every voter approves at least one candidate.
    pub fn new(m: usize, ballots: Vec<Ballot>) -> Result<Self> {
        Self::build(m, ballots, false)
    }

    /// Builds an election that may contain empty ballots (e.g. after random
    /// approval removals). Empty ballots contribute nothing to any score.
    pub fn with_empty_ballots(m: usize, ballots: Vec<Ballot>) -> Result<Self> {
        Self::build(m, ballots, true)
    }

    /// Convenience constructor from index lists; empty ballots are allowed
    /// if and only if one is present.
    pub fn from_lists<B: AsRef<[usize]>>(m: usize, ballots: &[B]) -> Result<Self> {
        let ballots = ballots
            .iter()
            .map(|b| Ballot::new(b.as_ref().iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        let allow_empty = ballots.iter().any(Ballot::is_empty);
        Self::build(m, ballots, allow_empty)
    }

    fn build(m: usize, ballots: Vec<Ballot>, allow_empty: bool) -> Result<Self> {
        if ballots.is_empty() {
            return Err(config("an election needs at least one voter"));
        }
        if m > u32::MAX as usize || ballots.len() > u32::MAX as usize {
            return Err(config("election too large"));
        }
        let words = m.div_ceil(64).max(1);
        let mut approvers = vec![Vec::new(); m];
        let mut bits = vec![0u64; words * ballots.len()];
        for (i, ballot) in ballots.iter().enumerate() {
            if ballot.is_empty() && !allow_empty {
                return Err(config(format!("voter {i} has an empty ballot")));
            }
            for &c in ballot.approved() {
                if c.index() >= m {
                    return Err(config(format!(
                        "voter {i} approves candidate {c}, but there are only {m} candidates"
                    )));
                }
                approvers[c.index()].push(i as u32);
                bits[i * words + c.index() / 64] |= 1u64 << (c.index() % 64);
            }
        }
        Ok(Election {
            m,
            ballots,
            allow_empty,
            approvers,
            words,
            bits,
        })
    }

    /// Number of candidates.
    pub fn num_candidates(&self) -> usize {
        self.m
    }

    /// Number of voters.
    pub fn num_voters(&self) -> usize {
        self.ballots.len()
    }

    pub fn ballots(&self) -> &[Ballot] {
        &self.ballots
    }

    pub fn ballot(&self, voter: usize) -> &Ballot {
        &self.ballots[voter]
    }

    pub fn allows_empty(&self) -> bool {
        self.allow_empty
    }

    /// Voters approving `c`, ascending.
    pub fn approvers(&self, c: CandidateId) -> &[u32] {
        &self.approvers[c.index()]
    }

    /// Total number of approvals.
    pub fn total_approvals(&self) -> usize {
        self.ballots.iter().map(Ballot::len).sum()
    }

    /// Number of approvals per candidate.
    pub fn approval_scores(&self) -> Vec<usize> {
        self.approvers.iter().map(Vec::len).collect()
    }

    /// Bitset view of a ballot, `ceil(m / 64)` words.
    pub fn ballot_bits(&self, voter: usize) -> &[u64] {
        &self.bits[voter * self.words..(voter + 1) * self.words]
    }

    pub(crate) fn words(&self) -> usize {
        self.words
    }

    /// Keeps only the listed candidates, renumbered in the given order.
    pub(crate) fn restrict(&self, keep: &[CandidateId]) -> Result<Self> {
        let mut new_index = vec![u32::MAX; self.m];
        for (j, c) in keep.iter().enumerate() {
            new_index[c.index()] = j as u32;
        }
        let ballots = self
            .ballots
            .iter()
            .map(|b| {
                let mut ids: Vec<CandidateId> = b
                    .approved()
                    .iter()
                    .filter(|c| new_index[c.index()] != u32::MAX)
                    .map(|c| CandidateId(new_index[c.index()]))
                    .collect();
                ids.sort_unstable();
                Ballot::from_sorted_unchecked(ids)
            })
            .collect::<Vec<_>>();
        let allow_empty = self.allow_empty || ballots.iter().any(Ballot::is_empty);
        Self::build(keep.len(), ballots, allow_empty)
    }
}

/// A committee: a set of distinct candidates kept in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Committee(Vec<CandidateId>);

impl Committee {
    pub fn new(members: impl IntoIterator<Item = CandidateId>) -> Result<Self> {
        let mut ids: Vec<CandidateId> = members.into_iter().collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(precondition(format!("candidate {} repeated in committee", w[0])));
        }
        Ok(Committee(ids))
    }

    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| CandidateId::from(i)))
    }

    pub(crate) fn from_sorted_unchecked(ids: Vec<CandidateId>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        Committee(ids)
    }

    pub fn members(&self) -> &[CandidateId] {
        &self.0
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().map(|c| c.index()).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: CandidateId) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    /// Checks that every member is a candidate of an election with `m` candidates.
    pub fn check_range(&self, m: usize) -> Result<()> {
        match self.0.last() {
            Some(c) if c.index() >= m => Err(precondition(format!(
                "committee member {c} out of range for {m} candidates"
            ))),
            _ => Ok(()),
        }
    }

    pub fn intersection_size(&self, other: &Committee) -> usize {
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }
}

impl fmt::Display for Committee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

/// Number of members of `s` that are not in `t`: `k - |s ∩ t|`.
pub fn committee_distance(s: &Committee, t: &Committee) -> Result<usize> {
    if s.len() != t.len() {
        return Err(precondition(format!(
            "committee sizes differ ({} vs {})",
            s.len(),
            t.len()
        )));
    }
    Ok(s.len() - s.intersection_size(t))
}

/// Minimum number of single-approval additions and removals turning `e`
/// into `f`. `None` stands for an infinite distance (different candidate
/// sets or voter counts).
pub fn election_distance(e: &Election, f: &Election) -> Option<usize> {
    if e.num_candidates() != f.num_candidates() || e.num_voters() != f.num_voters() {
        return None;
    }
    let total = (0..e.num_voters())
        .map(|i| {
            e.ballot_bits(i)
                .iter()
                .zip(f.ballot_bits(i))
                .map(|(a, b)| (a ^ b).count_ones() as usize)
                .sum::<usize>()
        })
        .sum();
    Some(total)
}

/// Candidates sharing exactly the same set of approvers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateClass {
    pub approvers: Vec<u32>,
    pub members: Vec<CandidateId>,
}

/// Partitions the candidates by approver set. Classes are ordered by their
/// lowest member, and members ascend within a class.
pub fn candidate_classes(e: &Election) -> Vec<CandidateClass> {
    let mut by_key: HashMap<&[u32], usize> = HashMap::new();
    let mut classes: Vec<CandidateClass> = Vec::new();
    for c in 0..e.num_candidates() {
        let id = CandidateId::from(c);
        let key = e.approvers(id);
        match by_key.get(key) {
            Some(&idx) => classes[idx].members.push(id),
            None => {
                by_key.insert(key, classes.len());
                classes.push(CandidateClass {
                    approvers: key.to_vec(),
                    members: vec![id],
                });
            }
        }
    }
    classes
}
