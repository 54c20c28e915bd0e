//! Resilient committee election instances and answers.

use crate::election::{Committee, Election};
use crate::error::{precondition, Result};

/// Elections before and after a change, committee size `k`, a committee
/// `S` winning before the change, and a distance bound `ell`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RceInstance {
    pub before: Election,
    pub after: Election,
    pub k: usize,
    pub committee: Committee,
    pub ell: usize,
}

impl RceInstance {
    /// Checks the structural invariants. Whether `committee` actually wins
    /// `before` depends on the rule and is checked by [`crate::solve::committee_wins`].
    pub fn new(
        before: Election,
        after: Election,
        committee: Committee,
        ell: usize,
    ) -> Result<Self> {
        let k = committee.len();
        if before.num_candidates() != after.num_candidates() {
            return Err(precondition(format!(
                "candidate counts differ ({} vs {})",
                before.num_candidates(),
                after.num_candidates()
            )));
        }
        if k == 0 {
            return Err(precondition("committee size must be at least 1"));
        }
        committee.check_range(before.num_candidates())?;
        if ell > k {
            return Err(precondition(format!("ell = {ell} exceeds k = {k}")));
        }
        Ok(RceInstance {
            before,
            after,
            k,
            committee,
            ell,
        })
    }

    pub fn num_candidates(&self) -> usize {
        self.before.num_candidates()
    }
}

/// Optimization form of the decision: the closest winner after the change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RceAnswer {
    /// Some winner lies within `ell` of the original committee.
    pub feasible: bool,
    /// Distance of the closest winner, when it was determined.
    pub min_distance: Option<usize>,
    /// A closest winner realizing `min_distance`.
    pub witness: Option<Committee>,
}

impl RceAnswer {
    pub(crate) fn found(ell: usize, distance: usize, witness: Committee) -> Self {
        RceAnswer {
            feasible: distance <= ell,
            min_distance: Some(distance),
            witness: Some(witness),
        }
    }
}
