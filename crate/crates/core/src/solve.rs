//! Solver selection for RCE instances and winner checks.

use std::fmt;
use std::str::FromStr;

use crate::election::{Committee, Election};
use crate::error::{config, precondition, Error, Result};
use crate::exact::{
    enumerate_winners, solve_rce_av, solve_rce_ccav_fpt_n, solve_rce_exhaustive, solve_rce_shrunk,
};
use crate::greedy::{greedy_reachable, solve_rce_greedy, solve_rce_greedycc_fpt_n};
use crate::instance::{RceAnswer, RceInstance};
use crate::rule::{OwaWeights, RuleSpec};
use crate::score::thiele_score;

/// Voter count up to which `auto` prefers the CC solvers that are FPT in n.
pub const AUTO_CC_MAX_VOTERS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Auto,
    Av,
    Exhaustive,
    CcavN,
    Greedy,
    GreedyCcN,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Auto => "auto",
            Solver::Av => "av",
            Solver::Exhaustive => "exhaustive",
            Solver::CcavN => "ccav-n",
            Solver::Greedy => "greedy",
            Solver::GreedyCcN => "greedy-cc-n",
        })
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => Solver::Auto,
            "av" => Solver::Av,
            "exhaustive" => Solver::Exhaustive,
            "ccav-n" => Solver::CcavN,
            "greedy" => Solver::Greedy,
            "greedy-cc-n" => Solver::GreedyCcN,
            _ => return Err(config(format!("unknown solver `{s}`"))),
        })
    }
}

/// The solver `auto` resolves to for this rule and instance.
pub fn auto_solver(inst: &RceInstance, spec: &RuleSpec, w: &OwaWeights) -> Solver {
    let few_voters = inst.after.num_voters() <= AUTO_CC_MAX_VOTERS;
    match (spec.greedy, w.is_av(), w.is_cc() && few_voters) {
        // greedy AV picks the k highest approval scores, so both agree
        (_, true, _) => Solver::Av,
        (false, _, true) => Solver::CcavN,
        (false, _, false) => Solver::Exhaustive,
        (true, _, true) => Solver::GreedyCcN,
        (true, _, false) => Solver::Greedy,
    }
}

/// Solves `inst` under `spec`; returns the solver actually used.
pub fn solve(
    inst: &RceInstance,
    spec: &RuleSpec,
    solver: Solver,
    budget: u128,
) -> Result<(Solver, RceAnswer)> {
    let w = spec.rule.weights(inst.k)?;
    let solver = match solver {
        Solver::Auto => auto_solver(inst, spec, &w),
        other => other,
    };
    let wrong = |what: &str| {
        Err(Error::WrongSolver(format!(
            "solver {solver} needs a {what} rule, got {spec}"
        )))
    };
    let answer = match solver {
        Solver::Auto => unreachable!(),
        Solver::Av => solve_rce_av(inst, &w)?,
        Solver::Exhaustive | Solver::CcavN if spec.greedy => return wrong("non-greedy"),
        Solver::Greedy | Solver::GreedyCcN if !spec.greedy && !w.is_av() => {
            return wrong("greedy")
        }
        Solver::Exhaustive => solve_rce_shrunk(inst, &w, budget)?,
        Solver::CcavN => solve_rce_ccav_fpt_n(inst, &w, budget)?,
        Solver::Greedy => solve_rce_greedy(inst, &w, true, budget)?,
        Solver::GreedyCcN => solve_rce_greedycc_fpt_n(inst, &w, budget)?,
    };
    Ok((solver, answer))
}

/// Plain exhaustive search without class shrinking; the reference oracle.
pub fn solve_reference(inst: &RceInstance, spec: &RuleSpec, budget: u128) -> Result<RceAnswer> {
    if spec.greedy {
        return Err(Error::WrongSolver("the reference solver is for non-greedy rules".into()));
    }
    solve_rce_exhaustive(inst, &spec.rule.weights(inst.k)?, budget)
}

/// Whether `s` is a winning committee of `e` under `spec`.
pub fn committee_wins(e: &Election, s: &Committee, spec: &RuleSpec, budget: u128) -> Result<bool> {
    let k = s.len();
    if k == 0 {
        return Err(precondition("empty committee"));
    }
    s.check_range(e.num_candidates())?;
    let w = spec.rule.weights(k)?;
    if spec.greedy {
        return Ok(greedy_reachable(e, k, &w, s)?.is_some());
    }
    if w.is_av() {
        let mut scores = e.approval_scores();
        let own: usize = s.members().iter().map(|c| scores[c.index()]).sum();
        scores.sort_unstable_by(|a, b| b.cmp(a));
        return Ok(own == scores[..k].iter().sum::<usize>());
    }
    let best = enumerate_winners(e, k, &w, budget)?;
    let top = thiele_score(e, &best[0], &w)?;
    Ok(thiele_score(e, s, &w)? == top)
}
