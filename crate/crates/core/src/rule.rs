//! Thiele rules as OWA weight vectors.
//!
//! Weights are exact rationals. For scoring they are scaled by the lcm of
//! their denominators so that every score is an integer and ties are exact.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{config, Error, Result};

pub type Weight = Ratio<i64>;

/// Largest admissible scale factor; keeps scores of large elections in `i64`.
const MAX_SCALE: i64 = 1 << 32;

/// A Thiele rule identified by its OWA function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    /// Approval voting, λ(j) = 1.
    Av,
    /// Proportional approval voting, λ(j) = 1/j.
    Pav,
    /// Chamberlin–Courant, λ(j) = [j = 1].
    Cc,
    /// Explicit finite weight list λ(1), λ(2), ...
    Owa(Vec<Weight>),
}

impl Rule {
    /// λ(j) for `j >= 1`; `None` past the end of an explicit list.
    pub fn lambda(&self, j: usize) -> Option<Weight> {
        assert!(j >= 1, "OWA weights are 1-based");
        match self {
            Rule::Av => Some(Weight::from_integer(1)),
            Rule::Pav => Some(Weight::new(1, j as i64)),
            Rule::Cc => Some(Weight::from_integer(i64::from(j == 1))),
            Rule::Owa(w) => w.get(j - 1).copied(),
        }
    }

    /// The first `len` weights.
    pub fn weights(&self, len: usize) -> Result<OwaWeights> {
        let weights = (1..=len)
            .map(|j| {
                self.lambda(j).ok_or_else(|| {
                    config(format!(
                        "committee size {len} exceeds the {} weights of rule {self}",
                        j - 1
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        OwaWeights::new(weights)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Av => f.write_str("av"),
            Rule::Pav => f.write_str("pav"),
            Rule::Cc => f.write_str("cc"),
            Rule::Owa(w) => {
                f.write_str("owa=")?;
                for (i, x) in w.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "av" => Ok(Rule::Av),
            "pav" => Ok(Rule::Pav),
            "cc" | "ccav" => Ok(Rule::Cc),
            other => {
                let list = other
                    .strip_prefix("owa=")
                    .ok_or_else(|| config(format!("unknown rule `{s}`")))?;
                let weights = list
                    .split(',')
                    .map(parse_weight)
                    .collect::<Result<Vec<_>>>()?;
                // validates the list
                OwaWeights::new(weights.clone())?;
                Ok(Rule::Owa(weights))
            }
        }
    }
}

fn parse_weight(token: &str) -> Result<Weight> {
    let token = token.trim();
    let bad = || config(format!("bad weight `{token}`"));
    match token.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(Weight::new(p, q))
        }
        None => Ok(Weight::from_integer(token.parse().map_err(|_| bad())?)),
    }
}

/// A rule together with the way its winners are computed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSpec {
    pub rule: Rule,
    /// Sequential (greedy) variant instead of the global optimum.
    pub greedy: bool,
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.greedy {
            f.write_str("greedy-")?;
        }
        write!(f, "{}", self.rule)
    }
}

impl FromStr for RuleSpec {
    type Err = Error;

    /// `av | pav | cc | owa=<q1,q2,...>`, optionally prefixed by `greedy-`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.strip_prefix("greedy-").or_else(|| t.strip_prefix("seq")) {
            Some(rest) => Ok(RuleSpec {
                rule: rest.parse()?,
                greedy: true,
            }),
            None => Ok(RuleSpec {
                rule: t.parse()?,
                greedy: false,
            }),
        }
    }
}

/// The weights λ(1..len) of a Thiele rule with their integer-scaled form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwaWeights {
    weights: Vec<Weight>,
    scale: i64,
    int_weights: Vec<i64>,
}

impl OwaWeights {
    pub fn new(weights: Vec<Weight>) -> Result<Self> {
        if weights.is_empty() {
            return Err(config("empty weight vector"));
        }
        if weights[0] != Weight::from_integer(1) {
            return Err(config("the first weight must be 1"));
        }
        let zero = Weight::from_integer(0);
        let one = Weight::from_integer(1);
        if weights.iter().any(|w| *w < zero || *w > one) {
            return Err(config("weights must lie in [0, 1]"));
        }
        if weights.windows(2).any(|w| w[1] > w[0]) {
            return Err(config("weights must be non-increasing"));
        }
        let mut scale: i64 = 1;
        for w in &weights {
            scale = scale.lcm(w.denom());
            if scale > MAX_SCALE {
                return Err(config("weight denominators too large"));
            }
        }
        let int_weights = weights
            .iter()
            .map(|w| w.numer() * (scale / w.denom()))
            .collect();
        Ok(OwaWeights {
            weights,
            scale,
            int_weights,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    /// The common denominator L.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn int_weights(&self) -> &[i64] {
        &self.int_weights
    }

    /// L·λ(j), 1-based.
    #[inline]
    pub fn int_weight(&self, j: usize) -> i64 {
        self.int_weights[j - 1]
    }

    /// L·Σ_{j ≤ count} λ(j).
    pub fn int_prefix(&self, count: usize) -> i64 {
        self.int_weights[..count].iter().sum()
    }

    /// Converts an integer-scaled score back to its exact value.
    pub fn to_rational(&self, scaled: i64) -> Weight {
        Weight::new(scaled, self.scale)
    }

    /// Every weight equals one.
    pub fn is_av(&self) -> bool {
        self.int_weights.iter().all(|&w| w == self.scale)
    }

    /// λ(1) = 1 and every later weight is zero.
    pub fn is_cc(&self) -> bool {
        self.int_weights[1..].iter().all(|&w| w == 0)
    }

    /// Length of the prefix of weights equal to one.
    pub fn unit_prefix(&self) -> usize {
        self.int_weights
            .iter()
            .take_while(|&&w| w == self.scale)
            .count()
    }
}
