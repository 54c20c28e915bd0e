//! Random approval elections and random approval changes.
//!
//! Models:
//! - 1D / 2D Euclidean: voters and candidates uniform in `[0,1]^d`; a voter
//!   approves every candidate within distance `radius`.
//! - Resampling(p, φ): a central vote approves `⌊p·m⌋` uniformly chosen
//!   candidates; each voter copies each approval status with probability
//!   `1 − φ` and otherwise approves with probability `p`.
//! - Euclidean + Resampling: every voter's Euclidean ballot is their own
//!   central vote; a resampled status is an approval with probability
//!   `|ballot| / m`.
//!
//! Sampled ballots are never empty: an empty draw is repeated (new position
//! or new ballot) up to [`MAX_REDRAWS`] times.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::election::{Ballot, CandidateId, Election};
use crate::error::{config, precondition, Error, Result};
use crate::seed::stream;

pub const MAX_REDRAWS: usize = 1000;

const CENTRAL_STREAM: u64 = 0;
const VOTER_STREAM: u64 = 1;
const CANDIDATE_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    OneD { radius: f64 },
    TwoD { radius: f64 },
    Resampling { p: f64, phi: f64 },
    EuclidResampling { dim: usize, radius: f64, phi: f64 },
}

impl Model {
    /// Short name used in CSV files: `1d`, `2d`, `res`, `1d+res`, `2d+res`.
    pub fn label(&self) -> String {
        match self {
            Model::OneD { .. } => "1d".into(),
            Model::TwoD { .. } => "2d".into(),
            Model::Resampling { .. } => "res".into(),
            Model::EuclidResampling { dim, .. } => format!("{dim}d+res"),
        }
    }

    /// Model parameters as a compact string, e.g. `0.051` or `0.1/0.75`.
    pub fn param_label(&self) -> String {
        match self {
            Model::OneD { radius } | Model::TwoD { radius } => format!("{radius}"),
            Model::Resampling { p, phi } => format!("{p}/{phi}"),
            Model::EuclidResampling { radius, phi, .. } => format!("{radius}/{phi}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(config(format!("{name} = {x} outside [0, 1]")))
            }
        };
        let radius = |dim: usize, r: f64| {
            let max = (dim as f64).sqrt();
            if (0.0..=max).contains(&r) {
                Ok(())
            } else {
                Err(config(format!("radius {r} outside [0, {max}] for {dim}D")))
            }
        };
        match *self {
            Model::OneD { radius: r } => radius(1, r),
            Model::TwoD { radius: r } => radius(2, r),
            Model::Resampling { p, phi } => unit("p", p).and(unit("phi", phi)),
            Model::EuclidResampling { dim, radius: r, phi } => {
                if dim != 1 && dim != 2 {
                    return Err(config(format!("dimension {dim} not supported")));
                }
                radius(dim, r).and(unit("phi", phi))
            }
        }
    }

    fn dim(&self) -> usize {
        match self {
            Model::OneD { .. } => 1,
            Model::TwoD { .. } => 2,
            Model::Resampling { .. } => 0,
            Model::EuclidResampling { dim, .. } => *dim,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.label(), self.param_label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub model: Model,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

/// Positions of voters and candidates of a Euclidean sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Positions {
    pub voters: Vec<Vec<f64>>,
    pub candidates: Vec<Vec<f64>>,
}

impl Positions {
    /// Text sidecar: a `# voters` block and a `# candidates` block, one
    /// point per line with coordinates printed in round-trip precision.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# voters\n");
        let push = |points: &[Vec<f64>], out: &mut String| {
            for p in points {
                let coords: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
                out.push_str(&coords.join(" "));
                out.push('\n');
            }
        };
        push(&self.voters, &mut out);
        out.push_str("# candidates\n");
        push(&self.candidates, &mut out);
        out
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `⌊x⌋` tolerant to representation error such as `0.29 * 100 = 28.999…`.
fn floor_count(x: f64) -> usize {
    (x + 1e-9).floor().max(0.0) as usize
}

fn point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen::<f64>()).collect()
}

pub fn sample_election(spec: &SamplerSpec) -> Result<Election> {
    sample_with_positions(spec).map(|(e, _)| e)
}

/// Samples an election; Euclidean models also return the positions used.
pub fn sample_with_positions(spec: &SamplerSpec) -> Result<(Election, Option<Positions>)> {
    spec.model.validate()?;
    if spec.n == 0 || spec.m == 0 {
        return Err(config("need at least one voter and one candidate"));
    }
    let (n, m) = (spec.n, spec.m);
    let no_ballot = |i: usize| {
        config(format!(
            "voter {i} drew an empty ballot {MAX_REDRAWS} times; parameters admit no approvals"
        ))
    };
    match spec.model {
        Model::Resampling { p, phi } => {
            let mut central_rng = stream(spec.seed, &[CENTRAL_STREAM]);
            let size = floor_count(p * m as f64).min(m);
            let mut central = vec![false; m];
            for c in index::sample(&mut central_rng, m, size) {
                central[c] = true;
            }
            let mut ballots = Vec::with_capacity(n);
            for i in 0..n {
                let mut rng = stream(spec.seed, &[VOTER_STREAM, i as u64]);
                let ballot = (0..MAX_REDRAWS)
                    .map(|_| {
                        (0..m)
                            .filter(|&c| {
                                if rng.gen::<f64>() < phi {
                                    rng.gen::<f64>() < p
                                } else {
                                    central[c]
                                }
                            })
                            .map(CandidateId::from)
                            .collect::<Vec<_>>()
                    })
                    .find(|b| !b.is_empty())
                    .ok_or_else(|| no_ballot(i))?;
                ballots.push(Ballot::from_sorted_unchecked(ballot));
            }
            Ok((Election::new(m, ballots)?, None))
        }
        model => {
            let dim = model.dim();
            let (radius, phi) = match model {
                Model::OneD { radius } | Model::TwoD { radius } => (radius, 0.0),
                Model::EuclidResampling { radius, phi, .. } => (radius, phi),
                Model::Resampling { .. } => unreachable!(),
            };
            let candidates: Vec<Vec<f64>> = (0..m)
                .map(|j| point(&mut stream(spec.seed, &[CANDIDATE_STREAM, j as u64]), dim))
                .collect();
            let mut voters = Vec::with_capacity(n);
            let mut ballots = Vec::with_capacity(n);
            for i in 0..n {
                let mut rng = stream(spec.seed, &[VOTER_STREAM, i as u64]);
                let mut drawn = None;
                for _ in 0..MAX_REDRAWS {
                    let pos = point(&mut rng, dim);
                    let near: Vec<bool> = candidates
                        .iter()
                        .map(|c| distance(&pos, c) <= radius)
                        .collect();
                    let ballot: Vec<CandidateId> = if phi > 0.0 {
                        let q = near.iter().filter(|&&x| x).count() as f64 / m as f64;
                        (0..m)
                            .filter(|&c| {
                                if rng.gen::<f64>() < phi {
                                    rng.gen::<f64>() < q
                                } else {
                                    near[c]
                                }
                            })
                            .map(CandidateId::from)
                            .collect()
                    } else {
                        (0..m).filter(|&c| near[c]).map(CandidateId::from).collect()
                    };
                    if !ballot.is_empty() {
                        drawn = Some((pos, ballot));
                        break;
                    }
                }
                let (pos, ballot) = drawn.ok_or_else(|| no_ballot(i))?;
                voters.push(pos);
                ballots.push(Ballot::from_sorted_unchecked(ballot));
            }
            Ok((
                Election::new(m, ballots)?,
                Some(Positions { voters, candidates }),
            ))
        }
    }
}

/// Kind of random change applied to an election.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChangeOp {
    #[serde(rename = "ADD")]
    Add,
    #[serde(rename = "REMOVE")]
    Remove,
    #[serde(rename = "MIX")]
    Mix,
}

impl ChangeOp {
    pub const ALL: [ChangeOp; 3] = [ChangeOp::Add, ChangeOp::Remove, ChangeOp::Mix];

    pub fn code(self) -> u64 {
        match self {
            ChangeOp::Add => 0,
            ChangeOp::Remove => 1,
            ChangeOp::Mix => 2,
        }
    }
}

impl fmt::Display for ChangeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChangeOp::Add => "ADD",
            ChangeOp::Remove => "REMOVE",
            ChangeOp::Mix => "MIX",
        })
    }
}

impl FromStr for ChangeOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ADD" => Ok(ChangeOp::Add),
            "REMOVE" => Ok(ChangeOp::Remove),
            "MIX" => Ok(ChangeOp::Mix),
            _ => Err(config(format!("unknown change operation `{s}`"))),
        }
    }
}

/// `r` elementary changes of kind `op`; MIX adds and removes `⌊r/2⌋` each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChangeSpec {
    pub op: ChangeOp,
    pub r: usize,
}

impl ChangeSpec {
    /// `r = ⌊app(E) · fraction⌋`.
    pub fn from_fraction(op: ChangeOp, e: &Election, fraction: f64) -> Self {
        ChangeSpec {
            op,
            r: floor_count(e.total_approvals() as f64 * fraction),
        }
    }

    pub fn adds(&self) -> usize {
        match self.op {
            ChangeOp::Add => self.r,
            ChangeOp::Remove => 0,
            ChangeOp::Mix => self.r / 2,
        }
    }

    pub fn removes(&self) -> usize {
        match self.op {
            ChangeOp::Add => 0,
            ChangeOp::Remove => self.r,
            ChangeOp::Mix => self.r / 2,
        }
    }
}

/// Applies uniformly random approval additions and removals.
///
/// Additions are an r-subset of the absent (voter, candidate) pairs and
/// removals an r-subset of the present pairs, both drawn from the original
/// election, so MIX never removes an approval it just added. Removals may
/// leave empty ballots.
pub fn perturb(e: &Election, change: ChangeSpec, seed: u64) -> Result<Election> {
    let (n, m) = (e.num_voters(), e.num_candidates());
    let app = e.total_approvals();
    let absent = n * m - app;
    let (adds, removes) = (change.adds(), change.removes());
    if adds > absent {
        return Err(precondition(format!(
            "cannot add {adds} approvals, only {absent} pairs are unapproved"
        )));
    }
    if removes > app {
        return Err(precondition(format!(
            "cannot remove {removes} approvals, only {app} exist"
        )));
    }
    if adds == 0 && removes == 0 {
        return Ok(e.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut add_pairs: Vec<(usize, CandidateId)> = Vec::with_capacity(adds);
    if adds > 0 {
        // absent_before[i] = unapproved pairs of voters 0..i
        let mut absent_before = Vec::with_capacity(n + 1);
        absent_before.push(0usize);
        for b in e.ballots() {
            absent_before.push(absent_before.last().unwrap() + (m - b.len()));
        }
        for idx in index::sample(&mut rng, absent, adds) {
            let voter = absent_before.partition_point(|&x| x <= idx) - 1;
            let mut rank = idx - absent_before[voter];
            let ballot = e.ballot(voter).approved();
            // rank-th candidate not in the ballot
            let mut c = rank;
            for &a in ballot {
                if a.index() <= c {
                    c += 1;
                } else {
                    break;
                }
            }
            rank = c;
            add_pairs.push((voter, CandidateId::from(rank)));
        }
    }

    let mut remove_pairs: Vec<(usize, CandidateId)> = Vec::with_capacity(removes);
    if removes > 0 {
        let mut present_before = Vec::with_capacity(n + 1);
        present_before.push(0usize);
        for b in e.ballots() {
            present_before.push(present_before.last().unwrap() + b.len());
        }
        for idx in index::sample(&mut rng, app, removes) {
            let voter = present_before.partition_point(|&x| x <= idx) - 1;
            remove_pairs.push((voter, e.ballot(voter).approved()[idx - present_before[voter]]));
        }
    }

    let mut ballots: Vec<Ballot> = e.ballots().to_vec();
    let mut touched: Vec<Vec<(CandidateId, bool)>> = vec![Vec::new(); n];
    for (v, c) in add_pairs {
        touched[v].push((c, true));
    }
    for (v, c) in remove_pairs {
        touched[v].push((c, false));
    }
    for (v, changes) in touched.into_iter().enumerate() {
        if changes.is_empty() {
            continue;
        }
        let mut ids = ballots[v].approved().to_vec();
        for (c, add) in changes {
            if add {
                ids.push(c);
            } else {
                ids.retain(|&x| x != c);
            }
        }
        ids.sort_unstable();
        ballots[v] = Ballot::from_sorted_unchecked(ids);
    }
    if e.allows_empty() || ballots.iter().any(Ballot::is_empty) {
        Election::with_empty_ballots(m, ballots)
    } else {
        Election::new(m, ballots)
    }
}

/// `count` change fractions scaled quadratically from 0 to `max`:
/// `max · (i / (count − 1))²`.
pub fn change_schedule(count: usize, max: f64) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(precondition("a schedule needs at least two points"));
    }
    Ok((0..count)
        .map(|i| {
            let x = i as f64 / (count - 1) as f64;
            max * x * x
        })
        .collect())
}
