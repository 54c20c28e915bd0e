//! Experiment harness: resilience of greedy committees under random
//! approval changes.
//!
//! - Exp1: distance between the lexicographic winners before and after.
//! - Exp2: how much closer the best of up to `cap` tied winners gets.
//! - Exp3: how often each member of the original committee is replaced,
//!   by selection round.
//!
//! Seeds: base election `e` uses `derive_seed(base, [0, e])`, the trial
//! perturbation `derive_seed(base, [1, e, op, pct_idx, trial])`. Rows come
//! out in canonical (election, op, pct, trial) order whatever the thread
//! count.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::election::{committee_distance, CandidateId, Committee, Election};
use crate::error::{config, Result};
use crate::greedy::{closest_winner_sampled, lexicographic_order};
use crate::rule::{OwaWeights, RuleSpec};
use crate::sampler::{
    change_schedule, perturb, sample_election, ChangeOp, ChangeSpec, Model, SamplerSpec,
};
use crate::seed::derive_seed;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Exp1,
    Exp2,
    Exp3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 20 elections, 50 trials per point.
    Desk,
    /// 100 elections, 100 trials per point.
    Full,
}

impl Preset {
    pub fn sizes(self) -> (usize, usize) {
        match self {
            Preset::Desk => (20, 50),
            Preset::Full => (100, 100),
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Preset::Desk),
            "full" => Ok(Preset::Full),
            _ => Err(config(format!("unknown preset `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub which: Experiment,
    pub rule: RuleSpec,
    pub model: Model,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub num_elections: usize,
    pub trials: usize,
    /// Change fractions (0.01 = 1% of all approvals).
    pub pcts: Vec<f64>,
    pub ops: Vec<ChangeOp>,
    /// Exp2: maximum number of tied winners enumerated.
    pub cap: usize,
    pub base_seed: u64,
}

pub const SCHEDULE_POINTS: usize = 15;
pub const SCHEDULE_MAX: f64 = 0.10;
pub const EXP3_PCT: f64 = 0.025;
pub const DEFAULT_CAP: usize = 100;

impl ExperimentConfig {
    /// Defaults: n = 1000, m = 100, k = 10; Exp1 runs all three operations
    /// over the 15-point schedule, Exp2 MIX over the schedule, Exp3 MIX at
    /// 2.5%.
    pub fn new(which: Experiment, rule: RuleSpec, model: Model, preset: Preset, base_seed: u64) -> Self {
        let (num_elections, trials) = preset.sizes();
        let schedule = change_schedule(SCHEDULE_POINTS, SCHEDULE_MAX).expect("fixed schedule");
        let (pcts, ops) = match which {
            Experiment::Exp1 => (schedule, ChangeOp::ALL.to_vec()),
            Experiment::Exp2 => (schedule, vec![ChangeOp::Mix]),
            Experiment::Exp3 => (vec![EXP3_PCT], vec![ChangeOp::Mix]),
        };
        ExperimentConfig {
            which,
            rule,
            model,
            n: 1000,
            m: 100,
            k: 10,
            num_elections,
            trials,
            pcts,
            ops,
            cap: DEFAULT_CAP,
            base_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !self.rule.greedy {
            return Err(config(format!("experiments need a greedy rule, got {}", self.rule)));
        }
        if self.k == 0 || self.k > self.m || self.n == 0 {
            return Err(config(format!("bad sizes n = {}, m = {}, k = {}", self.n, self.m, self.k)));
        }
        if self.num_elections == 0 || self.trials == 0 || self.cap == 0 {
            return Err(config("elections, trials and cap must be positive"));
        }
        if self.ops.is_empty() || self.pcts.is_empty() {
            return Err(config("need at least one operation and one change percentage"));
        }
        if let Some(p) = self.pcts.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(config(format!("change fraction {p} outside [0, 1]")));
        }
        if self.which != Experiment::Exp1 && self.ops != [ChangeOp::Mix] {
            return Err(config("experiments 2 and 3 use the MIX operation only"));
        }
        if self.which == Experiment::Exp3 && self.pcts.len() != 1 {
            return Err(config("experiment 3 uses a single change percentage"));
        }
        Ok(())
    }

    fn weights(&self) -> Result<OwaWeights> {
        self.rule.rule.weights(self.k)
    }

    fn election_seed(&self, e: usize) -> u64 {
        derive_seed(self.base_seed, &[0, e as u64])
    }

    fn trial_seed(&self, e: usize, op: ChangeOp, pct_idx: usize, trial: usize) -> u64 {
        derive_seed(
            self.base_seed,
            &[1, e as u64, op.code(), pct_idx as u64, trial as u64],
        )
    }

    fn labels(&self) -> Labels {
        Labels {
            model: self.model.label(),
            model_param: self.model.param_label(),
            rule: self.rule.to_string(),
        }
    }
}

#[derive(Clone)]
struct Labels {
    model: String,
    model_param: String,
    rule: String,
}

/// A trial whose perturbation could not be applied; it produces no row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedTrial {
    pub election_idx: usize,
    pub op: ChangeOp,
    pub pct_idx: usize,
    pub trial_idx: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp1Row {
    pub model: String,
    pub model_param: String,
    pub rule: String,
    pub op: ChangeOp,
    pub pct_idx: usize,
    pub change_pct: f64,
    pub election_idx: usize,
    pub trial_idx: usize,
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp2Row {
    pub model: String,
    pub model_param: String,
    pub rule: String,
    pub op: ChangeOp,
    pub pct_idx: usize,
    pub change_pct: f64,
    pub election_idx: usize,
    pub trial_idx: usize,
    pub dist_lexi: usize,
    pub dist_opt: usize,
    pub diff: usize,
    pub tied_found: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp3Row {
    pub model: String,
    pub model_param: String,
    pub rule: String,
    pub op: ChangeOp,
    pub change_pct: f64,
    pub election_idx: usize,
    /// Trials that produced a perturbed election.
    pub trials: usize,
    /// 1-based selection round of `candidate` in the original run.
    pub round_idx: usize,
    pub candidate: u32,
    pub replaced_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput<R> {
    pub rows: Vec<R>,
    pub skipped: Vec<SkippedTrial>,
}

struct Base {
    election: Election,
    order: Vec<CandidateId>,
    committee: Committee,
}

fn base_elections(cfg: &ExperimentConfig, w: &OwaWeights) -> Result<Vec<Base>> {
    (0..cfg.num_elections)
        .into_par_iter()
        .map(|e| {
            let election = sample_election(&SamplerSpec {
                model: cfg.model,
                n: cfg.n,
                m: cfg.m,
                seed: cfg.election_seed(e),
            })?;
            let order = lexicographic_order(&election, cfg.k, w)?;
            let committee = Committee::new(order.iter().copied())?;
            Ok(Base {
                election,
                order,
                committee,
            })
        })
        .collect()
}

/// Every (election, op, pct_idx) triple in canonical order.
fn points(cfg: &ExperimentConfig) -> Vec<(usize, ChangeOp, usize)> {
    let mut out = Vec::new();
    for e in 0..cfg.num_elections {
        for &op in &cfg.ops {
            for p in 0..cfg.pcts.len() {
                out.push((e, op, p));
            }
        }
    }
    out
}

enum Trial<T> {
    Done(T),
    Skipped(SkippedTrial),
}

/// Runs `f` on the perturbed election of every trial of every point.
fn run_trials<T, F>(cfg: &ExperimentConfig, bases: &[Base], f: F) -> Result<Vec<Vec<Trial<T>>>>
where
    T: Send,
    F: Fn(&Base, usize, ChangeOp, usize, usize, &Election) -> Result<T> + Sync,
{
    points(cfg)
        .into_par_iter()
        .map(|(e, op, p)| {
            let base = &bases[e];
            let change = ChangeSpec::from_fraction(op, &base.election, cfg.pcts[p]);
            (0..cfg.trials)
                .map(|t| match perturb(&base.election, change, cfg.trial_seed(e, op, p, t)) {
                    Ok(after) => f(base, e, op, p, t, &after).map(Trial::Done),
                    Err(err) => Ok(Trial::Skipped(SkippedTrial {
                        election_idx: e,
                        op,
                        pct_idx: p,
                        trial_idx: t,
                        reason: err.to_string(),
                    })),
                })
                .collect()
        })
        .collect()
}

fn split<T>(groups: Vec<Vec<Trial<T>>>) -> ExperimentOutput<T> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for trial in groups.into_iter().flatten() {
        match trial {
            Trial::Done(r) => rows.push(r),
            Trial::Skipped(s) => skipped.push(s),
        }
    }
    ExperimentOutput { rows, skipped }
}

fn expect(cfg: &ExperimentConfig, which: Experiment) -> Result<()> {
    cfg.validate()?;
    if cfg.which != which {
        return Err(config(format!("configuration is for {:?}", cfg.which)));
    }
    Ok(())
}

pub fn run_exp1(cfg: &ExperimentConfig) -> Result<ExperimentOutput<Exp1Row>> {
    expect(cfg, Experiment::Exp1)?;
    let w = cfg.weights()?;
    let bases = base_elections(cfg, &w)?;
    let labels = cfg.labels();
    let groups = run_trials(cfg, &bases, |base, e, op, p, t, after| {
        let lexi = Committee::new(lexicographic_order(after, cfg.k, &w)?)?;
        Ok(Exp1Row {
            model: labels.model.clone(),
            model_param: labels.model_param.clone(),
            rule: labels.rule.clone(),
            op,
            pct_idx: p,
            change_pct: cfg.pcts[p] * 100.0,
            election_idx: e,
            trial_idx: t,
            distance: committee_distance(&base.committee, &lexi)?,
        })
    })?;
    Ok(split(groups))
}

pub fn run_exp2(cfg: &ExperimentConfig) -> Result<ExperimentOutput<Exp2Row>> {
    expect(cfg, Experiment::Exp2)?;
    let w = cfg.weights()?;
    let bases = base_elections(cfg, &w)?;
    let labels = cfg.labels();
    let groups = run_trials(cfg, &bases, |base, e, op, p, t, after| {
        let lexi = Committee::new(lexicographic_order(after, cfg.k, &w)?)?;
        let dist_lexi = committee_distance(&base.committee, &lexi)?;
        let best = closest_winner_sampled(after, cfg.k, &w, &base.committee, cfg.cap)?;
        Ok(Exp2Row {
            model: labels.model.clone(),
            model_param: labels.model_param.clone(),
            rule: labels.rule.clone(),
            op,
            pct_idx: p,
            change_pct: cfg.pcts[p] * 100.0,
            election_idx: e,
            trial_idx: t,
            dist_lexi,
            dist_opt: best.distance,
            diff: dist_lexi - best.distance,
            tied_found: best.found,
            truncated: best.truncated,
        })
    })?;
    Ok(split(groups))
}

pub fn run_exp3(cfg: &ExperimentConfig) -> Result<ExperimentOutput<Exp3Row>> {
    expect(cfg, Experiment::Exp3)?;
    let w = cfg.weights()?;
    let bases = base_elections(cfg, &w)?;
    let labels = cfg.labels();
    let groups = run_trials(cfg, &bases, |_, _, _, _, _, after| {
        Committee::new(lexicographic_order(after, cfg.k, &w)?)
    })?;
    let op = cfg.ops[0];
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (e, group) in groups.into_iter().enumerate() {
        let base = &bases[e];
        let mut winners = Vec::with_capacity(cfg.trials);
        for trial in group {
            match trial {
                Trial::Done(c) => winners.push(c),
                Trial::Skipped(s) => skipped.push(s),
            }
        }
        for (round, &c) in base.order.iter().enumerate() {
            let replaced = winners.iter().filter(|s| !s.contains(c)).count();
            rows.push(Exp3Row {
                model: labels.model.clone(),
                model_param: labels.model_param.clone(),
                rule: labels.rule.clone(),
                op,
                change_pct: cfg.pcts[0] * 100.0,
                election_idx: e,
                trials: winners.len(),
                round_idx: round + 1,
                candidate: c.0,
                replaced_fraction: if winners.is_empty() {
                    0.0
                } else {
                    replaced as f64 / winners.len() as f64
                },
            });
        }
    }
    Ok(ExperimentOutput { rows, skipped })
}

/// Writes rows as CSV with a header row and RFC 4180 quoting.
pub fn write_csv<R: Serialize, W: Write>(out: W, rows: &[R]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn csv_string<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

pub fn read_csv<R: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<Vec<R>> {
    let mut reader = csv::Reader::from_path(path)?;
    let rows = reader.deserialize().collect::<std::result::Result<Vec<R>, _>>()?;
    Ok(rows)
}

/// Sidecar describing how a CSV was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub experiment: Experiment,
    pub artifact_version: String,
    pub base_seed: u64,
    pub rule: String,
    pub model: Model,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub num_elections: usize,
    pub trials_per_point: usize,
    pub change_fractions: Vec<f64>,
    pub ops: Vec<ChangeOp>,
    pub enumerate_cap: Option<usize>,
    pub rows: usize,
    pub skipped: Vec<SkippedTrial>,
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig, rows: usize, skipped: &[SkippedTrial]) -> Self {
        Manifest {
            experiment: cfg.which,
            artifact_version: ARTIFACT_VERSION.to_string(),
            base_seed: cfg.base_seed,
            rule: cfg.rule.to_string(),
            model: cfg.model,
            n: cfg.n,
            m: cfg.m,
            k: cfg.k,
            num_elections: cfg.num_elections,
            trials_per_point: cfg.trials,
            change_fractions: cfg.pcts.clone(),
            ops: cfg.ops.clone(),
            enumerate_cap: (cfg.which == Experiment::Exp2).then_some(cfg.cap),
            rows,
            skipped: skipped.to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Path of the manifest accompanying `csv_path`: `<csv_path>.manifest.json`.
pub fn manifest_path(csv_path: &Path) -> std::path::PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".manifest.json");
    name.into()
}

pub fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, count) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Mean Exp1 distance per (operation, pct index).
pub fn exp1_means(rows: &[Exp1Row]) -> BTreeMap<(ChangeOp, usize), f64> {
    let mut acc: BTreeMap<(ChangeOp, usize), (f64, usize)> = BTreeMap::new();
    for r in rows {
        let slot = acc.entry((r.op, r.pct_idx)).or_default();
        slot.0 += r.distance as f64;
        slot.1 += 1;
    }
    acc.into_iter().map(|(key, (s, c))| (key, s / c as f64)).collect()
}

/// Mean Exp3 replaced fraction per round, index 0 = round 1.
pub fn exp3_round_means(rows: &[Exp3Row]) -> Vec<f64> {
    let rounds = rows.iter().map(|r| r.round_idx).max().unwrap_or(0);
    (1..=rounds)
        .map(|round| {
            mean(rows.iter().filter(|r| r.round_idx == round).map(|r| r.replaced_fraction))
                .unwrap_or(0.0)
        })
        .collect()
}

/// Share of rows satisfying `pred`.
pub fn fraction<R>(rows: &[R], pred: impl Fn(&R) -> bool) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    rows.iter().filter(|r| pred(r)).count() as f64 / rows.len() as f64
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        // tied values share the average of their 1-based ranks
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties; `None` when a
/// side is constant or the lengths differ.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let mx = mean(rx.iter().copied())?;
    let my = mean(ry.iter().copied())?;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(which: Experiment, rule: &str) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(
            which,
            rule.parse().unwrap(),
            Model::OneD { radius: 0.1 },
            Preset::Desk,
            42,
        );
        cfg.n = 60;
        cfg.m = 20;
        cfg.k = 4;
        cfg.num_elections = 3;
        cfg.trials = 4;
        if which != Experiment::Exp3 {
            cfg.pcts = vec![0.0, 0.02, 0.1];
        }
        cfg
    }

    #[test]
    fn exp1_rows_and_zero_change() {
        let cfg = small(Experiment::Exp1, "greedy-cc");
        let out = run_exp1(&cfg).unwrap();
        assert!(out.skipped.is_empty());
        assert_eq!(out.rows.len(), 3 * 3 * 3 * 4);
        assert!(out.rows.iter().filter(|r| r.pct_idx == 0).all(|r| r.distance == 0));
        assert!(out.rows.iter().all(|r| r.distance <= cfg.k));
        // canonical order
        let keys: Vec<_> = out
            .rows
            .iter()
            .map(|r| (r.election_idx, r.op, r.pct_idx, r.trial_idx))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn csv_is_deterministic_and_parses_back() {
        let cfg = small(Experiment::Exp2, "greedy-pav");
        let a = run_exp2(&cfg).unwrap();
        let b = run_exp2(&cfg).unwrap();
        let text = csv_string(&a.rows).unwrap();
        assert_eq!(text, csv_string(&b.rows).unwrap());
        assert!(text.starts_with(
            "model,model_param,rule,op,pct_idx,change_pct,election_idx,trial_idx,dist_lexi,dist_opt,diff,tied_found,truncated\n"
        ));
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let back: Vec<Exp2Row> = reader.deserialize().map(|r| r.unwrap()).collect();
        assert_eq!(back, a.rows);
        assert!(a.rows.iter().all(|r| r.dist_opt <= r.dist_lexi));
    }

    #[test]
    fn exp3_fractions() {
        let cfg = small(Experiment::Exp3, "greedy-cc");
        let out = run_exp3(&cfg).unwrap();
        assert_eq!(out.rows.len(), 3 * 4);
        assert!(out
            .rows
            .iter()
            .all(|r| (0.0..=1.0).contains(&r.replaced_fraction) && r.trials == 4));
        assert_eq!(exp3_round_means(&out.rows).len(), 4);
    }

    #[test]
    fn config_checks() {
        let mut cfg = small(Experiment::Exp1, "greedy-cc");
        cfg.rule = "cc".parse().unwrap();
        assert!(run_exp1(&cfg).is_err());
        let mut cfg = small(Experiment::Exp2, "greedy-cc");
        cfg.ops = vec![ChangeOp::Add];
        assert!(run_exp2(&cfg).is_err());
        let cfg = small(Experiment::Exp2, "greedy-cc");
        assert!(run_exp1(&cfg).is_err());
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 1.0], &[1.0, 2.0]), None);
        assert_eq!(ranks(&[5.0, 1.0, 5.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(
            manifest_path(Path::new("out/exp1.csv")),
            Path::new("out/exp1.csv.manifest.json")
        );
    }
}
