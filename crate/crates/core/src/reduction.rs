//! Independent Set → RCE instance generator and a brute-force IS oracle.
//!
//! Candidate layout of a generated instance: vertex candidates `0..ν`,
//! dummies `ν..ν+κ`, padding `ν+κ..ν+κ+s−1`. Voters, in order:
//! 1. `t` voters per edge `{u, w}` approving `c_u, c_w`;
//! 2. `(ν − deg w)·t` voters per vertex approving `c_w`;
//! 3. `t` voters per (dummy, vertex) pair, dummy-major;
//! 4. `κ·t` voters per dummy approving only it.
//!
//! Every voter also approves all padding candidates. The changed election
//! drops the lowest dummy from the first group-3 voter.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use num_integer::Integer;

use crate::election::{Ballot, CandidateId, Committee, Election};
use crate::error::{config, precondition, Error, Result};
use crate::instance::RceInstance;
use crate::rule::{OwaWeights, Rule, Weight};

pub const MAX_IS_VERTICES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    nu: usize,
    edges: BTreeSet<(u32, u32)>,
}

impl Graph {
    /// Edges are unordered; `(u, v)` and `(v, u)` name the same edge.
    pub fn new(nu: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= nu || v >= nu {
                return Err(precondition(format!("edge ({u}, {v}) outside {nu} vertices")));
            }
            if u == v {
                return Err(precondition(format!("self-loop at vertex {u}")));
            }
            let key = (u.min(v) as u32, u.max(v) as u32);
            if !set.insert(key) {
                return Err(precondition(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(Graph { nu, edges: set })
    }

    pub fn complete(nu: usize) -> Self {
        let edges = (0..nu).flat_map(|u| (u + 1..nu).map(move |v| (u, v)));
        Graph::new(nu, edges).expect("complete graph is simple")
    }

    pub fn path(nu: usize) -> Self {
        Graph::new(nu, (1..nu).map(|v| (v - 1, v))).expect("path is simple")
    }

    pub fn num_vertices(&self) -> usize {
        self.nu
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    pub fn degree(&self, w: usize) -> usize {
        self.edges()
            .filter(|&(u, v)| u == w || v == w)
            .count()
    }

    fn neighbour_masks(&self) -> Vec<u64> {
        let mut masks = vec![0u64; self.nu];
        for (u, v) in self.edges() {
            masks[u] |= 1 << v;
            masks[v] |= 1 << u;
        }
        masks
    }
}

/// Graph file: a line `ν`, then one `u v` line per edge; `#` comments allowed.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing vertex count".into()))?;
    let nu: usize = header
        .parse()
        .map_err(|_| parse_err(line, format!("bad vertex count `{header}`")))?;
    let mut edges = Vec::new();
    for (line, l) in lines {
        let fields: Vec<&str> = l.split_whitespace().collect();
        let [u, v] = fields[..] else {
            return Err(parse_err(line, format!("expected `u v`, found `{l}`")));
        };
        let vertex = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(line, format!("bad vertex `{s}`")))
        };
        edges.push((line, vertex(u)?, vertex(v)?));
    }
    let mut graph = Graph::new(nu, [])?;
    for (line, u, v) in edges {
        let mut all: Vec<(usize, usize)> = graph.edges().collect();
        all.push((u, v));
        graph = Graph::new(nu, all).map_err(|e| parse_err(line, e.to_string()))?;
    }
    Ok(graph)
}

pub fn format_graph(g: &Graph) -> String {
    let mut out = format!("{}\n", g.nu);
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

/// True iff some `kappa` vertices are pairwise non-adjacent.
pub fn has_independent_set(g: &Graph, kappa: usize) -> Result<bool> {
    if g.nu > MAX_IS_VERTICES {
        return Err(Error::Budget {
            what: "independent set search".into(),
            needed: g.nu as u128,
            budget: MAX_IS_VERTICES as u128,
        });
    }
    fn extend(adj: &[u64], from: usize, allowed: u64, left: usize) -> bool {
        if left == 0 {
            return true;
        }
        if (allowed >> from).count_ones() < left as u32 {
            return false;
        }
        (from..adj.len()).any(|v| {
            allowed & (1 << v) != 0 && extend(adj, v + 1, allowed & !adj[v] & !(1 << v), left - 1)
        })
    }
    let all = if g.nu == 64 { u64::MAX } else { (1u64 << g.nu) - 1 };
    Ok(extend(&g.neighbour_masks(), 0, all, kappa))
}

/// All graphs on `nu` vertices, one per isomorphism class.
///
/// Canonical form is the lexicographically smallest adjacency bitstring over
/// all vertex permutations, so this is only meant for `nu ≤ 7`.
pub fn nonisomorphic_graphs(nu: usize) -> Result<Vec<Graph>> {
    if nu > 7 {
        return Err(precondition("isomorphism classes are enumerated only up to 7 vertices"));
    }
    let pairs: Vec<(usize, usize)> = (0..nu)
        .flat_map(|u| (u + 1..nu).map(move |v| (u, v)))
        .collect();
    let perms: Vec<Vec<usize>> = {
        use itertools::Itertools;
        (0..nu).permutations(nu).collect()
    };
    let pair_index = |u: usize, v: usize| {
        let (a, b) = (u.min(v), u.max(v));
        pairs.iter().position(|&p| p == (a, b)).unwrap()
    };
    let image: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| pairs.iter().map(|&(u, v)| pair_index(p[u], p[v])).collect())
        .collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let canonical = image
            .iter()
            .map(|img| {
                img.iter()
                    .enumerate()
                    .filter(|&(i, _)| mask & (1 << i) != 0)
                    .fold(0u64, |acc, (_, &j)| acc | (1 << j))
            })
            .min()
            .unwrap_or(0);
        if seen.insert(canonical) {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|&(i, _)| canonical & (1 << i) != 0)
                .map(|(_, &e)| e);
            out.push(Graph::new(nu, edges)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionOutput {
    pub instance: RceInstance,
    pub vertex_candidates: Vec<CandidateId>,
    pub dummies: Vec<CandidateId>,
    pub padding: Vec<CandidateId>,
    pub t: usize,
    pub s_pad: usize,
}

fn edge_and_vertex_voters(g: &Graph, t: usize) -> usize {
    (g.num_edges() + (0..g.nu).map(|x| g.nu - g.degree(x)).sum::<usize>()) * t
}

/// Weights of `rule` long enough for [`reduce_is_to_rce`] with this `kappa`.
pub fn reduction_weights(rule: &Rule, kappa: usize) -> Result<OwaWeights> {
    let mut s = 0;
    loop {
        match rule.lambda(s + 1) {
            Some(l) if l == Weight::from_integer(1) => s += 1,
            Some(_) => break,
            None => return Err(config("reduction undefined for AV")),
        }
        if s > 1 << 16 {
            return Err(config("reduction undefined for AV"));
        }
    }
    rule.weights((kappa + s - 1).max(s + 1))
}

/// Builds the IS → RCE instance; the committee is padding ∪ dummies and
/// `ell = 0`.
pub fn reduce_is_to_rce(g: &Graph, kappa: usize, w: &OwaWeights) -> Result<ReductionOutput> {
    if kappa == 0 {
        return Err(precondition("kappa must be at least 1"));
    }
    if g.nu == 0 {
        return Err(precondition("graph needs at least one vertex"));
    }
    let s = w.unit_prefix();
    if s >= w.len() {
        return Err(config("reduction undefined for AV"));
    }
    let k = kappa + s - 1;
    if w.len() < k {
        return Err(config(format!(
            "committee size {k} exceeds the {} given weights",
            w.len()
        )));
    }
    let alpha = w.weights()[s];
    // t = ⌈2 / (1 − α)⌉
    let bound = Weight::from_integer(2) / (Weight::from_integer(1) - alpha);
    let t = bound.numer().div_ceil(bound.denom()) as usize;

    let nu = g.nu;
    let vertex = |w: usize| CandidateId::from(w);
    let dummy = |d: usize| CandidateId::from(nu + d);
    let padding: Vec<CandidateId> = (0..s - 1).map(|f| CandidateId::from(nu + kappa + f)).collect();
    let m = nu + kappa + s - 1;

    let mut ballots: Vec<Vec<CandidateId>> = Vec::new();
    let mut push = |mut ids: Vec<CandidateId>, copies: usize| {
        ids.extend(&padding);
        ids.sort_unstable();
        for _ in 0..copies {
            ballots.push(ids.clone());
        }
    };
    for (u, v) in g.edges() {
        push(vec![vertex(u), vertex(v)], t);
    }
    for x in 0..nu {
        push(vec![vertex(x)], (nu - g.degree(x)) * t);
    }
    let first_group3 = edge_and_vertex_voters(g, t);
    for d in 0..kappa {
        for x in 0..nu {
            push(vec![dummy(d), vertex(x)], t);
        }
    }
    for d in 0..kappa {
        push(vec![dummy(d)], kappa * t);
    }

    debug_assert!(ballots.len() > first_group3);
    let before: Vec<Ballot> = ballots
        .iter()
        .cloned()
        .map(Ballot::from_sorted_unchecked)
        .collect();
    let mut after = before.clone();
    let changed: Vec<CandidateId> = ballots[first_group3]
        .iter()
        .copied()
        .filter(|&c| c != dummy(0))
        .collect();
    after[first_group3] = Ballot::from_sorted_unchecked(changed);

    let dummies: Vec<CandidateId> = (0..kappa).map(dummy).collect();
    let committee = Committee::new(dummies.iter().chain(&padding).copied())?;
    let instance = RceInstance::new(Election::new(m, before)?, Election::new(m, after)?, committee, 0)?;
    Ok(ReductionOutput {
        instance,
        vertex_candidates: (0..nu).map(vertex).collect(),
        dummies,
        padding,
        t,
        s_pad: s - 1,
    })
}
