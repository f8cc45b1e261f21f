//! Ground truth independent of patterns: graph-based qualitative checks and
//! seeded Monte-Carlo sampling.

use crate::semantics::{Label, Lasso, NodeId, NodeKind, StateSpace, Step};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetWitness {
    /// A reachable node from which the terminal node is unreachable.
    pub node: NodeId,
    pub path: Vec<Step>,
}

impl DetWitness {
    /// Extends the path to a lasso by following first transitions; every
    /// node on it misses the terminal node.
    pub fn lasso(&self, space: &StateSpace) -> Lasso {
        let mut steps = self.path.clone();
        let mut at: HashMap<NodeId, usize> = HashMap::new();
        let mut v = self.node;
        loop {
            if let Some(&k) = at.get(&v) {
                let cycle = steps.split_off(k);
                return Lasso { prefix: steps, cycle };
            }
            at.insert(v, steps.len());
            let t = &space.transitions(v)[0];
            steps.push(Step { from: v, label: t.label, to: t.target });
            v = t.target;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdpWitness {
    /// Positional choice for every action node.
    pub strategy: BTreeMap<NodeId, Label>,
    /// Nodes closed under the strategy that never reach the terminal node.
    pub closed: Vec<NodeId>,
    /// Path from an initial node into `closed`.
    pub path: Vec<Step>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("action node {0} needs a strategy")]
    UnresolvedAction(NodeId),
}

/// Nodes that can reach the terminal node along some path.
fn can_reach_terminal(space: &StateSpace) -> Vec<bool> {
    let n = space.node_count();
    let mut rev: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for v in 0..n as NodeId {
        for t in space.transitions(v) {
            rev[t.target as usize].push(v);
        }
    }
    let mut good = vec![false; n];
    let mut q = VecDeque::new();
    if let Some(t) = space.terminal() {
        good[t as usize] = true;
        q.push_back(t);
    }
    while let Some(v) = q.pop_front() {
        for &u in &rev[v as usize] {
            if !good[u as usize] {
                good[u as usize] = true;
                q.push_back(u);
            }
        }
    }
    good
}

/// Shortest path from an initial node to the first node satisfying `target`, in BFS order.
fn path_to(space: &StateSpace, target: impl Fn(NodeId) -> bool) -> Option<(NodeId, Vec<Step>)> {
    let n = space.node_count();
    let mut parent: Vec<Option<Step>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut q = VecDeque::new();
    for &i in space.init() {
        if !seen[i as usize] {
            seen[i as usize] = true;
            q.push_back(i);
        }
    }
    while let Some(v) = q.pop_front() {
        if target(v) {
            let mut path = Vec::new();
            let mut at = v;
            while let Some(s) = parent[at as usize] {
                path.push(s);
                at = s.from;
            }
            path.reverse();
            return Some((v, path));
        }
        for t in space.transitions(v) {
            if !seen[t.target as usize] {
                seen[t.target as usize] = true;
                parent[t.target as usize] = Some(Step { from: v, label: t.label, to: t.target });
                q.push_back(t.target);
            }
        }
    }
    None
}

/// True iff the terminal node is reachable from every reachable node.
pub fn as_terminating_deterministic(space: &StateSpace) -> Result<(), DetWitness> {
    let good = can_reach_terminal(space);
    match path_to(space, |v| !good[v as usize]) {
        None => Ok(()),
        Some((node, path)) => Err(DetWitness { node, path }),
    }
}

/// Almost-sure termination under every strategy.
///
/// Computes the greatest set of non-terminal nodes from which the adversary
/// avoids the terminal node surely; the program terminates almost surely iff
/// that set is unreachable.
pub fn as_terminating_mdp(space: &StateSpace) -> Result<(), MdpWitness> {
    let n = space.node_count();
    let mut avoid: Vec<bool> = (0..n as NodeId).map(|v| !space.is_terminal(v)).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..n as NodeId {
            if !avoid[v as usize] {
                continue;
            }
            let ts = space.transitions(v);
            let keep = match space.kind(v) {
                NodeKind::Action => ts.iter().any(|t| avoid[t.target as usize]),
                _ => ts.iter().all(|t| avoid[t.target as usize]),
            };
            if !keep {
                avoid[v as usize] = false;
                changed = true;
            }
        }
    }
    let Some((_, path)) = path_to(space, |v| avoid[v as usize]) else { return Ok(()) };
    let mut strategy = BTreeMap::new();
    for v in 0..n as NodeId {
        if space.kind(v) == NodeKind::Action {
            let ts = space.transitions(v);
            let pick = ts.iter().find(|t| avoid[t.target as usize]).unwrap_or(&ts[0]);
            strategy.insert(v, pick.label);
        }
    }
    for s in &path {
        if space.kind(s.from) == NodeKind::Action {
            strategy.insert(s.from, s.label);
        }
    }
    let closed = (0..n as NodeId).filter(|&v| avoid[v as usize]).collect();
    Err(MdpWitness { strategy, closed, path })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Estimate {
    pub samples: u64,
    pub terminated: u64,
    pub capped: u64,
}

impl Estimate {
    pub fn terminated_fraction(&self) -> f64 {
        self.terminated as f64 / self.samples.max(1) as f64
    }

    pub fn capped_fraction(&self) -> f64 {
        self.capped as f64 / self.samples.max(1) as f64
    }
}

const BATCH: u64 = 1024;

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Samples runs of at most `cap` steps. Action nodes are resolved by `strategy`.
pub fn monte_carlo(
    space: &StateSpace,
    samples: u64,
    cap: u64,
    seed: u64,
    strategy: Option<&(dyn Fn(NodeId) -> Label + Sync)>,
) -> Result<Estimate, OracleError> {
    if strategy.is_none() {
        if let Some(v) = (0..space.node_count() as NodeId).find(|&v| space.kind(v) == NodeKind::Action) {
            return Err(OracleError::UnresolvedAction(v));
        }
    }
    let init = space.init();
    let batches = samples.div_ceil(BATCH);
    let terminated: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b);
            let lo = b * BATCH;
            let hi = (lo + BATCH).min(samples);
            let mut done = 0u64;
            for i in lo..hi {
                let mut v = init[(i % init.len() as u64) as usize];
                let mut steps = 0u64;
                while steps < cap && !space.is_terminal(v) {
                    let ts = space.transitions(v);
                    v = match space.kind(v) {
                        NodeKind::Probabilistic => {
                            let p = ts[0].prob.expect("coin transition carries a probability");
                            if rng.random_range(0..p.denom()) < p.numer() {
                                ts[0].target
                            } else {
                                ts[1].target
                            }
                        }
                        NodeKind::Action => {
                            let want = strategy.map(|f| f(v)).unwrap_or(Label::A0);
                            ts.iter().find(|t| t.label == want).unwrap_or(&ts[0]).target
                        }
                        _ => ts[0].target,
                    };
                    steps += 1;
                }
                if space.is_terminal(v) {
                    done += 1;
                }
            }
            done
        })
        .sum();
    Ok(Estimate { samples, terminated, capped: samples - terminated })
}

/// Empirical probability that `w` occurs in a uniformly random word of length `len`.
pub fn coin_infix_statistics(w: &[u8], len: usize, samples: u64, seed: u64) -> f64 {
    let batches = samples.div_ceil(BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b);
            let lo = b * BATCH;
            let hi = (lo + BATCH).min(samples);
            let mut buf = vec![0u8; len];
            let mut hits = 0u64;
            for _ in lo..hi {
                for c in buf.iter_mut() {
                    *c = rng.random_range(0..2u8);
                }
                if w.is_empty() || buf.windows(w.len()).any(|x| x == w) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    hits as f64 / samples.max(1) as f64
}

/// Lower bound `1 - (1 - 2^-|w|)^floor(L/|w|)` for the fair coin.
pub fn infix_lower_bound(w_len: usize, len: usize) -> f64 {
    let miss = 1.0 - 0.5f64.powi(w_len as i32);
    1.0 - miss.powi((len / w_len) as i32)
}
