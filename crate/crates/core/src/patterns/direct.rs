//! Direct construction of a terminating word for a deterministic program by
//! concatenating per-node escape words.

use crate::oracle::{as_terminating_deterministic, DetWitness};
use crate::semantics::{EndsUp, NodeId, NodeKind, StateSpace};
use crate::words::CoinWord;
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DirectError {
    #[error("the program has nondeterministic choices")]
    NotDeterministic,
    #[error("node {} cannot reach termination", .0.node)]
    Refuted(DetWitness),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectWord {
    pub word: CoinWord,
    /// Probabilistic nodes plus the terminal node.
    pub abstraction_nodes: usize,
}

/// Coin-abstraction successor: toss `c` at `q`, then follow τ-steps.
fn toss(space: &StateSpace, q: NodeId, c: u8) -> Option<NodeId> {
    space.silent_closure(space.transitions(q)[c as usize].target)
}

/// Shortest, then lexicographically least, word leading `q` to termination.
fn escape_word(space: &StateSpace, q: NodeId) -> Option<CoinWord> {
    let mut parent: HashMap<NodeId, (NodeId, u8)> = HashMap::new();
    let mut queue = VecDeque::from([q]);
    parent.insert(q, (q, 2));
    while let Some(v) = queue.pop_front() {
        if space.is_terminal(v) {
            let mut w = Vec::new();
            let mut at = v;
            while at != q {
                let (p, c) = parent[&at];
                w.push(c);
                at = p;
            }
            w.reverse();
            return Some(w);
        }
        for c in 0..2u8 {
            let Some(t) = toss(space, v, c) else { continue };
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(t) {
                e.insert((v, c));
                queue.push_back(t);
            }
        }
    }
    None
}

/// Builds `w` such that every node terminates following a prefix of `w`:
/// while some probabilistic node ends up at a non-terminal node `q` after
/// `w`, append the escape word of `q`.
pub fn construct_pattern_direct(space: &StateSpace) -> Result<DirectWord, DirectError> {
    if space.has_actions() {
        return Err(DirectError::NotDeterministic);
    }
    as_terminating_deterministic(space).map_err(DirectError::Refuted)?;
    let probs: Vec<NodeId> = space.reachable().into_iter().filter(|&v| space.kind(v) == NodeKind::Probabilistic).collect();
    let mut escapes: HashMap<NodeId, CoinWord> = HashMap::new();
    let mut w: CoinWord = Vec::new();
    loop {
        let pending = probs.iter().find_map(|&q| match space.ends_up_in(q, &w) {
            EndsUp::Node(n) if !space.is_terminal(n) => Some(n),
            _ => None,
        });
        let Some(q) = pending else { break };
        if !escapes.contains_key(&q) {
            let e = escape_word(space, q).expect("terminal reachable from every node");
            escapes.insert(q, e);
        }
        w.extend_from_slice(&escapes[&q]);
    }
    Ok(DirectWord { word: w, abstraction_nodes: probs.len() + 1 })
}
