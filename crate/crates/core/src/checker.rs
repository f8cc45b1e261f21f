//! Pattern checkers: on-the-fly product of a state space with a Büchi
//! automaton, explored by an iterative nested depth-first search.

use crate::automaton::{Automaton, Tail};
use crate::semantics::{Label, Lasso, NodeId, StateSpace, Step};
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckVerdict {
    Terminating,
    Lasso(Lasso),
    /// A reachable loop that tosses no coin.
    NotAsTerminating(Lasso),
}

impl CheckVerdict {
    pub fn is_terminating(&self) -> bool {
        matches!(self, CheckVerdict::Terminating)
    }

    pub fn lasso(&self) -> Option<&Lasso> {
        match self {
            CheckVerdict::Terminating => None,
            CheckVerdict::Lasso(l) | CheckVerdict::NotAsTerminating(l) => Some(l),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("product exceeds the budget of {0} states")]
    ProductBudget(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct CheckLimits {
    pub max_product_states: usize,
}

impl Default for CheckLimits {
    fn default() -> Self {
        CheckLimits { max_product_states: 50_000_000 }
    }
}

type Succ = (NodeId, u32, Label);

struct Product<'a> {
    space: &'a StateSpace,
    aut: &'a Automaton,
    index: HashMap<u64, u32>,
    states: Vec<(NodeId, u32)>,
    blue: Vec<bool>,
    red: Vec<bool>,
    limit: usize,
}

impl Product<'_> {
    fn intern(&mut self, v: NodeId, q: u32) -> Result<u32, CheckError> {
        let key = ((v as u64) << 32) | q as u64;
        if let Some(&s) = self.index.get(&key) {
            return Ok(s);
        }
        if self.states.len() >= self.limit {
            return Err(CheckError::ProductBudget(self.limit));
        }
        let s = self.states.len() as u32;
        self.index.insert(key, s);
        self.states.push((v, q));
        self.blue.push(false);
        self.red.push(false);
        Ok(s)
    }

    fn successors(&self, s: u32) -> Vec<Succ> {
        let (v, q) = self.states[s as usize];
        let mut out = Vec::new();
        if self.space.is_terminal(v) {
            return out;
        }
        for t in self.space.transitions(v) {
            for &(g, q2) in self.aut.edges(q) {
                if g.matches(t.label) {
                    out.push((t.target, q2, t.label));
                }
            }
        }
        out
    }
}

struct Frame {
    state: u32,
    via: Option<Label>,
    succ: Vec<Succ>,
    next: usize,
}

/// Searches for a reachable cycle through an accepting state. Runs that reach
/// the terminal node are dead ends.
pub fn find_accepting_lasso(
    space: &StateSpace,
    aut: &Automaton,
    limits: CheckLimits,
) -> Result<Option<Lasso>, CheckError> {
    let mut p = Product {
        space,
        aut,
        index: HashMap::new(),
        states: Vec::new(),
        blue: Vec::new(),
        red: Vec::new(),
        limit: limits.max_product_states.max(1),
    };
    for &root_node in space.init() {
        let root = p.intern(root_node, aut.initial)?;
        if p.blue[root as usize] {
            continue;
        }
        p.blue[root as usize] = true;
        let succ = p.successors(root);
        let mut stack = vec![Frame { state: root, via: None, succ, next: 0 }];
        while let Some(top) = stack.last_mut() {
            if top.next < top.succ.len() {
                let (v, q, l) = top.succ[top.next];
                top.next += 1;
                let s = p.intern(v, q)?;
                if !p.blue[s as usize] {
                    p.blue[s as usize] = true;
                    let succ = p.successors(s);
                    stack.push(Frame { state: s, via: Some(l), succ, next: 0 });
                }
                continue;
            }
            let seed = top.state;
            if aut.is_accepting(p.states[seed as usize].1) {
                if let Some(cycle) = inner_search(&mut p, seed)? {
                    let mut prefix = Vec::new();
                    for w in stack.windows(2) {
                        prefix.push(Step {
                            from: p.states[w[0].state as usize].0,
                            label: w[1].via.unwrap(),
                            to: p.states[w[1].state as usize].0,
                        });
                    }
                    return Ok(Some(Lasso { prefix, cycle }));
                }
            }
            stack.pop();
        }
    }
    Ok(None)
}

/// Looks for a path from `seed` back to itself, skipping states already
/// explored by earlier inner searches.
fn inner_search(p: &mut Product<'_>, seed: u32) -> Result<Option<Vec<Step>>, CheckError> {
    let succ = p.successors(seed);
    let mut stack = vec![Frame { state: seed, via: None, succ, next: 0 }];
    while let Some(top) = stack.last_mut() {
        if top.next < top.succ.len() {
            let (v, q, l) = top.succ[top.next];
            top.next += 1;
            let s = p.intern(v, q)?;
            if s == seed {
                let mut cycle = Vec::new();
                for w in stack.windows(2) {
                    cycle.push(Step {
                        from: p.states[w[0].state as usize].0,
                        label: w[1].via.unwrap(),
                        to: p.states[w[1].state as usize].0,
                    });
                }
                let last = stack.last().unwrap().state;
                cycle.push(Step { from: p.states[last as usize].0, label: l, to: v });
                return Ok(Some(cycle));
            }
            if !p.red[s as usize] {
                p.red[s as usize] = true;
                let succ = p.successors(s);
                stack.push(Frame { state: s, via: Some(l), succ, next: 0 });
            }
            continue;
        }
        stack.pop();
    }
    Ok(None)
}

/// A reachable cycle over non-terminal nodes using no coin transition.
pub fn check_coinless_nontermination(space: &StateSpace) -> Option<Lasso> {
    let n = space.node_count();
    let order = space.reachable();
    // 0 = white, 1 = on stack, 2 = done
    let mut color = vec![0u8; n];
    let coinless = |v: NodeId| -> Vec<(NodeId, Label)> {
        if space.is_terminal(v) {
            return Vec::new();
        }
        space
            .transitions(v)
            .iter()
            .filter(|t| !t.label.is_coin() && !space.is_terminal(t.target))
            .map(|t| (t.target, t.label))
            .collect()
    };
    for &root in &order {
        if color[root as usize] != 0 || space.is_terminal(root) {
            continue;
        }
        let mut stack: Vec<(NodeId, Option<Label>, Vec<(NodeId, Label)>, usize)> = Vec::new();
        color[root as usize] = 1;
        stack.push((root, None, coinless(root), 0));
        while let Some(top) = stack.last_mut() {
            if top.3 < top.2.len() {
                let (w, l) = top.2[top.3];
                top.3 += 1;
                match color[w as usize] {
                    0 => {
                        color[w as usize] = 1;
                        let succ = coinless(w);
                        stack.push((w, Some(l), succ, 0));
                    }
                    1 => {
                        let start = stack.iter().position(|f| f.0 == w).unwrap();
                        let mut cycle = Vec::new();
                        for i in start + 1..stack.len() {
                            cycle.push(Step { from: stack[i - 1].0, label: stack[i].1.unwrap(), to: stack[i].0 });
                        }
                        cycle.push(Step { from: stack.last().unwrap().0, label: l, to: w });
                        let prefix = path_from_init(space, w);
                        return Some(Lasso { prefix, cycle });
                    }
                    _ => {}
                }
                continue;
            }
            color[top.0 as usize] = 2;
            stack.pop();
        }
    }
    None
}

/// Shortest path from an initial node to `target`.
fn path_from_init(space: &StateSpace, target: NodeId) -> Vec<Step> {
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
        if v == target {
            break;
        }
        for t in space.transitions(v) {
            if !seen[t.target as usize] {
                seen[t.target as usize] = true;
                parent[t.target as usize] = Some(Step { from: v, label: t.label, to: t.target });
                q.push_back(t.target);
            }
        }
    }
    let mut path = Vec::new();
    let mut at = target;
    while let Some(s) = parent[at as usize] {
        path.push(s);
        at = s.from;
    }
    path.reverse();
    path
}

fn verdict(found: Option<Lasso>) -> CheckVerdict {
    match found {
        None => CheckVerdict::Terminating,
        Some(l) => CheckVerdict::Lasso(l),
    }
}

/// Is `(C* w)^ω` terminating? The empty word stands for `C^ω`.
pub fn check_simple_pattern(space: &StateSpace, w: &[u8], limits: CheckLimits) -> Result<CheckVerdict, CheckError> {
    let aut = if w.is_empty() { Automaton::universal() } else { Automaton::for_word(w) };
    Ok(verdict(find_accepting_lasso(space, &aut, limits)?))
}

/// Is `C* w_1 C* … C* w_m` followed by the tail terminating?
pub fn check_sequence_pattern(
    space: &StateSpace,
    words: &[Vec<u8>],
    tail: Tail,
    limits: CheckLimits,
) -> Result<CheckVerdict, CheckError> {
    let aut = Automaton::for_sequence(words, tail);
    Ok(verdict(find_accepting_lasso(space, &aut, limits)?))
}

/// Is `(AC)* R (AC)^ω` terminating? Coinless loops are reported first.
pub fn check_response_words(
    space: &StateSpace,
    words: &[Vec<Label>],
    limits: CheckLimits,
) -> Result<CheckVerdict, CheckError> {
    if let Some(l) = check_coinless_nontermination(space) {
        return Ok(CheckVerdict::NotAsTerminating(l));
    }
    let aut = Automaton::for_response(words);
    Ok(verdict(find_accepting_lasso(space, &aut, limits)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::compile;
    use crate::semantics::{build, BuildOptions, Instance};

    fn space(src: &str) -> StateSpace {
        build(&compile(src).unwrap(), &Instance::new(), BuildOptions::default()).unwrap()
    }

    const FW: &str = "program fw; var k : 0..100 = 0; var x : 0..1 = 0; var old : 0..1 = 0; begin \
        while (k < 100) { old := x; x := coin(1/2); if (x != old) { k := k + 1; } } end";

    #[test]
    fn fw_simple_patterns() {
        let s = space(FW);
        let lim = CheckLimits::default();
        assert!(check_simple_pattern(&s, &[0, 1], lim).unwrap().is_terminating());
        let v = check_simple_pattern(&s, &[1], lim).unwrap();
        let l = v.lasso().unwrap();
        assert!(s.replays(l));
        assert_eq!(l.coinword(), vec![1]);
        let v = check_simple_pattern(&s, &[0], lim).unwrap();
        assert_eq!(v.lasso().unwrap().coinword(), vec![0]);
    }

    #[test]
    fn coinless_loops() {
        let s = space("program t; var y : 0..1 = 0; begin while (y == y) { y := y; } end");
        let l = check_coinless_nontermination(&s).unwrap();
        assert!(s.replays(&l));
        assert!(l.coinword().is_empty());
        assert!(check_coinless_nontermination(&space(FW)).is_none());
        assert!(check_coinless_nontermination(&space("program t; var x : 0..1 = 0; begin x := 1; end")).is_none());
    }

    #[test]
    fn budget() {
        let err = check_simple_pattern(&space(FW), &[0, 1], CheckLimits { max_product_states: 5 }).unwrap_err();
        assert_eq!(err, CheckError::ProductBudget(5));
    }

    #[test]
    fn sequence_with_one_word_matches_simple() {
        let s = space(FW);
        for w in [vec![0u8], vec![1], vec![0, 1], vec![1, 1, 0]] {
            let a = check_simple_pattern(&s, &w, CheckLimits::default()).unwrap();
            let b = check_sequence_pattern(&s, &[w.clone()], Tail::Repeat, CheckLimits::default()).unwrap();
            assert_eq!(a, b);
        }
    }
}
