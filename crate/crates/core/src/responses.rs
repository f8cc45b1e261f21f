//! Nondeterministic programs: alternation normal form, responses (coin
//! replies for every action sequence), and their construction.

use crate::checker::{check_response_words, CheckError, CheckLimits, CheckVerdict};
use crate::lang::{Command, Edge, LocId, Program, Prob, Slot, SlotKind};
use crate::oracle::{as_terminating_mdp, MdpWitness};
use crate::semantics::{EndsUp, Label, NodeId, NodeKind, StateSpace};
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use thiserror::Error;

pub const PAD_VAR: &str = "__pad";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Parity {
    ExpectAction,
    ExpectCoin,
}

/// Inserts dummy tosses and dummy choices on `__pad` so that actions and
/// coins strictly alternate along every path, starting with an action.
/// A program already in that form is returned unchanged.
pub fn normalize(prog: &Program) -> Program {
    use Parity::*;
    let flip = |p: Parity| if p == ExpectAction { ExpectCoin } else { ExpectAction };
    // reachable (location, parity) pairs
    let mut seen: Vec<[bool; 2]> = vec![[false; 2]; prog.locations.len()];
    let pidx = |p: Parity| if p == ExpectAction { 0 } else { 1 };
    let mut queue = VecDeque::from([(prog.start, ExpectAction)]);
    seen[prog.start][0] = true;
    while let Some((l, p)) = queue.pop_front() {
        if l == prog.end {
            continue;
        }
        for e in prog.outgoing(l) {
            let q = match e.cmd {
                Command::Cond(_) | Command::Assign(..) => p,
                Command::Coin(..) | Command::Nondet(..) => {
                    if (matches!(e.cmd, Command::Coin(..)) && p == ExpectCoin)
                        || (matches!(e.cmd, Command::Nondet(..)) && p == ExpectAction)
                    {
                        flip(p)
                    } else {
                        p
                    }
                }
            };
            if !seen[e.to][pidx(q)] {
                seen[e.to][pidx(q)] = true;
                queue.push_back((e.to, q));
            }
        }
    }
    // the first reached copy keeps the original id
    let mut locations = prog.locations.clone();
    let mut id: HashMap<(LocId, Parity), LocId> = HashMap::new();
    for l in 0..prog.locations.len() {
        if l == prog.end {
            id.insert((l, ExpectAction), l);
            id.insert((l, ExpectCoin), l);
            continue;
        }
        match seen[l] {
            [true, true] => {
                id.insert((l, ExpectAction), l);
                id.insert((l, ExpectCoin), locations.len());
                locations.push(format!("{}_c", prog.locations[l]));
            }
            [true, false] => {
                id.insert((l, ExpectAction), l);
            }
            [false, true] => {
                id.insert((l, ExpectCoin), l);
            }
            [false, false] => {}
        }
    }
    let mut slots = prog.slots.clone();
    let pad = slots.len();
    let mut padded = false;
    let mut edges = Vec::new();
    for e in &prog.edges {
        for p in [ExpectAction, ExpectCoin] {
            if e.from == prog.end {
                if p == ExpectAction {
                    edges.push(e.clone());
                }
                continue;
            }
            let Some(&from) = id.get(&(e.from, p)) else { continue };
            if !seen[e.from][pidx(p)] {
                continue;
            }
            match (&e.cmd, p) {
                (Command::Coin(..), ExpectAction) | (Command::Nondet(..), ExpectCoin) => {
                    padded = true;
                    let mid = locations.len();
                    locations.push(format!("pad{mid}"));
                    let dummy = if p == ExpectAction { Command::Nondet(pad) } else { Command::Coin(pad, Prob::half()) };
                    edges.push(Edge { from, to: mid, cmd: dummy });
                    edges.push(Edge { from: mid, to: id[&(e.to, p)], cmd: e.cmd.clone() });
                }
                (Command::Coin(..), ExpectCoin) | (Command::Nondet(..), ExpectAction) => {
                    edges.push(Edge { from, to: id[&(e.to, flip(p))], cmd: e.cmd.clone() });
                }
                _ => edges.push(Edge { from, to: id[&(e.to, p)], cmd: e.cmd.clone() }),
            }
        }
    }
    if padded {
        slots.push(Slot { name: PAD_VAR.into(), kind: SlotKind::Var, lower: 0, upper: Some(1), init: Some(0) });
    }
    // keep every location referenced; drop ids that were never reached
    let used: Vec<bool> = {
        let mut u = vec![false; locations.len()];
        u[prog.start] = true;
        u[prog.end] = true;
        for e in &edges {
            u[e.from] = true;
            u[e.to] = true;
        }
        u
    };
    if used.iter().all(|&x| x) {
        return Program::new(prog.name.clone(), slots, locations, edges, prog.start, prog.end);
    }
    let mut remap = vec![usize::MAX; locations.len()];
    let mut kept = Vec::new();
    for (i, name) in locations.iter().enumerate() {
        if used[i] {
            remap[i] = kept.len();
            kept.push(name.clone());
        }
    }
    let edges = edges.into_iter().map(|e| Edge { from: remap[e.from], to: remap[e.to], cmd: e.cmd }).collect();
    Program::new(prog.name.clone(), slots, kept, edges, remap[prog.start], remap[prog.end])
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResponseError {
    #[error("invalid response: {0}")]
    Invalid(String),
    #[error("not almost-surely terminating: an adversary avoids termination")]
    Refuted(MdpWitness),
    #[error("state space is not in normal form: {0}")]
    NotNormalForm(String),
    #[error("no per-node response within {0} steps")]
    TooLong(usize),
}

/// `2^n` words over `A·C` of length `2n` with pairwise distinct action parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Response {
    n: usize,
    words: Vec<Vec<Label>>,
}

fn action_bits(w: &[Label]) -> Vec<u8> {
    w.iter().filter(|l| l.is_action()).map(|&l| if l == Label::A0 { 0 } else { 1 }).collect()
}

impl Response {
    /// Validates and stores the words sorted by action projection.
    pub fn new(mut words: Vec<Vec<Label>>) -> Result<Response, ResponseError> {
        let bad = |m: String| Err(ResponseError::Invalid(m));
        if words.is_empty() {
            return bad("no words".into());
        }
        let len = words[0].len();
        if len % 2 != 0 {
            return bad("odd word length".into());
        }
        let n = len / 2;
        for w in &words {
            if w.len() != len {
                return bad("words differ in length".into());
            }
            for (i, l) in w.iter().enumerate() {
                let ok = if i % 2 == 0 { l.is_action() } else { l.is_coin() };
                if !ok {
                    return bad(format!("letter {i} of a word breaks the action/coin alternation"));
                }
            }
        }
        if n >= usize::BITS as usize - 1 || words.len() != 1usize << n {
            return bad(format!("expected {} words, found {}", 1u128 << n.min(100), words.len()));
        }
        words.sort_by_key(|w| action_bits(w));
        if words.windows(2).any(|p| action_bits(&p[0]) == action_bits(&p[1])) {
            return bad("two words share an action sequence".into());
        }
        Ok(Response { n, words })
    }

    /// The length-0 response `{ε}`.
    pub fn empty() -> Response {
        Response { n: 0, words: vec![Vec::new()] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn words(&self) -> &[Vec<Label>] {
        &self.words
    }

    /// The coin reply for an action sequence of length `n`.
    pub fn reply(&self, actions: &[u8]) -> Option<Vec<u8>> {
        self.words
            .iter()
            .find(|w| action_bits(w) == actions)
            .map(|w| w.iter().filter_map(|l| l.coin_value()).collect())
    }

    /// Every word of `self` followed by every word of `other`.
    pub fn compose(&self, other: &Response) -> Response {
        let mut words = Vec::with_capacity(self.words.len() * other.words.len());
        for a in &self.words {
            for b in &other.words {
                words.push([a.clone(), b.clone()].concat());
            }
        }
        Response::new(words).expect("composition preserves validity")
    }

    /// Answers every action sequence of length `n` with zeros.
    pub fn zeros(n: usize) -> Response {
        let words = crate::words::all_of_length(n)
            .map(|acts| acts.iter().flat_map(|&a| [Label::action(a), Label::C0]).collect())
            .collect();
        Response::new(words).unwrap()
    }

    pub fn parse(text: &str) -> Result<Response, ResponseError> {
        let mut words = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.starts_with('#') {
                continue;
            }
            let w: Option<Vec<Label>> =
                line.split_whitespace().map(|t| Label::parse(t).filter(|l| *l != Label::Tau)).collect();
            words.push(w.ok_or_else(|| ResponseError::Invalid(format!("bad letter in `{line}`")))?);
        }
        words.retain(|w| !w.is_empty());
        if words.is_empty() {
            return Ok(Response::empty());
        }
        Response::new(words)
    }
}

impl fmt::Display for Response {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in &self.words {
            let line = w.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ");
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Shortest (then least) coin reply to `actions` that leads `q` to
/// termination, padded with zeros to `actions.len()`.
fn best_reply(space: &StateSpace, q: NodeId, actions: &[u8]) -> Result<Option<Vec<u8>>, ResponseError> {
    let mut layer: Vec<(NodeId, Vec<u8>)> = vec![(q, Vec::new())];
    let pad = |mut r: Vec<u8>| {
        r.resize(actions.len(), 0);
        r
    };
    for &a in actions {
        let mut wins: Vec<Vec<u8>> = Vec::new();
        let mut probs = Vec::new();
        for (v, r) in &layer {
            if space.is_terminal(*v) {
                wins.push(r.clone());
                continue;
            }
            let t = space.transitions(*v).iter().find(|t| t.label == Label::action(a));
            let Some(t) = t else { return Err(ResponseError::NotNormalForm(format!("node {v} has no action"))) };
            let Some(p) = space.silent_closure(t.target) else { return Ok(None) };
            if space.is_terminal(p) {
                wins.push(r.clone());
            } else if space.kind(p) != NodeKind::Probabilistic {
                return Err(ResponseError::NotNormalForm(format!("action at node {v} is not followed by a coin")));
            } else {
                probs.push((p, r.clone()));
            }
        }
        if let Some(w) = wins.into_iter().min() {
            return Ok(Some(pad(w)));
        }
        let mut next: Vec<(NodeId, Vec<u8>)> = Vec::new();
        let mut seen = HashMap::new();
        for (p, r) in probs {
            for c in 0..2u8 {
                let t = space.transitions(p)[c as usize].target;
                let Some(n) = space.silent_closure(t) else { continue };
                if !space.is_terminal(n) && space.kind(n) != NodeKind::Action {
                    return Err(ResponseError::NotNormalForm(format!("coin at node {p} is not followed by an action")));
                }
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(n) {
                    let mut r2 = r.clone();
                    r2.push(c);
                    e.insert(());
                    next.push((n, r2));
                }
            }
        }
        layer = next;
    }
    Ok(layer.into_iter().filter(|(v, _)| space.is_terminal(*v)).map(|(_, r)| r).min().map(pad))
}

/// Per-node response: the least length at which every action sequence has a
/// terminating coin reply.
fn node_response(space: &StateSpace, q: NodeId, max_len: usize) -> Result<Response, ResponseError> {
    'len: for len in 1..=max_len {
        let mut words = Vec::new();
        for acts in crate::words::all_of_length(len) {
            match best_reply(space, q, &acts)? {
                None => continue 'len,
                Some(r) => words.push(acts.iter().zip(&r).flat_map(|(&a, &c)| [Label::action(a), Label::coin(c)]).collect()),
            }
        }
        return Response::new(words);
    }
    Err(ResponseError::TooLong(max_len))
}

fn follow_response_word(space: &StateSpace, from: NodeId, w: &[Label]) -> EndsUp {
    space.follow(from, w)
}

/// Builds a terminating response for an almost-surely terminating space in
/// normal form, then pads all words to a common length with zero replies.
pub fn construct_response(space: &StateSpace) -> Result<Response, ResponseError> {
    as_terminating_mdp(space).map_err(ResponseError::Refuted)?;
    let actions: Vec<NodeId> = space.reachable().into_iter().filter(|&v| space.kind(v) == NodeKind::Action).collect();
    let max_len = space.node_count().clamp(1, 20);
    let mut cache: BTreeMap<NodeId, Response> = BTreeMap::new();
    let mut leaves: Vec<Vec<Label>> = Vec::new();
    let live: Vec<NodeId> = actions.clone();
    grow(space, Vec::new(), live, &mut cache, max_len, &mut leaves)?;
    let longest = leaves.iter().map(|w| w.len() / 2).max().unwrap_or(0);
    let mut words = Vec::new();
    for w in leaves {
        let rest = Response::zeros(longest - w.len() / 2);
        for r in rest.words() {
            words.push([w.clone(), r.clone()].concat());
        }
    }
    Response::new(words)
}

/// Extends `prefix` until no live node can still be at an action node.
fn grow(
    space: &StateSpace,
    prefix: Vec<Label>,
    live: Vec<NodeId>,
    cache: &mut BTreeMap<NodeId, Response>,
    max_len: usize,
    leaves: &mut Vec<Vec<Label>>,
) -> Result<(), ResponseError> {
    let Some(&q) = live.first() else {
        leaves.push(prefix);
        return Ok(());
    };
    if !cache.contains_key(&q) {
        let r = node_response(space, q, max_len)?;
        cache.insert(q, r);
    }
    let resp = cache[&q].clone();
    for r in resp.words() {
        let mut next = Vec::new();
        for &v in &live {
            match follow_response_word(space, v, r) {
                EndsUp::Node(n) if space.is_terminal(n) => {}
                EndsUp::TerminatedEarly(_) => {}
                EndsUp::Node(n) if space.kind(n) == NodeKind::Action => {
                    if !next.contains(&n) {
                        next.push(n);
                    }
                }
                other => return Err(ResponseError::NotNormalForm(format!("following a response word gave {other:?}"))),
            }
        }
        next.sort_unstable();
        grow(space, [prefix.clone(), r.clone()].concat(), next, cache, max_len, leaves)?;
    }
    Ok(())
}

/// Is `(AC)* R (AC)^ω` terminating for every resolution of the actions?
pub fn check_response_pattern(space: &StateSpace, r: &Response, limits: CheckLimits) -> Result<CheckVerdict, CheckError> {
    check_response_words(space, r.words(), limits)
}

/// True when actions and coins alternate along every path, starting with an action.
pub fn is_normal_form(prog: &Program) -> bool {
    normalize(prog) == *prog
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::compile;
    use crate::semantics::{build, BuildOptions, Instance};

    const ECHO: &str = "program e; var x : 0..1 = 0; var y : 0..1 = 0; begin x := nondet(); y := coin(1/2); \
        while (x == y) { x := nondet(); y := coin(1/2); } end";

    fn space_of(p: &Program) -> StateSpace {
        build(p, &Instance::new(), BuildOptions::default()).unwrap()
    }

    fn resp(lines: &str) -> Response {
        Response::parse(lines).unwrap()
    }

    #[test]
    fn echo_is_normal() {
        let p = compile(ECHO).unwrap();
        assert!(is_normal_form(&p));
    }

    #[test]
    fn deterministic_coin_gets_a_dummy_choice() {
        let p = compile("program t; var x : 0..1 = 0; begin x := coin(1/2); end").unwrap();
        let n = normalize(&p);
        n.validate().unwrap();
        assert_eq!(n.edges.iter().filter(|e| matches!(e.cmd, Command::Nondet(_))).count(), 1);
        assert!(n.slot_index(PAD_VAR).is_some());
        assert!(is_normal_form(&n));
    }

    #[test]
    fn consecutive_choices_get_a_dummy_coin() {
        let p = compile("program t; var x : 0..1 = 0; var y : 0..1 = 0; begin x := nondet(); y := nondet(); end").unwrap();
        let n = normalize(&p);
        n.validate().unwrap();
        assert_eq!(n.edges.iter().filter(|e| matches!(e.cmd, Command::Coin(..))).count(), 1);
        assert!(is_normal_form(&n));
    }

    #[test]
    fn response_validity() {
        assert!(Response::parse("a0 1\na1 0\n").is_ok());
        assert!(Response::parse("a0 1\na0 0\n").is_err());
        assert!(Response::parse("a0 1\n").is_err());
        assert!(Response::parse("1 a0\n0 a1\n").is_err());
        assert_eq!(Response::parse("").unwrap(), Response::empty());
    }

    #[test]
    fn composition() {
        let r = resp("a0 1\na1 0\n");
        assert_eq!(r.compose(&Response::empty()), r);
        let rr = r.compose(&r);
        assert_eq!(rr.len(), 2);
        assert_eq!(rr.words().len(), 4);
        assert_eq!(Response::empty().compose(&Response::empty()), Response::empty());
        assert_eq!(rr.reply(&[1, 0]), Some(vec![0, 1]));
    }

    #[test]
    fn echo_responses() {
        let s = space_of(&compile(ECHO).unwrap());
        let lim = CheckLimits::default();
        assert!(check_response_pattern(&s, &resp("a0 1\na1 0\n"), lim).unwrap().is_terminating());
        let v = check_response_pattern(&s, &resp("a0 0\na1 1\n"), lim).unwrap();
        assert!(s.replays(v.lasso().unwrap()));
        assert!(!check_response_pattern(&s, &Response::empty(), lim).unwrap().is_terminating());
        let r = construct_response(&s).unwrap();
        assert!(r.len() <= s.node_count() * s.node_count());
        assert_eq!(r.reply(&[0]), Some(vec![1]));
        assert_eq!(r.reply(&[1]), Some(vec![0]));
        assert!(check_response_pattern(&s, &r, lim).unwrap().is_terminating());
    }

    #[test]
    fn unconditional_end_gets_padded_response() {
        let p = normalize(&compile("program t; var x : 0..1 = 0; begin x := nondet(); end").unwrap());
        let s = space_of(&p);
        let r = construct_response(&s).unwrap();
        assert!(check_response_pattern(&s, &r, CheckLimits::default()).unwrap().is_terminating());
    }

    #[test]
    fn adversarial_loop_is_refuted() {
        let p = compile("program e; var x : 0..1 = 0; var y : 0..1 = 0; begin while (x == x) { x := nondet(); y := coin(1/2); } end").unwrap();
        assert!(matches!(construct_response(&space_of(&p)), Err(ResponseError::Refuted(_))));
    }
}
