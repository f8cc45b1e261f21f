//! Explicit MDP of one program instance.
//!
//! Nodes are interned by (location, valuation); the end location collapses to
//! a single terminal node with a τ self-loop. Transitions of a node are stored
//! contiguously in the order τ, 0, 1, a0, a1.

use crate::lang::{Command, Program, Prob, SlotKind};
use crate::words::CoinWord;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Tau,
    C0,
    C1,
    A0,
    A1,
}

impl Label {
    pub fn coin(c: u8) -> Label {
        if c == 0 {
            Label::C0
        } else {
            Label::C1
        }
    }

    pub fn action(a: u8) -> Label {
        if a == 0 {
            Label::A0
        } else {
            Label::A1
        }
    }

    pub fn coin_value(self) -> Option<u8> {
        match self {
            Label::C0 => Some(0),
            Label::C1 => Some(1),
            _ => None,
        }
    }

    pub fn is_coin(self) -> bool {
        matches!(self, Label::C0 | Label::C1)
    }

    pub fn is_action(self) -> bool {
        matches!(self, Label::A0 | Label::A1)
    }

    pub fn parse(s: &str) -> Option<Label> {
        Some(match s {
            "tau" | "τ" => Label::Tau,
            "0" => Label::C0,
            "1" => Label::C1,
            "a0" => Label::A0,
            "a1" => Label::A1,
            _ => return None,
        })
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Tau => "tau",
            Label::C0 => "0",
            Label::C1 => "1",
            Label::A0 => "a0",
            Label::A1 => "a1",
        })
    }
}

/// Projection target: coins C, actions A, or both (G).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alphabet {
    Coins,
    Actions,
    Moves,
}

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Deterministic step: a guard or an assignment.
    Silent,
    Probabilistic,
    Action,
    Terminal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub label: Label,
    pub prob: Option<Prob>,
    pub target: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step {
    pub from: NodeId,
    pub label: Label,
    pub to: NodeId,
}

/// A finite prefix followed by a cycle returning to its own first node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub prefix: Vec<Step>,
    pub cycle: Vec<Step>,
}

impl Lasso {
    pub fn coinword(&self) -> CoinWord {
        coin_projection(&self.cycle)
    }

    pub fn stem_node(&self) -> NodeId {
        self.cycle[0].from
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("parameter `{name}` = {value} outside its declared range")]
    ParamOutOfRange { name: String, value: i64 },
    #[error("unbounded parameter `{0}` must be fixed by the instance")]
    MissingInstance(String),
    #[error("assignment leaves the declared range: edge `{edge}` at {valuation}")]
    OutOfRange { edge: String, valuation: String },
    #[error("arithmetic overflow on edge `{edge}` at {valuation}")]
    Overflow { edge: String, valuation: String },
    #[error("guards at `{loc}` hold {count} times at {valuation}; expected exactly once")]
    GuardPartition { loc: String, count: usize, valuation: String },
    #[error("state space exceeds the node cap of {0}")]
    NodeCap(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub node_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { node_cap: 10_000_000 }
    }
}

/// Parameter assignment for one instance, e.g. `N=3`.
pub type Instance = BTreeMap<String, i64>;

pub fn instance_text(inst: &Instance) -> String {
    if inst.is_empty() {
        return "-".to_string();
    }
    inst.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
}

const NO_LOC: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct StateSpace {
    pub name: String,
    pub instance: Instance,
    slot_names: Vec<String>,
    loc_names: Vec<String>,
    width: usize,
    locs: Vec<u32>,
    vals: Vec<i64>,
    kinds: Vec<NodeKind>,
    offsets: Vec<u32>,
    trans: Vec<Transition>,
    init: Vec<NodeId>,
    terminal: Option<NodeId>,
}

struct Builder<'a> {
    prog: &'a Program,
    width: usize,
    index: HashMap<Vec<i64>, NodeId>,
    locs: Vec<u32>,
    vals: Vec<i64>,
    terminal: Option<NodeId>,
    cap: usize,
}

impl Builder<'_> {
    fn intern(&mut self, loc: usize, vals: &[i64]) -> Result<NodeId, SemanticsError> {
        if loc == self.prog.end {
            if let Some(t) = self.terminal {
                return Ok(t);
            }
            let id = self.push(NO_LOC, &vec![0; self.width])?;
            self.terminal = Some(id);
            return Ok(id);
        }
        let mut key = Vec::with_capacity(self.width + 1);
        key.push(loc as i64);
        key.extend_from_slice(vals);
        if let Some(&id) = self.index.get(&key) {
            return Ok(id);
        }
        let id = self.push(loc as u32, vals)?;
        self.index.insert(key, id);
        Ok(id)
    }

    fn push(&mut self, loc: u32, vals: &[i64]) -> Result<NodeId, SemanticsError> {
        if self.locs.len() >= self.cap {
            return Err(SemanticsError::NodeCap(self.cap));
        }
        let id = self.locs.len() as NodeId;
        self.locs.push(loc);
        self.vals.extend_from_slice(vals);
        Ok(id)
    }

    fn valuation_text(&self, vals: &[i64]) -> String {
        self.prog.slots.iter().zip(vals).map(|(s, v)| format!("{}={v}", s.name)).collect::<Vec<_>>().join(",")
    }
}

/// Builds the reachable state space of `prog` under `instance`.
///
/// Bounded parameters missing from the instance range over all their values,
/// giving several initial nodes.
pub fn build(prog: &Program, instance: &Instance, opts: BuildOptions) -> Result<StateSpace, SemanticsError> {
    for name in instance.keys() {
        match prog.slot_index(name) {
            Some(s) if prog.slots[s].kind == SlotKind::Param => {}
            _ => return Err(SemanticsError::UnknownParam(name.clone())),
        }
    }
    let width = prog.slots.len();
    // per-slot candidate initial values
    let mut choices: Vec<Vec<i64>> = Vec::with_capacity(width);
    for s in &prog.slots {
        match s.kind {
            SlotKind::Var => choices.push(vec![s.init.unwrap_or(s.lower)]),
            SlotKind::Param => match (instance.get(&s.name), s.upper) {
                (Some(&v), _) => {
                    if !s.contains(v) {
                        return Err(SemanticsError::ParamOutOfRange { name: s.name.clone(), value: v });
                    }
                    choices.push(vec![v]);
                }
                (None, Some(u)) => choices.push((s.lower..=u).collect()),
                (None, None) => return Err(SemanticsError::MissingInstance(s.name.clone())),
            },
        }
    }

    let mut b = Builder {
        prog,
        width,
        index: HashMap::new(),
        locs: Vec::new(),
        vals: Vec::new(),
        terminal: None,
        cap: opts.node_cap.max(1),
    };
    let mut init = Vec::new();
    let mut pick = vec![0usize; width];
    loop {
        let v: Vec<i64> = pick.iter().enumerate().map(|(i, &k)| choices[i][k]).collect();
        let id = b.intern(prog.start, &v)?;
        if !init.contains(&id) {
            init.push(id);
        }
        let mut k = width;
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            if pick[k] + 1 < choices[k].len() {
                pick[k] += 1;
                break;
            }
            pick[k] = 0;
            if k == 0 {
                k = usize::MAX;
                break;
            }
        }
        if k == usize::MAX || width == 0 {
            break;
        }
    }

    let mut kinds = Vec::new();
    let mut offsets = vec![0u32];
    let mut trans: Vec<Transition> = Vec::new();
    let mut next = 0usize;
    let mut cur = vec![0i64; width];
    while next < b.locs.len() {
        let id = next as NodeId;
        next += 1;
        let loc = b.locs[id as usize];
        if loc == NO_LOC {
            kinds.push(NodeKind::Terminal);
            trans.push(Transition { label: Label::Tau, prob: None, target: id });
            offsets.push(trans.len() as u32);
            continue;
        }
        let loc = loc as usize;
        cur.copy_from_slice(&b.vals[id as usize * width..(id as usize + 1) * width]);
        let edges: Vec<_> = prog.outgoing(loc).collect();
        match &edges[0].cmd {
            Command::Cond(_) => {
                let lookup = |s: &usize| cur[*s];
                let mut holding = Vec::new();
                for e in &edges {
                    if let Command::Cond(c) = &e.cmd {
                        match c.eval(&lookup) {
                            Some(true) => holding.push(e.to),
                            Some(false) => {}
                            None => {
                                return Err(SemanticsError::Overflow {
                                    edge: prog.command_text(&e.cmd),
                                    valuation: b.valuation_text(&cur),
                                })
                            }
                        }
                    }
                }
                if holding.len() != 1 {
                    return Err(SemanticsError::GuardPartition {
                        loc: prog.locations[loc].clone(),
                        count: holding.len(),
                        valuation: b.valuation_text(&cur),
                    });
                }
                let t = b.intern(holding[0], &cur)?;
                kinds.push(NodeKind::Silent);
                trans.push(Transition { label: Label::Tau, prob: None, target: t });
            }
            Command::Assign(x, e) => {
                let edge = edges[0];
                let lookup = |s: &usize| cur[*s];
                let v = e.eval(&lookup).ok_or_else(|| SemanticsError::Overflow {
                    edge: format!("{} -> {} : {}", prog.locations[edge.from], prog.locations[edge.to], prog.command_text(&edge.cmd)),
                    valuation: b.valuation_text(&cur),
                })?;
                if !prog.slots[*x].contains(v) {
                    return Err(SemanticsError::OutOfRange {
                        edge: format!("{} -> {} : {}", prog.locations[edge.from], prog.locations[edge.to], prog.command_text(&edge.cmd)),
                        valuation: b.valuation_text(&cur),
                    });
                }
                let mut nv = cur.clone();
                nv[*x] = v;
                let t = b.intern(edge.to, &nv)?;
                kinds.push(NodeKind::Silent);
                trans.push(Transition { label: Label::Tau, prob: None, target: t });
            }
            Command::Coin(x, _) | Command::Nondet(x) => {
                let edge = edges[0];
                let is_coin = matches!(edge.cmd, Command::Coin(..));
                if !prog.slots[*x].contains(0) || !prog.slots[*x].contains(1) {
                    return Err(SemanticsError::OutOfRange {
                        edge: format!("{} -> {} : {}", prog.locations[edge.from], prog.locations[edge.to], prog.command_text(&edge.cmd)),
                        valuation: b.valuation_text(&cur),
                    });
                }
                for bit in 0..2u8 {
                    let mut nv = cur.clone();
                    nv[*x] = bit as i64;
                    let t = b.intern(edge.to, &nv)?;
                    if is_coin {
                        let Command::Coin(_, p) = &edge.cmd else { unreachable!() };
                        let prob = if bit == 0 { *p } else { p.complement() };
                        trans.push(Transition { label: Label::coin(bit), prob: Some(prob), target: t });
                    } else {
                        trans.push(Transition { label: Label::action(bit), prob: None, target: t });
                    }
                }
                kinds.push(if is_coin { NodeKind::Probabilistic } else { NodeKind::Action });
            }
        }
        offsets.push(trans.len() as u32);
    }

    Ok(StateSpace {
        name: prog.name.clone(),
        instance: instance.clone(),
        slot_names: prog.slots.iter().map(|s| s.name.clone()).collect(),
        loc_names: prog.locations.clone(),
        width,
        locs: b.locs,
        vals: b.vals,
        kinds,
        offsets,
        trans,
        init,
        terminal: b.terminal,
    })
}

/// Outcome of following a word from a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndsUp {
    /// Arrived at a branching node (or the terminal node) after the whole word.
    Node(NodeId),
    /// The terminal node was reached after only this many letters.
    TerminatedEarly(usize),
    /// A silent cycle, a missing label, or an unexpected branching kind.
    Undefined,
}

impl StateSpace {
    pub fn node_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn init(&self) -> &[NodeId] {
        &self.init
    }

    pub fn terminal(&self) -> Option<NodeId> {
        self.terminal
    }

    pub fn kind(&self, n: NodeId) -> NodeKind {
        self.kinds[n as usize]
    }

    pub fn is_terminal(&self, n: NodeId) -> bool {
        self.kinds[n as usize] == NodeKind::Terminal
    }

    pub fn transitions(&self, n: NodeId) -> &[Transition] {
        let (a, b) = (self.offsets[n as usize] as usize, self.offsets[n as usize + 1] as usize);
        &self.trans[a..b]
    }

    pub fn has_actions(&self) -> bool {
        self.kinds.contains(&NodeKind::Action)
    }

    pub fn location_name(&self, n: NodeId) -> Option<&str> {
        let l = self.locs[n as usize];
        (l != NO_LOC).then(|| self.loc_names[l as usize].as_str())
    }

    pub fn valuation(&self, n: NodeId) -> &[i64] {
        &self.vals[n as usize * self.width..(n as usize + 1) * self.width]
    }

    pub fn value_of(&self, n: NodeId, slot: &str) -> Option<i64> {
        let i = self.slot_names.iter().position(|s| s == slot)?;
        Some(self.valuation(n)[i])
    }

    /// `loc{var=val,...}`, or `top` for the terminal node.
    pub fn node_text(&self, n: NodeId) -> String {
        match self.location_name(n) {
            None => "top".to_string(),
            Some(loc) => {
                let vals = self
                    .slot_names
                    .iter()
                    .zip(self.valuation(n))
                    .map(|(s, v)| format!("{s}={v}"))
                    .collect::<Vec<_>>()
                    .join(",");
                format!("{loc}{{{vals}}}")
            }
        }
    }

    pub fn step_text(&self, s: &Step) -> String {
        let prob = self
            .transitions(s.from)
            .iter()
            .find(|t| t.label == s.label && t.target == s.to)
            .and_then(|t| t.prob);
        match prob {
            Some(p) => format!("{} {} {} {}", self.node_text(s.from), s.label, p, self.node_text(s.to)),
            None => format!("{} {} {}", self.node_text(s.from), s.label, self.node_text(s.to)),
        }
    }

    /// One line per transition: `SRC LABEL [P/Q] DST`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for n in 0..self.node_count() as NodeId {
            for t in self.transitions(n) {
                out.push_str(&self.step_text(&Step { from: n, label: t.label, to: t.target }));
                out.push('\n');
            }
        }
        out
    }

    pub fn lasso_text(&self, l: &Lasso) -> String {
        let mut out = String::new();
        for s in &l.prefix {
            out.push_str(&format!("PREFIX: {}\n", self.step_text(s)));
        }
        for s in &l.cycle {
            out.push_str(&format!("LOOP: {}\n", self.step_text(s)));
        }
        out.push_str(&format!("COINWORD: {}\n", crate::words::show(&l.coinword())));
        out
    }

    pub fn has_step(&self, s: &Step) -> bool {
        (s.from as usize) < self.node_count() && self.transitions(s.from).iter().any(|t| t.label == s.label && t.target == s.to)
    }

    /// Checks that the lasso is a path from an initial node closing its cycle.
    pub fn replays(&self, l: &Lasso) -> bool {
        if l.cycle.is_empty() {
            return false;
        }
        let start = l.prefix.first().map(|s| s.from).unwrap_or(l.cycle[0].from);
        if !self.init.contains(&start) {
            return false;
        }
        let mut at = start;
        for s in l.prefix.iter().chain(&l.cycle) {
            if s.from != at || !self.has_step(s) {
                return false;
            }
            at = s.to;
        }
        at == l.cycle[0].from
    }

    /// Follows τ-steps of silent nodes until a branching or terminal node.
    pub fn silent_closure(&self, mut n: NodeId) -> Option<NodeId> {
        let mut steps = 0usize;
        while self.kind(n) == NodeKind::Silent {
            n = self.transitions(n)[0].target;
            steps += 1;
            if steps > self.node_count() {
                return None;
            }
        }
        Some(n)
    }

    /// Follows `τ* g1 τ* g2 … τ*` where each letter is a coin or action label.
    pub fn follow(&self, from: NodeId, letters: &[Label]) -> EndsUp {
        let Some(mut n) = self.silent_closure(from) else { return EndsUp::Undefined };
        for (k, &l) in letters.iter().enumerate() {
            if self.is_terminal(n) {
                return EndsUp::TerminatedEarly(k);
            }
            let Some(t) = self.transitions(n).iter().find(|t| t.label == l) else { return EndsUp::Undefined };
            match self.silent_closure(t.target) {
                Some(m) => n = m,
                None => return EndsUp::Undefined,
            }
        }
        EndsUp::Node(n)
    }

    /// Coin-word version of [`StateSpace::follow`] for deterministic spaces.
    pub fn ends_up_in(&self, from: NodeId, w: &[u8]) -> EndsUp {
        let letters: Vec<Label> = w.iter().map(|&c| Label::coin(c)).collect();
        self.follow(from, &letters)
    }

    /// Nodes reachable from the initial nodes, in BFS order.
    pub fn reachable(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.node_count()];
        let mut order = Vec::new();
        let mut q: VecDeque<NodeId> = VecDeque::new();
        for &i in &self.init {
            if !seen[i as usize] {
                seen[i as usize] = true;
                q.push_back(i);
            }
        }
        while let Some(n) = q.pop_front() {
            order.push(n);
            for t in self.transitions(n) {
                if !seen[t.target as usize] {
                    seen[t.target as usize] = true;
                    q.push_back(t.target);
                }
            }
        }
        order
    }
}

pub fn trace_projection(steps: &[Step], alphabet: Alphabet) -> Vec<Label> {
    steps
        .iter()
        .map(|s| s.label)
        .filter(|l| match alphabet {
            Alphabet::Coins => l.is_coin(),
            Alphabet::Actions => l.is_action(),
            Alphabet::Moves => l.is_coin() || l.is_action(),
        })
        .collect()
}

pub fn coin_projection(steps: &[Step]) -> CoinWord {
    steps.iter().filter_map(|s| s.label.coin_value()).collect()
}
