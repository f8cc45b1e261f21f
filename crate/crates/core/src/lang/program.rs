//! Flowgraph form: locations, edges, and one command per edge.

use super::ast::{Cond, Expr, Prob};
use super::print::{cond_to_string, expr_to_string};
use std::collections::VecDeque;
use thiserror::Error;

pub type SlotId = usize;
pub type LocId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Param,
    Var,
}

/// A parameter or program variable. Valuations list params first, then vars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub name: String,
    pub kind: SlotKind,
    pub lower: i64,
    /// `None` only for unbounded parameters.
    pub upper: Option<i64>,
    /// Fixed initial value; `None` for parameters.
    pub init: Option<i64>,
}

impl Slot {
    pub fn contains(&self, v: i64) -> bool {
        v >= self.lower && self.upper.is_none_or(|u| v <= u)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Cond(Cond<SlotId>),
    Assign(SlotId, Expr<SlotId>),
    Coin(SlotId, Prob),
    Nondet(SlotId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: LocId,
    pub to: LocId,
    pub cmd: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("location `{0}` mixes conditional and assignment edges")]
    MixedLocation(String),
    #[error("assignment edge is not the only outgoing edge of `{0}`")]
    SharedAssignment(String),
    #[error("guards of `{loc}` do not partition the valuation space at {valuation}")]
    NotAPartition { loc: String, valuation: String },
    #[error("end location must have exactly the self-loop as outgoing edge")]
    BadEnd,
    #[error("location `{0}` has no outgoing edge")]
    Stuck(String),
    #[error("location `{0}` is unreachable from the start")]
    Unreachable(String),
    #[error("slot {0} out of bounds")]
    BadSlot(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub name: String,
    pub slots: Vec<Slot>,
    pub locations: Vec<String>,
    pub edges: Vec<Edge>,
    pub start: LocId,
    pub end: LocId,
    outgoing: Vec<Vec<usize>>,
}

/// Guard-partition checks enumerate at most this many valuations per location.
const PARTITION_BUDGET: u64 = 1 << 18;
/// Window used for unbounded parameters during the partition check.
const UNBOUNDED_WINDOW: i64 = 8;

impl Program {
    pub fn new(
        name: String,
        slots: Vec<Slot>,
        locations: Vec<String>,
        edges: Vec<Edge>,
        start: LocId,
        end: LocId,
    ) -> Program {
        let mut outgoing = vec![Vec::new(); locations.len()];
        for (i, e) in edges.iter().enumerate() {
            outgoing[e.from].push(i);
        }
        Program { name, slots, locations, edges, start, end, outgoing }
    }

    pub fn outgoing(&self, loc: LocId) -> impl Iterator<Item = &Edge> + '_ {
        self.outgoing[loc].iter().map(move |&i| &self.edges[i])
    }

    pub fn slot_index(&self, name: &str) -> Option<SlotId> {
        self.slots.iter().position(|s| s.name == name)
    }

    pub fn params(&self) -> impl Iterator<Item = (SlotId, &Slot)> {
        self.slots.iter().enumerate().filter(|(_, s)| s.kind == SlotKind::Param)
    }

    pub fn is_deterministic(&self) -> bool {
        !self.edges.iter().any(|e| matches!(e.cmd, Command::Nondet(_)))
    }

    /// At least one parameter without an upper bound.
    pub fn is_weakly_finite(&self) -> bool {
        self.params().any(|(_, s)| s.upper.is_none())
    }

    pub fn coin_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| matches!(e.cmd, Command::Coin(..))).count()
    }

    pub fn slot_name(&self, s: SlotId) -> String {
        self.slots[s].name.clone()
    }

    pub fn expr_text(&self, e: &Expr<SlotId>) -> String {
        expr_to_string(e, &|s: &SlotId| self.slot_name(*s))
    }

    pub fn cond_text(&self, c: &Cond<SlotId>) -> String {
        cond_to_string(c, &|s: &SlotId| self.slot_name(*s))
    }

    pub fn command_text(&self, c: &Command) -> String {
        match c {
            Command::Cond(g) => format!("[{}]", self.cond_text(g)),
            Command::Assign(x, e) => format!("{} := {}", self.slot_name(*x), self.expr_text(e)),
            Command::Coin(x, p) => format!("{} := coin({p})", self.slot_name(*x)),
            Command::Nondet(x) => format!("{} := nondet()", self.slot_name(*x)),
        }
    }

    /// Checks the flowgraph invariants: end self-loop only, homogeneous
    /// locations, lone assignment edges, guard partition, reachability.
    pub fn validate(&self) -> Result<(), ProgramError> {
        let n = self.slots.len();
        let check_slot = |s: SlotId| if s < n { Ok(()) } else { Err(ProgramError::BadSlot(s)) };
        for e in &self.edges {
            match &e.cmd {
                Command::Cond(c) => {
                    let mut bad = None;
                    c.visit_vars(&mut |s| {
                        if *s >= n {
                            bad = Some(*s)
                        }
                    });
                    if let Some(s) = bad {
                        return Err(ProgramError::BadSlot(s));
                    }
                }
                Command::Assign(x, ex) => {
                    check_slot(*x)?;
                    let mut bad = None;
                    ex.visit_vars(&mut |s| {
                        if *s >= n {
                            bad = Some(*s)
                        }
                    });
                    if let Some(s) = bad {
                        return Err(ProgramError::BadSlot(s));
                    }
                }
                Command::Coin(x, _) | Command::Nondet(x) => check_slot(*x)?,
            }
        }
        let end_out: Vec<&Edge> = self.outgoing(self.end).collect();
        if end_out.len() != 1 || end_out[0].to != self.end || end_out[0].cmd != Command::Cond(Cond::True) {
            return Err(ProgramError::BadEnd);
        }
        for loc in 0..self.locations.len() {
            let out: Vec<&Edge> = self.outgoing(loc).collect();
            if out.is_empty() {
                return Err(ProgramError::Stuck(self.locations[loc].clone()));
            }
            let conds = out.iter().filter(|e| matches!(e.cmd, Command::Cond(_))).count();
            if conds != 0 && conds != out.len() {
                return Err(ProgramError::MixedLocation(self.locations[loc].clone()));
            }
            if conds == 0 && out.len() > 1 {
                return Err(ProgramError::SharedAssignment(self.locations[loc].clone()));
            }
            if conds > 0 {
                self.check_partition(loc, &out)?;
            }
        }
        let mut seen = vec![false; self.locations.len()];
        let mut queue = VecDeque::from([self.start]);
        seen[self.start] = true;
        while let Some(l) = queue.pop_front() {
            for e in self.outgoing(l) {
                if !seen[e.to] {
                    seen[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        if let Some(l) = seen.iter().position(|s| !s) {
            return Err(ProgramError::Unreachable(self.locations[l].clone()));
        }
        Ok(())
    }

    fn check_partition(&self, loc: LocId, out: &[&Edge]) -> Result<(), ProgramError> {
        let mut used: Vec<SlotId> = Vec::new();
        for e in out {
            if let Command::Cond(c) = &e.cmd {
                c.visit_vars(&mut |s| used.push(*s));
            }
        }
        used.sort_unstable();
        used.dedup();
        let ranges: Vec<(i64, i64)> = used
            .iter()
            .map(|&s| {
                let slot = &self.slots[s];
                (slot.lower, slot.upper.unwrap_or(slot.lower.saturating_add(UNBOUNDED_WINDOW)))
            })
            .collect();
        let mut vals: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        let mut full = vec![0i64; self.slots.len()];
        for _ in 0..PARTITION_BUDGET {
            for (k, &s) in used.iter().enumerate() {
                full[s] = vals[k];
            }
            let lookup = |s: &SlotId| full[*s];
            let holding = out
                .iter()
                .filter(|e| match &e.cmd {
                    Command::Cond(c) => c.eval(&lookup).unwrap_or(false),
                    _ => false,
                })
                .count();
            if holding != 1 {
                let valuation = used
                    .iter()
                    .map(|&s| format!("{}={}", self.slots[s].name, full[s]))
                    .collect::<Vec<_>>()
                    .join(",");
                return Err(ProgramError::NotAPartition { loc: self.locations[loc].clone(), valuation });
            }
            // odometer step
            let mut k = 0;
            loop {
                if k == vals.len() {
                    return Ok(());
                }
                if vals[k] < ranges[k].1 {
                    vals[k] += 1;
                    break;
                }
                vals[k] = ranges[k].0;
                k += 1;
            }
        }
        Ok(())
    }

    /// Human-readable listing, one edge per line.
    pub fn listing(&self) -> String {
        let mut s = String::new();
        for e in &self.edges {
            s.push_str(&format!(
                "{} -> {} : {}\n",
                self.locations[e.from],
                self.locations[e.to],
                self.command_text(&e.cmd)
            ));
        }
        s
    }
}
