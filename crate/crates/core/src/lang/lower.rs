//! Desugaring of structured statements into a flowgraph.
//!
//! Location 0 is the start, 1 the end. Each statement is lowered between an
//! entry and a target location; guards come before their negation.

use super::ast::*;
use super::program::*;
use std::collections::HashMap;

struct Lowerer {
    slots: HashMap<String, SlotId>,
    locations: Vec<String>,
    edges: Vec<Edge>,
}

impl Lowerer {
    fn fresh(&mut self) -> LocId {
        let id = self.locations.len();
        self.locations.push(format!("l{id}"));
        id
    }

    fn slot(&self, name: &str) -> SlotId {
        self.slots[name]
    }

    fn cond(&self, c: &Cond<String>) -> Cond<SlotId> {
        c.map_vars(&mut |n| self.slot(n))
    }

    fn edge(&mut self, from: LocId, to: LocId, cmd: Command) {
        self.edges.push(Edge { from, to, cmd });
    }

    fn block(&mut self, stmts: &[Stmt], entry: LocId, target: LocId) {
        debug_assert!(!stmts.is_empty());
        let mut at = entry;
        for (i, s) in stmts.iter().enumerate() {
            let next = if i + 1 == stmts.len() { target } else { self.fresh() };
            self.stmt(s, at, next);
            at = next;
        }
    }

    /// Lowers `stmts` reached by a guard edge from `from`.
    fn guarded(&mut self, from: LocId, guard: Cond<SlotId>, stmts: &[Stmt], target: LocId) {
        if stmts.is_empty() {
            self.edge(from, target, Command::Cond(guard));
        } else {
            let entry = self.fresh();
            self.edge(from, entry, Command::Cond(guard));
            self.block(stmts, entry, target);
        }
    }

    fn stmt(&mut self, s: &Stmt, entry: LocId, target: LocId) {
        match s {
            Stmt::Assign { target: x, value } => {
                let e = value.map_vars(&mut |n| self.slot(n));
                self.edge(entry, target, Command::Assign(self.slot(x), e));
            }
            Stmt::Coin { target: x, prob } => self.edge(entry, target, Command::Coin(self.slot(x), *prob)),
            Stmt::Nondet { target: x } => self.edge(entry, target, Command::Nondet(self.slot(x))),
            Stmt::If { cond, then_branch, else_branch } => {
                let g = self.cond(cond);
                self.guarded(entry, g.clone(), then_branch, target);
                let empty = Vec::new();
                self.guarded(entry, Cond::not(g), else_branch.as_ref().unwrap_or(&empty), target);
            }
            Stmt::While { cond, body } => {
                let g = self.cond(cond);
                self.guarded(entry, g.clone(), body, entry);
                self.edge(entry, target, Command::Cond(Cond::not(g)));
            }
        }
    }
}

/// Lowers a parsed program. The body runs from the start to an exit location
/// that moves unconditionally to the end.
pub fn lower(src: &SourceProgram) -> Program {
    let mut slots = Vec::new();
    let mut index = HashMap::new();
    for p in &src.params {
        index.insert(p.name.clone(), slots.len());
        slots.push(Slot { name: p.name.clone(), kind: SlotKind::Param, lower: p.lower, upper: p.upper, init: None });
    }
    for v in &src.vars {
        index.insert(v.name.clone(), slots.len());
        slots.push(Slot {
            name: v.name.clone(),
            kind: SlotKind::Var,
            lower: v.lower,
            upper: Some(v.upper),
            init: Some(v.init),
        });
    }
    let mut l = Lowerer { slots: index, locations: vec!["bot".into(), "top".into()], edges: Vec::new() };
    if src.body.is_empty() {
        l.edge(0, 1, Command::Cond(Cond::True));
    } else {
        let exit = l.fresh();
        l.block(&src.body, 0, exit);
        l.edge(exit, 1, Command::Cond(Cond::True));
    }
    l.edge(1, 1, Command::Cond(Cond::True));
    Program::new(src.name.clone(), slots, l.locations, l.edges, 0, 1)
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn lowered(src: &str) -> Program {
        let p = lower(&parse(src).unwrap());
        p.validate().unwrap();
        p
    }

    #[test]
    fn straight_line_has_three_locations() {
        let p = lowered("program t; var x : 0..1 = 0; begin x := 1; end");
        assert_eq!(p.locations.len(), 3);
        assert_eq!(p.edges.len(), 3);
        assert!(p.is_deterministic());
    }

    #[test]
    fn empty_program() {
        let p = lowered("program t; begin end");
        assert_eq!(p.locations.len(), 2);
        assert_eq!(p.outgoing(0).next().unwrap().to, 1);
    }

    #[test]
    fn while_head_carries_guard_then_negation() {
        let p = lowered("program fw; var k : 0..100 = 0; var x : 0..1 = 0; begin while (k < 100) { x := coin(1/2); if (x == 1) { k := k + 1; } } end");
        let head: Vec<&Edge> = p.outgoing(0).collect();
        assert_eq!(head.len(), 2);
        assert!(matches!(&head[1].cmd, Command::Cond(Cond::Not(_))));
        assert_eq!(p.coin_edge_count(), 1);
    }

    #[test]
    fn nondet_makes_nondeterministic() {
        let p = lowered("program t; var x : 0..1 = 0; begin x := nondet(); end");
        assert!(!p.is_deterministic());
    }

    #[test]
    fn empty_while_body_self_loops() {
        let p = lowered("program t; var x : 0..1 = 0; begin while (x == 0) { } end");
        let head: Vec<&Edge> = p.outgoing(0).collect();
        assert_eq!(head[0].to, 0);
    }

    #[test]
    fn overlapping_guards_are_rejected() {
        let mut p = lowered("program t; var x : 0..3 = 0; begin if (x < 2) { x := 1; } end");
        if let Command::Cond(c) = &mut p.edges[0].cmd {
            *c = Cond::True;
        }
        let err = p.validate().unwrap_err();
        assert!(matches!(err, ProgramError::NotAPartition { .. }), "{err}");
    }
}
