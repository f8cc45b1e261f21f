//! Lowering a document back to a flowgraph, optionally bounding its
//! unbounded variables so that the explicit-state engine can explore it.

use super::{add, and, cmp, int, var, DocError, TsDocument, Update};
use crate::lang::{CmpOp, Command, Cond, Edge, LocId, Program, Slot, SlotId, SlotKind};

struct Lowering {
    locations: Vec<String>,
    edges: Vec<Edge>,
    slots: Vec<Slot>,
    capped: Vec<bool>,
    cap: i64,
    scratch: Option<SlotId>,
}

impl Lowering {
    fn fresh(&mut self, hint: &str) -> LocId {
        let id = self.locations.len();
        self.locations.push(format!("{hint}{id}"));
        id
    }

    fn edge(&mut self, from: LocId, cmd: Command, to: LocId) {
        self.edges.push(Edge { from, to, cmd });
    }

    fn scratch(&mut self) -> SlotId {
        *self.scratch.get_or_insert_with(|| {
            self.slots.push(Slot {
                name: "__h".into(),
                kind: SlotKind::Var,
                lower: 0,
                upper: Some(1),
                init: Some(0),
            });
            self.slots.len() - 1
        })
    }

    /// `x := ?` as a counting loop bounded by the upper end of `x`.
    fn havoc(&mut self, from: LocId, x: SlotId, to: LocId) {
        let h = self.scratch();
        let (lo, hi) = (self.slots[x].lower, self.slots[x].upper.expect("bounded by now"));
        let choose = self.fresh("h");
        let test = self.fresh("h");
        let bump = self.fresh("h");
        self.edge(from, Command::Assign(x, int(lo)), choose);
        self.edge(choose, Command::Nondet(h), test);
        let more = and(vec![cmp(CmpOp::Eq, var(h), int(1)), cmp(CmpOp::Lt, var(x), int(hi))]);
        self.edge(test, Command::Cond(more.clone()), bump);
        self.edge(test, Command::Cond(Cond::Not(Box::new(more))), to);
        self.edge(bump, Command::Assign(x, add(var(x), int(1))), choose);
    }

    fn update(&mut self, from: LocId, x: SlotId, u: &Update, to: LocId) {
        match u {
            Update::Set(e) if self.capped[x] => {
                // saturate at the cap
                let fits = cmp(CmpOp::Le, e.clone(), int(self.cap));
                let (a, b) = (self.fresh("s"), self.fresh("s"));
                self.edge(from, Command::Cond(fits), a);
                self.edge(from, Command::Cond(cmp(CmpOp::Gt, e.clone(), int(self.cap))), b);
                self.edge(a, Command::Assign(x, e.clone()), to);
                self.edge(b, Command::Assign(x, int(self.cap)), to);
            }
            Update::Set(e) => self.edge(from, Command::Assign(x, e.clone()), to),
            Update::Nondet => self.edge(from, Command::Nondet(x), to),
            Update::Havoc => self.havoc(from, x, to),
        }
    }

    fn chain(&mut self, from: LocId, updates: &[(SlotId, Update)], to: LocId) {
        let mut at = from;
        for (k, (x, u)) in updates.iter().enumerate() {
            let target = if k + 1 == updates.len() { to } else { self.fresh("u") };
            self.update(at, *x, u, target);
            at = target;
        }
    }
}

/// Lowers `doc` to a program. Unbounded variables get upper bound `cap`;
/// assignments to them saturate there and `?` ranges over `lower..=cap`.
/// A document with unbounded variables needs a cap.
pub fn to_program(doc: &TsDocument, cap: Option<i64>) -> Result<Program, DocError> {
    let mut slots = Vec::new();
    let mut capped = Vec::new();
    for v in &doc.vars {
        let bounded = v.param || v.upper.is_some();
        if !bounded && cap.is_none() {
            return Err(DocError::Unbounded(v.name.clone()));
        }
        let upper = if bounded { v.upper } else { cap.map(|c| c.max(v.lower)) };
        slots.push(Slot {
            name: v.name.clone(),
            kind: if v.param { SlotKind::Param } else { SlotKind::Var },
            lower: v.lower,
            upper,
            init: if v.param { None } else { Some(v.init.unwrap_or(v.lower)) },
        });
        capped.push(!bounded);
    }
    let mut low = Lowering {
        locations: doc.locations.clone(),
        edges: Vec::new(),
        slots,
        capped,
        cap: cap.unwrap_or(0),
        scratch: None,
    };
    let mut start = doc.start;
    let any_init: Vec<SlotId> = (0..doc.vars.len()).filter(|&i| !doc.vars[i].param && doc.vars[i].init.is_none()).collect();
    if !any_init.is_empty() {
        start = low.fresh("init");
        let havocs: Vec<(SlotId, Update)> = any_init.iter().map(|&x| (x, Update::Havoc)).collect();
        low.chain(start, &havocs, doc.start);
    }
    let mut count = vec![0usize; doc.locations.len()];
    for t in &doc.transitions {
        count[t.from] += 1;
    }
    for t in &doc.transitions {
        if t.updates.is_empty() {
            low.edge(t.from, Command::Cond(t.guard.clone()), t.to);
        } else if count[t.from] == 1 && t.guard == Cond::True {
            low.chain(t.from, &t.updates, t.to);
        } else {
            let mid = low.fresh("g");
            low.edge(t.from, Command::Cond(t.guard.clone()), mid);
            low.chain(mid, &t.updates, t.to);
        }
    }
    Ok(Program::new(doc.name.clone(), low.slots, low.locations, low.edges, start, doc.end))
}
