//! Guarded-transition documents for external termination provers.
//!
//! [`export_nondet`] replaces every coin toss by a binary nondeterministic
//! choice. [`instrument_pattern`] additionally restricts the tosses to those
//! conforming to a sequence or template pattern, using a gap counter `ctr`,
//! the current word index `next`, and the position `pos` inside that word.
//! See `docs/document-format.md` for the text format.

mod document;
mod interp;

pub use document::{parse_document, DocTransition, DocVar, TsDocument, Update};
pub use interp::to_program;

use crate::automaton::Tail;
use crate::lang::{BinOp, CmpOp, Command, Cond, Expr, Program, SlotId, SlotKind};
use crate::patterns::{Pattern, Template};
use crate::words::CoinWord;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0} patterns cannot be instrumented")]
    Unsupported(&'static str),
    #[error("pattern contains an empty word")]
    EmptyWord,
    #[error("variable `{0}` is unbounded; supply a cap")]
    Unbounded(String),
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
}

pub(crate) fn var<V>(v: V) -> Expr<V> {
    Expr::Var(v)
}

pub(crate) fn int<V>(n: i64) -> Expr<V> {
    Expr::Int(n)
}

/// `a + b`, folding zero and negative constants on the right.
pub(crate) fn add<V>(a: Expr<V>, b: Expr<V>) -> Expr<V> {
    match (a, b) {
        (Expr::Int(0), b) => b,
        (a, Expr::Int(0)) => a,
        (Expr::Int(x), b) if x < 0 => Expr::bin(BinOp::Sub, b, Expr::Int(-x)),
        (a, Expr::Int(y)) if y < 0 => Expr::bin(BinOp::Sub, a, Expr::Int(-y)),
        (Expr::Int(x), b) => Expr::bin(BinOp::Add, b, Expr::Int(x)),
        (a, b) => Expr::bin(BinOp::Add, a, b),
    }
}

pub(crate) fn cmp<V>(op: CmpOp, a: Expr<V>, b: Expr<V>) -> Cond<V> {
    Cond::Cmp(op, a, b)
}

pub(crate) fn and<V>(parts: Vec<Cond<V>>) -> Cond<V> {
    parts.into_iter().reduce(|a, b| Cond::And(Box::new(a), Box::new(b))).unwrap_or(Cond::True)
}

fn fresh_name(taken: &[DocVar], base: &str) -> String {
    let mut name = base.to_string();
    while taken.iter().any(|v| v.name == name) {
        name.push('_');
    }
    name
}

fn base_document(prog: &Program) -> TsDocument {
    let vars = prog
        .slots
        .iter()
        .map(|s| DocVar {
            name: s.name.clone(),
            param: s.kind == SlotKind::Param,
            lower: s.lower,
            upper: s.upper,
            init: s.init,
        })
        .collect();
    TsDocument {
        name: prog.name.clone(),
        notes: Vec::new(),
        vars,
        locations: prog.locations.clone(),
        start: prog.start,
        end: prog.end,
        transitions: Vec::new(),
    }
}

fn plain_transition(e: &crate::lang::Edge) -> DocTransition {
    let (guard, updates) = match &e.cmd {
        Command::Cond(c) => (c.clone(), Vec::new()),
        Command::Assign(x, ex) => (Cond::True, vec![(*x, Update::Set(ex.clone()))]),
        Command::Coin(x, _) | Command::Nondet(x) => (Cond::True, vec![(*x, Update::Nondet)]),
    };
    DocTransition { from: e.from, guard, updates, to: e.to }
}

/// The program with every `x := coin(p)` replaced by `x := nondet`.
pub fn export_nondet(prog: &Program) -> TsDocument {
    let mut doc = base_document(prog);
    doc.transitions = prog.edges.iter().map(plain_transition).collect();
    doc
}

/// Slot ids of the instrumentation variables.
struct Fresh {
    ctr: SlotId,
    next: SlotId,
    pos: SlotId,
    bix: Option<SlotId>,
}

/// Case split of the forcing location: guard, extra updates (besides the
/// coin target), and the forced letter if any.
struct Case {
    guard: Cond<SlotId>,
    letter: Option<u8>,
    updates: Vec<(SlotId, Update)>,
}

fn reset_updates(f: &Fresh, advance: bool) -> Vec<(SlotId, Update)> {
    let mut u = vec![(f.ctr, Update::Havoc), (f.pos, Update::Set(int(1)))];
    if advance {
        u.push((f.next, Update::Set(add(var(f.next), int(1)))));
    }
    if let Some(b) = f.bix {
        u.push((b, Update::Set(int(1))));
    }
    u
}

fn letter_case(f: &Fresh, guard: Cond<SlotId>, letter: u8) -> Case {
    Case { guard, letter: Some(letter), updates: vec![(f.pos, Update::Set(add(var(f.pos), int(1))))] }
}

fn sequence_cases(f: &Fresh, words: &[CoinWord], tail: Tail) -> Vec<Case> {
    let m = words.len() as i64;
    let mut cases = Vec::new();
    for (k, w) in words.iter().enumerate() {
        let i = k as i64 + 1;
        let advance = i < m || tail == Tail::Free;
        let at = cmp(CmpOp::Eq, var(f.next), int(i));
        for (j, &c) in w.iter().enumerate() {
            let g = and(vec![at.clone(), cmp(CmpOp::Eq, var(f.pos), int(j as i64 + 1))]);
            if j + 1 == w.len() {
                cases.push(Case { guard: g, letter: Some(c), updates: reset_updates(f, advance) });
            } else {
                cases.push(letter_case(f, g, c));
            }
        }
        let g = and(vec![at, cmp(CmpOp::Gt, var(f.pos), int(w.len() as i64))]);
        cases.push(Case { guard: g, letter: None, updates: reset_updates(f, advance) });
    }
    if tail == Tail::Free {
        cases.push(Case { guard: cmp(CmpOp::Eq, var(f.next), int(m + 1)), letter: None, updates: Vec::new() });
    }
    cases
}

fn template_cases(f: &Fresh, t: &Template) -> Vec<Case> {
    let (a, b, g) = (t.alpha.len() as i64, t.beta.len() as i64, t.gamma.len() as i64);
    let mut halves: Vec<(Cond<SlotId>, Expr<SlotId>, bool)> = Vec::new();
    if b == 0 {
        halves.push((Cond::True, int(a + g), false));
    } else {
        // length(w[next]) = |α| + |γ| + |β|·(next − δ) when next > δ
        let long = add(int(a + g - b * t.delta), if b == 1 { var(f.next) } else { Expr::bin(BinOp::Mul, int(b), var(f.next)) });
        if t.delta >= 1 {
            halves.push((cmp(CmpOp::Le, var(f.next), int(t.delta)), int(a + g), false));
            halves.push((cmp(CmpOp::Gt, var(f.next), int(t.delta)), long, true));
        } else {
            halves.push((Cond::True, long, true));
        }
    }
    let pos = || var(f.pos);
    let mut cases = Vec::new();
    for (half, len, has_beta) in halves {
        let with = |c: Cond<SlotId>| and(vec![half.clone(), c].into_iter().filter(|c| *c != Cond::True).collect());
        // the letter completing the word resets right away
        let finish = |guard: Cond<SlotId>, c: u8| Case { guard, letter: Some(c), updates: reset_updates(f, true) };
        cases.push(Case { guard: with(cmp(CmpOp::Gt, pos(), len.clone())), letter: None, updates: reset_updates(f, true) });
        for (j, &c) in t.alpha.iter().enumerate() {
            let guard = with(cmp(CmpOp::Eq, pos(), int(j as i64 + 1)));
            if j as i64 + 1 == a && g == 0 && !has_beta {
                cases.push(finish(guard, c));
            } else {
                cases.push(letter_case(f, guard, c));
            }
        }
        if has_beta {
            let bix = f.bix.expect("β needs its index variable");
            let region = and(vec![
                cmp(CmpOp::Gt, pos(), int(a)),
                cmp(CmpOp::Le, pos(), add(len.clone(), int(-g))),
            ]);
            for (j, &c) in t.beta.iter().enumerate() {
                let j = j as i64 + 1;
                let here = and(vec![region.clone(), cmp(CmpOp::Eq, var(bix), int(j))]);
                let wrap = (bix, Update::Set(int(if j == b { 1 } else { j + 1 })));
                if j == b && g == 0 {
                    let mut inner = letter_case(f, with(and(vec![here.clone(), cmp(CmpOp::Lt, pos(), len.clone())])), c);
                    inner.updates.push(wrap);
                    cases.push(inner);
                    cases.push(finish(with(and(vec![here, cmp(CmpOp::Eq, pos(), len.clone())])), c));
                } else {
                    let mut case = letter_case(f, with(here), c);
                    case.updates.push(wrap);
                    cases.push(case);
                }
            }
        }
        for (j, &c) in t.gamma.iter().enumerate() {
            // pos = length − |γ| + j + 1
            let at = add(len.clone(), int(j as i64 + 1 - g));
            let guard = with(cmp(CmpOp::Eq, pos(), at));
            if j as i64 + 1 == g {
                cases.push(finish(guard, c));
            } else {
                cases.push(letter_case(f, guard, c));
            }
        }
    }
    cases
}

/// Restricts the coin tosses of `prog` to the runs conforming to `pattern`.
/// The resulting document has no probabilistic choice left.
pub fn instrument_pattern(prog: &Program, pattern: &Pattern) -> Result<TsDocument, DocError> {
    let (words, tail, template) = match pattern {
        Pattern::Simple(_) => return Err(DocError::Unsupported("simple")),
        Pattern::Universal => return Err(DocError::Unsupported("universal")),
        Pattern::Sequence { words, .. } if words.is_empty() => {
            let mut doc = export_nondet(prog);
            doc.notes.push("pattern: trivial, every toss is free".into());
            return Ok(doc);
        }
        Pattern::Sequence { words, tail } => {
            if words.iter().any(|w| w.is_empty()) {
                return Err(DocError::EmptyWord);
            }
            (words.clone(), *tail, None)
        }
        Pattern::Template(t) => {
            if t.alpha.is_empty() && t.beta.is_empty() && t.gamma.is_empty() {
                return Err(DocError::EmptyWord);
            }
            (Vec::new(), Tail::Repeat, Some(t.clone()))
        }
    };
    let mut doc = base_document(prog);
    let add_var = |doc: &mut TsDocument, base: &str, lower: i64, upper: Option<i64>, init: Option<i64>| {
        let name = fresh_name(&doc.vars, base);
        doc.vars.push(DocVar { name, param: false, lower, upper, init });
        doc.vars.len() - 1
    };
    let longest = words.iter().map(|w| w.len() as i64).max().unwrap_or(0);
    let m = words.len() as i64;
    let ctr = add_var(&mut doc, "ctr", 0, None, None);
    let fresh = match &template {
        None => {
            let next_hi = if tail == Tail::Free { m + 1 } else { m };
            let next = add_var(&mut doc, "next", 1, Some(next_hi), Some(1));
            let pos = add_var(&mut doc, "pos", 1, Some(longest + 1), Some(1));
            Fresh { ctr, next, pos, bix: None }
        }
        Some(t) => {
            let next = add_var(&mut doc, "next", 1, None, Some(1));
            let pos = add_var(&mut doc, "pos", 1, None, Some(1));
            let bix = (!t.beta.is_empty()).then(|| add_var(&mut doc, "bix", 1, Some(t.beta.len() as i64), Some(1)));
            Fresh { ctr, next, pos, bix }
        }
    };
    let cases = match &template {
        None => sequence_cases(&fresh, &words, tail),
        Some(t) => template_cases(&fresh, t),
    };
    doc.notes.push(format!("pattern: {pattern}"));
    let params: Vec<&DocVar> = doc.vars.iter().filter(|v| v.param && v.upper.is_none()).collect();
    if let (Some(t), [n]) = (&template, params.as_slice()) {
        if !t.beta.is_empty() {
            doc.notes.push(format!("invariant (advisory): {} <= {}", doc.vars[fresh.next].name, n.name));
        }
    }
    for (k, e) in prog.edges.iter().enumerate() {
        let Command::Coin(x, _) = &e.cmd else {
            doc.transitions.push(plain_transition(e));
            continue;
        };
        let choose = doc.locations.len();
        doc.locations.push(format!("c{k}_choose"));
        let force = doc.locations.len();
        doc.locations.push(format!("c{k}_force"));
        doc.transitions.push(DocTransition { from: e.from, guard: Cond::True, updates: vec![(*x, Update::Nondet)], to: choose });
        doc.transitions.push(DocTransition {
            from: choose,
            guard: cmp(CmpOp::Le, var(ctr), int(0)),
            updates: Vec::new(),
            to: force,
        });
        doc.transitions.push(DocTransition {
            from: choose,
            guard: cmp(CmpOp::Gt, var(ctr), int(0)),
            updates: vec![(ctr, Update::Set(add(var(ctr), int(-1))))],
            to: e.to,
        });
        for case in &cases {
            let mut updates = Vec::new();
            if let Some(c) = case.letter {
                updates.push((*x, Update::Set(int(c as i64))));
            }
            updates.extend(case.updates.iter().cloned());
            doc.transitions.push(DocTransition { from: force, guard: case.guard.clone(), updates, to: e.to });
        }
    }
    Ok(doc)
}

#[cfg(test)]
mod tests;
