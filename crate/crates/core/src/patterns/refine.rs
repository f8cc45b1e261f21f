//! Counterexample-guided search for a terminating simple pattern on one
//! finite instance.

use super::spoiler::spoiler_shortest;
use super::Pattern;
use crate::checker::{check_coinless_nontermination, check_simple_pattern, CheckLimits, CheckVerdict};
use crate::oracle::as_terminating_deterministic;
use crate::semantics::{Lasso, StateSpace};
use crate::words::CoinWord;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundOutcome {
    Terminating,
    /// A conforming lasso was found; its loop word must be spoiled next.
    Lasso { loop_word: CoinWord },
    /// A loop without coin tosses: the program does not terminate almost surely.
    Coinless,
    /// A reachable node from which termination is unreachable.
    Trapped,
    /// The checker ran out of budget on this candidate.
    Budget(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub candidate: CoinWord,
    pub outcome: RoundOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefineStatus {
    Proven(Pattern),
    Refuted(Lasso),
    BudgetExhausted(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement {
    pub rounds: Vec<Round>,
    pub status: RefineStatus,
}

impl Refinement {
    /// The proven word; empty for the trivial pattern.
    pub fn word(&self) -> Option<CoinWord> {
        match &self.status {
            RefineStatus::Proven(Pattern::Simple(w)) => Some(w.clone()),
            RefineStatus::Proven(p) if p.is_trivial() => Some(Vec::new()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RefineOptions {
    pub rounds: usize,
    pub limits: CheckLimits,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions { rounds: 64, limits: CheckLimits::default() }
    }
}

/// Refines candidates `s_0 = base, s_1, …` until `(C* s_j)^ω` is terminating.
///
/// Each new candidate is the shortest extension of `base` that is an infix
/// of none of the loop words collected so far.
pub fn refine_finite(space: &StateSpace, base: &[u8], opts: RefineOptions) -> Refinement {
    let mut rounds = Vec::new();
    if let Some(l) = check_coinless_nontermination(space) {
        rounds.push(Round { candidate: base.to_vec(), outcome: RoundOutcome::Coinless });
        return Refinement { rounds, status: RefineStatus::Refuted(l) };
    }
    if !space.has_actions() {
        if let Err(w) = as_terminating_deterministic(space) {
            rounds.push(Round { candidate: base.to_vec(), outcome: RoundOutcome::Trapped });
            return Refinement { rounds, status: RefineStatus::Refuted(w.lasso(space)) };
        }
    }
    let mut loops: Vec<CoinWord> = Vec::new();
    let mut candidate = base.to_vec();
    for _ in 0..opts.rounds.max(1) {
        match check_simple_pattern(space, &candidate, opts.limits) {
            Err(e) => {
                rounds.push(Round { candidate, outcome: RoundOutcome::Budget(e.to_string()) });
                return Refinement { rounds, status: RefineStatus::BudgetExhausted(e.to_string()) };
            }
            Ok(CheckVerdict::Terminating) => {
                let pattern = if candidate.is_empty() { Pattern::trivial() } else { Pattern::Simple(candidate.clone()) };
                rounds.push(Round { candidate, outcome: RoundOutcome::Terminating });
                return Refinement { rounds, status: RefineStatus::Proven(pattern) };
            }
            Ok(CheckVerdict::Lasso(l)) | Ok(CheckVerdict::NotAsTerminating(l)) => {
                let u = l.coinword();
                if u.is_empty() {
                    // cannot happen once coinless loops are ruled out
                    rounds.push(Round { candidate, outcome: RoundOutcome::Coinless });
                    return Refinement { rounds, status: RefineStatus::Refuted(l) };
                }
                rounds.push(Round { candidate, outcome: RoundOutcome::Lasso { loop_word: u.clone() } });
                loops.push(u);
                candidate = spoiler_shortest(base, &loops);
            }
        }
    }
    let msg = format!("no terminating pattern within {} rounds", opts.rounds.max(1));
    Refinement { rounds, status: RefineStatus::BudgetExhausted(msg) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::compile;
    use crate::semantics::{build, BuildOptions, Instance};

    fn space(src: &str) -> StateSpace {
        build(&compile(src).unwrap(), &Instance::new(), BuildOptions::default()).unwrap()
    }

    #[test]
    fn fw_trace() {
        let s = space(
            "program fw; var k : 0..100 = 0; var x : 0..1 = 1; var old : 0..1 = 0; begin \
             while (k < 100) { old := x; x := coin(1/2); if (x != old) { k := k + 1; } } end",
        );
        let r = refine_finite(&s, &[], RefineOptions::default());
        let got: Vec<(CoinWord, RoundOutcome)> = r.rounds.iter().map(|r| (r.candidate.clone(), r.outcome.clone())).collect();
        assert_eq!(
            got,
            vec![
                (vec![], RoundOutcome::Lasso { loop_word: vec![0] }),
                (vec![1], RoundOutcome::Lasso { loop_word: vec![1] }),
                (vec![0, 1], RoundOutcome::Terminating),
            ]
        );
        assert_eq!(r.status, RefineStatus::Proven(Pattern::Simple(vec![0, 1])));
    }

    #[test]
    fn trap_with_coins_is_refuted() {
        let s = space("program t; var x : 0..1 = 0; var y : 0..1 = 0; begin x := coin(1/2); \
            if (x == 1) { while (y == 0) { x := coin(1/2); } } end");
        let r = refine_finite(&s, &[], RefineOptions::default());
        assert_eq!(r.rounds[0].outcome, RoundOutcome::Trapped);
        let RefineStatus::Refuted(l) = &r.status else { panic!() };
        assert!(s.replays(l));
        assert!(!l.coinword().is_empty());
    }

    #[test]
    fn coin_free_loop_is_refuted() {
        let s = space("program t; var x : 0..1 = 0; begin while (x == 0) { x := 0; } end");
        let r = refine_finite(&s, &[], RefineOptions::default());
        assert_eq!(r.rounds.len(), 1);
        let RefineStatus::Refuted(l) = &r.status else { panic!() };
        assert!(s.replays(l));
    }

    #[test]
    fn straight_line_is_trivially_proven() {
        let s = space("program t; var x : 0..1 = 0; begin x := coin(1/2); end");
        let r = refine_finite(&s, &[], RefineOptions::default());
        assert_eq!(r.status, RefineStatus::Proven(Pattern::trivial()));
        assert_eq!(r.word(), Some(vec![]));
    }

    #[test]
    fn round_budget() {
        let s = space(
            "program fw; var k : 0..100 = 0; var x : 0..1 = 1; var old : 0..1 = 0; begin \
             while (k < 100) { old := x; x := coin(1/2); if (x != old) { k := k + 1; } } end",
        );
        let r = refine_finite(&s, &[], RefineOptions { rounds: 2, ..Default::default() });
        assert!(matches!(r.status, RefineStatus::BudgetExhausted(_)));
        assert_eq!(r.rounds.len(), 2);
    }
}
