mod common;

use common::random_program;
use pattern_core::checker::{check_coinless_nontermination, check_simple_pattern, CheckLimits};
use pattern_core::oracle::as_terminating_deterministic;
use pattern_core::patterns::{
    construct_pattern_direct, refine_finite, spoiler_greedy, spoiler_shortest, RefineOptions, RefineStatus, RoundOutcome,
};
use pattern_core::semantics::{build, BuildOptions, EndsUp, Instance};
use pattern_core::words;
use proptest::prelude::*;

/// Independent infix test on an explicit periodic prefix.
fn occurs_in_power(w: &[u8], u: &[u8]) -> bool {
    let hay: String = words::raw(&u.repeat(w.len() / u.len() + 2));
    hay.contains(&words::raw(w))
}

fn spoils(w: &[u8], loops: &[Vec<u8>]) -> bool {
    loops.iter().all(|u| !occurs_in_power(w, u))
}

fn loop_sets() -> impl Strategy<Value = (Vec<u8>, Vec<Vec<u8>>)> {
    (
        prop::collection::vec(0u8..2, 0..3),
        prop::collection::vec(prop::collection::vec(0u8..2, 1..6), 1..5),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn spoiler_bounds_and_minimality((base, loops) in loop_sets()) {
        let k: usize = loops.iter().map(Vec::len).sum();
        let greedy = spoiler_greedy(&base, &loops);
        let shortest = spoiler_shortest(&base, &loops);
        prop_assert!(greedy.starts_with(&base) && shortest.starts_with(&base));
        prop_assert!(spoils(&greedy, &loops));
        prop_assert!(spoils(&shortest, &loops));
        prop_assert!((greedy.len() - base.len()) as f64 <= 1.0 + (k as f64).log2() + 1e-9);
        prop_assert!(shortest.len() <= greedy.len());
        for len in base.len()..shortest.len() {
            for ext in words::all_of_length(len - base.len()) {
                prop_assert!(!spoils(&[base.clone(), ext].concat(), &loops));
            }
        }
        for ext in words::all_of_length(shortest.len() - base.len()) {
            let w = [base.clone(), ext].concat();
            if w < shortest {
                prop_assert!(!spoils(&w, &loops));
            }
        }
    }
}

#[test]
fn refinement_agrees_with_the_oracle() {
    let (mut proven, mut refuted) = (0, 0);
    for seed in 0..250u64 {
        let space = build(&random_program(seed, false), &Instance::new(), BuildOptions::default()).unwrap();
        let truth = as_terminating_deterministic(&space).is_ok();
        let r = refine_finite(&space, &[], RefineOptions::default());
        match &r.status {
            RefineStatus::Proven(_) => {
                assert!(truth, "seed {seed}: proven but the oracle disagrees");
                let w = r.word().unwrap();
                assert!(check_simple_pattern(&space, &w, CheckLimits::default()).unwrap().is_terminating());
                proven += 1;
            }
            RefineStatus::Refuted(l) => {
                assert!(!truth, "seed {seed}: refuted but the oracle disagrees");
                assert!(space.replays(l), "seed {seed}");
                if r.rounds[0].outcome == RoundOutcome::Trapped {
                    assert!(check_coinless_nontermination(&space).is_none());
                } else {
                    assert!(l.coinword().is_empty());
                }
                refuted += 1;
            }
            RefineStatus::BudgetExhausted(m) => panic!("seed {seed}: {m}"),
        }
        for (k, round) in r.rounds.iter().enumerate().skip(1) {
            // every candidate spoils all loops seen before it
            for earlier in &r.rounds[..k] {
                if let RoundOutcome::Lasso { loop_word } = &earlier.outcome {
                    assert!(!occurs_in_power(&round.candidate, loop_word));
                }
            }
        }
    }
    assert!(proven > 50 && refuted > 50, "proven {proven}, refuted {refuted}");
}

#[test]
fn direct_words_are_short_and_terminating() {
    let mut checked = 0;
    for seed in 0..250u64 {
        let space = build(&random_program(seed, false), &Instance::new(), BuildOptions::default()).unwrap();
        if as_terminating_deterministic(&space).is_err() {
            assert!(construct_pattern_direct(&space).is_err());
            continue;
        }
        let d = construct_pattern_direct(&space).unwrap();
        let n = d.abstraction_nodes;
        assert!(d.word.len() <= (n - 1) * (n - 1), "seed {seed}");
        if !d.word.is_empty() {
            assert!(check_simple_pattern(&space, &d.word, CheckLimits::default()).unwrap().is_terminating());
        }
        for v in space.reachable() {
            let end = space.ends_up_in(v, &d.word);
            assert!(
                matches!(end, EndsUp::TerminatedEarly(_)) || matches!(end, EndsUp::Node(t) if space.is_terminal(t)),
                "seed {seed}: node {v} gives {end:?}"
            );
        }
        checked += 1;
    }
    assert!(checked > 50);
}
