//! Büchi automata over transition labels used by the pattern checkers.

use crate::semantics::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guard {
    Any,
    Is(Label),
    /// τ or an action label.
    NonCoin,
    Tau,
}

impl Guard {
    pub fn matches(self, l: Label) -> bool {
        match self {
            Guard::Any => true,
            Guard::Is(x) => x == l,
            Guard::NonCoin => !l.is_coin(),
            Guard::Tau => l == Label::Tau,
        }
    }
}

/// How a sequence pattern continues after its last word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tail {
    /// The last word must keep recurring.
    Repeat,
    /// Anything may follow.
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    pub initial: u32,
    accepting: Vec<bool>,
    edges: Vec<Vec<(Guard, u32)>>,
}

impl Automaton {
    fn with_states(n: usize) -> Automaton {
        Automaton { initial: 0, accepting: vec![false; n], edges: vec![Vec::new(); n] }
    }

    fn add_state(&mut self) -> u32 {
        self.accepting.push(false);
        self.edges.push(Vec::new());
        (self.edges.len() - 1) as u32
    }

    fn edge(&mut self, from: u32, g: Guard, to: u32) {
        self.edges[from as usize].push((g, to));
    }

    pub fn state_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_accepting(&self, q: u32) -> bool {
        self.accepting[q as usize]
    }

    pub fn edges(&self, q: u32) -> &[(Guard, u32)] {
        &self.edges[q as usize]
    }

    /// One accepting state looping on everything: accepts every infinite run.
    pub fn universal() -> Automaton {
        let mut a = Automaton::with_states(1);
        a.accepting[0] = true;
        a.edge(0, Guard::Any, 0);
        a
    }

    /// Runs whose coin projection contains `w` infinitely often. `|w| + 1` states.
    pub fn for_word(w: &[u8]) -> Automaton {
        Automaton::for_sequence(&[w.to_vec()], Tail::Repeat)
    }

    /// Runs whose coin projection contains `w_1`, …, `w_m` in order, then the
    /// tail. Each block has a waiting state and one state per consumed letter;
    /// only τ and actions may separate letters of the same word.
    pub fn for_sequence(words: &[Vec<u8>], tail: Tail) -> Automaton {
        if words.is_empty() {
            return Automaton::universal();
        }
        let mut a = Automaton::with_states(0);
        let waits: Vec<u32> = (0..words.len()).map(|_| a.add_state()).collect();
        let acc = a.add_state();
        a.accepting[acc as usize] = true;
        for (b, w) in words.iter().enumerate() {
            assert!(!w.is_empty(), "pattern words must be nonempty");
            let done = if b + 1 < words.len() { waits[b + 1] } else { acc };
            a.edge(waits[b], Guard::Any, waits[b]);
            let mut at = waits[b];
            for (j, &c) in w.iter().enumerate() {
                let to = if j + 1 == w.len() { done } else { a.add_state() };
                a.edge(at, Guard::Is(Label::coin(c)), to);
                if j + 1 < w.len() {
                    a.edge(to, Guard::NonCoin, to);
                }
                at = to;
            }
        }
        match tail {
            Tail::Repeat => a.edge(acc, Guard::Any, *waits.last().unwrap()),
            Tail::Free => a.edge(acc, Guard::Any, acc),
        }
        // accepting state last; the first waiting state stays at index 0
        a.reorder_accepting_last(acc)
    }

    fn reorder_accepting_last(mut self, acc: u32) -> Automaton {
        let last = (self.state_count() - 1) as u32;
        if acc == last {
            return self;
        }
        let swap = |q: u32| if q == acc { last } else if q == last { acc } else { q };
        self.edges.swap(acc as usize, last as usize);
        self.accepting.swap(acc as usize, last as usize);
        for es in &mut self.edges {
            for e in es.iter_mut() {
                e.1 = swap(e.1);
            }
        }
        self.initial = swap(self.initial);
        self
    }

    /// `(AC)* R (AC)^ω` over the interleaved words of a response: wait, then
    /// follow one word of `R` letter by letter (only τ in between), then accept
    /// forever.
    pub fn for_response(words: &[Vec<Label>]) -> Automaton {
        let mut a = Automaton::with_states(1);
        let acc = a.add_state();
        a.accepting[acc as usize] = true;
        a.edge(acc, Guard::Any, acc);
        if words.iter().any(|w| w.is_empty()) {
            a.initial = acc;
            return a;
        }
        a.edge(0, Guard::Any, 0);
        // trie children keyed by (state, label)
        let mut children: std::collections::HashMap<(u32, Label), u32> = std::collections::HashMap::new();
        for w in words {
            let mut at = 0u32;
            for (j, &l) in w.iter().enumerate() {
                if j + 1 == w.len() {
                    if !a.edges(at).contains(&(Guard::Is(l), acc)) {
                        a.edge(at, Guard::Is(l), acc);
                    }
                    break;
                }
                at = match children.get(&(at, l)) {
                    Some(&c) => c,
                    None => {
                        let c = a.add_state();
                        a.edge(c, Guard::Tau, c);
                        a.edge(at, Guard::Is(l), c);
                        children.insert((at, l), c);
                        c
                    }
                };
            }
        }
        a
    }
}
