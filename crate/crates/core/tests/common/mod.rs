//! Seeded random programs for the property and acceptance tests.
#![allow(dead_code)]

use pattern_core::lang::{compile, Program};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Gen {
    rng: ChaCha8Rng,
    vars: usize,
    range: i64,
    nondet: bool,
    out: String,
}

impl Gen {
    fn var(&mut self) -> String {
        format!("v{}", self.rng.random_range(0..self.vars))
    }

    fn atom(&mut self) -> String {
        let op = ["==", "!=", "<", "<=", ">", ">="][self.rng.random_range(0..6)];
        let lhs = self.var();
        if self.rng.random_bool(0.6) {
            format!("{lhs} {op} {}", self.rng.random_range(0..=self.range))
        } else {
            format!("{lhs} {op} {}", self.var())
        }
    }

    fn cond(&mut self) -> String {
        match self.rng.random_range(0..6) {
            0 => format!("{} && {}", self.atom(), self.atom()),
            1 => format!("{} || {}", self.atom(), self.atom()),
            2 => format!("!({})", self.atom()),
            _ => self.atom(),
        }
    }

    fn line(&mut self, indent: usize, s: &str) {
        self.out.push_str(&"  ".repeat(indent));
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn block(&mut self, indent: usize, depth: usize) {
        let n = self.rng.random_range(1..=3);
        for _ in 0..n {
            self.stmt(indent, depth);
        }
    }

    fn stmt(&mut self, indent: usize, depth: usize) {
        let pick = self.rng.random_range(0..if depth < 2 { 10 } else { 7 });
        match pick {
            0 => {
                let (x, c) = (self.var(), self.rng.random_range(0..=self.range));
                self.line(indent, &format!("{x} := {c};"));
            }
            1 => {
                let (x, y) = (self.var(), self.var());
                self.line(indent, &format!("{x} := {y};"));
            }
            2 => {
                let x = self.var();
                let r = self.range;
                self.line(indent, &format!("if ({x} < {r}) {{ {x} := {x} + 1; }} else {{ {x} := 0; }}"));
            }
            3 | 4 => {
                let x = self.var();
                let p = ["1/2", "1/3", "2/3", "1/4"][self.rng.random_range(0..4)];
                self.line(indent, &format!("{x} := coin({p});"));
            }
            5 | 6 => {
                let x = self.var();
                if self.nondet {
                    self.line(indent, &format!("{x} := nondet();"));
                } else {
                    self.line(indent, &format!("{x} := coin(1/2);"));
                }
            }
            7 | 8 => {
                let c = self.cond();
                self.line(indent, &format!("while ({c}) {{"));
                self.block(indent + 1, depth + 1);
                self.line(indent, "}");
            }
            _ => {
                let c = self.cond();
                self.line(indent, &format!("if ({c}) {{"));
                self.block(indent + 1, depth + 1);
                if self.rng.random_bool(0.5) {
                    self.line(indent, "} else {");
                    self.block(indent + 1, depth + 1);
                }
                self.line(indent, "}");
            }
        }
    }
}

/// Source text of a small finite program over `v0..v3` in `0..range`;
/// `nondet` allows nondeterministic assignments.
pub fn random_source(seed: u64, nondet: bool) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = rng.random_range(2..=4);
    let range = rng.random_range(1..=4);
    let mut g = Gen { rng, vars, range, nondet, out: String::new() };
    g.out.push_str(&format!("program r{seed};\n"));
    for i in 0..vars {
        let init = g.rng.random_range(0..=range);
        g.out.push_str(&format!("var v{i} : 0..{range} = {init};\n"));
    }
    g.out.push_str("begin\n");
    let n = g.rng.random_range(1..=5);
    for _ in 0..n {
        g.stmt(1, 0);
    }
    g.out.push_str("end\n");
    g.out
}

pub fn random_program(seed: u64, nondet: bool) -> Program {
    compile(&random_source(seed, nondet)).expect("generated programs are well formed")
}
