//! Pattern values and synthesis: spoilers, refinement, the direct
//! constructor, and the driver for parameterized programs.

pub mod direct;
pub mod driver;
pub mod refine;
pub mod spoiler;

pub use direct::{construct_pattern_direct, DirectError, DirectWord};
pub use driver::{drive_weakly_finite, fit_template, DriveOutcome, DriveStatus, InstanceRun};
pub use refine::{refine_finite, RefineOptions, RefineStatus, Refinement, Round, RoundOutcome};
pub use spoiler::{is_infix_of_power, spoiler_greedy, spoiler_shortest};

use crate::automaton::Tail;
use crate::words::{self, CoinWord};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// `w_i = α · β^max(0, i−δ) · γ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Template {
    pub alpha: CoinWord,
    pub beta: CoinWord,
    pub gamma: CoinWord,
    pub delta: i64,
}

impl Template {
    pub fn constant(w: CoinWord) -> Template {
        Template { alpha: w, beta: Vec::new(), gamma: Vec::new(), delta: 0 }
    }

    pub fn repetitions(&self, i: i64) -> usize {
        if self.beta.is_empty() {
            0
        } else {
            (i - self.delta).max(0) as usize
        }
    }

    pub fn expand(&self, i: i64) -> CoinWord {
        let mut w = self.alpha.clone();
        for _ in 0..self.repetitions(i) {
            w.extend_from_slice(&self.beta);
        }
        w.extend_from_slice(&self.gamma);
        w
    }

    /// Same expansions for `i = 1..=8`.
    pub fn same_family(&self, other: &Template) -> bool {
        (1..=8).all(|i| self.expand(i) == other.expand(i))
    }

    /// Readable form such as `0(10)^i` or `0^(i+2)`.
    pub fn family_text(&self) -> String {
        if self.beta.is_empty() {
            return words::show(&[self.alpha.clone(), self.gamma.clone()].concat());
        }
        let exp = match self.delta {
            0 => "i".to_string(),
            d if d > 0 => format!("(i-{d})"),
            d => format!("(i+{})", -d),
        };
        let base = if self.beta.len() == 1 { words::raw(&self.beta) } else { format!("({})", words::raw(&self.beta)) };
        format!("{}{base}^{exp}{}", words::raw(&self.alpha), words::raw(&self.gamma))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// `(C* w)^ω`.
    Simple(CoinWord),
    /// `C* w_1 C* … C* w_m` then the tail; no words means `C^ω`.
    Sequence { words: Vec<CoinWord>, tail: Tail },
    Template(Template),
    /// Length-then-lexicographic enumeration of all of `C*`.
    Universal,
}

impl Pattern {
    /// `C^ω`, terminating only when no infinite run exists.
    pub fn trivial() -> Pattern {
        Pattern::Sequence { words: Vec::new(), tail: Tail::Repeat }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, Pattern::Sequence { words, .. } if words.is_empty())
    }

    /// The `i`-th word (from 1) of the universal enumeration: ε, 0, 1, 00, 01, …
    pub fn universal_word(i: u64) -> CoinWord {
        assert!(i >= 1);
        let bits = 64 - i.leading_zeros() as usize;
        (0..bits - 1).rev().map(|b| ((i >> b) & 1) as u8).collect()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Simple(w) => write!(f, "simple:{}", words::raw(w)),
            Pattern::Sequence { words: ws, tail } => {
                let list = ws.iter().map(|w| words::raw(w)).collect::<Vec<_>>().join(",");
                let t = match tail {
                    Tail::Repeat => "repeat",
                    Tail::Free => "free",
                };
                write!(f, "seq:{list};tail={t}")
            }
            Pattern::Template(t) => write!(
                f,
                "template:a={};b={};c={};d={}",
                words::raw(&t.alpha),
                words::raw(&t.beta),
                words::raw(&t.gamma),
                t.delta
            ),
            Pattern::Universal => write!(f, "universal:lenlex"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed pattern `{0}`")]
pub struct PatternParseError(pub String);

impl FromStr for Pattern {
    type Err = PatternParseError;

    fn from_str(s: &str) -> Result<Pattern, PatternParseError> {
        let bad = || PatternParseError(s.to_string());
        let word = |w: &str| words::parse(w).ok_or_else(bad);
        let (kind, body) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "simple" => Ok(Pattern::Simple(word(body)?)),
            "seq" => {
                let (list, tail) = body.split_once(';').unwrap_or((body, "tail=repeat"));
                let tail = match tail {
                    "tail=repeat" => Tail::Repeat,
                    "tail=free" => Tail::Free,
                    _ => return Err(bad()),
                };
                let ws = if list.is_empty() {
                    Vec::new()
                } else {
                    list.split(',').map(word).collect::<Result<Vec<_>, _>>()?
                };
                Ok(Pattern::Sequence { words: ws, tail })
            }
            "template" => {
                let mut t = Template { alpha: vec![], beta: vec![], gamma: vec![], delta: 0 };
                let mut seen = 0;
                for field in body.split(';') {
                    let (k, v) = field.split_once('=').ok_or_else(bad)?;
                    match k {
                        "a" => t.alpha = word(v)?,
                        "b" => t.beta = word(v)?,
                        "c" => t.gamma = word(v)?,
                        "d" => t.delta = v.parse().map_err(|_| bad())?,
                        _ => return Err(bad()),
                    }
                    seen += 1;
                }
                if seen != 4 {
                    return Err(bad());
                }
                Ok(Pattern::Template(t))
            }
            "universal" if body == "lenlex" => Ok(Pattern::Universal),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization_round_trip() {
        for s in [
            "simple:01",
            "seq:00,000,0000;tail=repeat",
            "seq:0;tail=free",
            "template:a=;b=0;c=;d=0",
            "template:a=0;b=10;c=1;d=-2",
            "universal:lenlex",
            "seq:;tail=repeat",
        ] {
            let p: Pattern = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("simple:012".parse::<Pattern>().is_err());
        assert!("template:a=;b=0".parse::<Pattern>().is_err());
    }

    #[test]
    fn template_expansion() {
        let herman = Template { alpha: vec![0], beta: vec![1, 0], gamma: vec![], delta: 0 };
        assert_eq!(herman.expand(2), vec![0, 1, 0, 1, 0]);
        assert_eq!(herman.family_text(), "0(10)^i");
        let zc = Template { alpha: vec![], beta: vec![0], gamma: vec![], delta: -2 };
        assert_eq!(zc.expand(1), vec![0, 0, 0]);
        assert_eq!(zc.family_text(), "0^(i+2)");
        let rw = Template { alpha: vec![], beta: vec![0], gamma: vec![], delta: 1 };
        assert_eq!(rw.expand(1), Vec::<u8>::new());
        assert_eq!(Template::constant(vec![0, 1, 0]).family_text(), "010");
        assert!(Template::constant(vec![0]).same_family(&Template { alpha: vec![], beta: vec![], gamma: vec![0], delta: 7 }));
    }

    #[test]
    fn universal_enumeration() {
        let got: Vec<String> = (1..=7).map(|i| words::show(&Pattern::universal_word(i))).collect();
        assert_eq!(got, ["ε", "0", "1", "00", "01", "10", "11"]);
    }
}
