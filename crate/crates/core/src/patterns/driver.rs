//! Parameterized programs: refine instance by instance with base-word
//! chaining, then extrapolate a template from the last three words.

use super::refine::{refine_finite, RefineOptions, RefineStatus, Round};
use super::Template;
use crate::checker::check_simple_pattern;
use crate::lang::Program;
use crate::semantics::{build, instance_text, BuildOptions, Instance, StateSpace};
use crate::words::CoinWord;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct InstanceRun {
    pub instance: Instance,
    /// Template index of this instance.
    pub index: i64,
    pub nodes: usize,
    pub rounds: Vec<Round>,
    pub word: Option<CoinWord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DriveStatus {
    /// A template fitted and its expansion verified on every instance.
    Guessed(Template),
    NoGuess(String),
    /// Some instance is not almost-surely terminating.
    Refuted { instance: Instance, witness: String },
    Budget { instance: Instance, reason: String },
}

#[derive(Debug, Clone)]
pub struct DriveOutcome {
    pub runs: Vec<InstanceRun>,
    pub status: DriveStatus,
    /// Per instance: the expanded word and whether it verified.
    pub verification: Vec<(Instance, CoinWord, bool)>,
}

impl DriveOutcome {
    pub fn words(&self) -> Vec<Option<CoinWord>> {
        self.runs.iter().map(|r| r.word.clone()).collect()
    }
}

/// Index of an instance: the value of the program's only unbounded
/// parameter, else the 1-based position in the list.
fn index_of(prog: &Program, inst: &Instance, pos: usize) -> i64 {
    let unbounded: Vec<&str> = prog.params().filter(|(_, s)| s.upper.is_none()).map(|(_, s)| s.name.as_str()).collect();
    match unbounded.as_slice() {
        [name] => inst.get(*name).copied().unwrap_or(pos as i64 + 1),
        _ => pos as i64 + 1,
    }
}

/// Fits `α · β^max(0,i−δ) · γ` to indexed words: constant first, then a pure
/// power, then the general form with `|γ|` and then `|α|` ascending. The
/// last three points determine the candidate; all points must match.
pub fn fit_template(points: &[(i64, CoinWord)]) -> Option<Template> {
    if points.len() < 3 {
        return None;
    }
    let last = &points[points.len() - 3..];
    let fits = |t: &Template| last.iter().all(|(i, w)| t.expand(*i) == *w);
    if last.iter().all(|(_, w)| *w == last[2].1) {
        return Some(Template::constant(last[2].1.clone()));
    }
    let (i2, x2) = (&last[1].0, &last[1].1);
    let (i3, x3) = (&last[2].0, &last[2].1);
    if i3 <= i2 || x3.len() <= x2.len() {
        return None;
    }
    let grow = (x3.len() - x2.len()) as i64;
    if grow % (i3 - i2) != 0 {
        return None;
    }
    let b = (grow / (i3 - i2)) as usize;
    if x3.len() % b == 0 {
        let beta = x3[..b].to_vec();
        let k3 = (x3.len() / b) as i64;
        let t = Template { alpha: vec![], beta, gamma: vec![], delta: i3 - k3 };
        if fits(&t) {
            return Some(t);
        }
    }
    for g in 0..=x3.len() {
        for a in 0..=x3.len() - g {
            let mid = x3.len() - a - g;
            if mid < b || mid % b != 0 {
                continue;
            }
            let t = Template {
                alpha: x3[..a].to_vec(),
                beta: x3[a..a + b].to_vec(),
                gamma: x3[x3.len() - g..].to_vec(),
                delta: i3 - (mid / b) as i64,
            };
            if fits(&t) {
                return Some(t);
            }
        }
    }
    None
}

/// Runs refinement on each instance in order, passing each proven word as
/// the base word of the next, then guesses and re-verifies a template.
pub fn drive_weakly_finite(
    prog: &Program,
    instances: &[Instance],
    base: &[u8],
    build_opts: BuildOptions,
    opts: RefineOptions,
) -> DriveOutcome {
    let mut runs = Vec::new();
    let mut spaces: Vec<StateSpace> = Vec::new();
    let mut base = base.to_vec();
    for (pos, inst) in instances.iter().enumerate() {
        let index = index_of(prog, inst, pos);
        let space = match build(prog, inst, build_opts) {
            Ok(s) => s,
            Err(e) => {
                let status = DriveStatus::Budget { instance: inst.clone(), reason: e.to_string() };
                return DriveOutcome { runs, status, verification: Vec::new() };
            }
        };
        let r = refine_finite(&space, &base, opts);
        let word = r.word();
        runs.push(InstanceRun { instance: inst.clone(), index, nodes: space.node_count(), rounds: r.rounds.clone(), word: word.clone() });
        match r.status {
            RefineStatus::Proven(_) => {
                let w = word.unwrap();
                assert!(w.starts_with(&base), "instance words must be prefix-monotone");
                base = w;
            }
            RefineStatus::Refuted(l) => {
                let status = DriveStatus::Refuted { instance: inst.clone(), witness: space.lasso_text(&l) };
                return DriveOutcome { runs, status, verification: Vec::new() };
            }
            RefineStatus::BudgetExhausted(reason) => {
                let status = DriveStatus::Budget { instance: inst.clone(), reason };
                return DriveOutcome { runs, status, verification: Vec::new() };
            }
        }
        spaces.push(space);
    }
    let points: Vec<(i64, CoinWord)> = runs.iter().map(|r| (r.index, r.word.clone().unwrap())).collect();
    let Some(t) = fit_template(&points) else {
        let reason = if points.len() < 3 { "fewer than three instances" } else { "no template fits the last three words" };
        return DriveOutcome { runs, status: DriveStatus::NoGuess(reason.into()), verification: Vec::new() };
    };
    let verification: Vec<(Instance, CoinWord, bool)> = runs
        .par_iter()
        .zip(spaces.par_iter())
        .map(|(r, s)| {
            let w = t.expand(r.index);
            let ok = matches!(check_simple_pattern(s, &w, opts.limits), Ok(v) if v.is_terminating());
            (r.instance.clone(), w, ok)
        })
        .collect();
    let status = match verification.iter().find(|v| !v.2) {
        None => DriveStatus::Guessed(t),
        Some((inst, _, _)) => DriveStatus::NoGuess(format!("expansion fails to verify at {}", instance_text(inst))),
    };
    DriveOutcome { runs, status, verification }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::parse;

    fn pts(ws: &[(i64, &str)]) -> Vec<(i64, CoinWord)> {
        ws.iter().map(|(i, w)| (*i, parse(w).unwrap())).collect()
    }

    #[test]
    fn fits_the_case_study_shapes() {
        let t = fit_template(&pts(&[(2, "010"), (3, "010"), (4, "010")])).unwrap();
        assert_eq!(t.family_text(), "010");
        let t = fit_template(&pts(&[(2, "00"), (3, "000"), (4, "0000")])).unwrap();
        assert_eq!(t.family_text(), "0^i");
        let t = fit_template(&pts(&[(3, "00"), (4, "000"), (5, "0000")])).unwrap();
        assert_eq!(t.family_text(), "0^(i-1)");
        let t = fit_template(&pts(&[(2, "01010"), (3, "0101010"), (4, "010101010")])).unwrap();
        assert_eq!(t.family_text(), "0(10)^i");
        let t = fit_template(&pts(&[(1, "000"), (2, "0000"), (3, "00000")])).unwrap();
        assert_eq!(t.family_text(), "0^(i+2)");
        let t = fit_template(&pts(&[(1, "ε"), (2, "00"), (3, "000"), (4, "0000")])).unwrap();
        assert_eq!(t.expand(1), vec![0]);
    }

    #[test]
    fn rejects_irregular_growth() {
        assert!(fit_template(&pts(&[(1, "0"), (2, "00"), (3, "0000")])).is_none());
        assert!(fit_template(&pts(&[(1, "0"), (2, "00")])).is_none());
    }
}
