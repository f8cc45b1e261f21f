use crate::report::Report;
use crate::InstanceArgs;
use pattern_core::checker::{
    check_coinless_nontermination, check_response_words, check_sequence_pattern, check_simple_pattern, CheckLimits,
    CheckVerdict,
};
use pattern_core::instrument::{export_nondet, instrument_pattern, DocError};
use pattern_core::lang::{self, LangError, Program, ProgramError};
use pattern_core::oracle::{as_terminating_deterministic, as_terminating_mdp, monte_carlo, MdpWitness, OracleError};
use pattern_core::patterns::{
    drive_weakly_finite, refine_finite, DriveStatus, Pattern, PatternParseError, RefineOptions, RefineStatus, Round,
    RoundOutcome,
};
use pattern_core::responses::{construct_response, normalize, ResponseError};
use pattern_core::semantics::{build, instance_text, BuildOptions, Instance, Label, NodeId, SemanticsError, StateSpace};
use pattern_core::words;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Proven = 0,
    Refuted = 1,
    Inconclusive = 2,
}

impl Outcome {
    fn word(self) -> &'static str {
        match self {
            Outcome::Proven => "proven",
            Outcome::Refuted => "refuted",
            Outcome::Inconclusive => "inconclusive",
        }
    }

    /// Refuted beats inconclusive beats proven.
    fn combine(self, other: Outcome) -> Outcome {
        match (self, other) {
            (Outcome::Refuted, _) | (_, Outcome::Refuted) => Outcome::Refuted,
            (Outcome::Inconclusive, _) | (_, Outcome::Inconclusive) => Outcome::Inconclusive,
            _ => Outcome::Proven,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: PathBuf, source: LangError },
    #[error("{path}: {source}")]
    Program { path: PathBuf, source: ProgramError },
    #[error("bad instance `{0}`: expected NAME=a..b or NAME=v")]
    InstanceSyntax(String),
    #[error("parameter `{0}` is unbounded; pass --instances {0}=a..b")]
    MissingInstance(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Pattern(#[from] PatternParseError),
    #[error("malformed base word `{0}`")]
    BaseWord(String),
    #[error(transparent)]
    Document(#[from] DocError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

pub type CmdResult = Result<(String, Outcome), CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load(path: &Path) -> Result<Program, CliError> {
    let text = read(path)?;
    let prog = lang::compile(&text).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })?;
    prog.validate().map_err(|source| CliError::Program { path: path.to_path_buf(), source })?;
    Ok(prog)
}

fn parse_instance_spec(spec: &str) -> Result<(String, Vec<i64>), CliError> {
    let bad = || CliError::InstanceSyntax(spec.to_string());
    let (name, range) = spec.split_once('=').ok_or_else(bad)?;
    let values = match range.split_once("..") {
        Some((a, b)) => {
            let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if a > b {
                return Err(bad());
            }
            (a..=b).collect()
        }
        None => vec![range.trim().parse().map_err(|_| bad())?],
    };
    Ok((name.trim().to_string(), values))
}

/// Cartesian product of the `--instances` flags, later flags varying fastest.
fn instances(prog: &Program, args: &InstanceArgs) -> Result<Vec<Instance>, CliError> {
    let mut out = vec![Instance::new()];
    for spec in &args.instances {
        let (name, values) = parse_instance_spec(spec)?;
        out = out
            .into_iter()
            .flat_map(|i| {
                let name = &name;
                values.iter().map(move |&v| {
                    let mut j = i.clone();
                    j.insert(name.clone(), v);
                    j
                })
            })
            .collect::<Vec<_>>();
    }
    for (_, slot) in prog.params() {
        if slot.upper.is_none() && out.iter().any(|i| !i.contains_key(&slot.name)) {
            return Err(CliError::MissingInstance(slot.name.clone()));
        }
    }
    Ok(out)
}

/// Key with an instance suffix, omitted for the empty instance.
fn keyed(base: &str, tag: &str) -> String {
    if tag == "-" { base.to_string() } else { format!("{base} {tag}") }
}

fn prefix(tag: &str) -> String {
    if tag == "-" { String::new() } else { format!("{tag} ") }
}

fn unbounded_param(prog: &Program) -> Option<String> {
    let names: Vec<&str> = prog.params().filter(|(_, s)| s.upper.is_none()).map(|(_, s)| s.name.as_str()).collect();
    match names.as_slice() {
        [n] => Some(n.to_string()),
        _ => None,
    }
}

fn build_space(prog: &Program, inst: &Instance, args: &InstanceArgs) -> Result<StateSpace, CliError> {
    Ok(build(prog, inst, BuildOptions { node_cap: args.node_cap })?)
}

fn round_text(r: &Round) -> String {
    let outcome = match &r.outcome {
        RoundOutcome::Terminating => "terminating".to_string(),
        RoundOutcome::Lasso { loop_word } => format!("lasso loop {}", words::show(loop_word)),
        RoundOutcome::Coinless => "coin-free loop".to_string(),
        RoundOutcome::Trapped => "trapped, termination unreachable".to_string(),
        RoundOutcome::Budget(m) => format!("budget: {m}"),
    };
    format!("candidate {} -> {outcome}", words::show(&r.candidate))
}

fn mdp_witness_text(space: &StateSpace, w: &MdpWitness) -> String {
    let mut out = String::new();
    for s in &w.path {
        out.push_str(&format!("PATH: {}\n", space.step_text(s)));
    }
    for &v in &w.closed {
        if let Some(l) = w.strategy.get(&v) {
            out.push_str(&format!("STRATEGY: {} -> {l}\n", space.node_text(v)));
        }
    }
    out.push_str(&format!("CLOSED: {} nodes avoid termination\n", w.closed.len()));
    out
}

pub struct CheckOptions {
    pub base_word: String,
    pub rounds: usize,
    pub pattern: Option<String>,
    pub tail: String,
    pub oracle: bool,
    pub seed: u64,
    pub samples: u64,
}

const ORACLE_CAP: u64 = 100_000;

/// Graph oracle plus a simulation under the first-choice strategy.
fn oracle_lines(report: &mut Report, prefix: &str, space: &StateSpace, claim: Outcome, opts: &CheckOptions) {
    let truth = if space.has_actions() { as_terminating_mdp(space).is_ok() } else { as_terminating_deterministic(space).is_ok() };
    report.kv("ORACLE", &format!("{prefix}graph"), if truth { "terminating" } else { "not terminating" });
    let agrees = match claim {
        Outcome::Proven => if truth { "yes" } else { "no" },
        Outcome::Refuted => if truth { "no" } else { "yes" },
        Outcome::Inconclusive => "n/a",
    };
    report.kv("ORACLE", &format!("{prefix}agrees"), agrees);
    let first = |v: NodeId| space.transitions(v)[0].label;
    let strategy: Option<&(dyn Fn(NodeId) -> Label + Sync)> = if space.has_actions() { Some(&first) } else { None };
    if let Ok(e) = monte_carlo(space, opts.samples, ORACLE_CAP, opts.seed, strategy) {
        report.kv(
            "ORACLE",
            &format!("{prefix}simulation"),
            format!("{}/{} terminated within {ORACLE_CAP} steps", e.terminated, e.samples),
        );
    }
}

pub fn check(file: &Path, args: &InstanceArgs, opts: &CheckOptions) -> CmdResult {
    let prog = load(file)?;
    let insts = instances(&prog, args)?;
    let base = words::parse(&opts.base_word).ok_or_else(|| CliError::BaseWord(opts.base_word.clone()))?;
    let refine = RefineOptions { rounds: opts.rounds, ..RefineOptions::default() };
    let mut report = Report::default();
    report.kv("VERDICT", "program", &prog.name);
    let outcome = if let Some(spec) = &opts.pattern {
        let spec = if spec.starts_with("seq:") && !spec.contains(';') { format!("{spec};tail={}", opts.tail) } else { spec.clone() };
        let pattern: Pattern = spec.parse()?;
        check_given(&prog, &insts, args, &pattern, opts, &mut report)?
    } else if !prog.is_deterministic() {
        check_nondet(&prog, &insts, args, opts, &mut report)?
    } else if insts.len() == 1 {
        check_finite(&prog, &insts[0], args, &base, refine, opts, &mut report)?
    } else {
        check_family(&prog, &insts, args, &base, refine, opts, &mut report)?
    };
    report.kv("VERDICT", "verdict", outcome.word());
    Ok((report.render(), outcome))
}

fn check_finite(
    prog: &Program,
    inst: &Instance,
    args: &InstanceArgs,
    base: &[u8],
    refine: RefineOptions,
    opts: &CheckOptions,
    report: &mut Report,
) -> Result<Outcome, CliError> {
    let space = build_space(prog, inst, args)?;
    report.kv("VERDICT", "instance", instance_text(inst));
    report.kv("VERDICT", "nodes", space.node_count());
    let r = refine_finite(&space, base, refine);
    for (k, round) in r.rounds.iter().enumerate() {
        report.kv("TRACE", &format!("round {}", k + 1), round_text(round));
    }
    let outcome = match &r.status {
        RefineStatus::Proven(p) => {
            report.kv("PATTERN", "pattern", p);
            report.kv("PATTERN", "word", words::show(&r.word().unwrap_or_default()));
            Outcome::Proven
        }
        RefineStatus::Refuted(l) => {
            report.text("WITNESS", &space.lasso_text(l));
            Outcome::Refuted
        }
        RefineStatus::BudgetExhausted(m) => {
            report.kv("VERDICT", "reason", m);
            Outcome::Inconclusive
        }
    };
    if opts.oracle {
        oracle_lines(report, "", &space, outcome, opts);
    }
    Ok(outcome)
}

fn check_family(
    prog: &Program,
    insts: &[Instance],
    args: &InstanceArgs,
    base: &[u8],
    refine: RefineOptions,
    opts: &CheckOptions,
    report: &mut Report,
) -> Result<Outcome, CliError> {
    let build_opts = BuildOptions { node_cap: args.node_cap };
    let out = drive_weakly_finite(prog, insts, base, build_opts, refine);
    let names: Vec<String> = insts.iter().map(instance_text).collect();
    report.kv("VERDICT", "instances", names.join(" "));
    for run in &out.runs {
        let tag = instance_text(&run.instance);
        let word = run.word.as_ref().map_or("none".to_string(), |w| words::show(w));
        report.kv("PATTERN", &format!("word {tag}"), format!("{word} (index {}, {} nodes)", run.index, run.nodes));
        for (k, round) in run.rounds.iter().enumerate() {
            report.kv("TRACE", &format!("{tag} round {}", k + 1), round_text(round));
        }
    }
    let outcome = match &out.status {
        DriveStatus::Guessed(t) => {
            report.kv("PATTERN", "template", Pattern::Template(t.clone()));
            report.kv("PATTERN", "family", t.family_text());
            Outcome::Proven
        }
        DriveStatus::NoGuess(reason) => {
            report.kv("VERDICT", "reason", format!("no template: {reason}"));
            Outcome::Inconclusive
        }
        DriveStatus::Refuted { instance, witness } => {
            report.kv("WITNESS", "instance", instance_text(instance));
            report.text("WITNESS", witness);
            Outcome::Refuted
        }
        DriveStatus::Budget { instance, reason } => {
            report.kv("VERDICT", "reason", format!("{}: {reason}", instance_text(instance)));
            Outcome::Inconclusive
        }
    };
    for (inst, w, ok) in &out.verification {
        let v = if *ok { "terminating" } else { "NOT terminating" };
        report.kv("PATTERN", &format!("verified {}", instance_text(inst)), format!("{} {v}", words::show(w)));
    }
    if matches!(out.status, DriveStatus::Guessed(_)) {
        report.kv("VERDICT", "note", "the template is extrapolated; every listed instance is verified");
    }
    if opts.oracle {
        for inst in insts {
            let space = build_space(prog, inst, args)?;
            oracle_lines(report, &format!("{} ", instance_text(inst)), &space, outcome, opts);
        }
    }
    Ok(outcome)
}

fn check_nondet(
    prog: &Program,
    insts: &[Instance],
    args: &InstanceArgs,
    opts: &CheckOptions,
    report: &mut Report,
) -> Result<Outcome, CliError> {
    let normal = normalize(prog);
    report.kv("VERDICT", "normal form", if normal == *prog { "unchanged" } else { "dummy steps inserted" });
    let mut total = Outcome::Proven;
    for inst in insts {
        let tag = instance_text(inst);
        let space = build_space(&normal, inst, args)?;
        report.kv("VERDICT", &keyed("nodes", &tag), space.node_count());
        let outcome = match construct_response(&space) {
            Ok(r) => {
                report.kv("PATTERN", &keyed("response length", &tag), r.len());
                for w in r.words() {
                    let letters: Vec<String> = w.iter().map(|l| l.to_string()).collect();
                    report.kv("PATTERN", &keyed("response", &tag), letters.join(" "));
                }
                match check_response_words(&space, r.words(), CheckLimits::default()) {
                    Ok(v) if v.is_terminating() => {
                        report.kv("TRACE", &keyed("check", &tag), "response pattern terminating");
                        Outcome::Proven
                    }
                    Ok(_) => {
                        report.kv("TRACE", &keyed("check", &tag), "response pattern has a lasso");
                        Outcome::Inconclusive
                    }
                    Err(e) => {
                        report.kv("TRACE", &keyed("check", &tag), e);
                        Outcome::Inconclusive
                    }
                }
            }
            Err(ResponseError::Refuted(w)) => {
                report.kv("WITNESS", "instance", &tag);
                report.text("WITNESS", &mdp_witness_text(&space, &w));
                Outcome::Refuted
            }
            Err(e) => {
                report.kv("VERDICT", &keyed("reason", &tag), e);
                Outcome::Inconclusive
            }
        };
        if opts.oracle {
            oracle_lines(report, &prefix(&tag), &space, outcome, opts);
        }
        total = total.combine(outcome);
    }
    Ok(total)
}

fn check_given(
    prog: &Program,
    insts: &[Instance],
    args: &InstanceArgs,
    pattern: &Pattern,
    opts: &CheckOptions,
    report: &mut Report,
) -> Result<Outcome, CliError> {
    report.kv("PATTERN", "pattern", pattern);
    let index_name = unbounded_param(prog);
    let limits = CheckLimits::default();
    let mut total = Outcome::Proven;
    let mut witness_shown = false;
    for (pos, inst) in insts.iter().enumerate() {
        let tag = instance_text(inst);
        let space = build_space(prog, inst, args)?;
        let verdict = if let Some(l) = check_coinless_nontermination(&space) {
            Ok(CheckVerdict::NotAsTerminating(l))
        } else {
            match pattern {
                Pattern::Simple(w) => check_simple_pattern(&space, w, limits),
                Pattern::Sequence { words, tail } => check_sequence_pattern(&space, words, *tail, limits),
                Pattern::Template(t) => {
                    let index = index_name.as_ref().and_then(|n| inst.get(n).copied()).unwrap_or(pos as i64 + 1);
                    let w = t.expand(index);
                    report.kv("TRACE", &format!("{tag} word"), words::show(&w));
                    check_simple_pattern(&space, &w, limits)
                }
                Pattern::Universal => {
                    report.kv("TRACE", &tag, "the universal pattern has no finite check");
                    total = total.combine(Outcome::Inconclusive);
                    continue;
                }
            }
        };
        let outcome = match verdict {
            Ok(CheckVerdict::Terminating) => {
                report.kv("TRACE", &tag, "terminating");
                Outcome::Proven
            }
            Ok(CheckVerdict::NotAsTerminating(l)) => {
                report.kv("TRACE", &tag, "coin-free loop");
                if !witness_shown {
                    report.kv("WITNESS", "instance", &tag);
                    report.text("WITNESS", &space.lasso_text(&l));
                    witness_shown = true;
                }
                Outcome::Refuted
            }
            Ok(CheckVerdict::Lasso(l)) => {
                report.kv("TRACE", &tag, format!("conforming lasso, loop {}", words::show(&l.coinword())));
                if !witness_shown {
                    report.kv("WITNESS", "instance", &tag);
                    report.text("WITNESS", &space.lasso_text(&l));
                    witness_shown = true;
                }
                Outcome::Inconclusive
            }
            Err(e) => {
                report.kv("TRACE", &tag, e);
                Outcome::Inconclusive
            }
        };
        if opts.oracle {
            oracle_lines(report, &prefix(&tag), &space, outcome, opts);
        }
        total = total.combine(outcome);
    }
    Ok(total)
}

pub fn instrument(file: &Path, pattern: Option<&str>, tail: &str, out: Option<&Path>) -> CmdResult {
    let prog = load(file)?;
    let doc = match pattern {
        None => export_nondet(&prog),
        Some(spec) => {
            let spec = if spec.starts_with("seq:") && !spec.contains(';') { format!("{spec};tail={tail}") } else { spec.to_string() };
            instrument_pattern(&prog, &spec.parse()?)?
        }
    };
    let text = doc.to_string();
    match out {
        None => Ok((text, Outcome::Proven)),
        Some(path) => {
            std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
            Ok((format!("wrote {}\n", path.display()), Outcome::Proven))
        }
    }
}

pub fn simulate(file: &Path, args: &InstanceArgs, samples: u64, cap: u64, seed: u64, strategy: Option<&str>) -> CmdResult {
    let prog = load(file)?;
    let mut report = Report::default();
    report.kv("VERDICT", "program", &prog.name);
    for inst in instances(&prog, args)? {
        let space = build_space(&prog, &inst, args)?;
        let pick = match strategy {
            Some("a1") => Label::A1,
            _ => Label::A0,
        };
        let choose = move |_: NodeId| pick;
        let strat: Option<&(dyn Fn(NodeId) -> Label + Sync)> = if strategy.is_some() { Some(&choose) } else { None };
        let e = monte_carlo(&space, samples, cap, seed, strat)?;
        let tag = instance_text(&inst);
        report.kv("ORACLE", &format!("{}samples", prefix(&tag)), e.samples);
        report.kv("ORACLE", &format!("{}terminated", prefix(&tag)), e.terminated);
        report.kv("ORACLE", &format!("{}capped", prefix(&tag)), e.capped);
        report.kv("ORACLE", &format!("{}fraction", prefix(&tag)), format!("{:.6}", e.terminated_fraction()));
    }
    Ok((report.render(), Outcome::Proven))
}

pub fn dump(file: &Path, args: &InstanceArgs) -> CmdResult {
    let prog = load(file)?;
    let mut out = String::new();
    let insts = instances(&prog, args)?;
    for inst in &insts {
        let space = build_space(&prog, inst, args)?;
        if insts.len() > 1 || !inst.is_empty() {
            out.push_str(&format!("# {}\n", instance_text(inst)));
        }
        out.push_str(&space.dump());
    }
    Ok((out, Outcome::Proven))
}

pub fn print(file: &Path, flowgraph: bool) -> CmdResult {
    let text = read(file)?;
    let parsed = lang::parse(&text).map_err(|source| CliError::Parse { path: file.to_path_buf(), source })?;
    if flowgraph {
        Ok((lang::lower(&parsed).listing(), Outcome::Proven))
    } else {
        Ok((lang::print(&parsed), Outcome::Proven))
    }
}
