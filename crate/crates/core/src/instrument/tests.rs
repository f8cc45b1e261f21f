use super::*;
use crate::checker::{check_coinless_nontermination, check_sequence_pattern, CheckLimits};
use crate::lang::compile;
use crate::semantics::{build, BuildOptions, Instance};
use crate::words;

const FW: &str = include_str!("../../../../corpus/fw.ppg");
const RW: &str = include_str!("../../../../corpus/rw.ppg");

fn template(s: &str) -> Pattern {
    s.parse().unwrap()
}

fn inst(n: i64) -> Instance {
    Instance::from([("N".to_string(), n)])
}

fn with_nondet(p: &Program) -> Program {
    let edges = p
        .edges
        .iter()
        .map(|e| match e.cmd {
            Command::Coin(x, _) => crate::lang::Edge { cmd: Command::Nondet(x), ..e.clone() },
            _ => e.clone(),
        })
        .collect();
    Program::new(p.name.clone(), p.slots.clone(), p.locations.clone(), edges, p.start, p.end)
}

#[test]
fn export_round_trips_to_the_same_flowgraph() {
    for src in [FW, RW] {
        let p = compile(src).unwrap();
        let doc = export_nondet(&p);
        let text = doc.to_string();
        assert!(!text.contains("coin"));
        let back = parse_document(&text).unwrap();
        assert_eq!(back, doc);
        let q = to_program(&back, None).unwrap();
        q.validate().unwrap();
        assert_eq!(q, with_nondet(&p));
        assert_eq!(q.coin_edge_count(), 0);
    }
}

#[test]
fn coin_free_program_is_unchanged() {
    let p = compile("program t; var x : 0..3 = 0; begin while (x < 3) { x := x + 1; } end").unwrap();
    assert_eq!(to_program(&export_nondet(&p), None).unwrap(), p);
}

#[test]
fn fw_export_shape() {
    let text = export_nondet(&compile(FW).unwrap()).to_string();
    assert!(text.contains("update: x:=nondet"));
    assert!(text.contains("guard: x != old update: -"));
    assert!(text.starts_with("name: fw\nvars: k : 0..100 = 0 ; x : 0..1 = 1 ; old : 0..1 = 0\n"));
}

#[test]
fn rw_template_document() {
    let p = compile(RW).unwrap();
    let doc = instrument_pattern(&p, &template("template:a=;b=0;c=;d=0")).unwrap();
    let text = doc.to_string();
    assert!(text.contains("# invariant (advisory): next <= N"));
    assert!(text.contains("vars: param N : 1.. ; k : 0..1000 = 1 ; c : 0..1 = 0 ; ctr : nat = ? ; next : 1.. = 1 ; pos : 1.. = 1 ; bix : 1..1 = 1"));
    assert!(text.contains("guard: ctr <= 0 update: - to: c"));
    assert!(text.contains("update: ctr:=ctr - 1"));
    // forced zero inside the word, and the completing zero resets
    assert!(text.contains("update: c:=0, pos:=pos + 1, bix:=1"));
    assert!(text.contains("update: c:=0, ctr:=?, pos:=1, next:=next + 1, bix:=1"));
    let back = parse_document(&text).unwrap();
    assert_eq!(back.transitions, doc.transitions);
    assert!(matches!(to_program(&back, None), Err(DocError::Unbounded(_))));
    to_program(&back, Some(6)).unwrap().validate().unwrap();
}

#[test]
fn fresh_names_avoid_program_variables() {
    let p = compile("program t; var ctr : 0..1 = 0; var ctr_ : 0..1 = 0; begin ctr := coin(1/2); end").unwrap();
    let doc = instrument_pattern(&p, &template("seq:0;tail=repeat")).unwrap();
    assert!(doc.var_index("ctr__").is_some());
}

#[test]
fn rejected_patterns() {
    let p = compile(RW).unwrap();
    assert_eq!(instrument_pattern(&p, &Pattern::Simple(vec![0])), Err(DocError::Unsupported("simple")));
    assert_eq!(instrument_pattern(&p, &Pattern::Universal), Err(DocError::Unsupported("universal")));
    let empty = Pattern::Sequence { words: vec![vec![0], vec![]], tail: Tail::Repeat };
    assert_eq!(instrument_pattern(&p, &empty), Err(DocError::EmptyWord));
    assert_eq!(instrument_pattern(&p, &template("template:a=;b=;c=;d=0")), Err(DocError::EmptyWord));
}

#[test]
fn parse_errors_carry_lines() {
    let err = parse_document("name: t\nvars: x : 0..1 = 0\nlocations: a b\nstart: a\nend: b\nfrom: a guard: y == 1 update: - to: b\n");
    assert!(matches!(err, Err(DocError::Syntax { line: 6, .. })));
    assert!(matches!(parse_document("name: t\nbogus: 1\n"), Err(DocError::Syntax { line: 2, .. })));
    assert!(matches!(
        parse_document("name: t\nvars: x : 0..1 = 0\nlocations: a\nstart: q\n"),
        Err(DocError::UnknownLocation(_))
    ));
}

/// Does the bounded document have an infinite run?
fn document_diverges(prog: &Program, pattern: &Pattern, n: i64, cap: i64) -> bool {
    let doc = instrument_pattern(prog, pattern).unwrap();
    let lowered = to_program(&doc, Some(cap)).unwrap();
    lowered.validate().unwrap();
    let space = build(&lowered, &inst(n), BuildOptions::default()).unwrap();
    check_coinless_nontermination(&space).is_some()
}

fn cross_check(prog: &Program, words: Vec<Vec<u8>>, tail: Tail, n: i64) -> bool {
    let space = build(prog, &inst(n), BuildOptions::default()).unwrap();
    let verdict = check_sequence_pattern(&space, &words, tail, CheckLimits::default()).unwrap();
    let coinless = check_coinless_nontermination(&space);
    let checker_diverges = !verdict.is_terminating() || coinless.is_some();
    // any gap of a lasso fits in its length
    let cap = verdict.lasso().map_or(4, |l| (l.prefix.len() + l.cycle.len()) as i64 + 1);
    let shown: Vec<String> = words.iter().map(|w| words::show(w)).collect();
    let pattern = Pattern::Sequence { words, tail };
    assert_eq!(
        document_diverges(prog, &pattern, n, cap),
        checker_diverges,
        "{} N={n} pattern {shown:?} {tail:?}",
        prog.name
    );
    checker_diverges
}

#[test]
fn documents_agree_with_the_sequence_checker() {
    let cases: [(&str, &str); 6] = [
        (RW, "template:a=;b=0;c=;d=1"),
        (include_str!("../../../../corpus/randomwalk.ppg"), "template:a=;b=0;c=;d=0"),
        (include_str!("../../../../corpus/firewire.ppg"), "template:a=010;b=;c=;d=0"),
        (include_str!("../../../../corpus/herman.ppg"), "template:a=0;b=10;c=;d=0"),
        (include_str!("../../../../corpus/zeroconf.ppg"), "template:a=00;b=0;c=;d=0"),
        (include_str!("../../../../corpus/brp.ppg"), "template:a=00;b=;c=;d=0"),
    ];
    let mut outcomes = [0usize; 2];
    for (src, fam) in cases {
        let prog = compile(src).unwrap();
        let Pattern::Template(t) = template(fam) else { unreachable!() };
        for n in 1..=4 {
            let family: Vec<Vec<u8>> = (1..=3).map(|i| t.expand(i)).filter(|w| !w.is_empty()).collect();
            for tail in [Tail::Repeat, Tail::Free] {
                for words in [family.clone(), vec![vec![1]], vec![vec![0], vec![1, 1]]] {
                    outcomes[cross_check(&prog, words, tail, n) as usize] += 1;
                }
            }
        }
    }
    assert!(outcomes[0] > 10 && outcomes[1] > 10, "{outcomes:?}");
}

/// The template document at cap `c` behaves like its first `c` words with
/// the last one repeated.
#[test]
fn template_documents_agree_with_truncations() {
    let cases: [(&str, &str); 3] = [
        (RW, "template:a=;b=0;c=;d=1"),
        (include_str!("../../../../corpus/herman.ppg"), "template:a=0;b=10;c=;d=0"),
        (include_str!("../../../../corpus/firewire.ppg"), "template:a=010;b=;c=;d=0"),
    ];
    for (src, fam) in cases {
        let prog = compile(src).unwrap();
        let pattern = template(fam);
        let Pattern::Template(t) = &pattern else { unreachable!() };
        for n in 1..=3 {
            let space = build(&prog, &inst(n), BuildOptions::default()).unwrap();
            let cap = 12;
            let words: Vec<Vec<u8>> = (1..=cap).map(|i| t.expand(i)).filter(|w| !w.is_empty()).collect();
            let v = check_sequence_pattern(&space, &words, Tail::Repeat, CheckLimits::default()).unwrap();
            if let Some(l) = v.lasso() {
                assert!(l.prefix.len() + l.cycle.len() < cap as usize);
            }
            assert_eq!(document_diverges(&prog, &pattern, n, cap), !v.is_terminating(), "{} N={n}", prog.name);
            assert!(v.is_terminating() || prog.name == "rw");
        }
    }
}
