use super::DocError;
use crate::lang::parser::Cursor;
use crate::lang::print::{cond_to_string, expr_to_string};
use crate::lang::lexer::Tok;
use crate::lang::{Cond, Expr, LangError, SlotId};
use std::fmt;

/// `lower..upper`, or `lower..` when unbounded. `init: None` means any value
/// in range (always the case for parameters).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocVar {
    pub name: String,
    pub param: bool,
    pub lower: i64,
    pub upper: Option<i64>,
    pub init: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Update {
    Set(Expr<SlotId>),
    /// `x:=nondet`, a choice between 0 and 1.
    Nondet,
    /// `x:=?`, any value in range (any nonnegative integer for `nat`).
    Havoc,
}

/// Updates run left to right once the guard holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocTransition {
    pub from: usize,
    pub guard: Cond<SlotId>,
    pub updates: Vec<(SlotId, Update)>,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsDocument {
    pub name: String,
    /// Emitted as `#` comment lines; not read back.
    pub notes: Vec<String>,
    pub vars: Vec<DocVar>,
    pub locations: Vec<String>,
    pub start: usize,
    pub end: usize,
    pub transitions: Vec<DocTransition>,
}

impl TsDocument {
    pub fn var_index(&self, name: &str) -> Option<SlotId> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn has_unbounded_vars(&self) -> bool {
        self.vars.iter().any(|v| !v.param && v.upper.is_none())
    }

    fn name_of(&self) -> impl Fn(&SlotId) -> String + '_ {
        |s| self.vars[*s].name.clone()
    }

    pub fn update_text(&self, x: SlotId, u: &Update) -> String {
        let rhs = match u {
            Update::Set(e) => expr_to_string(e, &self.name_of()),
            Update::Nondet => "nondet".into(),
            Update::Havoc => "?".into(),
        };
        format!("{}:={rhs}", self.vars[x].name)
    }

    pub fn transition_text(&self, t: &DocTransition) -> String {
        let updates = if t.updates.is_empty() {
            "-".to_string()
        } else {
            t.updates.iter().map(|(x, u)| self.update_text(*x, u)).collect::<Vec<_>>().join(", ")
        };
        format!(
            "from: {} guard: {} update: {} to: {}",
            self.locations[t.from],
            cond_to_string(&t.guard, &self.name_of()),
            updates,
            self.locations[t.to]
        )
    }
}

impl fmt::Display for DocVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.param {
            write!(f, "param ")?;
        }
        match (self.lower, self.upper) {
            (0, None) => write!(f, "{} : nat", self.name)?,
            (lo, None) => write!(f, "{} : {lo}..", self.name)?,
            (lo, Some(hi)) => write!(f, "{} : {lo}..{hi}", self.name)?,
        }
        match (self.param, self.init) {
            (true, _) => Ok(()),
            (false, Some(v)) => write!(f, " = {v}"),
            (false, None) => write!(f, " = ?"),
        }
    }
}

impl fmt::Display for TsDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.notes {
            writeln!(f, "# {n}")?;
        }
        writeln!(f, "name: {}", self.name)?;
        let vars: Vec<String> = self.vars.iter().map(|v| v.to_string()).collect();
        writeln!(f, "vars: {}", vars.join(" ; "))?;
        writeln!(f, "locations: {}", self.locations.join(" "))?;
        writeln!(f, "start: {}", self.locations[self.start])?;
        writeln!(f, "end: {}", self.locations[self.end])?;
        for t in &self.transitions {
            writeln!(f, "{}", self.transition_text(t))?;
        }
        Ok(())
    }
}

fn lang_err(line: usize, e: LangError) -> DocError {
    let message = match e {
        LangError::Lex { col, message, .. }
        | LangError::Syntax { col, message, .. }
        | LangError::Semantic { col, message, .. } => format!("column {col}: {message}"),
    };
    DocError::Syntax { line, message }
}

fn syntax(line: usize, message: impl Into<String>) -> DocError {
    DocError::Syntax { line, message: message.into() }
}

/// Any identifier, keywords included; location names are free-form.
fn word(c: &mut Cursor) -> Result<String, LangError> {
    match c.peek().clone() {
        Tok::Ident(s) => {
            c.bump();
            Ok(s)
        }
        _ => Err(c.syntax_error("name")),
    }
}

fn key(c: &mut Cursor, kw: &str) -> Result<(), LangError> {
    c.expect_keyword(kw)?;
    c.expect(Tok::Colon, "`:`")
}

fn parse_var(c: &mut Cursor) -> Result<DocVar, LangError> {
    let param = c.is_keyword_tok("param");
    if param {
        c.bump();
    }
    let (name, _) = c.ident()?;
    c.expect(Tok::Colon, "`:`")?;
    let (lower, upper) = if c.is_keyword_tok("nat") {
        c.bump();
        (0, None)
    } else {
        let lo = c.signed_int()?;
        c.expect(Tok::DotDot, "`..`")?;
        let hi = if matches!(c.peek(), Tok::Int(_) | Tok::Minus) { Some(c.signed_int()?) } else { None };
        (lo, hi)
    };
    let init = if !param && *c.peek() == Tok::Equals {
        c.bump();
        if *c.peek() == Tok::Question {
            c.bump();
            None
        } else {
            Some(c.signed_int()?)
        }
    } else if param {
        None
    } else {
        return Err(c.syntax_error("`=`"));
    };
    Ok(DocVar { name, param, lower, upper, init })
}

/// Reads a document back. Comment lines and blank lines are skipped.
pub fn parse_document(text: &str) -> Result<TsDocument, DocError> {
    let mut name = None;
    let mut vars: Option<Vec<DocVar>> = None;
    let mut locations: Option<Vec<String>> = None;
    let (mut start, mut end) = (None, None);
    let mut transitions = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut c = Cursor::new(trimmed).map_err(|e| lang_err(line, e))?;
        let head = word(&mut c).map_err(|e| lang_err(line, e))?;
        let loc_index = |locs: &Option<Vec<String>>, n: &str| -> Result<usize, DocError> {
            let locs = locs.as_ref().ok_or_else(|| syntax(line, "`locations:` must come first"))?;
            locs.iter().position(|l| l == n).ok_or_else(|| DocError::UnknownLocation(n.to_string()))
        };
        match head.as_str() {
            "name" => {
                c.expect(Tok::Colon, "`:`").map_err(|e| lang_err(line, e))?;
                name = Some(word(&mut c).map_err(|e| lang_err(line, e))?);
            }
            "vars" => {
                c.expect(Tok::Colon, "`:`").map_err(|e| lang_err(line, e))?;
                let mut vs: Vec<DocVar> = Vec::new();
                while !c.at_eof() {
                    let v = parse_var(&mut c).map_err(|e| lang_err(line, e))?;
                    if vs.iter().any(|w| w.name == v.name) {
                        return Err(syntax(line, format!("`{}` declared twice", v.name)));
                    }
                    vs.push(v);
                    if *c.peek() == Tok::Semi {
                        c.bump();
                    }
                }
                vars = Some(vs);
            }
            "locations" => {
                c.expect(Tok::Colon, "`:`").map_err(|e| lang_err(line, e))?;
                let mut ls = Vec::new();
                while !c.at_eof() {
                    ls.push(word(&mut c).map_err(|e| lang_err(line, e))?);
                }
                locations = Some(ls);
            }
            "start" | "end" => {
                c.expect(Tok::Colon, "`:`").map_err(|e| lang_err(line, e))?;
                let n = word(&mut c).map_err(|e| lang_err(line, e))?;
                let l = loc_index(&locations, &n)?;
                if head == "start" {
                    start = Some(l);
                } else {
                    end = Some(l);
                }
            }
            "from" => {
                let vs = vars.as_ref().ok_or_else(|| syntax(line, "`vars:` must come first"))?;
                let resolve = |n: &str, p: crate::lang::lexer::Pos| -> Result<SlotId, LangError> {
                    vs.iter().position(|v| v.name == n).ok_or(LangError::Semantic {
                        line: p.line,
                        col: p.col,
                        message: format!("unknown variable `{n}`"),
                    })
                };
                let t = (|| -> Result<(String, Cond<SlotId>, Vec<(SlotId, Update)>, String), LangError> {
                    c.expect(Tok::Colon, "`:`")?;
                    let from = word(&mut c)?;
                    key(&mut c, "guard")?;
                    let guard = c.cond(&resolve)?;
                    key(&mut c, "update")?;
                    let mut updates = Vec::new();
                    if *c.peek() == Tok::Minus && c.peek_at(1) == &Tok::Ident("to".into()) {
                        c.bump();
                    } else {
                        loop {
                            let (x, p) = c.ident()?;
                            let slot = resolve(&x, p)?;
                            c.expect(Tok::Assign, "`:=`")?;
                            let u = if c.is_keyword_tok("nondet") {
                                c.bump();
                                Update::Nondet
                            } else if *c.peek() == Tok::Question {
                                c.bump();
                                Update::Havoc
                            } else {
                                Update::Set(c.expr(&resolve)?)
                            };
                            updates.push((slot, u));
                            if *c.peek() == Tok::Comma {
                                c.bump();
                            } else {
                                break;
                            }
                        }
                    }
                    key(&mut c, "to")?;
                    let to = word(&mut c)?;
                    if !c.at_eof() {
                        return Err(c.syntax_error("end of line"));
                    }
                    Ok((from, guard, updates, to))
                })()
                .map_err(|e| lang_err(line, e))?;
                let (from, guard, updates, to) = t;
                transitions.push(DocTransition {
                    from: loc_index(&locations, &from)?,
                    guard,
                    updates,
                    to: loc_index(&locations, &to)?,
                });
            }
            other => return Err(syntax(line, format!("unknown entry `{other}`"))),
        }
    }
    let missing = |what: &str| syntax(0, format!("missing `{what}:` entry"));
    Ok(TsDocument {
        name: name.ok_or_else(|| missing("name"))?,
        notes: Vec::new(),
        vars: vars.ok_or_else(|| missing("vars"))?,
        locations: locations.ok_or_else(|| missing("locations"))?,
        start: start.ok_or_else(|| missing("start"))?,
        end: end.ok_or_else(|| missing("end"))?,
        transitions,
    })
}
