//! Recursive-descent parser for `.ppg` sources.
//!
//! Name resolution happens while parsing (declarations precede the body), so
//! semantic diagnostics carry the position of the offending token.

use super::ast::*;
use super::lexer::{tokenize, Pos, Tok, Token};
use super::LangError;
use std::collections::HashMap;

const KEYWORDS: &[&str] =
    &["program", "param", "var", "begin", "end", "if", "else", "while", "coin", "nondet", "true", "false"];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Token cursor with the expression/condition grammar, generic in how names resolve.
pub struct Cursor {
    toks: Vec<Token>,
    idx: usize,
}

pub type Resolver<'a, V> = &'a dyn Fn(&str, Pos) -> Result<V, LangError>;

impl Cursor {
    pub fn new(text: &str) -> Result<Cursor, LangError> {
        Ok(Cursor { toks: tokenize(text)?, idx: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.idx].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.idx + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.idx].pos
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].tok.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn syntax_error(&self, expected: &str) -> LangError {
        let pos = self.pos();
        LangError::Syntax {
            line: pos.line,
            col: pos.col,
            message: format!("expected {expected}, found {}", self.peek().describe()),
        }
    }

    pub fn expect(&mut self, tok: Tok, what: &str) -> Result<(), LangError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax_error(what))
        }
    }

    pub fn is_keyword_tok(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), LangError> {
        if self.is_keyword_tok(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax_error(&format!("`{kw}`")))
        }
    }

    /// A non-keyword identifier.
    pub fn ident(&mut self) -> Result<(String, Pos), LangError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok((s, pos))
            }
            _ => Err(self.syntax_error("identifier")),
        }
    }

    /// Integer literal with an optional leading minus.
    pub fn signed_int(&mut self) -> Result<i64, LangError> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.syntax_error("integer")),
        }
    }

    pub fn expr<V>(&mut self, r: Resolver<'_, V>) -> Result<Expr<V>, LangError> {
        let mut lhs = self.term(r)?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term(r)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term<V>(&mut self, r: Resolver<'_, V>) -> Result<Expr<V>, LangError> {
        let mut lhs = self.unary(r)?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.unary(r)?;
            lhs = Expr::bin(BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary<V>(&mut self, r: Resolver<'_, V>) -> Result<Expr<V>, LangError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            if let Tok::Int(n) = *self.peek() {
                self.bump();
                return Ok(Expr::Int(-n));
            }
            return Ok(Expr::Neg(Box::new(self.unary(r)?)));
        }
        self.atom(r)
    }

    fn atom<V>(&mut self, r: Resolver<'_, V>) -> Result<Expr<V>, LangError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                let pos = self.pos();
                self.bump();
                Ok(Expr::Var(r(&s, pos)?))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr(r)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.syntax_error("expression")),
        }
    }

    pub fn cond<V>(&mut self, r: Resolver<'_, V>) -> Result<Cond<V>, LangError> {
        let mut lhs = self.conj(r)?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            let rhs = self.conj(r)?;
            lhs = Cond::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conj<V>(&mut self, r: Resolver<'_, V>) -> Result<Cond<V>, LangError> {
        let mut lhs = self.negation(r)?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            let rhs = self.negation(r)?;
            lhs = Cond::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn negation<V>(&mut self, r: Resolver<'_, V>) -> Result<Cond<V>, LangError> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(Cond::not(self.negation(r)?));
        }
        self.cond_atom(r)
    }

    fn cond_atom<V>(&mut self, r: Resolver<'_, V>) -> Result<Cond<V>, LangError> {
        if self.is_keyword_tok("true") {
            self.bump();
            return Ok(Cond::True);
        }
        if self.is_keyword_tok("false") {
            self.bump();
            return Ok(Cond::False);
        }
        if *self.peek() == Tok::LParen {
            // Either a parenthesised condition or an expression like `(a + b) < c`.
            let save = self.idx;
            self.bump();
            if let Ok(c) = self.cond(r) {
                if *self.peek() == Tok::RParen {
                    self.bump();
                    if !starts_arith_or_cmp(self.peek()) {
                        return Ok(c);
                    }
                }
            }
            self.idx = save;
        }
        let lhs = self.expr(r)?;
        let op = match self.peek() {
            Tok::EqEq => CmpOp::Eq,
            Tok::NotEq => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return Err(self.syntax_error("comparison operator")),
        };
        self.bump();
        let rhs = self.expr(r)?;
        Ok(Cond::Cmp(op, lhs, rhs))
    }
}

fn starts_arith_or_cmp(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Plus | Tok::Minus | Tok::Star | Tok::EqEq | Tok::NotEq | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge
    )
}

fn semantic(pos: Pos, message: impl Into<String>) -> LangError {
    LangError::Semantic { line: pos.line, col: pos.col, message: message.into() }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum NameKind {
    Param,
    Var,
}

/// Parses a complete program.
pub fn parse(text: &str) -> Result<SourceProgram, LangError> {
    let mut cur = Cursor::new(text)?;
    cur.expect_keyword("program")?;
    let (name, _) = cur.ident()?;
    cur.expect(Tok::Semi, "`;`")?;

    let mut names: HashMap<String, NameKind> = HashMap::new();
    let declare = |names: &mut HashMap<String, NameKind>, n: &str, pos: Pos, kind| {
        if n.starts_with("__") {
            return Err(semantic(pos, format!("identifier `{n}` is reserved")));
        }
        if names.insert(n.to_string(), kind).is_some() {
            return Err(semantic(pos, format!("`{n}` declared more than once")));
        }
        Ok(())
    };

    let mut params = Vec::new();
    while cur.is_keyword_tok("param") {
        cur.bump();
        let (pname, pos) = cur.ident()?;
        cur.expect(Tok::Colon, "`:`")?;
        let lower = cur.signed_int()?;
        cur.expect(Tok::DotDot, "`..`")?;
        let upper = if matches!(cur.peek(), Tok::Int(_) | Tok::Minus) { Some(cur.signed_int()?) } else { None };
        cur.expect(Tok::Semi, "`;`")?;
        if let Some(u) = upper {
            if u < lower {
                return Err(semantic(pos, format!("empty range {lower}..{u} for `{pname}`")));
            }
        }
        declare(&mut names, &pname, pos, NameKind::Param)?;
        params.push(ParamDecl { name: pname, lower, upper });
    }

    let mut vars = Vec::new();
    while cur.is_keyword_tok("var") {
        cur.bump();
        let (vname, pos) = cur.ident()?;
        cur.expect(Tok::Colon, "`:`")?;
        let lower = cur.signed_int()?;
        cur.expect(Tok::DotDot, "`..`")?;
        let upper = cur.signed_int()?;
        cur.expect(Tok::Equals, "`=`")?;
        let init = cur.signed_int()?;
        cur.expect(Tok::Semi, "`;`")?;
        if upper < lower {
            return Err(semantic(pos, format!("empty range {lower}..{upper} for `{vname}`")));
        }
        if init < lower || init > upper {
            return Err(semantic(pos, format!("initial value {init} outside {lower}..{upper} for `{vname}`")));
        }
        declare(&mut names, &vname, pos, NameKind::Var)?;
        vars.push(VarDecl { name: vname, lower, upper, init });
    }

    cur.expect_keyword("begin")?;
    let resolve = |n: &str, pos: Pos| -> Result<String, LangError> {
        if names.contains_key(n) {
            Ok(n.to_string())
        } else {
            Err(semantic(pos, format!("undeclared variable `{n}`")))
        }
    };
    let mut body = Vec::new();
    while !cur.is_keyword_tok("end") {
        body.push(stmt(&mut cur, &names, &resolve)?);
    }
    cur.bump();
    if !cur.at_eof() {
        return Err(cur.syntax_error("end of input"));
    }
    Ok(SourceProgram { name, params, vars, body })
}

fn block(
    cur: &mut Cursor,
    names: &HashMap<String, NameKind>,
    r: Resolver<'_, String>,
) -> Result<Vec<Stmt>, LangError> {
    cur.expect(Tok::LBrace, "`{`")?;
    let mut out = Vec::new();
    while *cur.peek() != Tok::RBrace {
        out.push(stmt(cur, names, r)?);
    }
    cur.bump();
    Ok(out)
}

fn stmt(cur: &mut Cursor, names: &HashMap<String, NameKind>, r: Resolver<'_, String>) -> Result<Stmt, LangError> {
    if cur.is_keyword_tok("if") {
        cur.bump();
        cur.expect(Tok::LParen, "`(`")?;
        let cond = cur.cond(r)?;
        cur.expect(Tok::RParen, "`)`")?;
        let then_branch = block(cur, names, r)?;
        let else_branch = if cur.is_keyword_tok("else") {
            cur.bump();
            Some(block(cur, names, r)?)
        } else {
            None
        };
        return Ok(Stmt::If { cond, then_branch, else_branch });
    }
    if cur.is_keyword_tok("while") {
        cur.bump();
        cur.expect(Tok::LParen, "`(`")?;
        let cond = cur.cond(r)?;
        cur.expect(Tok::RParen, "`)`")?;
        let body = block(cur, names, r)?;
        return Ok(Stmt::While { cond, body });
    }
    let (target, pos) = match cur.ident() {
        Ok(x) => x,
        Err(_) => return Err(cur.syntax_error("statement")),
    };
    match names.get(&target) {
        None => return Err(semantic(pos, format!("undeclared variable `{target}`"))),
        Some(NameKind::Param) => return Err(semantic(pos, format!("cannot assign to parameter `{target}`"))),
        Some(NameKind::Var) => {}
    }
    cur.expect(Tok::Assign, "`:=`")?;
    let s = if cur.is_keyword_tok("coin") && *cur.peek_at(1) == Tok::LParen {
        cur.bump();
        cur.bump();
        let ppos = cur.pos();
        let num = cur.signed_int()?;
        cur.expect(Tok::Slash, "`/`")?;
        let den = cur.signed_int()?;
        cur.expect(Tok::RParen, "`)`")?;
        let prob = if num < 0 || den < 0 { None } else { Prob::new(num as u64, den as u64) };
        let prob = prob.ok_or_else(|| semantic(ppos, format!("probability not in (0,1): {num}/{den}")))?;
        Stmt::Coin { target, prob }
    } else if cur.is_keyword_tok("nondet") {
        cur.bump();
        cur.expect(Tok::LParen, "`(`")?;
        cur.expect(Tok::RParen, "`)`")?;
        Stmt::Nondet { target }
    } else {
        Stmt::Assign { target, value: cur.expr(r)? }
    };
    cur.expect(Tok::Semi, "`;`")?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_body() {
        let p = parse("program t; begin end").unwrap();
        assert_eq!(p.name, "t");
        assert!(p.body.is_empty());
    }

    #[test]
    fn coin_probability_out_of_range() {
        let err = parse("program t; var x : 0..1 = 0; begin x := coin(3/2); end").unwrap_err();
        assert!(err.to_string().contains("probability not in (0,1)"), "{err}");
        assert!(parse("program t; var x : 0..1 = 0; begin x := coin(0/2); end").is_err());
        assert!(parse("program t; var x : 0..1 = 0; begin x := coin(1/0); end").is_err());
    }

    #[test]
    fn undeclared_and_reserved() {
        let err = parse("program t; begin y := 1; end").unwrap_err();
        assert!(matches!(err, LangError::Semantic { line: 1, col: 18, .. }), "{err:?}");
        assert!(parse("program t; var __x : 0..1 = 0; begin end").is_err());
        assert!(parse("program t; param N : 1..; begin N := 1; end").is_err());
        assert!(parse("program t; param N : 1..; var N : 0..1 = 0; begin end").is_err());
    }

    #[test]
    fn empty_range_and_bad_init() {
        assert!(parse("program t; var x : 3..1 = 2; begin end").unwrap_err().to_string().contains("empty range"));
        assert!(parse("program t; var x : 0..1 = 5; begin end").is_err());
    }

    #[test]
    fn syntax_error_names_expected_token() {
        let err = parse("program t; var x : 0..1 = 0; begin x = 1; end").unwrap_err();
        assert!(err.to_string().contains("expected `:=`"), "{err}");
    }

    #[test]
    fn parenthesised_expression_in_condition() {
        let p = parse("program t; var x : 0..9 = 0; begin while ((x + 1) * 2 < 9 && !(x == 3)) { x := x + 1; } end")
            .unwrap();
        let Stmt::While { cond, .. } = &p.body[0] else { panic!() };
        assert!(matches!(cond, Cond::And(..)));
    }

    #[test]
    fn negative_literals_fold() {
        let p = parse("program t; var x : -5..5 = -1; begin x := -3 - -(x); end").unwrap();
        assert_eq!(p.vars[0].init, -1);
        let Stmt::Assign { value, .. } = &p.body[0] else { panic!() };
        assert_eq!(
            *value,
            Expr::bin(BinOp::Sub, Expr::Int(-3), Expr::Neg(Box::new(Expr::Var("x".into()))))
        );
    }
}
