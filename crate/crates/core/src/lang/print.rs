//! Canonical pretty-printer; `parse(print(p)) == p` for every parsed program.

use super::ast::*;
use std::fmt::Write;

fn prec(e: &Expr<impl Sized>) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul, ..) => 2,
        _ => 3,
    }
}

pub fn expr_to_string<V>(e: &Expr<V>, name: &impl Fn(&V) -> String) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, name);
    s
}

fn write_expr<V>(out: &mut String, e: &Expr<V>, name: &impl Fn(&V) -> String) {
    match e {
        Expr::Int(n) => write!(out, "{n}").unwrap(),
        Expr::Var(v) => out.push_str(&name(v)),
        Expr::Neg(inner) => {
            out.push('-');
            match **inner {
                Expr::Int(_) | Expr::Bin(..) => {
                    out.push('(');
                    write_expr(out, inner, name);
                    out.push(')');
                }
                _ => write_expr(out, inner, name),
            }
        }
        Expr::Bin(op, a, b) => {
            let p = prec(e);
            write_child(out, a, prec(a) < p, name);
            out.push_str(match op {
                BinOp::Add => " + ",
                BinOp::Sub => " - ",
                BinOp::Mul => " * ",
            });
            write_child(out, b, prec(b) <= p, name);
        }
    }
}

fn write_child<V>(out: &mut String, e: &Expr<V>, paren: bool, name: &impl Fn(&V) -> String) {
    if paren {
        out.push('(');
        write_expr(out, e, name);
        out.push(')');
    } else {
        write_expr(out, e, name);
    }
}

fn cprec(c: &Cond<impl Sized>) -> u8 {
    match c {
        Cond::Or(..) => 1,
        Cond::And(..) => 2,
        _ => 3,
    }
}

pub fn cond_to_string<V>(c: &Cond<V>, name: &impl Fn(&V) -> String) -> String {
    let mut s = String::new();
    write_cond(&mut s, c, name);
    s
}

fn write_cond<V>(out: &mut String, c: &Cond<V>, name: &impl Fn(&V) -> String) {
    match c {
        Cond::True => out.push_str("true"),
        Cond::False => out.push_str("false"),
        Cond::Cmp(op, a, b) => {
            write_expr(out, a, name);
            write!(out, " {} ", op.symbol()).unwrap();
            write_expr(out, b, name);
        }
        Cond::Not(inner) => {
            out.push('!');
            let paren = matches!(**inner, Cond::And(..) | Cond::Or(..) | Cond::Cmp(..));
            write_cchild(out, inner, paren, name);
        }
        Cond::And(a, b) | Cond::Or(a, b) => {
            let p = cprec(c);
            write_cchild(out, a, cprec(a) < p, name);
            out.push_str(if p == 1 { " || " } else { " && " });
            write_cchild(out, b, cprec(b) <= p, name);
        }
    }
}

fn write_cchild<V>(out: &mut String, c: &Cond<V>, paren: bool, name: &impl Fn(&V) -> String) {
    if paren {
        out.push('(');
        write_cond(out, c, name);
        out.push(')');
    } else {
        write_cond(out, c, name);
    }
}

fn ident(s: &String) -> String {
    s.clone()
}

pub fn print(p: &SourceProgram) -> String {
    let mut out = String::new();
    writeln!(out, "program {};", p.name).unwrap();
    for d in &p.params {
        match d.upper {
            Some(u) => writeln!(out, "param {} : {}..{};", d.name, d.lower, u).unwrap(),
            None => writeln!(out, "param {} : {}..;", d.name, d.lower).unwrap(),
        }
    }
    for d in &p.vars {
        writeln!(out, "var {} : {}..{} = {};", d.name, d.lower, d.upper, d.init).unwrap();
    }
    out.push_str("begin\n");
    write_block(&mut out, &p.body, 1);
    out.push_str("end\n");
    out
}

fn write_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    for s in stmts {
        write_stmt(out, s, depth);
    }
}

fn write_stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = "  ".repeat(depth);
    match s {
        Stmt::Assign { target, value } => {
            writeln!(out, "{pad}{target} := {};", expr_to_string(value, &ident)).unwrap()
        }
        Stmt::Coin { target, prob } => writeln!(out, "{pad}{target} := coin({prob});").unwrap(),
        Stmt::Nondet { target } => writeln!(out, "{pad}{target} := nondet();").unwrap(),
        Stmt::If { cond, then_branch, else_branch } => {
            writeln!(out, "{pad}if ({}) {{", cond_to_string(cond, &ident)).unwrap();
            write_block(out, then_branch, depth + 1);
            if let Some(e) = else_branch {
                writeln!(out, "{pad}}} else {{").unwrap();
                write_block(out, e, depth + 1);
            }
            writeln!(out, "{pad}}}").unwrap();
        }
        Stmt::While { cond, body } => {
            writeln!(out, "{pad}while ({}) {{", cond_to_string(cond, &ident)).unwrap();
            write_block(out, body, depth + 1);
            writeln!(out, "{pad}}}").unwrap();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn associativity_survives() {
        let src = "program t; var a : 0..9 = 0; var b : 0..9 = 0; begin a := a - (b - 1) * (a + b); \
                   if (!(a < b) || a == b && (b == 1 || a != 2)) { } end";
        let p = parse(src).unwrap();
        let text = print(&p);
        assert!(text.contains("a := a - (b - 1) * (a + b);"), "{text}");
        assert_eq!(parse(&text).unwrap(), p);
    }

    #[test]
    fn negation_forms() {
        let e: Expr<String> = Expr::Neg(Box::new(Expr::Int(5)));
        assert_eq!(expr_to_string(&e, &ident), "-(5)");
        let e: Expr<String> = Expr::bin(BinOp::Mul, Expr::Var("x".into()), Expr::Int(-5));
        assert_eq!(expr_to_string(&e, &ident), "x * -5");
    }
}
