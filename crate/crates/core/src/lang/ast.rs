//! Surface syntax tree.
//!
//! Expressions and conditions are generic over how variables are referenced:
//! the parser produces names, lowering rewrites them to slot indices.

use num_rational::Ratio;
use std::fmt;

/// Bias of a coin: the probability of outcome 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Prob(Ratio<u64>);

impl Prob {
    /// Builds `num/den`; `None` unless `0 < num/den < 1`.
    pub fn new(num: u64, den: u64) -> Option<Prob> {
        if den == 0 || num == 0 || num >= den {
            return None;
        }
        Some(Prob(Ratio::new(num, den)))
    }

    pub fn half() -> Prob {
        Prob(Ratio::new(1, 2))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    /// Probability of the complementary outcome 1.
    pub fn complement(&self) -> Prob {
        Prob(Ratio::from_integer(1) - self.0)
    }

    pub fn as_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr<V> {
    Int(i64),
    Var(V),
    Neg(Box<Expr<V>>),
    Bin(BinOp, Box<Expr<V>>, Box<Expr<V>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cond<V> {
    True,
    False,
    Cmp(CmpOp, Expr<V>, Expr<V>),
    Not(Box<Cond<V>>),
    And(Box<Cond<V>>, Box<Cond<V>>),
    Or(Box<Cond<V>>, Box<Cond<V>>),
}

impl<V> Expr<V> {
    pub fn bin(op: BinOp, a: Expr<V>, b: Expr<V>) -> Expr<V> {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Evaluates with checked arithmetic; `None` on overflow.
    pub fn eval(&self, lookup: &impl Fn(&V) -> i64) -> Option<i64> {
        match self {
            Expr::Int(n) => Some(*n),
            Expr::Var(v) => Some(lookup(v)),
            Expr::Neg(e) => e.eval(lookup)?.checked_neg(),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(lookup)?, b.eval(lookup)?);
                match op {
                    BinOp::Add => a.checked_add(b),
                    BinOp::Sub => a.checked_sub(b),
                    BinOp::Mul => a.checked_mul(b),
                }
            }
        }
    }

    pub fn map_vars<W>(&self, f: &mut impl FnMut(&V) -> W) -> Expr<W> {
        match self {
            Expr::Int(n) => Expr::Int(*n),
            Expr::Var(v) => Expr::Var(f(v)),
            Expr::Neg(e) => Expr::Neg(Box::new(e.map_vars(f))),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.map_vars(f), b.map_vars(f)),
        }
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(&V)) {
        match self {
            Expr::Int(_) => {}
            Expr::Var(v) => f(v),
            Expr::Neg(e) => e.visit_vars(f),
            Expr::Bin(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }
}

impl<V> Cond<V> {
    pub fn not(c: Cond<V>) -> Cond<V> {
        Cond::Not(Box::new(c))
    }

    pub fn and(a: Cond<V>, b: Cond<V>) -> Cond<V> {
        Cond::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Cond<V>, b: Cond<V>) -> Cond<V> {
        Cond::Or(Box::new(a), Box::new(b))
    }

    /// `None` when an operand overflows.
    pub fn eval(&self, lookup: &impl Fn(&V) -> i64) -> Option<bool> {
        Some(match self {
            Cond::True => true,
            Cond::False => false,
            Cond::Cmp(op, a, b) => op.holds(a.eval(lookup)?, b.eval(lookup)?),
            Cond::Not(c) => !c.eval(lookup)?,
            Cond::And(a, b) => a.eval(lookup)? && b.eval(lookup)?,
            Cond::Or(a, b) => a.eval(lookup)? || b.eval(lookup)?,
        })
    }

    pub fn map_vars<W>(&self, f: &mut impl FnMut(&V) -> W) -> Cond<W> {
        match self {
            Cond::True => Cond::True,
            Cond::False => Cond::False,
            Cond::Cmp(op, a, b) => Cond::Cmp(*op, a.map_vars(f), b.map_vars(f)),
            Cond::Not(c) => Cond::not(c.map_vars(f)),
            Cond::And(a, b) => Cond::and(a.map_vars(f), b.map_vars(f)),
            Cond::Or(a, b) => Cond::or(a.map_vars(f), b.map_vars(f)),
        }
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(&V)) {
        match self {
            Cond::True | Cond::False => {}
            Cond::Cmp(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Cond::Not(c) => c.visit_vars(f),
            Cond::And(a, b) | Cond::Or(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: String,
    pub lower: i64,
    pub upper: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub lower: i64,
    pub upper: i64,
    pub init: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Assign { target: String, value: Expr<String> },
    Coin { target: String, prob: Prob },
    Nondet { target: String },
    If { cond: Cond<String>, then_branch: Vec<Stmt>, else_branch: Option<Vec<Stmt>> },
    While { cond: Cond<String>, body: Vec<Stmt> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceProgram {
    pub name: String,
    pub params: Vec<ParamDecl>,
    pub vars: Vec<VarDecl>,
    pub body: Vec<Stmt>,
}
