//! The permissive surface tree produced by the parser.

use super::ast::CmpOp;
use super::lexer::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Cmp(CmpOp),
}

impl BinOp {
    /// Name of the primitive implementing this operator.
    pub fn primitive(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Cmp(CmpOp::Eq) => "=",
            BinOp::Cmp(CmpOp::Ne) => "!=",
            BinOp::Cmp(CmpOp::Lt) => "<",
            BinOp::Cmp(CmpOp::Le) => "<=",
            BinOp::Cmp(CmpOp::Gt) => ">",
            BinOp::Cmp(CmpOp::Ge) => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Var(String),
    Int(i64),
    Nondet,
    Mkref(Box<SExpr>),
    Deref(Box<SExpr>),
    Call(String, Vec<SExpr>),
    Binary(BinOp, Box<SExpr>, Box<SExpr>),
    Let(String, Box<SExpr>, Box<SExpr>),
    IfZero(Box<SExpr>, Box<SExpr>, Box<SExpr>),
    Assign(String, Box<SExpr>),
    Alias(String, String),
    AliasDeref(String, String),
    Assert(SFormula),
    Seq(Box<SExpr>, Box<SExpr>),
}

/// Terms inside `assert`, which may dereference variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum STerm {
    Var(String),
    Int(i64),
    Deref(Box<STerm>),
    Add(Box<STerm>, Box<STerm>),
    Sub(Box<STerm>, Box<STerm>),
    Mul(i64, Box<STerm>),
    Neg(Box<STerm>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SFormula {
    True,
    False,
    Cmp(CmpOp, STerm, STerm),
    Not(Box<SFormula>),
    And(Box<SFormula>, Box<SFormula>),
    Or(Box<SFormula>, Box<SFormula>),
    Implies(Box<SFormula>, Box<SFormula>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: SExpr,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceProgram {
    pub defs: Vec<SurfaceDef>,
    pub entry: SExpr,
}
