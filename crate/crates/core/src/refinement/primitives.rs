//! Built-in operations with fixed simple types and return refinements.
//!
//! Comparisons produce `0` when they hold and `1` otherwise, so that
//! `ifz (x < y)` takes the first branch exactly when `x < y`.

use num::{BigInt, Zero};

use crate::frontend::ast::{CmpOp, Formula, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimKind {
    Add,
    Sub,
    /// Multiplication; linear only, so one operand must be a known constant.
    Mul,
    Cmp(CmpOp),
    /// Unconstrained integer input.
    Nondet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Primitive {
    pub name: &'static str,
    pub kind: PrimKind,
}

const REGISTRY: &[Primitive] = &[
    Primitive { name: "+", kind: PrimKind::Add },
    Primitive { name: "-", kind: PrimKind::Sub },
    Primitive { name: "*", kind: PrimKind::Mul },
    Primitive { name: "=", kind: PrimKind::Cmp(CmpOp::Eq) },
    Primitive { name: "!=", kind: PrimKind::Cmp(CmpOp::Ne) },
    Primitive { name: "<", kind: PrimKind::Cmp(CmpOp::Lt) },
    Primitive { name: "<=", kind: PrimKind::Cmp(CmpOp::Le) },
    Primitive { name: ">", kind: PrimKind::Cmp(CmpOp::Gt) },
    Primitive { name: ">=", kind: PrimKind::Cmp(CmpOp::Ge) },
    Primitive { name: "nondet", kind: PrimKind::Nondet },
];

pub fn primitive_registry() -> &'static [Primitive] {
    REGISTRY
}

pub fn lookup(name: &str) -> Option<&'static Primitive> {
    REGISTRY.iter().find(|p| p.name == name)
}

/// Binary operators printed between their operands.
pub fn is_infix(name: &str) -> bool {
    lookup(name).is_some_and(|p| p.kind != PrimKind::Nondet)
}

impl Primitive {
    /// Every primitive takes and returns integers.
    pub fn arity(&self) -> usize {
        match self.kind {
            PrimKind::Nondet => 0,
            _ => 2,
        }
    }

    /// Refinement of the result `ν` in terms of the argument terms. Known
    /// constant arguments should be passed as literals; `None` means the use
    /// is outside the linear fragment.
    pub fn refinement(&self, args: &[Term]) -> Option<Formula> {
        let nu = || Term::Nu;
        Some(match self.kind {
            PrimKind::Nondet => Formula::True,
            PrimKind::Add => Formula::eq(nu(), Term::plus(args[0].clone(), args[1].clone())),
            PrimKind::Sub => Formula::eq(nu(), Term::minus(args[0].clone(), args[1].clone())),
            PrimKind::Mul => {
                let prod = match (&args[0], &args[1]) {
                    (Term::Int(k), t) | (t, Term::Int(k)) => Term::Mul(*k, Box::new(t.clone())),
                    _ => return None,
                };
                Formula::eq(nu(), prod)
            }
            PrimKind::Cmp(op) => {
                let holds = Formula::cmp(op, args[0].clone(), args[1].clone());
                Formula::or(
                    Formula::and(Formula::eq(nu(), Term::Int(0)), holds.clone()),
                    Formula::and(Formula::eq(nu(), Term::Int(1)), Formula::negate(holds)),
                )
            }
        })
    }

    /// Concrete semantics; `nondet` is drawn by the interpreter instead.
    pub fn eval(&self, args: &[BigInt]) -> Option<BigInt> {
        Some(match self.kind {
            PrimKind::Nondet => return None,
            PrimKind::Add => &args[0] + &args[1],
            PrimKind::Sub => &args[0] - &args[1],
            PrimKind::Mul => &args[0] * &args[1],
            PrimKind::Cmp(op) => {
                let (a, b) = (&args[0], &args[1]);
                let holds = match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                };
                if holds {
                    BigInt::zero()
                } else {
                    BigInt::from(1)
                }
            }
        })
    }
}
