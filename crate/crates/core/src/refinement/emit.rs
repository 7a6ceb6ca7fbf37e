//! SMT-LIB2 rendering of a Horn system.

use std::fmt::Write;

use crate::frontend::ast::{CmpOp, Formula, Term};
use crate::smtlib::{self, symbol};

use super::chc::{Atom, ChcSystem, Head, HornClause, NU};

fn term(t: &Term) -> String {
    match t {
        Term::Var(v) => symbol(v),
        Term::Int(n) => smtlib::int(&(*n).into()),
        Term::Nu => symbol(NU),
        Term::Add(a, b) => format!("(+ {} {})", term(a), term(b)),
        Term::Sub(a, b) => format!("(- {} {})", term(a), term(b)),
        Term::Mul(k, t) => format!("(* {} {})", smtlib::int(&(*k).into()), term(t)),
        Term::Neg(t) => format!("(- {})", term(t)),
    }
}

pub(crate) fn formula(f: &Formula) -> String {
    match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Cmp(CmpOp::Ne, a, b) => format!("(not (= {} {}))", term(a), term(b)),
        Formula::Cmp(op, a, b) => {
            let op = match op {
                CmpOp::Eq | CmpOp::Ne => "=",
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Gt => ">",
                CmpOp::Ge => ">=",
            };
            format!("({op} {} {})", term(a), term(b))
        }
        Formula::Not(g) => format!("(not {})", formula(g)),
        Formula::And(a, b) => format!("(and {} {})", formula(a), formula(b)),
        Formula::Or(a, b) => format!("(or {} {})", formula(a), formula(b)),
        Formula::Implies(a, b) => format!("(=> {} {})", formula(a), formula(b)),
    }
}

fn atom(sys: &ChcSystem, a: &Atom) -> String {
    let name = symbol(&sys.preds[a.pred].name);
    if a.args.is_empty() {
        return name;
    }
    let args: Vec<String> = a.args.iter().map(term).collect();
    format!("({name} {})", args.join(" "))
}

/// One clause as `(=> body head)`, quantified over its variables.
pub fn clause(sys: &ChcSystem, c: &HornClause) -> String {
    let mut body: Vec<String> = c.body_atoms.iter().map(|a| atom(sys, a)).collect();
    body.extend(c.body.iter().map(formula));
    let body = match body.len() {
        0 => "true".to_string(),
        1 => body.pop().unwrap_or_default(),
        _ => format!("(and {})", body.join(" ")),
    };
    let head = match &c.head {
        Head::Atom(a) => atom(sys, a),
        Head::False => "false".to_string(),
    };
    let imp = format!("(=> {body} {head})");
    let vars = c.variables();
    if vars.is_empty() {
        imp
    } else {
        let decls: Vec<String> = vars.iter().map(|v| format!("({} Int)", symbol(v))).collect();
        format!("(forall ({}) {imp})", decls.join(" "))
    }
}

/// The full HORN script. The text depends only on the system, so equal
/// systems give identical bytes.
pub fn emit_smtlib2_horn(sys: &ChcSystem) -> String {
    let mut out = String::from("(set-logic HORN)\n");
    for p in &sys.preds {
        let sorts = vec!["Int"; p.arity].join(" ");
        let _ = writeln!(out, "(declare-fun {} ({sorts}) Bool)", symbol(&p.name));
    }
    for c in &sys.clauses {
        let _ = writeln!(out, "(assert {})", clause(sys, c));
    }
    out.push_str("(check-sat)\n");
    out
}
