//! Constrained Horn clauses over the predicate templates.

use std::collections::BTreeSet;

use crate::frontend::ast::{Formula, Term, Var};
use crate::typing::{PredId, PredicateSymbol};

/// Name of the value variable `ν` in clauses.
pub const NU: &str = "$nu";

/// Name of the `i`-th context parameter, counting from 1.
pub fn context_param(i: usize) -> Var {
    format!("$ctx{i}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub pred: PredId,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Head {
    Atom(Atom),
    /// Goal clause.
    False,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HornClause {
    pub body_atoms: Vec<Atom>,
    /// Conjunction.
    pub body: Vec<Formula>,
    pub head: Head,
}

impl HornClause {
    /// Every logical variable, sorted.
    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = Vec::new();
        let atoms = self.body_atoms.iter().chain(match &self.head {
            Head::Atom(a) => Some(a),
            Head::False => None,
        });
        for a in atoms {
            for t in &a.args {
                t.free_vars(&mut out);
                if t.mentions_nu() {
                    out.push(NU.into());
                }
            }
        }
        for f in &self.body {
            out.extend(f.free_vars());
            if f.mentions_nu() {
                out.push(NU.into());
            }
        }
        out.into_iter().collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChcSystem {
    pub preds: Vec<PredicateSymbol>,
    pub clauses: Vec<HornClause>,
    /// Predicates made trivial by a zero ownership.
    pub forced: BTreeSet<PredId>,
}

impl ChcSystem {
    pub fn goal_count(&self) -> usize {
        self.clauses.iter().filter(|c| c.head == Head::False).count()
    }

    /// Arity and declaration check for every atom.
    pub fn well_formed(&self) -> Result<(), String> {
        for (i, c) in self.clauses.iter().enumerate() {
            let heads = match &c.head {
                Head::Atom(a) => Some(a),
                Head::False => None,
            };
            for a in c.body_atoms.iter().chain(heads) {
                let Some(p) = self.preds.get(a.pred) else {
                    return Err(format!("clause {i} uses undeclared predicate {}", a.pred));
                };
                if p.arity != a.args.len() {
                    return Err(format!(
                        "clause {i}: {} has arity {} but gets {} arguments",
                        p.name,
                        p.arity,
                        a.args.len()
                    ));
                }
            }
        }
        Ok(())
    }
}
