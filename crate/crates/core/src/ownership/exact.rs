//! Exact rational simplex over sparse rows, used both as an in-process
//! ownership solver and as an oracle for solver models.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigRational, One, Signed, Zero};

use super::{OwnershipAssignment, OwnershipConstraint, OwnershipError, OwnershipSystem, OwnershipTerm};

type Q = BigRational;
type Row = BTreeMap<usize, Q>;

/// `rows · x = rhs`, `x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct Lp {
    pub ncols: usize,
    pub rows: Vec<Row>,
    pub rhs: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { value: Q, x: Vec<Q> },
}

impl Lp {
    pub fn column(&mut self) -> usize {
        self.ncols += 1;
        self.ncols - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Q)>, rhs: Q) {
        let mut row = Row::new();
        for (c, v) in coeffs {
            let e = row.entry(c).or_insert_with(Q::zero);
            *e += v;
        }
        row.retain(|_, v| !v.is_zero());
        self.rows.push(row);
        self.rhs.push(rhs);
    }
}

#[derive(Clone)]
struct Tableau {
    rows: Vec<Row>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    obj: Row,
    value: Q,
}

fn axpy(target: &mut Row, factor: &Q, source: &Row) {
    for (j, v) in source {
        let e = target.entry(*j).or_insert_with(Q::zero);
        *e -= factor * v;
        if e.is_zero() {
            target.remove(j);
        }
    }
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][&c].clone();
        if !p.is_one() {
            for v in self.rows[r].values_mut() {
                *v /= &p;
            }
            self.rhs[r] /= &p;
        }
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(a) = self.rows[i].get(&c).cloned() {
                axpy(&mut self.rows[i], &a, &prow);
                self.rhs[i] -= &a * &prhs;
            }
        }
        if let Some(d) = self.obj.get(&c).cloned() {
            axpy(&mut self.obj, &d, &prow);
            self.value += &d * &prhs;
        }
        self.basis[r] = c;
    }

    /// Objective expressed over the non-basic columns.
    fn set_objective(&mut self, c: &Row) {
        self.obj = c.clone();
        self.value = Q::zero();
        for i in 0..self.rows.len() {
            if let Some(cb) = c.get(&self.basis[i]).cloned() {
                let row = self.rows[i].clone();
                axpy(&mut self.obj, &cb, &row);
                self.value += &cb * &self.rhs[i];
            }
        }
    }

    /// Bland's rule: smallest improving column, ties in the ratio test
    /// broken by smallest basic column.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let entering = self.obj.iter().find(|(j, v)| **j < allowed && v.is_positive()).map(|(j, _)| *j);
            let Some(c) = entering else { return true };
            let mut best: Option<(Q, usize, usize)> = None;
            for i in 0..self.rows.len() {
                if let Some(a) = self.rows[i].get(&c) {
                    if a.is_positive() {
                        let ratio = &self.rhs[i] / a;
                        let better = match &best {
                            None => true,
                            Some((b, _, bb)) => ratio < *b || (ratio == *b && self.basis[i] < *bb),
                        };
                        if better {
                            best = Some((ratio, i, self.basis[i]));
                        }
                    }
                }
            }
            match best {
                Some((_, r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// A basic feasible tableau for `lp` after phase one, or `None` if
/// infeasible.
fn feasible(lp: &Lp) -> Option<Tableau> {
    let mut rows = lp.rows.clone();
    let mut rhs = lp.rhs.clone();
    for (row, b) in rows.iter_mut().zip(rhs.iter_mut()) {
        if b.is_negative() {
            for v in row.values_mut() {
                *v = -v.clone();
            }
            *b = -b.clone();
        }
    }
    // A column can start basic if it occurs in exactly one row, positively.
    let mut occurs: BTreeMap<usize, usize> = BTreeMap::new();
    for row in &rows {
        for j in row.keys() {
            *occurs.entry(*j).or_default() += 1;
        }
    }
    let n = lp.ncols;
    let mut next = n;
    let mut basis = Vec::with_capacity(rows.len());
    let mut used = BTreeSet::new();
    let mut phase1 = Row::new();
    for (row, b) in rows.iter_mut().zip(&rhs) {
        let unique = |row: &Row, positive: bool| {
            row.iter()
                .find(|(j, v)| occurs[*j] == 1 && v.is_positive() == positive && !used.contains(*j))
                .map(|(j, _)| *j)
        };
        let mut own = unique(row, true);
        // A homogeneous row can be negated to make a negative column usable.
        if own.is_none() && b.is_zero() {
            if let Some(j) = unique(row, false) {
                for v in row.values_mut() {
                    *v = -v.clone();
                }
                own = Some(j);
            }
        }
        match own {
            Some(j) => {
                used.insert(j);
                basis.push(j);
            }
            None => {
                row.insert(next, Q::one());
                phase1.insert(next, -Q::one());
                basis.push(next);
                next += 1;
            }
        }
    }
    let mut t = Tableau { rows, rhs, basis, obj: Row::new(), value: Q::zero() };
    for i in 0..t.rows.len() {
        let c = t.basis[i];
        if c < n && !t.rows[i][&c].is_one() {
            t.pivot(i, c);
        }
    }
    if next > n {
        t.set_objective(&phase1);
        t.optimize(next);
        if t.value.is_negative() {
            return None;
        }
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= n {
                let swap = t.rows[i].keys().find(|j| **j < n).copied();
                match swap {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.remove(i);
                        t.rhs.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for row in t.rows.iter_mut() {
            row.retain(|j, _| *j < n);
        }
    }
    Some(t)
}

fn optimum(mut t: Tableau, n: usize, objective: &Row) -> LpOutcome {
    t.set_objective(objective);
    if !t.optimize(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (i, b) in t.basis.iter().enumerate() {
        x[*b] = t.rhs[i].clone();
    }
    LpOutcome::Optimal { value: t.value, x }
}

/// Maximize `objective · x` subject to `lp`.
pub fn maximize(lp: &Lp, objective: &Row) -> LpOutcome {
    match feasible(lp) {
        Some(t) => optimum(t, lp.ncols, objective),
        None => LpOutcome::Infeasible,
    }
}

/// Linear part of an ownership system as an LP whose first columns are the
/// ownership variables; `zero` lists variables pinned to 0.
pub fn ownership_lp(sys: &OwnershipSystem, zero: &BTreeSet<usize>) -> Lp {
    let n = sys.names.len();
    let mut lp = Lp { ncols: n, ..Default::default() };
    let one = Q::one;
    for v in 0..n {
        let u = lp.column();
        lp.add_row(vec![(v, one()), (u, one())], one());
    }
    for v in zero {
        lp.add_row(vec![(*v, one())], Q::zero());
    }
    // Σ sign·term (+ optional slack) = 0, constants moved to the right.
    let emit = |lp: &mut Lp, terms: &[(&OwnershipTerm, i32)], slack: bool| {
        let mut coeffs = Vec::new();
        let mut rhs = Q::zero();
        for (t, s) in terms {
            let s = Q::from_integer((*s).into());
            match t {
                OwnershipTerm::Var(v) => coeffs.push((*v, s)),
                OwnershipTerm::Const(c) => rhs -= s * c,
            }
        }
        if slack {
            let c = lp.column();
            coeffs.push((c, -one()));
        }
        lp.add_row(coeffs, rhs);
    };
    for c in &sys.constraints {
        match c {
            OwnershipConstraint::Eq(a, b) => emit(&mut lp, &[(a, 1), (b, -1)], false),
            OwnershipConstraint::Sum(a, b, c) => emit(&mut lp, &[(a, 1), (b, -1), (c, -1)], false),
            OwnershipConstraint::Geq(a, b) => emit(&mut lp, &[(a, 1), (b, -1)], true),
            OwnershipConstraint::ZeroImplies(..) => {}
        }
    }
    lp
}

/// Largest value of variable `v` with the variables in `zero` pinned to 0,
/// ignoring zero-implication links. `None` if infeasible.
pub fn max_of(sys: &OwnershipSystem, zero: &BTreeSet<usize>, v: usize) -> Option<Q> {
    let lp = ownership_lp(sys, zero);
    match maximize(&lp, &Row::from([(v, Q::one())])) {
        LpOutcome::Optimal { value, .. } => Some(value),
        _ => None,
    }
}

/// Maximum-support solution. The linear part is convex, so the average of
/// solutions that are positive on individual variables is positive on all
/// of them; zero-implication links are honored by pinning the consequent
/// whenever the antecedent is zero in every solution, until a fixpoint.
pub fn solve(sys: &OwnershipSystem) -> Result<OwnershipAssignment, OwnershipError> {
    let n = sys.names.len();
    let mut zero: BTreeSet<usize> = BTreeSet::new();
    loop {
        let lp = ownership_lp(sys, &zero);
        let Some(start) = feasible(&lp) else {
            return Err(OwnershipError::Infeasible { core: Vec::new() });
        };
        let mut sols = Vec::new();
        let mut positive = BTreeSet::new();
        let mut objective: Row = (0..n).map(|v| (v, Q::one())).collect();
        loop {
            match optimum(start.clone(), lp.ncols, &objective) {
                LpOutcome::Optimal { value, x } => {
                    if !sols.is_empty() && value.is_zero() {
                        break;
                    }
                    positive.extend((0..n).filter(|v| x[*v].is_positive()));
                    sols.push(x);
                }
                LpOutcome::Infeasible | LpOutcome::Unbounded => {
                    return Err(OwnershipError::Infeasible { core: Vec::new() });
                }
            }
            objective = (0..n).filter(|v| !positive.contains(v)).map(|v| (v, Q::one())).collect();
            if objective.is_empty() {
                break;
            }
        }
        let forced: Vec<usize> = sys
            .constraints
            .iter()
            .filter_map(|c| match c {
                OwnershipConstraint::ZeroImplies(a, b) if !positive.contains(a) && positive.contains(b) => Some(*b),
                _ => None,
            })
            .collect();
        if forced.is_empty() {
            let k = Q::from_integer(sols.len().into());
            let values = (0..n).map(|v| sols.iter().map(|s| s[v].clone()).sum::<Q>() / &k).collect();
            return Ok(OwnershipAssignment { values });
        }
        zero.extend(forced);
    }
}

/// Variables that are positive in some solution.
pub fn max_support(sys: &OwnershipSystem) -> Result<BTreeSet<usize>, OwnershipError> {
    let a = solve(sys)?;
    Ok((0..sys.names.len()).filter(|v| !a.is_zero(*v)).collect())
}
