//! Small SMT-LIB2 helpers: symbol quoting, numerals, and an S-expression
//! reader for solver output.

use num::{BigInt, BigRational, One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(l) => Some(l),
            Sexp::Atom(_) => None,
        }
    }
}

/// Read every top-level S-expression in `text`. Unbalanced trailing input
/// is dropped rather than reported, since solver output is read after the
/// fact and may be cut short by a kill.
pub fn parse_all(text: &str) -> Vec<Sexp> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' => stack.push(Vec::new()),
            ')' => {
                if stack.len() > 1 {
                    let done = stack.pop().unwrap_or_default();
                    if let Some(top) = stack.last_mut() {
                        top.push(Sexp::List(done));
                    }
                }
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '"' | '|' => {
                let mut s = String::new();
                for d in chars.by_ref() {
                    if d == c {
                        break;
                    }
                    s.push(d);
                }
                if c == '"' {
                    s = format!("\"{s}\"");
                }
                if let Some(top) = stack.last_mut() {
                    top.push(Sexp::Atom(s));
                }
            }
            c if c.is_whitespace() => {}
            c => {
                let mut s = String::from(c);
                while let Some(&d) = chars.peek() {
                    if d.is_whitespace() || d == '(' || d == ')' {
                        break;
                    }
                    s.push(d);
                    chars.next();
                }
                if let Some(top) = stack.last_mut() {
                    top.push(Sexp::Atom(s));
                }
            }
        }
    }
    stack.into_iter().next().unwrap_or_default()
}

const RESERVED: &[&str] = &[
    "and", "or", "not", "xor", "ite", "let", "forall", "exists", "true", "false", "distinct", "assert", "par", "as",
    "Int", "Real", "Bool", "div", "mod", "abs", "to_real", "to_int",
];

/// Render a name as an SMT-LIB2 symbol, quoting when needed.
pub fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&name);
    if simple {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

pub fn int(n: &BigInt) -> String {
    if n.is_negative() {
        format!("(- {})", -n)
    } else {
        n.to_string()
    }
}

/// A rational as a Real-sorted term.
pub fn real(q: &BigRational) -> String {
    let body = if q.denom().is_one() {
        format!("{}.0", q.numer().abs())
    } else {
        format!("(/ {}.0 {}.0)", q.numer().abs(), q.denom())
    };
    if q.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

/// Exact value of a Real or Int term as printed in a model. Decimals are
/// taken literally; approximate decimals (ending in `?`) are refused.
pub fn rational_value(s: &Sexp) -> Option<BigRational> {
    match s {
        Sexp::Atom(a) => decimal(a),
        Sexp::List(items) => {
            let head = items.first()?.atom()?;
            match (head, items.len()) {
                ("-", 2) => Some(-rational_value(&items[1])?),
                ("-", 3) => Some(rational_value(&items[1])? - rational_value(&items[2])?),
                ("+", _) => items[1..].iter().map(rational_value).sum(),
                ("/", 3) => {
                    let d = rational_value(&items[2])?;
                    if d.is_zero() {
                        return None;
                    }
                    Some(rational_value(&items[1])? / d)
                }
                ("to_real", 2) => rational_value(&items[1]),
                _ => None,
            }
        }
    }
}

fn decimal(a: &str) -> Option<BigRational> {
    if a.ends_with('?') {
        return None;
    }
    match a.split_once('.') {
        None => a.parse::<BigInt>().ok().map(BigRational::from_integer),
        Some((whole, frac)) => {
            if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
                return None;
            }
            let w: BigInt = whole.parse().ok()?;
            let f: BigInt = frac.parse().ok()?;
            let scale = num::pow(BigInt::from(10), frac.len());
            Some(BigRational::new(w * &scale + f, scale))
        }
    }
}

/// Values of every `(define-fun name () Sort value)` in a model.
pub fn model_values(text: &str) -> Vec<(String, Sexp)> {
    fn walk(s: &Sexp, out: &mut Vec<(String, Sexp)>) {
        if let Sexp::List(items) = s {
            if items.len() == 5 && items[0].atom() == Some("define-fun") {
                if let (Some(name), Some(args)) = (items[1].atom(), items[2].list()) {
                    if args.is_empty() {
                        out.push((name.to_string(), items[4].clone()));
                        return;
                    }
                }
            }
            for i in items {
                walk(i, out);
            }
        }
    }
    let mut out = Vec::new();
    for s in parse_all(text) {
        walk(&s, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn reads_z3_model() {
        let text = "sat\n(\n  (define-fun a () Real\n    (/ 1.0 2.0))\n  (define-fun b () Real 1.0)\n  \
                    (define-fun |t$1| () Real 0.25)\n  (define-fun c0 () Bool true)\n)\n";
        let vals: Vec<_> =
            model_values(text).into_iter().filter_map(|(n, v)| rational_value(&v).map(|v| (n, v))).collect();
        assert_eq!(vals, vec![("a".to_string(), q(1, 2)), ("b".to_string(), q(1, 1)), ("t$1".to_string(), q(1, 4))]);
    }

    #[test]
    fn approximate_decimals_are_refused() {
        assert_eq!(decimal("0.333?"), None);
        assert_eq!(decimal("-2"), Some(q(-2, 1)));
    }

    #[test]
    fn quoting() {
        assert_eq!(symbol("phi_x_0_p1"), "phi_x_0_p1");
        assert_eq!(symbol("t$3"), "|t$3|");
        assert_eq!(symbol("and"), "|and|");
        assert_eq!(real(&q(1, 3)), "(/ 1.0 3.0)");
        assert_eq!(int(&BigInt::from(-4)), "(- 4)");
    }

    #[test]
    fn real_rendering_round_trips() {
        for (n, d) in [(0, 1), (1, 1), (3, 7), (-5, 2)] {
            let text = real(&q(n, d));
            let s = parse_all(&text).pop().unwrap();
            assert_eq!(rational_value(&s), Some(q(n, d)));
        }
    }
}
