//! Recursive-descent parser for the listing syntax.
//!
//! A program is a list of definitions `f(x, y) { body }` followed by the
//! entry expression. `let` bodies extend as far right as possible, while
//! `ifz` branches take a single statement (group with `(...)` or `{...}`).

use super::ast::CmpOp;
use super::lexer::{tokenize, Pos, Tok, Token};
use super::surface::{BinOp, SExpr, SFormula, STerm, SurfaceDef, SurfaceProgram};
use super::ParseError;

pub fn parse(source: &str) -> Result<SurfaceProgram, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser { toks, i: 0 };
    p.program()
}

/// Parse a standalone expression (no definitions).
pub fn parse_expr(source: &str) -> Result<SExpr, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser { toks, i: 0 };
    let e = p.seq()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let j = (self.i + n).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.peek() == &t {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("{t}")))
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::new(self.pos(), format!("expected {wanted}, found {}", self.peek()))
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn program(&mut self) -> PResult<SurfaceProgram> {
        let mut defs: Vec<SurfaceDef> = Vec::new();
        while self.at_definition() {
            let pos = self.pos();
            let name = self.ident()?;
            if defs.iter().any(|d| d.name == name) {
                return Err(ParseError::new(pos, format!("function `{name}` defined twice")));
            }
            self.expect(Tok::LParen)?;
            let mut params = Vec::new();
            if !self.eat(&Tok::RParen) {
                loop {
                    params.push(self.ident()?);
                    if self.eat(&Tok::RParen) {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
            }
            self.expect(Tok::LBrace)?;
            let body = self.seq()?;
            self.expect(Tok::RBrace)?;
            defs.push(SurfaceDef { name, params, body, pos });
        }
        if self.peek() == &Tok::Eof {
            return Err(self.unexpected("entry expression"));
        }
        let entry = self.seq()?;
        self.expect(Tok::Eof)?;
        Ok(SurfaceProgram { defs, entry })
    }

    /// `IDENT ( ... ) {` starts a definition.
    fn at_definition(&self) -> bool {
        if !matches!(self.peek(), Tok::Ident(_)) || self.peek_at(1) != &Tok::LParen {
            return false;
        }
        let mut depth = 0usize;
        let mut n = 1;
        loop {
            match self.peek_at(n) {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        return self.peek_at(n + 1) == &Tok::LBrace;
                    }
                }
                Tok::Eof => return false,
                _ => {}
            }
            n += 1;
        }
    }

    fn starts_expr(t: &Tok) -> bool {
        matches!(
            t,
            Tok::Ident(_)
                | Tok::Int(_)
                | Tok::Let
                | Tok::Mkref
                | Tok::Ifz
                | Tok::Alias
                | Tok::Assert
                | Tok::LParen
                | Tok::LBrace
                | Tok::Star
                | Tok::Minus
                | Tok::Nondet
        )
    }

    fn seq(&mut self) -> PResult<SExpr> {
        let first = self.stmt()?;
        if self.eat(&Tok::Semi) && Self::starts_expr(self.peek()) {
            let rest = self.seq()?;
            return Ok(SExpr::Seq(Box::new(first), Box::new(rest)));
        }
        Ok(first)
    }

    fn stmt(&mut self) -> PResult<SExpr> {
        match self.peek().clone() {
            Tok::Let => {
                self.bump();
                let x = self.ident()?;
                self.expect(Tok::Eq)?;
                let rhs = self.stmt()?;
                self.expect(Tok::In)?;
                let body = self.seq()?;
                Ok(SExpr::Let(x, Box::new(rhs), Box::new(body)))
            }
            Tok::Ifz => {
                self.bump();
                let cond = self.cmp()?;
                self.expect(Tok::Then)?;
                let t = self.stmt()?;
                self.expect(Tok::Else)?;
                let e = self.stmt()?;
                Ok(SExpr::IfZero(Box::new(cond), Box::new(t), Box::new(e)))
            }
            Tok::Alias => {
                self.bump();
                self.expect(Tok::LParen)?;
                let x = self.ident()?;
                self.expect(Tok::Eq)?;
                let deref = self.eat(&Tok::Star);
                let y = self.ident()?;
                self.expect(Tok::RParen)?;
                Ok(if deref { SExpr::AliasDeref(x, y) } else { SExpr::Alias(x, y) })
            }
            Tok::Assert => {
                self.bump();
                self.expect(Tok::LParen)?;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(SExpr::Assert(f))
            }
            Tok::Ident(x) if self.peek_at(1) == &Tok::Assign => {
                self.bump();
                self.bump();
                let v = self.cmp()?;
                Ok(SExpr::Assign(x, Box::new(v)))
            }
            _ => self.cmp(),
        }
    }

    fn cmp(&mut self) -> PResult<SExpr> {
        let lhs = self.sum()?;
        if let Some(op) = cmp_op(self.peek()) {
            self.bump();
            let rhs = self.sum()?;
            return Ok(SExpr::Binary(BinOp::Cmp(op), Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn sum(&mut self) -> PResult<SExpr> {
        let mut lhs = self.prod()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.prod()?;
            lhs = SExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn prod(&mut self) -> PResult<SExpr> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Star) {
            let rhs = self.unary()?;
            lhs = SExpr::Binary(BinOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<SExpr> {
        match self.peek() {
            Tok::Star => {
                self.bump();
                Ok(SExpr::Deref(Box::new(self.unary()?)))
            }
            Tok::Mkref => {
                self.bump();
                Ok(SExpr::Mkref(Box::new(self.unary()?)))
            }
            Tok::Minus => {
                self.bump();
                match self.unary()? {
                    SExpr::Int(n) => Ok(SExpr::Int(n.wrapping_neg())),
                    e => Ok(SExpr::Binary(BinOp::Sub, Box::new(SExpr::Int(0)), Box::new(e))),
                }
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> PResult<SExpr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(SExpr::Int(n))
            }
            Tok::Nondet => {
                self.bump();
                Ok(SExpr::Nondet)
            }
            Tok::Ident(x) => {
                self.bump();
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.cmp()?);
                            if self.eat(&Tok::RParen) {
                                break;
                            }
                            self.expect(Tok::Comma)?;
                        }
                    }
                    Ok(SExpr::Call(x, args))
                } else {
                    Ok(SExpr::Var(x))
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.seq()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrace => {
                self.bump();
                let e = self.seq()?;
                self.expect(Tok::RBrace)?;
                Ok(e)
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn formula(&mut self) -> PResult<SFormula> {
        let lhs = self.f_or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.formula()?;
            return Ok(SFormula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn f_or(&mut self) -> PResult<SFormula> {
        let mut lhs = self.f_and()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.f_and()?;
            lhs = SFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn f_and(&mut self) -> PResult<SFormula> {
        let mut lhs = self.f_not()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.f_not()?;
            lhs = SFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn f_not(&mut self) -> PResult<SFormula> {
        if self.eat(&Tok::Bang) {
            return Ok(SFormula::Not(Box::new(self.f_not()?)));
        }
        self.f_atom()
    }

    fn f_atom(&mut self) -> PResult<SFormula> {
        match self.peek() {
            Tok::True => {
                self.bump();
                return Ok(SFormula::True);
            }
            Tok::False => {
                self.bump();
                return Ok(SFormula::False);
            }
            Tok::LParen => {
                // Either a parenthesized formula or a parenthesized term.
                let save = self.i;
                self.bump();
                if let Ok(f) = self.formula() {
                    if self.eat(&Tok::RParen)
                        && cmp_op(self.peek()).is_none()
                        && !matches!(self.peek(), Tok::Plus | Tok::Minus | Tok::Star)
                    {
                        return Ok(f);
                    }
                }
                self.i = save;
            }
            _ => {}
        }
        let lhs = self.t_sum()?;
        let Some(op) = cmp_op(self.peek()) else {
            return Err(self.unexpected("comparison operator"));
        };
        self.bump();
        let rhs = self.t_sum()?;
        Ok(SFormula::Cmp(op, lhs, rhs))
    }

    fn t_sum(&mut self) -> PResult<STerm> {
        let mut lhs = self.t_prod()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.t_prod()?;
                    lhs = STerm::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.t_prod()?;
                    lhs = STerm::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn t_prod(&mut self) -> PResult<STerm> {
        let mut lhs = self.t_unary()?;
        while self.peek() == &Tok::Star {
            let pos = self.pos();
            self.bump();
            let rhs = self.t_unary()?;
            lhs = match (lhs, rhs) {
                (STerm::Int(k), t) | (t, STerm::Int(k)) => STerm::Mul(k, Box::new(t)),
                _ => return Err(ParseError::new(pos, "non-linear multiplication in formula".into())),
            };
        }
        Ok(lhs)
    }

    fn t_unary(&mut self) -> PResult<STerm> {
        match self.peek().clone() {
            Tok::Star => {
                self.bump();
                Ok(STerm::Deref(Box::new(self.t_unary()?)))
            }
            Tok::Minus => {
                self.bump();
                match self.t_unary()? {
                    STerm::Int(n) => Ok(STerm::Int(n.wrapping_neg())),
                    t => Ok(STerm::Neg(Box::new(t))),
                }
            }
            Tok::Int(n) => {
                self.bump();
                Ok(STerm::Int(n))
            }
            Tok::Ident(x) => {
                self.bump();
                Ok(STerm::Var(x))
            }
            Tok::LParen => {
                self.bump();
                let t = self.t_sum()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => Err(self.unexpected("term")),
        }
    }
}

fn cmp_op(t: &Tok) -> Option<CmpOp> {
    Some(match t {
        Tok::Eq => CmpOp::Eq,
        Tok::Ne => CmpOp::Ne,
        Tok::Lt => CmpOp::Lt,
        Tok::Le => CmpOp::Le,
        Tok::Gt => CmpOp::Gt,
        Tok::Ge => CmpOp::Ge,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(x: &str) -> Box<SExpr> {
        Box::new(SExpr::Var(x.into()))
    }

    #[test]
    fn bare_variable() {
        let p = parse("x").unwrap();
        assert!(p.defs.is_empty());
        assert_eq!(p.entry, SExpr::Var("x".into()));
    }

    #[test]
    fn definition_then_entry() {
        let p = parse("mk(n){ mkref n } let p = mk(3) in p").unwrap();
        assert_eq!(p.defs.len(), 1);
        assert_eq!(p.defs[0].name, "mk");
        assert_eq!(p.defs[0].params, vec!["n".to_string()]);
        assert_eq!(p.defs[0].body, SExpr::Mkref(var("n")));
        assert!(matches!(p.entry, SExpr::Let(..)));
    }

    #[test]
    fn deref_inside_assert() {
        let p = parse("let x = mkref 4 in assert(*x = 4)").unwrap();
        let SExpr::Let(_, rhs, body) = p.entry else { panic!() };
        assert_eq!(*rhs, SExpr::Mkref(Box::new(SExpr::Int(4))));
        assert_eq!(
            *body,
            SExpr::Assert(SFormula::Cmp(CmpOp::Eq, STerm::Deref(Box::new(STerm::Var("x".into()))), STerm::Int(4)))
        );
    }

    #[test]
    fn let_body_is_greedy_and_ifz_branches_are_single() {
        let e = parse_expr("let a = 1 in ifz a then b := 1 else b := 2; c").unwrap();
        let SExpr::Let(_, _, body) = e else { panic!() };
        let SExpr::Seq(first, rest) = *body else { panic!("{body:?}") };
        assert!(matches!(*first, SExpr::IfZero(..)));
        assert_eq!(rest, var("c"));
    }

    #[test]
    fn trailing_semicolon_allowed() {
        let e = parse_expr("x := 1;").unwrap();
        assert!(matches!(e, SExpr::Assign(..)));
    }

    #[test]
    fn alias_forms() {
        assert_eq!(parse_expr("alias(x = y)").unwrap(), SExpr::Alias("x".into(), "y".into()));
        assert_eq!(parse_expr("alias(x = *y)").unwrap(), SExpr::AliasDeref("x".into(), "y".into()));
    }

    #[test]
    fn parenthesized_formulas_and_terms() {
        let e = parse_expr("assert((x + 1) * 2 = y && !(x < 0))").unwrap();
        let SExpr::Assert(SFormula::And(a, b)) = e else { panic!() };
        assert!(matches!(*a, SFormula::Cmp(CmpOp::Eq, STerm::Mul(2, _), _)));
        assert!(matches!(*b, SFormula::Not(_)));
    }

    #[test]
    fn nonlinear_formula_rejected() {
        assert!(parse_expr("assert(x * y = 0)").is_err());
    }

    #[test]
    fn duplicate_definitions_rejected() {
        let err = parse("f(x) { x } f(y) { y } 0").unwrap_err();
        assert!(err.message.contains("defined twice"));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse("let x = in x").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 9 });
    }
}
