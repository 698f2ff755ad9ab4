use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::ast::{Condition, Expr, Identity, Meta, ParamDecl};
use super::canon::canonicalize;
use super::lexer::{tokenize, Tok, Token};
use super::lin::LinForm;
use super::DslError;

const RESERVED: &[&str] = &["F", "L", "Fk", "H", "C", "Sum", "max"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// First position at which each identifier was seen.
    seen: BTreeMap<String, (usize, usize)>,
}

impl Parser {
    fn new(src: &str) -> Result<Self, DslError> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
            seen: BTreeMap::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> DslError {
        let t = &self.toks[self.pos];
        DslError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> DslError {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), DslError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn small_int(&self, s: &str) -> Result<i64, DslError> {
        s.parse::<i64>()
            .map_err(|_| self.error(format!("integer `{s}` is too large here")))
    }

    fn variable(&mut self) -> Result<String, DslError> {
        let t = self.bump();
        match t.tok {
            Tok::Ident(name) if !RESERVED.contains(&name.as_str()) => {
                self.seen.entry(name.clone()).or_insert((t.line, t.col));
                Ok(name)
            }
            Tok::Ident(name) => {
                self.pos -= 1;
                Err(self.error(format!("`{name}` is reserved and cannot be a variable")))
            }
            _ => {
                self.pos -= 1;
                Err(self.unexpected("a variable"))
            }
        }
    }

    // ---- linear forms ----

    fn lin(&mut self) -> Result<LinForm, DslError> {
        let mut acc = LinForm::default();
        let mut sign = 1;
        if self.eat(&Tok::Minus) {
            sign = -1;
        } else {
            self.eat(&Tok::Plus);
        }
        loop {
            let t = self.lin_term()?;
            acc = acc.add(&t.scale(sign));
            if self.eat(&Tok::Plus) {
                sign = 1;
            } else if self.eat(&Tok::Minus) {
                sign = -1;
            } else {
                return Ok(acc);
            }
        }
    }

    fn lin_term(&mut self) -> Result<LinForm, DslError> {
        let (mut acc, mut was_int) = self.lin_factor()?;
        loop {
            let juxtaposed = was_int && matches!(self.peek(), Tok::Ident(_) | Tok::LParen);
            if self.eat(&Tok::Star) || juxtaposed {
                let (f, is_int) = self.lin_factor()?;
                acc = acc.mul(&f);
                was_int = is_int;
            } else {
                return Ok(acc);
            }
        }
    }

    fn lin_factor(&mut self) -> Result<(LinForm, bool), DslError> {
        match self.peek().clone() {
            Tok::Int(s) => {
                let v = self.small_int(&s)?;
                self.bump();
                Ok((LinForm::constant(v), true))
            }
            Tok::Ident(_) => {
                let v = self.variable()?;
                Ok((LinForm::var(&v), false))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.lin()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok((inner, false))
            }
            _ => Err(self.unexpected("an index term")),
        }
    }

    fn signed_int(&mut self) -> Result<i64, DslError> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Int(s) => {
                let v = self.small_int(&s)?;
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(&Tok::Plus) {
                terms.push(self.term()?);
            } else if self.eat(&Tok::Minus) {
                terms.push(Expr::Neg(Box::new(self.term()?)));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut factors = vec![self.unary()?];
        while self.eat(&Tok::Star) {
            factors.push(self.unary()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Mul(factors)
        })
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.base()?;
        if self.eat(&Tok::Caret) {
            let e = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<LinForm, DslError> {
        match self.peek().clone() {
            Tok::Int(s) => {
                let v = self.small_int(&s)?;
                self.bump();
                Ok(LinForm::constant(v))
            }
            Tok::Ident(_) => Ok(LinForm::var(&self.variable()?)),
            Tok::LParen => {
                self.bump();
                let l = self.lin()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(l)
            }
            _ => Err(self.unexpected("an exponent")),
        }
    }

    fn bracketed_index(&mut self) -> Result<LinForm, DslError> {
        self.expect(Tok::LBracket, "`[`")?;
        let l = self.lin()?;
        self.expect(Tok::RBracket, "`]`")?;
        Ok(l)
    }

    fn base(&mut self) -> Result<Expr, DslError> {
        match self.peek().clone() {
            Tok::Int(s) => {
                self.bump();
                let num: BigInt = s.parse().expect("lexer yields digits");
                let den = if self.eat(&Tok::Slash) {
                    match self.peek().clone() {
                        Tok::Int(d) => {
                            self.bump();
                            d.parse::<BigInt>().expect("lexer yields digits")
                        }
                        _ => return Err(self.unexpected("a denominator")),
                    }
                } else {
                    BigInt::from(1)
                };
                if den.is_zero() {
                    return Err(self.error("zero denominator"));
                }
                Ok(Expr::Const(BigRational::new(num, den)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => match (name.as_str(), self.peek_at(1)) {
                ("F", Tok::LBracket) => {
                    self.bump();
                    Ok(Expr::Fib(self.bracketed_index()?))
                }
                ("L", Tok::LBracket) => {
                    self.bump();
                    Ok(Expr::Lucas(self.bracketed_index()?))
                }
                ("Fk", Tok::LBrace) => {
                    self.bump();
                    self.bump();
                    let k = self.lin()?;
                    self.expect(Tok::RBrace, "`}`")?;
                    let index = self.bracketed_index()?;
                    Ok(Expr::KFib { k, index })
                }
                ("H", Tok::LBrace) => {
                    self.bump();
                    self.bump();
                    let h0 = self.signed_int()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let h1 = self.signed_int()?;
                    self.expect(Tok::RBrace, "`}`")?;
                    let index = self.bracketed_index()?;
                    Ok(Expr::GenFib { h0, h1, index })
                }
                ("C", Tok::LParen) => {
                    self.bump();
                    self.bump();
                    let a = self.lin()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let b = self.lin()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Expr::Binom(a, b))
                }
                ("Sum", Tok::LParen) => {
                    self.bump();
                    self.bump();
                    let var = self.variable()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let lower = self.lin()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let upper = self.lin()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let body = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Expr::Sum {
                        var,
                        lower,
                        upper,
                        body: Box::new(body),
                    })
                }
                _ => Ok(Expr::Var(self.variable()?)),
            },
            _ => Err(self.unexpected("an expression")),
        }
    }

    // ---- conditions ----

    fn condition(&mut self) -> Result<Condition, DslError> {
        let var = self.variable()?;
        self.expect(Tok::Ge, "`>=`")?;
        let bound = if matches!(self.peek(), Tok::Ident(s) if s == "max")
            && *self.peek_at(1) == Tok::LParen
        {
            self.bump();
            self.bump();
            let mut bs = vec![self.lin()?];
            while self.eat(&Tok::Comma) {
                bs.push(self.lin()?);
            }
            self.expect(Tok::RParen, "`)`")?;
            bs
        } else {
            vec![self.lin()?]
        };
        Ok(Condition { var, bound })
    }

    fn identity(&mut self) -> Result<(Vec<Expr>, Vec<Condition>), DslError> {
        let mut sides = vec![self.expr()?];
        if *self.peek() != Tok::Eq {
            return Err(self.unexpected("`=`"));
        }
        while self.eat(&Tok::Eq) {
            sides.push(self.expr()?);
        }
        let mut conds = Vec::new();
        if self.eat(&Tok::Semi) {
            conds.push(self.condition()?);
            while self.eat(&Tok::Comma) {
                conds.push(self.condition()?);
            }
        }
        if *self.peek() != Tok::End {
            return Err(self.unexpected("end of input"));
        }
        Ok((sides, conds))
    }
}

/// Parse one expression (no `=`, no conditions).
pub fn parse_expr(text: &str) -> Result<Expr, DslError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("end of input"));
    }
    let e = canonicalize(&e);
    check_sums(&e, &mut Vec::new(), &BTreeSet::new())?;
    check_exponents(&e)?;
    Ok(e)
}

/// Parse an identity without parameters.
pub fn parse_identity(text: &str) -> Result<Identity, DslError> {
    parse_with_params(text, &[])
}

/// Parse an identity whose free variables may include the given parameters.
///
/// When no condition is written, every free index is taken to range over
/// n >= 0. Once any condition is written, each free index must have one.
pub fn parse_with_params(text: &str, params: &[ParamDecl]) -> Result<Identity, DslError> {
    let mut p = Parser::new(text)?;
    let (sides, conditions) = p.identity()?;
    let sides: Vec<Expr> = sides.iter().map(canonicalize).collect();
    let id = Identity {
        sides,
        conditions,
        params: params.to_vec(),
        meta: Meta::default(),
    };
    validate(&id, &p.seen)?;
    Ok(id)
}

fn position(seen: &BTreeMap<String, (usize, usize)>, name: &str) -> (usize, usize) {
    seen.get(name).copied().unwrap_or((1, 1))
}

fn validate(id: &Identity, seen: &BTreeMap<String, (usize, usize)>) -> Result<(), DslError> {
    let free = id.free_vars();
    let mut conditioned = BTreeSet::new();
    for c in &id.conditions {
        if !conditioned.insert(c.var.clone()) {
            return Err(DslError::DuplicateCondition {
                name: c.var.clone(),
            });
        }
        if !free.contains(&c.var) && !id.is_param(&c.var) {
            return Err(DslError::UnknownConditionVar {
                name: c.var.clone(),
            });
        }
        for b in &c.bound {
            if let Some(v) = b.vars().into_iter().find(|v| !id.is_param(v)) {
                let (line, col) = position(seen, &v);
                return Err(DslError::UnboundVariable { name: v, line, col });
            }
        }
    }
    if !id.conditions.is_empty() {
        for v in &free {
            if !conditioned.contains(v) && !id.is_param(v) {
                let (line, col) = position(seen, v);
                return Err(DslError::UnboundVariable {
                    name: v.clone(),
                    line,
                    col,
                });
            }
        }
    }
    let mut outer: BTreeSet<String> = free.clone();
    outer.extend(id.params.iter().map(|p| p.name.clone()));
    outer.extend(conditioned);
    for s in &id.sides {
        check_sums(s, &mut Vec::new(), &outer)?;
        check_exponents(s)?;
    }
    Ok(())
}

fn check_sums(e: &Expr, bound: &mut Vec<String>, outer: &BTreeSet<String>) -> Result<(), DslError> {
    match e {
        Expr::Sum { var, body, .. } => {
            if bound.contains(var) || outer.contains(var) {
                return Err(DslError::ShadowedSumVariable { name: var.clone() });
            }
            bound.push(var.clone());
            check_sums(body, bound, outer)?;
            bound.pop();
            Ok(())
        }
        Expr::Pow(b, _) | Expr::Neg(b) => check_sums(b, bound, outer),
        Expr::Add(xs) | Expr::Mul(xs) => xs.iter().try_for_each(|x| check_sums(x, bound, outer)),
        _ => Ok(()),
    }
}

fn check_exponents(e: &Expr) -> Result<(), DslError> {
    let bad = e.any(&|x| matches!(x, Expr::Pow(_, k) if k.as_const().is_some_and(|k| k < 0)));
    if bad {
        return Err(DslError::NegativeExponent {
            expr: e.to_string(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::render;

    #[test]
    fn parses_cubic_with_condition() {
        let id = parse_identity("F[n+1]^3 + F[n]^3 - F[n-1]^3 = F[3n] ; n >= 1").unwrap();
        assert_eq!(id.sides.len(), 2);
        assert_eq!(id.conditions, vec![Condition::at_least("n", 1)]);
        assert_eq!(id.lower_bound("n"), 1);
    }

    #[test]
    fn reflexive_identity_is_well_formed() {
        let id = parse_identity("F[n] = F[n]").unwrap();
        assert_eq!(id.index_vars(), vec!["n".to_string()]);
        assert_eq!(id.lower_bound("n"), 0);
    }

    #[test]
    fn one_sum_node() {
        let id =
            parse_identity("Sum(k,1,n, F[2k]^3) * 4 = (F[2n+1]-1)^2 * (F[2n+1]+2) ; n >= 1")
                .unwrap();
        fn count(e: &Expr) -> usize {
            match e {
                Expr::Sum { body, .. } => 1 + count(body),
                Expr::Pow(b, _) | Expr::Neg(b) => count(b),
                Expr::Add(xs) | Expr::Mul(xs) => xs.iter().map(count).sum(),
                _ => 0,
            }
        }
        assert_eq!(count(&id.sides[0]) + count(&id.sides[1]), 1);
        assert!(id.sides[0].contains_sum());
        assert!(!id.sides[1].contains_sum());
    }

    #[test]
    fn powers_collect() {
        let id = parse_identity("F[n]*F[n] = F[n]^2").unwrap();
        assert_eq!(id.sides[0], id.sides[1]);
        assert_eq!(render(&id), "F[n]^2 = F[n]^2");
    }

    #[test]
    fn sign_atoms() {
        let e = parse_expr("(-1)^(n+1) * F[2]").unwrap();
        assert_eq!(
            e,
            Expr::Mul(vec![
                Expr::Sign(LinForm::var("n").add_const(1)),
                Expr::fib(LinForm::constant(2))
            ])
        );
        assert_eq!(parse_expr("(-1)^3").unwrap(), Expr::int(-1));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_identity("F[n+1] = \n  F[n] +").unwrap_err();
        assert_eq!(
            err,
            DslError::Syntax {
                line: 2,
                col: 9,
                msg: "expected an expression, found end of input".into()
            }
        );
        assert!(matches!(
            parse_identity("F[n] F[n] = 1"),
            Err(DslError::Syntax { line: 1, col: 6, .. })
        ));
    }

    #[test]
    fn unbound_variable_reported_with_position() {
        let err = parse_identity("F[n] = F[m] ; n >= 0").unwrap_err();
        assert_eq!(
            err,
            DslError::UnboundVariable {
                name: "m".into(),
                line: 1,
                col: 10
            }
        );
    }

    #[test]
    fn shadowing_rejected() {
        let err = parse_identity("Sum(n, 0, n, F[n]) = F[n+2] - 1 ; n >= 0").unwrap_err();
        assert_eq!(err, DslError::ShadowedSumVariable { name: "n".into() });
        let err = parse_identity("Sum(k, 0, n, Sum(k, 0, k, F[k])) = 0").unwrap_err();
        assert_eq!(err, DslError::ShadowedSumVariable { name: "k".into() });
    }

    #[test]
    fn condition_checks() {
        assert_eq!(
            parse_identity("F[n] = F[n] ; m >= 1").unwrap_err(),
            DslError::UnknownConditionVar { name: "m".into() }
        );
        assert_eq!(
            parse_identity("F[n] = F[n] ; n >= 1, n >= 2").unwrap_err(),
            DslError::DuplicateCondition { name: "n".into() }
        );
        assert!(matches!(
            parse_identity("F[n]^(-1) = 1"),
            Err(DslError::NegativeExponent { .. })
        ));
    }

    #[test]
    fn params_and_max_bounds() {
        let params = vec![
            ParamDecl {
                name: "l".into(),
                lo: 1,
                hi: 4,
            },
            ParamDecl {
                name: "m".into(),
                lo: 1,
                hi: 4,
            },
        ];
        let id = parse_with_params(
            "F[2l]*(F[n+m]^2 - F[n-m]^2) = F[2m]*(F[n+l]^2 - F[n-l]^2) ; n >= max(l, m)",
            &params,
        )
        .unwrap();
        assert_eq!(id.index_vars(), vec!["n".to_string()]);
        assert_eq!(id.conditions[0].bound.len(), 2);
        assert!(parse_identity("F[n] = F[n] ; n >= max(l, 1)").is_err());
    }

    #[test]
    fn products_in_indices() {
        let params = vec![ParamDecl {
            name: "k".into(),
            lo: 0,
            hi: 4,
        }];
        let id = parse_with_params("F[k*n+2k] = F[k*n] ; n >= 1", &params).unwrap();
        match &id.sides[0] {
            Expr::Fib(l) => assert_eq!(l.to_string(), "2k+k*n"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reserved_names_are_not_variables() {
        assert!(parse_identity("F + 1 = 2").is_err());
    }
}
