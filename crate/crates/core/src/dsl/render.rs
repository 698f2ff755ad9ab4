use std::fmt::{self, Write};

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::ast::{Condition, Expr, Identity};
use super::canon::{canonicalize, is_negative_term, negate};
use super::lin::LinForm;

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_POW: u8 = 3;
const PREC_ATOM: u8 = 4;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(_) | Expr::Neg(_) => PREC_ADD,
        Expr::Mul(_) => PREC_MUL,
        Expr::Const(c) if c.is_negative() => PREC_ADD,
        Expr::Const(c) if !c.is_integer() => PREC_MUL,
        Expr::Pow(..) | Expr::Sign(_) => PREC_POW,
        _ => PREC_ATOM,
    }
}

fn write_rational(f: &mut impl Write, c: &BigRational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

fn write_exponent(f: &mut impl Write, e: &LinForm) -> fmt::Result {
    match (e.as_const(), e.as_var()) {
        (Some(c), _) if c >= 0 => write!(f, "{c}"),
        (_, Some(v)) => f.write_str(v),
        _ => write!(f, "({e})"),
    }
}

fn write_wrapped(f: &mut impl Write, e: &Expr, min_prec: u8) -> fmt::Result {
    if prec(e) < min_prec {
        f.write_char('(')?;
        write_expr(f, e)?;
        f.write_char(')')
    } else {
        write_expr(f, e)
    }
}

pub(crate) fn write_expr(f: &mut impl Write, e: &Expr) -> fmt::Result {
    match e {
        Expr::Fib(i) => write!(f, "F[{i}]"),
        Expr::Lucas(i) => write!(f, "L[{i}]"),
        Expr::KFib { k, index } => write!(f, "Fk{{{k}}}[{index}]"),
        Expr::GenFib { h0, h1, index } => write!(f, "H{{{h0},{h1}}}[{index}]"),
        Expr::Sign(s) => {
            f.write_str("(-1)^")?;
            if s.as_var().is_some() {
                write!(f, "{s}")
            } else {
                write!(f, "({s})")
            }
        }
        Expr::Binom(a, b) => write!(f, "C({a}, {b})"),
        Expr::Const(c) => write_rational(f, c),
        Expr::Var(v) => f.write_str(v),
        Expr::Pow(b, e) => {
            let base_needs_parens = match b.as_ref() {
                Expr::Const(c) => !c.is_integer() || c.is_negative(),
                other => prec(other) < PREC_ATOM,
            };
            if base_needs_parens {
                f.write_char('(')?;
                write_expr(f, b)?;
                f.write_char(')')?;
            } else {
                write_expr(f, b)?;
            }
            f.write_char('^')?;
            write_exponent(f, e)
        }
        Expr::Neg(x) => {
            f.write_char('-')?;
            write_wrapped(f, x, PREC_MUL)
        }
        Expr::Add(xs) => {
            for (i, x) in xs.iter().enumerate() {
                if i == 0 {
                    write_wrapped(f, x, PREC_ADD)?;
                } else if is_negative_term(x) {
                    f.write_str(" - ")?;
                    let flipped = negate(x.clone());
                    write_wrapped(f, &flipped, PREC_MUL)?;
                } else {
                    f.write_str(" + ")?;
                    write_wrapped(f, x, PREC_MUL)?;
                }
            }
            Ok(())
        }
        Expr::Mul(xs) => {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    f.write_char('*')?;
                }
                match x {
                    // a leading negative coefficient reads as unary minus
                    Expr::Const(c) if i == 0 && c.is_negative() => {
                        f.write_char('-')?;
                        if !(-c.clone()).is_one() || xs.len() == 1 {
                            write_rational(f, &-c.clone())?;
                        }
                    }
                    Expr::Const(c) if !c.is_integer() => write_rational(f, c)?,
                    _ => write_wrapped(f, x, PREC_POW)?,
                }
            }
            Ok(())
        }
        Expr::Sum {
            var,
            lower,
            upper,
            body,
        } => {
            write!(f, "Sum({var}, {lower}, {upper}, ")?;
            write_expr(f, body)?;
            f.write_char(')')
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} >= ", self.var)?;
        if self.bound.len() == 1 {
            write!(f, "{}", self.bound[0])
        } else {
            let parts: Vec<String> = self.bound.iter().map(|b| b.to_string()).collect();
            write!(f, "max({})", parts.join(", "))
        }
    }
}

/// Conditions only, e.g. `n >= 1, m >= k+1`.
pub fn render_conditions(conds: &[Condition]) -> String {
    conds
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Sides only, joined by ` = `.
pub fn render_sides(id: &Identity) -> String {
    id.sides
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" = ")
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_sides(self))?;
        if !self.conditions.is_empty() {
            write!(f, " ; {}", render_conditions(&self.conditions))?;
        }
        Ok(())
    }
}

/// Canonical text of an expression.
pub fn render_expr(e: &Expr) -> String {
    canonicalize(e).to_string()
}

/// Canonical text of an identity.
pub fn render(id: &Identity) -> String {
    super::canon::canonicalize_identity(id).to_string()
}
