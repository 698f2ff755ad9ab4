//! Canonical form used for printing and structural equality.
//!
//! Additive order is preserved. Products get one leading rational
//! coefficient, and repeated factors are merged into powers at the position
//! of their first occurrence.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ast::{Expr, Identity};
use super::lin::LinForm;

pub fn canonicalize(e: &Expr) -> Expr {
    match e {
        Expr::Add(xs) => canon_add(xs),
        Expr::Mul(xs) => canon_mul(xs),
        Expr::Neg(x) => negate(canonicalize(x)),
        Expr::Pow(b, exp) => canon_pow(canonicalize(b), exp.clone()),
        Expr::Sum {
            var,
            lower,
            upper,
            body,
        } => Expr::Sum {
            var: var.clone(),
            lower: lower.clone(),
            upper: upper.clone(),
            body: Box::new(canonicalize(body)),
        },
        Expr::Sign(e) => match e.as_const() {
            Some(c) => Expr::int(if c % 2 == 0 { 1 } else { -1 }),
            None => Expr::Sign(e.clone()),
        },
        leaf => leaf.clone(),
    }
}

pub fn canonicalize_identity(id: &Identity) -> Identity {
    Identity {
        sides: id.sides.iter().map(canonicalize).collect(),
        ..id.clone()
    }
}

fn canon_add(xs: &[Expr]) -> Expr {
    let mut terms = Vec::new();
    for x in xs {
        match canonicalize(x) {
            Expr::Add(inner) => terms.extend(inner),
            Expr::Const(c) if c.is_zero() => {}
            other => terms.push(other),
        }
    }
    match terms.len() {
        0 => Expr::Const(BigRational::zero()),
        1 => terms.pop().unwrap(),
        _ => Expr::Add(terms),
    }
}

/// Negation of an already canonical expression.
pub(crate) fn negate(x: Expr) -> Expr {
    match x {
        Expr::Neg(inner) => *inner,
        Expr::Const(c) => Expr::Const(-c),
        Expr::Mul(mut fs) => {
            if let Some(Expr::Const(c)) = fs.first() {
                let c = -c.clone();
                if c.is_one() {
                    fs.remove(0);
                    if fs.len() == 1 {
                        return fs.pop().unwrap();
                    }
                    return Expr::Mul(fs);
                }
                fs[0] = Expr::Const(c);
                Expr::Mul(fs)
            } else {
                Expr::Neg(Box::new(Expr::Mul(fs)))
            }
        }
        other => Expr::Neg(Box::new(other)),
    }
}

fn canon_mul(xs: &[Expr]) -> Expr {
    let mut coeff = BigRational::one();
    let mut factors: Vec<(Expr, LinForm)> = Vec::new();
    let mut push = |f: Expr, coeff: &mut BigRational| {
        let mut pending = vec![f];
        while let Some(f) = pending.pop() {
            match f {
                Expr::Const(c) => *coeff *= c,
                Expr::Neg(inner) => {
                    *coeff = -coeff.clone();
                    pending.push(*inner);
                }
                Expr::Mul(inner) => pending.extend(inner.into_iter().rev()),
                Expr::Pow(b, e) => merge_factor(&mut factors, *b, e),
                other => merge_factor(&mut factors, other, LinForm::constant(1)),
            }
        }
    };
    for x in xs {
        push(canonicalize(x), &mut coeff);
    }
    if coeff.is_zero() {
        return Expr::Const(coeff);
    }
    let mut out = Vec::new();
    for (base, e) in factors {
        match canon_pow(base, e) {
            Expr::Const(c) => coeff *= c,
            Expr::Mul(inner) => {
                // canon_pow only yields a product when folding a signed base.
                for f in inner {
                    match f {
                        Expr::Const(c) => coeff *= c,
                        other => out.push(other),
                    }
                }
            }
            Expr::Neg(inner) => {
                coeff = -coeff;
                out.push(*inner);
            }
            other => out.push(other),
        }
    }
    if coeff.is_zero() {
        return Expr::Const(coeff);
    }
    if out.is_empty() {
        return Expr::Const(coeff);
    }
    let body = if out.len() == 1 {
        out.pop().unwrap()
    } else {
        Expr::Mul(out)
    };
    if coeff.is_one() {
        body
    } else if (-coeff.clone()).is_one() {
        Expr::Neg(Box::new(body))
    } else {
        let mut fs = vec![Expr::Const(coeff)];
        match body {
            Expr::Mul(inner) => fs.extend(inner),
            other => fs.push(other),
        }
        Expr::Mul(fs)
    }
}

fn merge_factor(factors: &mut Vec<(Expr, LinForm)>, base: Expr, e: LinForm) {
    if let Some(slot) = factors.iter_mut().find(|(b, _)| *b == base) {
        slot.1 = slot.1.add(&e);
    } else {
        factors.push((base, e));
    }
}

fn canon_pow(base: Expr, e: LinForm) -> Expr {
    if let Some(k) = e.as_const() {
        if k == 0 {
            return Expr::Const(BigRational::one());
        }
        if k == 1 {
            return base;
        }
        if let Expr::Const(c) = &base {
            if k > 0 {
                return Expr::Const(rational_pow(c, k as u32));
            }
        }
        if let Expr::Neg(inner) = base {
            let p = canon_pow(*inner, e);
            return if k % 2 == 0 { p } else { negate(p) };
        }
    }
    match base {
        Expr::Const(c) if (-c.clone()).is_one() => Expr::Sign(e),
        Expr::Pow(b, inner) => canon_pow(*b, inner.mul(&e)),
        Expr::Sign(s) => Expr::Sign(s.mul(&e)),
        other => Expr::Pow(Box::new(other), e),
    }
}

pub(crate) fn rational_pow(c: &BigRational, k: u32) -> BigRational {
    BigRational::new(
        num_traits::pow(c.numer().clone(), k as usize),
        num_traits::pow(c.denom().clone(), k as usize),
    )
}

/// Binomial coefficient with the usual extension to negative upper index.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 {
        return BigInt::zero();
    }
    if n >= 0 {
        if k > n {
            return BigInt::zero();
        }
        let k = k.min(n - k);
        let mut acc = BigInt::one();
        for i in 0..k {
            acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
        }
        acc
    } else {
        // C(n, k) = (-1)^k C(k - n - 1, k)
        let v = binomial(k - n - 1, k);
        if k.is_odd() {
            -v
        } else {
            v
        }
    }
}

pub(crate) fn is_negative_term(e: &Expr) -> bool {
    match e {
        Expr::Neg(_) => true,
        Expr::Const(c) => c.is_negative(),
        Expr::Mul(fs) => matches!(fs.first(), Some(Expr::Const(c)) if c.is_negative()),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(3, 0), BigInt::from(1));
        assert_eq!(binomial(3, 4), BigInt::from(0));
        assert_eq!(binomial(3, -1), BigInt::from(0));
        assert_eq!(binomial(-1, 3), BigInt::from(-1));
        assert_eq!(binomial(-2, 2), BigInt::from(3));
    }

    #[test]
    fn repeated_factors_become_powers() {
        let f = Expr::fib(LinForm::var("n"));
        let e = canonicalize(&Expr::Mul(vec![f.clone(), f.clone(), Expr::int(2), f.clone()]));
        assert_eq!(e, Expr::Mul(vec![Expr::int(2), Expr::pow(f, 3)]));
    }

    #[test]
    fn minus_one_power_is_a_sign() {
        let e = canonicalize(&Expr::Pow(Box::new(Expr::int(-1)), LinForm::var("n")));
        assert_eq!(e, Expr::Sign(LinForm::var("n")));
    }
}
