//! Formal polynomial view of an expression: products of atoms with exact
//! rational coefficients, with no use of the Fibonacci recurrence.
//!
//! Used for degree analysis and for comparing two identities term by term.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ast::{Expr, Identity};
use super::canon::{binomial, canonicalize};
use super::lin::LinForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKind {
    /// A sequence value: F, L, Fk or H.
    Sequence,
    /// `(-1)^x` for a single variable (or a parameter product).
    Sign,
    /// Anything else kept whole: binomials, variables, symbolic powers, sums.
    Opaque,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub kind: AtomKind,
    pub key: String,
}

pub type Monomial = Vec<(Atom, u32)>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    pub terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn constant(c: BigRational) -> Poly {
        let mut p = Poly::default();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    fn atom(kind: AtomKind, key: String) -> Poly {
        let mut p = Poly::default();
        p.terms.insert(vec![(Atom { kind, key }, 1)], BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        let entry = self.terms.entry(m).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::default();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(mul_monomials(ma, mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::constant(BigRational::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Number of sequence atoms (with multiplicity) in each monomial.
    pub fn degrees(&self) -> Vec<u32> {
        self.terms.keys().map(|m| sequence_degree(m)).collect()
    }
}

pub fn sequence_degree(m: &Monomial) -> u32 {
    m.iter()
        .filter(|(a, _)| a.kind == AtomKind::Sequence)
        .map(|(_, e)| *e)
        .sum()
}

fn mul_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut map: BTreeMap<Atom, u32> = BTreeMap::new();
    for (atom, e) in a.iter().chain(b.iter()) {
        *map.entry(atom.clone()).or_insert(0) += e;
    }
    map.into_iter()
        .filter_map(|(atom, e)| {
            let e = if atom.kind == AtomKind::Sign { e % 2 } else { e };
            (e > 0).then_some((atom, e))
        })
        .collect()
}

fn int(v: BigInt) -> BigRational {
    BigRational::from_integer(v)
}

/// Expand with sums kept as opaque atoms.
pub fn expand(e: &Expr) -> Poly {
    expand_with(e, false)
}

/// Expand with each sum replaced by its body; only degree information
/// survives, which is what classification needs.
pub fn expand_sum_bodies(e: &Expr) -> Poly {
    expand_with(e, true)
}

fn sign_poly(s: &LinForm) -> Poly {
    let mut out = Poly::constant(int(BigInt::from(if s.constant_term().rem_euclid(2) == 0 {
        1
    } else {
        -1
    })));
    for (vars, c) in s.terms() {
        if c.rem_euclid(2) == 1 {
            out = out.mul(&Poly::atom(AtomKind::Sign, vars.join("*")));
        }
    }
    out
}

fn fib_poly(index: &LinForm) -> Poly {
    match index.as_const() {
        Some(c) => Poly::constant(int(crate::sequences::fib(c))),
        None => Poly::atom(AtomKind::Sequence, format!("F[{index}]")),
    }
}

fn expand_with(e: &Expr, transparent: bool) -> Poly {
    match e {
        Expr::Fib(i) => fib_poly(i),
        Expr::Lucas(i) => Poly::atom(AtomKind::Sequence, format!("L[{i}]")),
        Expr::KFib { k, index } if k.as_const() == Some(1) => fib_poly(index),
        Expr::KFib { .. } => Poly::atom(AtomKind::Sequence, e.to_string()),
        Expr::GenFib { h0, h1, index } => {
            // H[i] = h0 F[i-1] + h1 F[i]
            let a = fib_poly(&index.add_const(-1)).scale(&int(BigInt::from(*h0)));
            let b = fib_poly(index).scale(&int(BigInt::from(*h1)));
            a.add(&b)
        }
        Expr::Sign(s) => sign_poly(s),
        Expr::Binom(a, b) => match (a.as_const(), b.as_const()) {
            (Some(n), Some(k)) => Poly::constant(int(binomial(n, k))),
            _ => Poly::atom(AtomKind::Opaque, e.to_string()),
        },
        Expr::Const(c) => Poly::constant(c.clone()),
        Expr::Var(v) => Poly::atom(AtomKind::Opaque, v.clone()),
        Expr::Pow(b, k) => match k.as_const() {
            Some(k) if k >= 0 => expand_with(b, transparent).pow(k as u32),
            _ => Poly::atom(AtomKind::Opaque, canonicalize(e).to_string()),
        },
        Expr::Neg(x) => expand_with(x, transparent).scale(&-BigRational::one()),
        Expr::Add(xs) => xs
            .iter()
            .fold(Poly::default(), |acc, x| acc.add(&expand_with(x, transparent))),
        Expr::Mul(xs) => xs.iter().fold(Poly::constant(BigRational::one()), |acc, x| {
            acc.mul(&expand_with(x, transparent))
        }),
        Expr::Sum { body, .. } => {
            if transparent {
                expand_with(body, transparent)
            } else {
                Poly::atom(AtomKind::Opaque, canonicalize(e).to_string())
            }
        }
    }
}

/// `sides[0] - sides[1]` as a formal polynomial.
pub fn relation(id: &Identity) -> Poly {
    let a = expand(&id.sides[0]);
    let b = expand(&id.sides[1]);
    a.add(&b.scale(&-BigRational::one()))
}

/// True if the two first-pair relations agree up to a nonzero factor.
pub fn same_relation(a: &Identity, b: &Identity) -> bool {
    proportional(&relation(a), &relation(b)).is_some()
}

/// The factor `c` with `p = c * q`, if one exists.
pub fn proportional(p: &Poly, q: &Poly) -> Option<BigRational> {
    if p.is_zero() || q.is_zero() {
        return (p.is_zero() && q.is_zero()).then(BigRational::one);
    }
    let (m, cp) = p.terms.iter().next()?;
    let cq = q.terms.get(m)?;
    let c = cp / cq;
    (q.scale(&c) == *p).then_some(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_expr, parse_identity};

    #[test]
    fn cube_of_binomial() {
        let p = expand(&parse_expr("(F[n]+F[n+1])^3").unwrap());
        assert_eq!(p.terms.len(), 4);
        assert_eq!(p.degrees(), vec![3, 3, 3, 3]);
    }

    #[test]
    fn sign_atoms_normalize() {
        let a = expand(&parse_expr("(-1)^(n+1)*F[n]").unwrap());
        let b = expand(&parse_expr("-(-1)^(3n)*F[n]").unwrap());
        assert_eq!(a, b);
        let sq = expand(&parse_expr("(-1)^n*(-1)^n").unwrap());
        assert_eq!(sq, Poly::constant(BigRational::one()));
    }

    #[test]
    fn proportional_relations() {
        let a = parse_identity("2*F[n+2] = 2*F[n+1] + 2*F[n]").unwrap();
        let b = parse_identity("F[n] + F[n+1] = F[n+2]").unwrap();
        assert!(same_relation(&a, &b));
        let c = parse_identity("F[n] + F[n+1] = F[n+3]").unwrap();
        assert!(!same_relation(&a, &c));
    }

    #[test]
    fn generalized_atoms_lower_to_f() {
        let a = expand(&parse_expr("H{1,1}[n]").unwrap());
        let b = expand(&parse_expr("F[n-1] + F[n]").unwrap());
        assert_eq!(a, b);
        let k1 = expand(&parse_expr("Fk{1}[n+2]").unwrap());
        assert_eq!(k1, expand(&parse_expr("F[n+2]").unwrap()));
    }

    #[test]
    fn sums_are_opaque_unless_transparent() {
        let e = parse_expr("2*Sum(k, 0, n, F[k]^2*F[k+1])").unwrap();
        assert_eq!(expand(&e).degrees(), vec![0]);
        assert_eq!(expand_sum_bodies(&e).degrees(), vec![3]);
    }
}
