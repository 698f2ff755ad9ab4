//! Binet substitution into Laurent normal form.
//!
//! For a sequence with characteristic polynomial x² - p·x - 1 the roots are
//! α = (p + √d)/2 and β = -1/α with d = p² + 4. Writing tᵢ = α^{xᵢ} for each
//! free index and fixing σᵢ = (-1)^{xᵢ}, every power β^{xᵢ} becomes
//! σᵢ·tᵢ⁻¹ and the expression turns into a Laurent polynomial in the tᵢ.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::laurent::LaurentPoly;
use super::quad::QuadRat;
use super::ProveError;
use crate::dsl::{binomial, Expr, LinForm};

/// Which quadratic field an expression lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    /// Middle coefficient of x² - p·x - 1 (1 for Fibonacci, k for Fk{k}).
    pub p: i64,
    /// Radicand p² + 4.
    pub d: i64,
}

impl Field {
    pub const GOLDEN: Field = Field { p: 1, d: 5 };

    pub fn for_k(k: i64) -> Field {
        Field { p: k, d: k * k + 4 }
    }

    pub fn alpha(&self) -> QuadRat {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        QuadRat::new(BigRational::from_integer(BigInt::from(self.p)) * &half, half)
    }

    pub fn beta(&self) -> QuadRat {
        self.alpha().inv(self.d).expect("alpha is nonzero").neg()
    }

    /// 1/(α - β) = 1/√d = √d/d
    fn inv_root(&self) -> QuadRat {
        QuadRat::new(
            BigRational::from_integer(BigInt::from(0)),
            BigRational::new(BigInt::one(), BigInt::from(self.d)),
        )
    }
}

/// Detect the single field used by all sequence atoms in `exprs`.
pub fn field_of(exprs: &[&Expr]) -> Result<Field, ProveError> {
    let mut found: Option<Field> = None;
    let mut err = None;
    for e in exprs {
        collect_fields(e, &mut found, &mut err);
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok(found.unwrap_or(Field::GOLDEN))
}

fn collect_fields(e: &Expr, found: &mut Option<Field>, err: &mut Option<ProveError>) {
    let here = match e {
        Expr::Fib(_) | Expr::Lucas(_) | Expr::GenFib { .. } => Some(Field::GOLDEN),
        Expr::KFib { k, .. } => match k.as_const() {
            Some(k) if k >= 1 => Some(Field::for_k(k)),
            _ => {
                err.get_or_insert(ProveError::Unsupported(format!(
                    "k-Fibonacci parameter `{k}` is not a positive constant"
                )));
                None
            }
        },
        Expr::Pow(b, _) | Expr::Neg(b) => {
            collect_fields(b, found, err);
            None
        }
        Expr::Add(xs) | Expr::Mul(xs) => {
            xs.iter().for_each(|x| collect_fields(x, found, err));
            None
        }
        Expr::Sum { body, .. } => {
            collect_fields(body, found, err);
            None
        }
        _ => None,
    };
    if let Some(f) = here {
        match found {
            Some(g) if *g != f => {
                err.get_or_insert(ProveError::Unsupported(
                    "atoms from different characteristic fields".to_string(),
                ));
            }
            _ => *found = Some(f),
        }
    }
}

/// Normalizer for one parity case.
pub struct Normalizer<'a> {
    field: Field,
    alpha: QuadRat,
    beta: QuadRat,
    vars: &'a [String],
    signs: &'a [i8],
}

impl<'a> Normalizer<'a> {
    pub fn new(field: Field, vars: &'a [String], signs: &'a [i8]) -> Self {
        Normalizer {
            field,
            alpha: field.alpha(),
            beta: field.beta(),
            vars,
            signs,
        }
    }

    fn d(&self) -> i64 {
        self.field.d
    }

    fn constant(&self, c: QuadRat) -> LaurentPoly {
        LaurentPoly::constant(self.d(), self.vars.len(), c)
    }

    fn linear(&self, l: &LinForm) -> Result<(Vec<i64>, i64), ProveError> {
        l.linear_over(self.vars)
            .ok_or_else(|| ProveError::Unsupported(format!("index `{l}` is not linear in the free indices")))
    }

    fn sign_product(&self, coeffs: &[i64]) -> i64 {
        coeffs
            .iter()
            .zip(self.signs)
            .map(|(a, s)| if a % 2 != 0 && *s < 0 { -1 } else { 1 })
            .product()
    }

    /// α^l and β^l as Laurent monomials.
    fn root_powers(&self, l: &LinForm) -> Result<(LaurentPoly, LaurentPoly), ProveError> {
        let (coeffs, c) = self.linear(l)?;
        let a = LaurentPoly::monomial(self.d(), self.alpha.pow(c, self.d()), coeffs.clone());
        let sign = self.sign_product(&coeffs);
        let b_coeff = self.beta.pow(c, self.d()).scale(&BigRational::from_integer(sign.into()));
        let b = LaurentPoly::monomial(self.d(), b_coeff, coeffs.iter().map(|x| -x).collect());
        Ok((a, b))
    }

    /// (α^l - β^l)/√d
    fn seq(&self, l: &LinForm) -> Result<LaurentPoly, ProveError> {
        let (a, b) = self.root_powers(l)?;
        Ok(a.sub(&b).scale(&self.field.inv_root()))
    }

    pub fn normalize(&self, e: &Expr) -> Result<LaurentPoly, ProveError> {
        let d = self.d();
        Ok(match e {
            Expr::Fib(i) => self.seq(i)?,
            Expr::KFib { index, .. } => self.seq(index)?,
            Expr::Lucas(i) => {
                let (a, b) = self.root_powers(i)?;
                a.add(&b)
            }
            Expr::GenFib { h0, h1, index } => {
                let prev = self.seq(&index.add_const(-1))?;
                let cur = self.seq(index)?;
                prev.scale(&QuadRat::int(*h0)).add(&cur.scale(&QuadRat::int(*h1)))
            }
            Expr::Sign(s) => {
                let (coeffs, c) = self.linear(s)?;
                let sign = self.sign_product(&coeffs) * if c.rem_euclid(2) == 0 { 1 } else { -1 };
                self.constant(QuadRat::int(sign))
            }
            Expr::Binom(a, b) => match (a.as_const(), b.as_const()) {
                (Some(n), Some(k)) => {
                    self.constant(QuadRat::rational(BigRational::from_integer(binomial(n, k))))
                }
                _ => {
                    return Err(ProveError::Unsupported(format!(
                        "binomial `{e}` depends on a free index"
                    )))
                }
            },
            Expr::Const(c) => self.constant(QuadRat::rational(c.clone())),
            Expr::Var(v) => {
                return Err(ProveError::Unsupported(format!(
                    "variable `{v}` used as a value"
                )))
            }
            Expr::Pow(b, k) => match k.as_const() {
                Some(k) if k >= 0 => self.normalize(b)?.pow(k as u32),
                _ => {
                    return Err(ProveError::Unsupported(format!(
                        "exponent `{k}` is not a constant"
                    )))
                }
            },
            Expr::Neg(x) => self.normalize(x)?.neg(),
            Expr::Add(xs) => {
                let mut acc = LaurentPoly::zero(d, self.vars.len());
                for x in xs {
                    acc = acc.add(&self.normalize(x)?);
                }
                acc
            }
            Expr::Mul(xs) => {
                let mut acc = self.constant(QuadRat::one());
                for x in xs {
                    acc = acc.mul(&self.normalize(x)?);
                }
                acc
            }
            Expr::Sum { .. } => {
                return Err(ProveError::Unsupported(
                    "sums have no closed Binet form".to_string(),
                ))
            }
        })
    }
}

/// Normal form of `e` under the given parity signs (+1 even, -1 odd).
pub fn binet_normalize(e: &Expr, vars: &[String], signs: &[i8]) -> Result<LaurentPoly, ProveError> {
    let field = field_of(&[e])?;
    Normalizer::new(field, vars, signs).normalize(e)
}

/// Every sign assignment over `n` indices, in binary order (+1 before -1).
pub fn parity_cases(n: usize) -> Vec<Vec<i8>> {
    (0..1u32 << n)
        .map(|mask| {
            (0..n)
                .map(|i| if mask >> (n - 1 - i) & 1 == 0 { 1 } else { -1 })
                .collect()
        })
        .collect()
}
