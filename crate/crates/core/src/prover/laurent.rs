use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;

use super::quad::QuadRat;

/// Multivariate Laurent polynomial with coefficients in ℚ(√d).
///
/// Exponent vectors have one slot per variable; zero coefficients are
/// never stored, so the zero polynomial has no terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    d: i64,
    nvars: usize,
    terms: BTreeMap<Vec<i64>, QuadRat>,
}

impl LaurentPoly {
    pub fn zero(d: i64, nvars: usize) -> Self {
        LaurentPoly {
            d,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(d: i64, nvars: usize, c: QuadRat) -> Self {
        Self::monomial(d, c, vec![0; nvars])
    }

    pub fn monomial(d: i64, c: QuadRat, exps: Vec<i64>) -> Self {
        let mut p = LaurentPoly::zero(d, exps.len());
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn radicand(&self) -> i64 {
        self.d
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i64], &QuadRat)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    fn add_term(&mut self, e: Vec<i64>, c: QuadRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(slot) => {
                *slot = slot.add(&c);
                if slot.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn add(&self, o: &LaurentPoly) -> LaurentPoly {
        debug_assert_eq!((self.d, self.nvars), (o.d, o.nvars));
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> LaurentPoly {
        LaurentPoly {
            d: self.d,
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, o: &LaurentPoly) -> LaurentPoly {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &QuadRat) -> LaurentPoly {
        let mut out = LaurentPoly::zero(self.d, self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v.mul(c, self.d));
        }
        out
    }

    pub fn mul(&self, o: &LaurentPoly) -> LaurentPoly {
        debug_assert_eq!((self.d, self.nvars), (o.d, o.nvars));
        let mut out = LaurentPoly::zero(self.d, self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca.mul(cb, self.d));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> LaurentPoly {
        let mut acc = LaurentPoly::constant(self.d, self.nvars, QuadRat::one());
        let mut sq = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&sq);
            }
            k >>= 1;
            if k > 0 {
                sq = sq.mul(&sq);
            }
        }
        acc
    }

    /// Value with each variable replaced by `base^xᵢ`.
    pub fn eval_at(&self, base: &QuadRat, xs: &[i64]) -> QuadRat {
        let mut acc = QuadRat::zero();
        for (e, c) in &self.terms {
            let power: i64 = e.iter().zip(xs).map(|(a, x)| a * x).sum();
            acc = acc.add(&c.mul(&base.pow(power, self.d), self.d));
        }
        acc
    }

    /// `c` with `self = c·other`, when the two are rationally proportional.
    pub fn ratio_to(&self, other: &LaurentPoly) -> Option<BigRational> {
        let (e, c) = self.terms.iter().next()?;
        let o = other.terms.get(e)?;
        let q = c.mul(&o.inv(self.d)?, self.d);
        if !q.is_rational() {
            return None;
        }
        (other.scale(&q) == *self).then(|| q.a.clone())
    }
}

impl fmt::Display for LaurentPoly {
    /// Variables print as `t0, t1, ...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})")?;
            for (v, p) in e.iter().enumerate() {
                if *p != 0 {
                    write!(f, "*t{v}^{p}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_leaves_zero() {
        let t = LaurentPoly::monomial(5, QuadRat::one(), vec![1]);
        let tinv = LaurentPoly::monomial(5, QuadRat::one(), vec![-1]);
        let prod = t.mul(&tinv);
        assert_eq!(prod, LaurentPoly::constant(5, 1, QuadRat::one()));
        assert!(prod.sub(&prod).is_zero());
        assert_eq!(prod.sub(&prod).to_string(), "0");
    }

    #[test]
    fn binomial_square() {
        let t = LaurentPoly::monomial(5, QuadRat::one(), vec![1]);
        let one = LaurentPoly::constant(5, 1, QuadRat::one());
        let sq = t.add(&one).pow(2);
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.eval_at(&QuadRat::int(2), &[3]), QuadRat::int(81));
    }

    #[test]
    fn ratio_detects_rational_multiples() {
        let t = LaurentPoly::monomial(5, QuadRat::int(3), vec![2, -1]);
        let u = LaurentPoly::monomial(5, QuadRat::int(-6), vec![2, -1]);
        assert_eq!(
            u.ratio_to(&t),
            Some(BigRational::from_integer((-2).into()))
        );
    }
}
