use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// `a + b·√d` with rational `a`, `b`. The radicand is carried by the
/// caller (every value in one computation shares it).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct QuadRat {
    pub a: BigRational,
    pub b: BigRational,
}

impl QuadRat {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        QuadRat { a, b }
    }

    pub fn zero() -> Self {
        QuadRat::default()
    }

    pub fn one() -> Self {
        QuadRat::rational(BigRational::one())
    }

    pub fn rational(a: BigRational) -> Self {
        QuadRat {
            a,
            b: BigRational::zero(),
        }
    }

    pub fn int(v: i64) -> Self {
        QuadRat::rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn add(&self, o: &QuadRat) -> QuadRat {
        QuadRat::new(&self.a + &o.a, &self.b + &o.b)
    }

    pub fn sub(&self, o: &QuadRat) -> QuadRat {
        QuadRat::new(&self.a - &o.a, &self.b - &o.b)
    }

    pub fn neg(&self) -> QuadRat {
        QuadRat::new(-&self.a, -&self.b)
    }

    pub fn scale(&self, c: &BigRational) -> QuadRat {
        QuadRat::new(&self.a * c, &self.b * c)
    }

    pub fn mul(&self, o: &QuadRat, d: i64) -> QuadRat {
        let d = BigRational::from_integer(BigInt::from(d));
        QuadRat::new(
            &self.a * &o.a + &self.b * &o.b * d,
            &self.a * &o.b + &self.b * &o.a,
        )
    }

    /// `a² - d·b²`
    pub fn norm(&self, d: i64) -> BigRational {
        let d = BigRational::from_integer(BigInt::from(d));
        &self.a * &self.a - &self.b * &self.b * d
    }

    /// Multiplicative inverse; `None` for zero. Requires `d` to be a
    /// non-square so that the norm of a nonzero value is nonzero.
    pub fn inv(&self, d: i64) -> Option<QuadRat> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm(d);
        Some(QuadRat::new(&self.a / &n, -&self.b / &n))
    }

    /// Integer power; negative exponents use the inverse.
    pub fn pow(&self, e: i64, d: i64) -> QuadRat {
        let base = if e < 0 {
            self.inv(d).expect("power of zero with negative exponent")
        } else {
            self.clone()
        };
        let mut acc = QuadRat::one();
        let mut sq = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&sq, d);
            }
            sq = sq.mul(&sq, d);
            k >>= 1;
        }
        acc
    }

    pub fn to_f64(&self, d: i64) -> f64 {
        use num_traits::ToPrimitive;
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * (d as f64).sqrt()
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for QuadRat {
    /// Prints with the radicand written as `r`, e.g. `1/2+1/2r`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => f.write_str(&fmt_rat(&self.a)),
            (true, false) => write!(f, "{}r", fmt_rat(&self.b)),
            (false, false) => {
                let sign = if self.b.is_negative() { "-" } else { "+" };
                write!(f, "{}{}{}r", fmt_rat(&self.a), sign, fmt_rat(&self.b.abs()))
            }
        }
    }
}
