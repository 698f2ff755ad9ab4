//! Umbral shift identities: expand U^n (U ± 1)^p binomially and lower each
//! power U^j to F[n+j].

use std::fmt;
use std::str::FromStr;

use super::ast::{Expr, Identity};
use super::canon::{binomial, canonicalize};
use super::lin::LinForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UmbralVariant {
    /// F[n+2p] = sum_j C(p,j) F[n+j]
    Plus,
    /// F[n-p] = sum_j C(p,j) (-1)^(p-j) F[n+j]
    Minus,
}

impl FromStr for UmbralVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "plus" => Ok(UmbralVariant::Plus),
            "minus" => Ok(UmbralVariant::Minus),
            other => Err(format!("unknown umbral variant `{other}` (plus|minus)")),
        }
    }
}

impl fmt::Display for UmbralVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UmbralVariant::Plus => "plus",
            UmbralVariant::Minus => "minus",
        })
    }
}

/// Linear identity obtained from the `p`-th umbral power. Terms on the
/// right are listed from the highest shift down.
pub fn expand_umbral(p: u32, variant: UmbralVariant) -> Identity {
    let p = i64::from(p.max(1));
    let n = LinForm::var("n");
    let lhs = match variant {
        UmbralVariant::Plus => Expr::Fib(n.add_const(2 * p)),
        UmbralVariant::Minus => Expr::Fib(n.add_const(-p)),
    };
    let terms: Vec<Expr> = (0..=p)
        .rev()
        .map(|j| {
            let mut c = binomial(p, j);
            if variant == UmbralVariant::Minus && (p - j) % 2 == 1 {
                c = -c;
            }
            Expr::Mul(vec![
                Expr::Const(c.into()),
                Expr::Fib(n.add_const(j)),
            ])
        })
        .collect();
    let mut id = Identity::new(vec![canonicalize(&lhs), canonicalize(&Expr::Add(terms))]);
    id.meta.id = format!("umbral-{variant}-{p}");
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::render;

    #[test]
    fn small_expansions() {
        assert_eq!(
            render(&expand_umbral(1, UmbralVariant::Plus)),
            "F[n+2] = F[n+1] + F[n]"
        );
        assert_eq!(
            render(&expand_umbral(1, UmbralVariant::Minus)),
            "F[n-1] = F[n+1] - F[n]"
        );
        assert_eq!(
            render(&expand_umbral(2, UmbralVariant::Plus)),
            "F[n+4] = F[n+2] + 2*F[n+1] + F[n]"
        );
        assert_eq!(
            render(&expand_umbral(2, UmbralVariant::Minus)),
            "F[n-2] = F[n+2] - 2*F[n+1] + F[n]"
        );
    }

    #[test]
    fn expansions_hold_numerically() {
        use crate::sequences::fib;
        for p in 1..=8i64 {
            for n in 0..30i64 {
                let plus: num_bigint::BigInt =
                    (0..=p).map(|j| binomial(p, j) * fib(n + j)).sum();
                assert_eq!(fib(n + 2 * p), plus);
                let minus: num_bigint::BigInt = (0..=p)
                    .map(|j| {
                        let s = if (p - j) % 2 == 1 { -1 } else { 1 };
                        binomial(p, j) * fib(n + j) * s
                    })
                    .sum();
                assert_eq!(fib(n - p), minus);
            }
        }
    }
}
