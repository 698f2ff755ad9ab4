use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::ast::{Condition, Expr, Identity};
use super::canon::{binomial, canonicalize};
use super::lin::LinForm;
use super::DslError;
use crate::sequences;

/// Bind every declared parameter, unroll sums whose limits became
/// constant, and fold atoms with constant indices.
///
/// Ranges are enforced; conditions that relate parameters to each other
/// only restrict the instantiation grid and are not checked here.
pub fn substitute(id: &Identity, bindings: &BTreeMap<String, i64>) -> Result<Identity, DslError> {
    for name in bindings.keys() {
        if !id.is_param(name) {
            return Err(DslError::UnknownParam { name: name.clone() });
        }
    }
    let mut map = BTreeMap::new();
    for p in &id.params {
        let value = *bindings
            .get(&p.name)
            .ok_or_else(|| DslError::MissingBinding {
                name: p.name.clone(),
            })?;
        if value < p.lo || value > p.hi {
            return Err(DslError::OutOfRange {
                name: p.name.clone(),
                value,
                lo: p.lo,
                hi: p.hi,
            });
        }
        map.insert(p.name.clone(), LinForm::constant(value));
    }
    let sides = id
        .sides
        .iter()
        .map(|s| fold_constants(&s.substitute(&map)))
        .collect();
    let conditions = id
        .conditions
        .iter()
        .filter(|c| !id.is_param(&c.var))
        .map(|c| Condition {
            var: c.var.clone(),
            bound: vec![LinForm::constant(
                c.eval_bound(|v| bindings.get(v).copied())
                    .expect("condition bounds only mention parameters"),
            )],
        })
        .collect();
    let mut meta = id.meta.clone();
    if !id.params.is_empty() {
        let tag: Vec<String> = bindings.iter().map(|(k, v)| format!("{k}={v}")).collect();
        meta.id = format!("{}[{}]", meta.id, tag.join(","));
    }
    Ok(Identity {
        sides,
        conditions,
        params: Vec::new(),
        meta,
    })
}

/// All parameter assignments of a family, in lexicographic order of the
/// declared parameters, that satisfy the conditions placed on parameters.
pub fn param_grid(id: &Identity) -> Vec<BTreeMap<String, i64>> {
    let mut grid = vec![BTreeMap::new()];
    for p in &id.params {
        grid = grid
            .into_iter()
            .flat_map(|b: BTreeMap<String, i64>| {
                (p.lo..=p.hi).map(move |v| {
                    let mut b = b.clone();
                    b.insert(p.name.clone(), v);
                    b
                })
            })
            .collect();
    }
    grid.retain(|b| {
        id.conditions
            .iter()
            .filter(|c| id.is_param(&c.var))
            .all(|c| match c.eval_bound(|v| b.get(v).copied()) {
                Ok(lo) => b[&c.var] >= lo,
                Err(_) => false,
            })
    });
    grid
}

/// Every grid instance of a family; a parameter-free identity is its own
/// single instance.
pub fn instances(id: &Identity) -> Result<Vec<Identity>, DslError> {
    param_grid(id).iter().map(|b| substitute(id, b)).collect()
}

fn rat(v: BigInt) -> Expr {
    Expr::Const(BigRational::from_integer(v))
}

/// Unroll constant-limit sums, evaluate constant atoms, canonicalize.
pub fn fold_constants(e: &Expr) -> Expr {
    let unrolled = e.map(&mut |x| match x {
        Expr::Sum {
            var,
            lower,
            upper,
            body,
        } => match (lower.as_const(), upper.as_const()) {
            (Some(lo), Some(hi)) => {
                let terms: Vec<Expr> = (lo..=hi)
                    .map(|v| {
                        let mut m = BTreeMap::new();
                        m.insert(var.clone(), LinForm::constant(v));
                        fold_constants(&body.substitute(&m))
                    })
                    .collect();
                if terms.is_empty() {
                    Expr::int(0)
                } else {
                    Expr::Add(terms)
                }
            }
            _ => Expr::Sum {
                var,
                lower,
                upper,
                body,
            },
        },
        Expr::Fib(i) => match i.as_const() {
            Some(c) => rat(sequences::fib(c)),
            None => Expr::Fib(i),
        },
        Expr::Lucas(i) => match i.as_const().map(sequences::lucas) {
            Some(Ok(v)) => rat(v),
            _ => Expr::Lucas(i),
        },
        Expr::KFib { k, index } => match (k.as_const(), index.as_const()) {
            (Some(kc), Some(ic)) => match sequences::k_fib(kc, ic) {
                Ok(v) => rat(v),
                Err(_) => Expr::KFib { k, index },
            },
            _ => Expr::KFib { k, index },
        },
        Expr::GenFib { h0, h1, index } => match index.as_const() {
            Some(c) => rat(sequences::gen_fib(h0, h1, c)),
            None => Expr::GenFib { h0, h1, index },
        },
        Expr::Sign(s) => match s.as_const() {
            Some(c) => Expr::int(if c.rem_euclid(2) == 0 { 1 } else { -1 }),
            None => Expr::Sign(s),
        },
        Expr::Binom(a, b) => match (a.as_const(), b.as_const()) {
            (Some(n), Some(k)) => rat(binomial(n, k)),
            _ => Expr::Binom(a, b),
        },
        Expr::Var(v) => Expr::Var(v),
        other => other,
    });
    canonicalize(&unrolled)
}
