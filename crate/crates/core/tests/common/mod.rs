//! Generators and oracles shared by the property and acceptance suites.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use fiblab::catalog::Catalog;
use fiblab::dsl::{self, Expr, Identity, LinForm};
use fiblab::evaluator::eval_expr;
use fiblab::prover::{normal_form_value, QuadRat};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

/// Fibonacci numbers by plain iteration, extended to negative indices by
/// running the recurrence backwards; independent of the library.
pub fn naive_fib(n: i64) -> BigInt {
    let (mut a, mut b) = (BigInt::from(0), BigInt::from(1));
    if n >= 0 {
        for _ in 0..n {
            let c = &a + &b;
            a = b;
            b = c;
        }
    } else {
        for _ in 0..-n {
            let prev = &b - &a;
            b = a;
            a = prev;
        }
    }
    a
}

fn lin(a: i64, b: i64, c: i64) -> LinForm {
    LinForm::var("n")
        .scale(a)
        .add(&LinForm::var("m").scale(b))
        .add_const(c)
}

/// Leaves over the golden field: F, L, H and signs with indices linear in
/// `n` and `m`, plus small rational constants. Lucas indices stay
/// non-negative for non-negative `n` and `m`.
fn golden_leaf() -> impl Strategy<Value = Expr> {
    let index = (0i64..=3, 0i64..=2, -4i64..=4).prop_map(|(a, b, c)| lin(a, b, c));
    prop_oneof![
        index.clone().prop_map(Expr::Fib),
        (0i64..=3, 0i64..=2, 0i64..=4).prop_map(|(a, b, c)| Expr::Lucas(lin(a, b, c))),
        (-3i64..=3, -3i64..=3, index.clone())
            .prop_map(|(h0, h1, index)| Expr::GenFib { h0, h1, index }),
        index.prop_map(Expr::Sign),
        (-5i64..=5, 1i64..=3).prop_map(|(p, q)| {
            Expr::Const(BigRational::new(BigInt::from(p), BigInt::from(q)))
        }),
    ]
}

fn combine(leaf: BoxedStrategy<Expr>) -> impl Strategy<Value = Expr> {
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Add),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Mul),
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner, 1u32..=3).prop_map(|(e, k)| Expr::pow(e, k)),
        ]
    })
}

/// Random sum-free expressions in `n` and `m`.
pub fn golden_expr() -> impl Strategy<Value = Expr> {
    combine(golden_leaf().boxed())
}

/// Random expressions over a single k-Fibonacci field, non-negative indices.
pub fn kfib_expr() -> impl Strategy<Value = Expr> {
    (2i64..=4).prop_flat_map(|k| {
        let index = (1i64..=3, 0i64..=4).prop_map(|(a, c)| LinForm::var("n").scale(a).add_const(c));
        let leaf = prop_oneof![
            index.clone().prop_map(move |index| Expr::KFib {
                k: LinForm::constant(k),
                index
            }),
            index.prop_map(Expr::Sign),
            (-4i64..=4).prop_map(Expr::int),
        ];
        combine(leaf.boxed())
    })
}

pub fn env(n: i64, m: i64) -> BTreeMap<String, i64> {
    BTreeMap::from([("n".to_string(), n), ("m".to_string(), m)])
}

/// Value of the Binet normal form against direct evaluation, restricted to
/// the variables the expression mentions.
pub fn oracle_agrees(e: &Expr, full_env: &BTreeMap<String, i64>) -> Result<(), String> {
    let vars = e.free_vars();
    let env: BTreeMap<String, i64> = full_env
        .iter()
        .filter(|(k, _)| vars.contains(*k))
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    let direct = eval_expr(e, &env).map_err(|x| x.to_string())?;
    let normal = normal_form_value(e, &env).map_err(|x| x.to_string())?;
    if normal == QuadRat::rational(direct.clone()) {
        Ok(())
    } else {
        Err(format!("{e} at {env:?}: normal form {normal}, direct {direct}"))
    }
}

/// Every sub-expression (sides, terms, factors) of every sum-free corpus
/// instance that the normalizer accepts, with the index lower bounds of its
/// identity.
pub fn corpus_subexpressions() -> &'static [(Expr, Identity)] {
    static POOL: OnceLock<Vec<(Expr, Identity)>> = OnceLock::new();
    POOL.get_or_init(build_pool)
}

fn build_pool() -> Vec<(Expr, Identity)> {
    fn walk(e: &Expr, out: &mut Vec<Expr>) {
        out.push(e.clone());
        match e {
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| walk(x, out)),
            Expr::Neg(x) | Expr::Pow(x, _) => walk(x, out),
            _ => {}
        }
    }
    let mut pool = Vec::new();
    for entry in &Catalog::shipped().entries {
        let Ok(insts) = dsl::instances(&entry.identity) else {
            continue;
        };
        for inst in insts.into_iter().take(2) {
            if inst.has_sums() {
                continue;
            }
            let mut subs = Vec::new();
            for side in &inst.sides {
                walk(&dsl::fold_constants(side), &mut subs);
            }
            for s in subs {
                if s.free_vars().is_empty() {
                    continue;
                }
                let probe: BTreeMap<String, i64> = s
                    .free_vars()
                    .into_iter()
                    .map(|v| {
                        let lo = inst.lower_bound(&v);
                        (v, lo)
                    })
                    .collect();
                if normal_form_value(&s, &probe).is_ok() {
                    pool.push((s, inst.clone()));
                }
            }
        }
    }
    pool
}

/// Evaluate a pooled sub-expression at `offset` past each index's bound.
pub fn pooled_agrees(sub: &Expr, id: &Identity, offset: i64) -> Result<(), String> {
    let env: BTreeMap<String, i64> = sub
        .free_vars()
        .into_iter()
        .map(|v| {
            let lo = id.lower_bound(&v);
            (v, lo + offset)
        })
        .collect();
    oracle_agrees(sub, &env)
}

/// Canonical text survives a parse of itself.
pub fn render_round_trips(id: &Identity) -> Result<(), String> {
    let text = dsl::render(id);
    let back = dsl::parse_with_params(&text, &id.params).map_err(|e| format!("{text}: {e}"))?;
    let again = dsl::render(&back);
    if again == text {
        Ok(())
    } else {
        Err(format!("{text} re-rendered as {again}"))
    }
}
