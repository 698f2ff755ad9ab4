use std::collections::BTreeMap;

use super::closed::residual_cases;
use super::{conclude, Method, PairProof, ProofOutcome, ProveError};
use crate::dsl::{Expr, Identity, LinForm};
use crate::evaluator::eval_identity;

/// One additive term of `lhs - rhs`.
enum Term {
    Closed(Expr),
    Summed {
        factor: Vec<Expr>,
        var: String,
        lower: i64,
        /// Upper limit `m·n + u` with `m >= 1`.
        m: i64,
        u: i64,
        body: Expr,
    },
}

fn flatten(e: &Expr, negated: bool, n: &str, out: &mut Vec<Term>) -> Result<(), ProveError> {
    match e {
        Expr::Add(xs) => {
            for x in xs {
                flatten(x, negated, n, out)?;
            }
        }
        Expr::Neg(x) => flatten(x, !negated, n, out)?,
        _ => {
            let mut factors: Vec<Expr> = match e {
                Expr::Mul(xs) => xs.clone(),
                other => vec![other.clone()],
            };
            if negated {
                factors.push(Expr::int(-1));
            }
            let sums: Vec<usize> = (0..factors.len())
                .filter(|&i| factors[i].contains_sum())
                .collect();
            match sums.as_slice() {
                [] => out.push(Term::Closed(Expr::Mul(factors))),
                [i] => {
                    let s = factors.remove(*i);
                    if factors.iter().any(|f| f.free_vars().contains(n)) {
                        return Err(ProveError::MalformedSum(format!(
                            "sum `{s}` is multiplied by a factor depending on `{n}`"
                        )));
                    }
                    out.push(summed(s, factors, n)?);
                }
                _ => {
                    return Err(ProveError::MalformedSum(format!(
                        "product of several sums in `{e}`"
                    )))
                }
            }
        }
    }
    Ok(())
}

fn summed(s: Expr, factor: Vec<Expr>, n: &str) -> Result<Term, ProveError> {
    let Expr::Sum { var, lower, upper, body } = s else {
        return Err(ProveError::MalformedSum(format!(
            "sum nested inside `{s}`"
        )));
    };
    if body.contains_sum() {
        return Err(ProveError::MalformedSum("nested sums".to_string()));
    }
    if body.free_vars().contains(n) {
        return Err(ProveError::MalformedSum(format!(
            "summand depends on the outer index `{n}`"
        )));
    }
    let lower = lower.as_const().ok_or_else(|| {
        ProveError::MalformedSum(format!("lower limit `{lower}` is not a constant"))
    })?;
    let order = [n.to_string()];
    let (m, u) = match upper.linear_over(&order) {
        Some((c, u)) if c[0] >= 1 => (c[0], u),
        _ => {
            return Err(ProveError::MalformedSum(format!(
                "upper limit `{upper}` is not increasing linear in `{n}`"
            )))
        }
    };
    Ok(Term::Summed {
        factor,
        var,
        lower,
        m,
        u,
        body: *body,
    })
}

/// Smallest `n` from which S(n) - S(n-1) equals the top `m` summands:
/// the previous upper limit must not fall below `lower - 1`.
fn step_valid_from(lower: i64, m: i64, u: i64) -> i64 {
    (lower - 1 - u).div_euclid(m) + i64::from((lower - 1 - u).rem_euclid(m) != 0) + 1
}

/// Prove an identity with finite sums over a single free index by showing
/// that the difference `E(n) - E(n-1)` of `E = lhs - rhs` vanishes
/// identically and that `E` vanishes on the base cases.
pub fn prove_sum(id: &Identity) -> Result<ProofOutcome, ProveError> {
    let vars = id.index_vars();
    let [n] = vars.as_slice() else {
        return Err(ProveError::Unsupported(format!(
            "summation identity with {} free indices",
            vars.len()
        )));
    };
    let n0 = id.lower_bound(n);
    let prev: BTreeMap<String, LinForm> =
        [(n.clone(), LinForm::var(n).add_const(-1))].into_iter().collect();
    let mut pairs = Vec::new();
    for (i, l, r) in id.pairs() {
        if !l.contains_sum() && !r.contains_sum() {
            pairs.push(PairProof {
                cases: residual_cases(i, l, r, &vars)?,
                base_cases: Vec::new(),
                base_failure: None,
            });
            continue;
        }
        let mut terms = Vec::new();
        flatten(l, false, n, &mut terms)?;
        flatten(r, true, n, &mut terms)?;
        let mut diff = Vec::new();
        let mut valid_from = i64::MIN;
        for t in terms {
            match t {
                Term::Closed(e) => {
                    diff.push(Expr::Neg(Box::new(e.substitute(&prev))));
                    diff.push(e);
                }
                Term::Summed { factor, var, lower, m, u, body } => {
                    valid_from = valid_from.max(step_valid_from(lower, m, u));
                    let top = LinForm::var(n).scale(m).add_const(u);
                    for j in 0..m {
                        let at: BTreeMap<String, LinForm> =
                            [(var.clone(), top.add_const(-j))].into_iter().collect();
                        let mut f = factor.clone();
                        f.push(body.substitute(&at));
                        diff.push(Expr::Mul(f));
                    }
                }
            }
        }
        let zero = Expr::int(0);
        let cases = residual_cases(i, &Expr::Add(diff), &zero, &vars)?;
        let last = n0.max(valid_from - 1);
        let pair_id = Identity {
            sides: vec![l.clone(), r.clone()],
            ..id.clone()
        };
        let mut base_failure = None;
        for b in n0..=last {
            let env: BTreeMap<String, i64> = [(n.clone(), b)].into_iter().collect();
            let v = eval_identity(&pair_id, &env)?;
            if v[0] != v[1] {
                base_failure = Some(b);
                break;
            }
        }
        pairs.push(PairProof {
            cases,
            base_cases: (n0..=last).collect(),
            base_failure,
        });
    }
    conclude(id, Method::SumInduction, pairs)
}
