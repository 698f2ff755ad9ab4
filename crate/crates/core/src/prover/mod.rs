//! Exact symbolic verification.
//!
//! Closed identities are normalized by Binet substitution, one Laurent
//! polynomial per parity case; summation identities are reduced to a closed
//! difference step plus exactly evaluated base cases. Families are proven
//! instance by instance over their parameter grid.

mod binet;
mod closed;
mod laurent;
mod quad;
mod sum;

use std::collections::BTreeMap;

use num_rational::BigRational;
use rayon::prelude::*;
use thiserror::Error;

use crate::dsl::{self, formal, DslError, Expr, Identity};
use crate::evaluator::{self, CheckStatus, EvalError, IndexRange, Sweep};

pub use binet::{binet_normalize, field_of, parity_cases, Field};
pub use closed::prove_closed;
pub use laurent::LaurentPoly;
pub use quad::QuadRat;
pub use sum::prove_sum;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProveError {
    #[error("unsupported by the symbolic prover: {0}")]
    Unsupported(String),
    #[error("malformed sum: {0}")]
    MalformedSum(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Dsl(#[from] DslError),
}

/// Upper index bound used when only bounded verification is possible.
pub const BOUNDED_LIMIT: i64 = 30;

/// Sweep used to look for a counterexample once a residual is nonzero.
fn falsification_sweep() -> Sweep {
    Sweep::Consecutive {
        per_index: 60,
        max_assignments: 200_000,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofStatus {
    Proven,
    VerifiedUpTo { ranges: Vec<IndexRange> },
    Falsified { assignment: Vec<(String, i64)> },
}

impl ProofStatus {
    pub fn name(&self) -> &'static str {
        match self {
            ProofStatus::Proven => "Proven",
            ProofStatus::VerifiedUpTo { .. } => "VerifiedUpTo",
            ProofStatus::Falsified { .. } => "Falsified",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ProofStatus::Proven => 0,
            ProofStatus::VerifiedUpTo { .. } => 1,
            ProofStatus::Falsified { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    ClosedBinet,
    SumInduction,
    BoundedOnly,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedBinet => "ClosedBinet",
            Method::SumInduction => "SumInduction",
            Method::BoundedOnly => "BoundedOnly",
        }
    }
}

/// Residual of one adjacent side pair under one parity assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCase {
    pub pair: usize,
    /// +1 for even, -1 for odd, per free index.
    pub signs: Vec<(String, i8)>,
    pub residual: LaurentPoly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofOutcome {
    pub id: String,
    /// Parameter values of this instance (empty without parameters).
    pub bindings: Vec<(String, i64)>,
    pub status: ProofStatus,
    pub method: Method,
    pub trace: Vec<ParityCase>,
    /// Index values checked directly as base cases of a summation proof.
    pub base_cases: Vec<i64>,
    pub diagnostic: Option<String>,
}

impl ProofOutcome {
    pub fn is_proven(&self) -> bool {
        self.status == ProofStatus::Proven
    }
}

/// Per-pair result shared by the closed and summation provers.
pub(crate) struct PairProof {
    pub cases: Vec<ParityCase>,
    pub base_cases: Vec<i64>,
    pub base_failure: Option<i64>,
}

/// Turn pair proofs into an outcome, searching for a counterexample when a
/// residual is nonzero.
pub(crate) fn conclude(id: &Identity, method: Method, pairs: Vec<PairProof>) -> Result<ProofOutcome, ProveError> {
    let mut trace = Vec::new();
    let mut base_cases = Vec::new();
    let mut base_failure = None;
    for p in pairs {
        trace.extend(p.cases);
        base_cases.extend(p.base_cases);
        base_failure = base_failure.or(p.base_failure);
    }
    base_cases.sort_unstable();
    base_cases.dedup();
    let residual_zero = trace.iter().all(|c| c.residual.is_zero());
    let var = id.index_vars().into_iter().next().unwrap_or_default();
    let (status, diagnostic) = if let Some(n) = base_failure {
        (
            ProofStatus::Falsified {
                assignment: vec![(var, n)],
            },
            Some(format!("base case fails at {n}")),
        )
    } else if residual_zero {
        (ProofStatus::Proven, None)
    } else {
        let report = evaluator::check_identity(id, &falsification_sweep())?;
        match report.status {
            CheckStatus::CounterexampleAt { assignment, .. } => {
                (ProofStatus::Falsified { assignment }, None)
            }
            CheckStatus::AllEqual => (
                ProofStatus::VerifiedUpTo {
                    ranges: report.ranges,
                },
                Some("internal: nonzero residual but no counterexample in the sweep".to_string()),
            ),
        }
    };
    Ok(ProofOutcome {
        id: id.meta.id.clone(),
        bindings: Vec::new(),
        status,
        method,
        trace,
        base_cases,
        diagnostic,
    })
}

/// Why an instance can only be verified numerically, if it must be.
fn needs_bounded(id: &Identity) -> Option<String> {
    let idx = id.index_vars();
    let mentions_index = |l: &dsl::LinForm| idx.iter().any(|v| l.mentions(v));
    for s in &id.sides {
        let found = s.any(&|e| match e {
            Expr::Binom(a, b) => mentions_index(a) || mentions_index(b),
            Expr::Pow(_, k) => k.as_const().is_none(),
            Expr::Var(_) => true,
            _ => false,
        });
        if found {
            return Some(format!(
                "`{}` has a binomial, exponent or value depending on a free index",
                dsl::render_sides(id)
            ));
        }
    }
    None
}

/// Numeric verification up to [`BOUNDED_LIMIT`] in every index.
pub fn prove_bounded(id: &Identity, reason: String) -> Result<ProofOutcome, ProveError> {
    let report = evaluator::check_identity(id, &Sweep::UpTo(BOUNDED_LIMIT))?;
    let status = match report.status {
        CheckStatus::AllEqual => ProofStatus::VerifiedUpTo {
            ranges: report.ranges,
        },
        CheckStatus::CounterexampleAt { assignment, .. } => ProofStatus::Falsified { assignment },
    };
    Ok(ProofOutcome {
        id: id.meta.id.clone(),
        bindings: Vec::new(),
        status,
        method: Method::BoundedOnly,
        trace: Vec::new(),
        base_cases: Vec::new(),
        diagnostic: Some(reason),
    })
}

/// Prove one parameter-free identity by whichever route fits its shape.
pub fn prove_instance(id: &Identity) -> Result<ProofOutcome, ProveError> {
    let folded = Identity {
        sides: id.sides.iter().map(dsl::fold_constants).collect(),
        ..id.clone()
    };
    if let Some(reason) = needs_bounded(&folded) {
        return prove_bounded(&folded, reason);
    }
    let attempt = if folded.has_sums() {
        prove_sum(&folded)
    } else {
        prove_closed(&folded)
    };
    match attempt {
        Err(e @ (ProveError::Unsupported(_) | ProveError::MalformedSum(_))) => {
            prove_bounded(&folded, e.to_string())
        }
        other => other,
    }
}

/// Prove an identity; families yield one outcome per grid instance, in grid
/// order.
pub fn prove(id: &Identity) -> Result<Vec<ProofOutcome>, ProveError> {
    let grid = dsl::param_grid(id);
    grid.par_iter()
        .map(|bindings| {
            let inst = if id.params.is_empty() {
                id.clone()
            } else {
                dsl::substitute(id, bindings)?
            };
            let mut out = prove_instance(&inst)?;
            out.id = id.meta.id.clone();
            out.bindings = bindings.iter().map(|(k, v)| (k.clone(), *v)).collect();
            Ok(out)
        })
        .collect()
}

/// Worst status over a list of outcomes, with the method that produced it.
pub fn summarize(outcomes: &[ProofOutcome]) -> Option<(&ProofStatus, Method)> {
    outcomes
        .iter()
        .max_by_key(|o| (o.status.rank(), o.method))
        .map(|o| (&o.status, o.method))
}

/// Result of comparing an instantiated family member with a stated
/// identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fidelity {
    /// `c` with (lhs - rhs) of the instance equal to c·(lhs - rhs) of the
    /// target, term by term before any use of the recurrence.
    pub formal_factor: Option<BigRational>,
    /// Binet residuals of instance - c·target, one per parity case.
    pub residuals: Vec<LaurentPoly>,
}

impl Fidelity {
    pub fn holds(&self) -> bool {
        self.formal_factor.is_some() && self.residuals.iter().all(LaurentPoly::is_zero)
    }
}

/// Check that `instance` is `target` up to a nonzero factor: formally, and
/// as a zero Binet residual of their difference.
pub fn fidelity(instance: &Identity, target: &Identity) -> Result<Fidelity, ProveError> {
    let a = Identity {
        sides: instance.sides.iter().map(dsl::fold_constants).collect(),
        ..instance.clone()
    };
    let factor = formal::proportional(&formal::relation(&a), &formal::relation(target));
    let c = factor.clone().unwrap_or_else(|| BigRational::from_integer(1.into()));
    let diff_a = Expr::Add(vec![a.sides[0].clone(), dsl::canonicalize(&Expr::Neg(Box::new(a.sides[1].clone())))]);
    let diff_b = Expr::Add(vec![target.sides[0].clone(), Expr::Neg(Box::new(target.sides[1].clone()))]);
    let difference = dsl::canonicalize(&Expr::Add(vec![
        diff_a,
        Expr::Mul(vec![Expr::Const(-c), diff_b]),
    ]));
    let mut vars: Vec<String> = a.index_vars();
    vars.extend(target.index_vars());
    vars.sort();
    vars.dedup();
    let field = field_of(&[&difference])?;
    let residuals = parity_cases(vars.len())
        .iter()
        .map(|signs| binet::Normalizer::new(field, &vars, signs).normalize(&difference))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Fidelity {
        formal_factor: factor,
        residuals,
    })
}

/// Evaluate a normal form at tᵢ = α^{xᵢ}; used to cross-check the
/// normalizer against direct evaluation.
pub fn normal_form_value(e: &Expr, env: &BTreeMap<String, i64>) -> Result<QuadRat, ProveError> {
    let vars: Vec<String> = env.keys().cloned().collect();
    let xs: Vec<i64> = env.values().copied().collect();
    let signs: Vec<i8> = xs.iter().map(|x| if x % 2 == 0 { 1 } else { -1 }).collect();
    let field = field_of(&[e])?;
    let poly = binet::Normalizer::new(field, &vars, &signs).normalize(e)?;
    Ok(poly.eval_at(&field.alpha(), &xs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_identity, parse_with_params, ParamDecl};

    #[test]
    fn cassini_proven() {
        let id = parse_identity("F[n-1]*F[n+1] - F[n]^2 = (-1)^n").unwrap();
        let out = prove(&id).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].is_proven());
        assert_eq!(out[0].method, Method::ClosedBinet);
        assert_eq!(out[0].trace.len(), 2);
    }

    #[test]
    fn false_identity_falsified_early() {
        let id = parse_identity("F[n+1] = F[n]").unwrap();
        let out = prove(&id).unwrap();
        match &out[0].status {
            ProofStatus::Falsified { assignment } => assert!(assignment[0].1 <= 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn binomial_on_free_index_is_bounded() {
        let params = [
            ParamDecl { name: "q".into(), lo: 3, hi: 4 },
            ParamDecl { name: "p".into(), lo: 0, hi: 1 },
        ];
        let id = parse_with_params(
            "Sum(k, 0, n, C(n, k)*F[q*k+p]*F[q-2]^(n-k)) = F[q]^n*F[2n+p] ; n >= 1",
            &params,
        )
        .unwrap();
        let out = prove(&id).unwrap();
        assert_eq!(out.len(), 4);
        for o in &out {
            assert_eq!(o.method, Method::BoundedOnly);
            match &o.status {
                ProofStatus::VerifiedUpTo { ranges } => {
                    assert_eq!(ranges[0], IndexRange { var: "n".into(), start: 1, end: 30 })
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn family_instance_matches_shift_identity() {
        let params = [
            ParamDecl { name: "k".into(), lo: 0, hi: 3 },
            ParamDecl { name: "r".into(), lo: 0, hi: 3 },
            ParamDecl { name: "m".into(), lo: 0, hi: 3 },
        ];
        let fam = parse_with_params(
            "F[m]^k*F[n] = (-1)^(k*r)*Sum(h, 0, k, C(k, h)*(-1)^h*F[r]^h*F[r+m]^(k-h)*F[n+k*r+h*m]) ; n >= 0",
            &params,
        )
        .unwrap();
        let b: BTreeMap<String, i64> = [("k", 2), ("r", 1), ("m", 1)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let inst = dsl::substitute(&fam, &b).unwrap();
        let target = parse_identity("F[n] = F[n+2] - 2*F[n+3] + F[n+4] ; n >= 0").unwrap();
        let fid = fidelity(&inst, &target).unwrap();
        assert!(fid.holds());
        let wrong = parse_identity("F[n] = F[n+2] - F[n+1] ; n >= 0").unwrap();
        assert!(!fidelity(&inst, &wrong).unwrap().holds());
    }
}
