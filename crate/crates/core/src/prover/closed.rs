use super::binet::{field_of, parity_cases, Normalizer};
use super::{conclude, Method, PairProof, ParityCase, ProofOutcome, ProveError};
use crate::dsl::{Expr, Identity};

/// Residuals of `lhs - rhs` over every parity case of `vars`.
pub(crate) fn residual_cases(
    pair: usize,
    lhs: &Expr,
    rhs: &Expr,
    vars: &[String],
) -> Result<Vec<ParityCase>, ProveError> {
    let field = field_of(&[lhs, rhs])?;
    parity_cases(vars.len())
        .into_iter()
        .map(|signs| {
            let n = Normalizer::new(field, vars, &signs);
            let residual = n.normalize(lhs)?.sub(&n.normalize(rhs)?);
            Ok(ParityCase {
                pair,
                signs: vars.iter().cloned().zip(signs.iter().copied()).collect(),
                residual,
            })
        })
        .collect()
}

/// Prove a sum-free identity by Binet normalization of each side pair.
pub fn prove_closed(id: &Identity) -> Result<ProofOutcome, ProveError> {
    let vars = id.index_vars();
    let pairs = id
        .pairs()
        .map(|(i, l, r)| {
            Ok(PairProof {
                cases: residual_cases(i, l, r, &vars)?,
                base_cases: Vec::new(),
                base_failure: None,
            })
        })
        .collect::<Result<Vec<_>, ProveError>>()?;
    conclude(id, Method::ClosedBinet, pairs)
}
