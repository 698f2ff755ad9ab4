//! Degree analysis and homogeneity classification.
//!
//! Degree counts sequence atoms (F, L, Fk, H) with multiplicity after full
//! distribution; signs, binomials and constants have degree 0, and a sum
//! contributes the degree of its body.

use std::fmt;

use serde::Serialize;

use crate::dsl::formal;
use crate::dsl::{ClaimedClass, Identity};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeProfile {
    /// Degree of every additive term of every side, sorted.
    pub degrees: Vec<u32>,
    pub max_degree: u32,
    pub has_constant: bool,
    pub has_parameters: bool,
    pub index_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Class {
    HomogeneousCubic,
    NonHomogeneousCubic,
    GeneralFamily,
    Other(u32),
}

impl Class {
    /// Whether a stated class is consistent with this verdict. Warm-ups are
    /// stated for non-cubic identities only.
    pub fn agrees_with(self, claimed: ClaimedClass) -> bool {
        match claimed {
            ClaimedClass::HomogeneousCubic => self == Class::HomogeneousCubic,
            ClaimedClass::NonhomogeneousCubic => self == Class::NonHomogeneousCubic,
            ClaimedClass::General => self == Class::GeneralFamily,
            ClaimedClass::Warmup => matches!(self, Class::GeneralFamily | Class::Other(_)),
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Class::HomogeneousCubic => f.write_str("HomogeneousCubic"),
            Class::NonHomogeneousCubic => f.write_str("NonHomogeneousCubic"),
            Class::GeneralFamily => f.write_str("GeneralFamily"),
            Class::Other(d) => write!(f, "Other({d})"),
        }
    }
}

pub fn degree_profile(id: &Identity) -> DegreeProfile {
    let mut degrees: Vec<u32> = id
        .sides
        .iter()
        .flat_map(|s| formal::expand_sum_bodies(s).degrees())
        .collect();
    degrees.sort_unstable();
    DegreeProfile {
        max_degree: degrees.iter().copied().max().unwrap_or(0),
        has_constant: degrees.contains(&0),
        has_parameters: !id.params.is_empty(),
        index_count: id.index_vars().len(),
        degrees,
    }
}

/// Families (declared parameters or several free indices) first; otherwise
/// cubic iff the maximum degree is 3, homogeneous iff every term has degree
/// exactly 3.
pub fn classify(id: &Identity) -> Class {
    let p = degree_profile(id);
    if p.has_parameters || p.index_count > 1 {
        Class::GeneralFamily
    } else if p.max_degree != 3 {
        Class::Other(p.max_degree)
    } else if p.degrees.iter().all(|&d| d == 3) {
        Class::HomogeneousCubic
    } else {
        Class::NonHomogeneousCubic
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_identity;

    fn class(s: &str) -> Class {
        classify(&parse_identity(s).unwrap())
    }

    #[test]
    fn block_sum_is_homogeneous() {
        assert_eq!(
            class("2*Sum(k, 0, n, F[k]^2*F[k+1]) = F[n]*F[n+1]*F[n+2] ; n >= 0"),
            Class::HomogeneousCubic
        );
    }

    #[test]
    fn triple_index_atom_has_degree_one() {
        assert_eq!(
            class("F[n+1]^3 + F[n]^3 - F[n-1]^3 = F[3n] ; n >= 1"),
            Class::NonHomogeneousCubic
        );
    }

    #[test]
    fn quadratic_is_other() {
        assert_eq!(class("F[2n+1] = F[n+1]^2 + F[n]^2"), Class::Other(2));
    }

    #[test]
    fn signs_do_not_break_homogeneity() {
        assert_eq!(
            class("2*Sum(k, 0, n, (-1)^k*F[k]*F[k+1]^2) = (-1)^n*F[n]*F[n+1]*F[n+2]"),
            Class::HomogeneousCubic
        );
    }

    #[test]
    fn constant_term_breaks_homogeneity() {
        assert_eq!(
            class("2*Sum(k, 0, n, (-1)^k*F[k+1]^3) = F[n+4] + (-1)^n*F[n]*F[n+2]^2 - 1"),
            Class::NonHomogeneousCubic
        );
    }

    #[test]
    fn several_indices_form_a_family() {
        assert_eq!(
            class("F[r+1]*F[s+1]*F[t+1] + F[r]*F[s]*F[t] - F[r-1]*F[s-1]*F[t-1] = F[r+s+t]"),
            Class::GeneralFamily
        );
    }

    #[test]
    fn warmups_agree_only_with_non_cubic() {
        assert!(Class::Other(2).agrees_with(ClaimedClass::Warmup));
        assert!(!Class::HomogeneousCubic.agrees_with(ClaimedClass::Warmup));
    }
}
