//! Integer-relation search over sampled monomial values.
//!
//! A basis of products of shifted Fibonacci numbers (plus optional target
//! atoms) is sampled at consecutive indices; every exact integer relation
//! among few basis elements is extracted from the nullspace, screened on a
//! disjoint index range and finally handed to the prover.

pub mod linalg;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::catalog::{Catalog, CatalogEntry};
use crate::classifier::{classify, Class};
use crate::dsl::formal;
use crate::dsl::{canonicalize, render_expr, ClaimedClass, Expr, Identity, LinForm};
use crate::evaluator::{check_identity, Compiled, EvalError, IndexRange, Sweep};
use crate::prover::{prove, summarize, ProofOutcome, ProofStatus, ProveError};
use crate::sequences::Memo;

use linalg::{echelon, make_primitive, Echelon};

/// Largest accepted basis.
pub const MAX_BASIS: usize = 200;
/// Extra samples beyond the basis size taken by default.
pub const EXTRA_SAMPLES: usize = 10;
/// Minimum surplus of samples over basis size.
pub const MIN_SURPLUS: usize = 5;
/// Length of the disjoint screening range.
pub const SCREEN_LEN: i64 = 40;
/// Default bound on the number of nonzero coefficients in a relation.
pub const DEFAULT_MAX_TERMS: usize = 3;

/// The index variable every basis element is written in.
pub const INDEX: &str = "n";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiscoveryError {
    #[error("empty basis")]
    Empty,
    #[error("basis has {0} monomials (limit {MAX_BASIS})")]
    TooLarge(usize),
    #[error("monomial `{0}` appears twice")]
    DuplicateMonomial(String),
    #[error("monomial `{0}` must depend on `n` only")]
    NotUnivariate(String),
    #[error("{have} samples for a basis of {basis} (need at least {need})")]
    TooFewSamples { have: usize, basis: usize, need: usize },
    #[error("sample n = {n} is below the first valid index {first}")]
    SampleOutOfDomain { n: i64, first: i64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Which degree-3 products of window atoms enter the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Products {
    /// `F[n+a]^3`
    Cubes,
    /// `F[n+a]·F[n+b]^2` with `a != b`
    Split12,
    /// `F[n+a]·F[n+b]·F[n+c]` with pairwise distinct offsets
    Distinct,
    /// Every multiset of three offsets.
    All,
}

/// Non-product columns added to the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    /// `F[3n+c]`
    Triple(i64),
    /// `(-1)^n·F[n+c]`
    SignedFib(i64),
    /// `F[n+c]`
    Fib(i64),
    /// The constant 1.
    One,
    /// `(-1)^n`
    Sign,
}

fn shifted(a: i64) -> LinForm {
    LinForm::var(INDEX).add_const(a)
}

fn sign_n() -> Expr {
    Expr::Sign(LinForm::var(INDEX))
}

impl Target {
    pub fn expr(self) -> Expr {
        match self {
            Target::Triple(c) => Expr::fib(LinForm::var(INDEX).scale(3).add_const(c)),
            Target::SignedFib(c) => Expr::Mul(vec![sign_n(), Expr::fib(shifted(c))]),
            Target::Fib(c) => Expr::fib(shifted(c)),
            Target::One => Expr::int(1),
            Target::Sign => sign_n(),
        }
    }
}

/// Product of Fibonacci atoms at the given offsets, with repeated offsets
/// collected into powers.
pub fn product(offsets: &[i64]) -> Expr {
    let mut counts: BTreeMap<i64, u32> = BTreeMap::new();
    for &o in offsets {
        *counts.entry(o).or_default() += 1;
    }
    let factors: Vec<Expr> = counts
        .into_iter()
        .map(|(o, k)| match k {
            1 => Expr::fib(shifted(o)),
            k => Expr::pow(Expr::fib(shifted(o)), k),
        })
        .collect();
    match <[Expr; 1]>::try_from(factors) {
        Ok([single]) => single,
        Err(fs) => Expr::Mul(fs),
    }
}

/// Offset triples of a window, each non-increasing, highest shifts first.
pub fn offset_triples(window: RangeInclusive<i64>, products: Products) -> Vec<[i64; 3]> {
    let w: Vec<i64> = window.rev().collect();
    let mut out = Vec::new();
    for (i, &a) in w.iter().enumerate() {
        for (j, &b) in w.iter().enumerate().skip(i) {
            for &c in w.iter().skip(j) {
                let keep = match products {
                    Products::Cubes => a == c,
                    Products::Split12 => (a == b) != (b == c),
                    Products::Distinct => a != b && b != c,
                    Products::All => true,
                };
                if keep {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// Sequence-atom indices of an expression.
fn atom_indices(e: &Expr, out: &mut Vec<LinForm>) {
    match e {
        Expr::Fib(i) | Expr::Lucas(i) => out.push(i.clone()),
        Expr::KFib { index, .. } | Expr::GenFib { index, .. } => out.push(index.clone()),
        Expr::Pow(b, _) | Expr::Neg(b) => atom_indices(b, out),
        Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| atom_indices(x, out)),
        Expr::Sum { body, .. } => atom_indices(body, out),
        Expr::Sign(_) | Expr::Binom(..) | Expr::Const(_) | Expr::Var(_) => {}
    }
}

/// Ordered set of pairwise distinct monomials in `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    monomials: Vec<Expr>,
    first_index: i64,
}

impl Basis {
    /// Rejects empty, oversized, non-univariate or repeated input; repeats
    /// are detected after canonicalization.
    pub fn new(monomials: Vec<Expr>) -> Result<Basis, DiscoveryError> {
        if monomials.is_empty() {
            return Err(DiscoveryError::Empty);
        }
        if monomials.len() > MAX_BASIS {
            return Err(DiscoveryError::TooLarge(monomials.len()));
        }
        let mut seen = BTreeSet::new();
        let mut first_index = 0i64;
        let mut canonical = Vec::with_capacity(monomials.len());
        for m in &monomials {
            let c = canonicalize(m);
            let text = c.to_string();
            if c.free_vars().iter().any(|v| v != INDEX) || c.contains_sum() {
                return Err(DiscoveryError::NotUnivariate(text));
            }
            // Factor order is irrelevant: compare fully expanded forms.
            let key = format!("{:?}", formal::expand(&c).terms);
            if !seen.insert(key) {
                return Err(DiscoveryError::DuplicateMonomial(text));
            }
            let mut idx = Vec::new();
            atom_indices(&c, &mut idx);
            for lin in idx {
                // Smallest n keeping a·n + b >= 1.
                let a = lin.coeff_of(INDEX);
                let b = lin.constant_term();
                if a > 0 {
                    first_index = first_index.max(Integer::div_ceil(&(1 - b), &a));
                }
            }
            canonical.push(c);
        }
        Ok(Basis {
            monomials: canonical,
            first_index,
        })
    }

    /// Products of three window atoms followed by the target columns.
    pub fn cubic(
        window: RangeInclusive<i64>,
        products: Products,
        targets: &[Target],
    ) -> Result<Basis, DiscoveryError> {
        let mut ms: Vec<Expr> = offset_triples(window, products)
            .iter()
            .map(|t| product(t))
            .collect();
        ms.extend(targets.iter().map(|t| t.expr()));
        Basis::new(ms)
    }

    pub fn monomials(&self) -> &[Expr] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Smallest `n` at which every atom index is positive.
    pub fn first_index(&self) -> i64 {
        self.first_index
    }

    /// `first_index .. first_index + len + EXTRA_SAMPLES`.
    pub fn default_samples(&self) -> Vec<i64> {
        let n0 = self.first_index;
        (n0..n0 + (self.len() + EXTRA_SAMPLES) as i64).collect()
    }

    /// Integer value rows, one per sample (denominators cleared).
    pub fn sample_matrix(&self, samples: &[i64]) -> Result<Vec<Vec<BigInt>>, DiscoveryError> {
        let compiled = Compiled::new(&self.monomials, &[INDEX.to_string()])?;
        samples
            .par_iter()
            .map_init(Memo::new, |memo, &n| {
                let values = compiled.eval_sides(&[n], memo)?;
                let lcm = values.iter().fold(BigInt::one(), |l, v| l.lcm(v.denom()));
                Ok(values
                    .iter()
                    .map(|v| v.numer() * (&lcm / v.denom()))
                    .collect())
            })
            .collect()
    }
}

/// A primitive integer relation among basis elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationCandidate {
    /// One coefficient per basis element; gcd 1, first nonzero positive.
    pub coeffs: Vec<BigInt>,
    /// The relation as `positive terms = negative terms ; n >= first index`.
    pub identity: Identity,
}

impl RelationCandidate {
    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&i| !self.coeffs[i].is_zero()).collect()
    }

    pub fn norm1(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    fn sort_key(&self) -> (BigInt, usize, Vec<BigInt>) {
        (self.norm1(), self.support().len(), self.coeffs.clone())
    }
}

fn scaled(c: &BigInt, m: &Expr) -> Expr {
    if c.is_one() {
        m.clone()
    } else {
        Expr::Mul(vec![Expr::Const(c.clone().into()), m.clone()])
    }
}

/// `Σ cᵢ·mᵢ = 0` rewritten with positive terms left, negated negative terms
/// right; an empty side is `0`.
pub fn relation_identity(basis: &Basis, coeffs: &[BigInt], first_index: i64) -> Identity {
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for (c, m) in coeffs.iter().zip(&basis.monomials) {
        if c.is_positive() {
            lhs.push(scaled(c, m));
        } else if c.is_negative() {
            rhs.push(scaled(&-c, m));
        }
    }
    let side = |mut ts: Vec<Expr>| match ts.len() {
        0 => Expr::int(0),
        1 => ts.remove(0),
        _ => Expr::Add(ts),
    };
    Identity::new(vec![canonicalize(&side(lhs)), canonicalize(&side(rhs))])
        .with_condition(INDEX, first_index)
}

/// Nullspace vectors of `e` restricted to the columns in `cols`.
fn sub_nullspace(e: &Echelon, cols: &[usize]) -> Vec<Vec<BigInt>> {
    let sub = echelon(
        e.rows
            .iter()
            .map(|r| cols.iter().map(|&c| r[c].clone()).collect::<Vec<_>>()),
    );
    sub.nullspace(cols.len())
}

fn subsets(n: usize, size: usize, first: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![first];
    fn go(n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        let start = cur.last().map_or(0, |&l| l + 1);
        for c in start..n {
            cur.push(c);
            go(n, size, cur, out);
            cur.pop();
        }
    }
    go(n, size, &mut cur, &mut out);
    out
}

/// Minimal relations (circuits) with at most `max_terms` nonzero entries,
/// plus the whole nullspace when it is one-dimensional.
fn relations(e: &Echelon, ncols: usize, max_terms: usize) -> BTreeSet<Vec<BigInt>> {
    let found: Vec<Vec<BigInt>> = (0..ncols)
        .into_par_iter()
        .flat_map_iter(|first| {
            (1..=max_terms.min(ncols - first))
                .flat_map(move |size| subsets(ncols, size, first))
                .filter_map(move |cols| {
                    let ns = sub_nullspace(e, &cols);
                    let [v] = <[Vec<BigInt>; 1]>::try_from(ns).ok()?;
                    if v.iter().any(Zero::is_zero) {
                        return None;
                    }
                    let mut full = vec![BigInt::zero(); ncols];
                    for (&c, x) in cols.iter().zip(v) {
                        full[c] = x;
                    }
                    make_primitive(&mut full);
                    Some(full)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut out: BTreeSet<Vec<BigInt>> = found.into_iter().collect();
    if let Ok([v]) = <[Vec<BigInt>; 1]>::try_from(e.nullspace(ncols)) {
        out.insert(v);
    }
    out
}

/// Search with the default samples and term bound.
pub fn search_default(basis: &Basis) -> Result<Vec<RelationCandidate>, DiscoveryError> {
    search(basis, &basis.default_samples(), DEFAULT_MAX_TERMS)
}

/// Exact relations among at most `max_terms` basis elements holding at
/// every sample, minus those falsified on the next [`SCREEN_LEN`] indices,
/// sorted by (1-norm, term count, coefficients).
pub fn search(
    basis: &Basis,
    samples: &[i64],
    max_terms: usize,
) -> Result<Vec<RelationCandidate>, DiscoveryError> {
    let need = basis.len() + MIN_SURPLUS;
    let distinct: BTreeSet<i64> = samples.iter().copied().collect();
    if distinct.len() < need {
        return Err(DiscoveryError::TooFewSamples {
            have: distinct.len(),
            basis: basis.len(),
            need,
        });
    }
    let first = basis.first_index;
    if let Some(&n) = distinct.iter().next().filter(|&&n| n < first) {
        return Err(DiscoveryError::SampleOutOfDomain { n, first });
    }
    let samples: Vec<i64> = distinct.into_iter().collect();
    let matrix = basis.sample_matrix(&samples)?;
    let e = echelon(matrix);
    let vectors = relations(&e, basis.len(), max_terms.max(1));

    let last = *samples.last().unwrap_or(&first);
    let screen = Sweep::Explicit(vec![IndexRange {
        var: INDEX.to_string(),
        start: last + 1,
        end: last + SCREEN_LEN,
    }]);
    let candidates: Vec<RelationCandidate> = vectors
        .into_iter()
        .map(|coeffs| RelationCandidate {
            identity: relation_identity(basis, &coeffs, first),
            coeffs,
        })
        .collect();
    let checked: Vec<Option<RelationCandidate>> = candidates
        .into_par_iter()
        .map(|c| {
            let report = check_identity(&c.identity, &screen)?;
            Ok(report.all_equal().then_some(c))
        })
        .collect::<Result<_, DiscoveryError>>()?;
    let mut out: Vec<RelationCandidate> = checked.into_iter().flatten().collect();
    out.sort_by_cached_key(RelationCandidate::sort_key);
    for (i, c) in out.iter_mut().enumerate() {
        c.identity.meta.id = format!("discovered-{}", i + 1);
    }
    Ok(out)
}

/// A candidate the prover established for all valid indices.
#[derive(Debug, Clone)]
pub struct Discovery {
    pub identity: Identity,
    pub outcome: ProofOutcome,
}

/// Run the prover on every candidate and keep the proven ones, in input
/// order. Candidates the prover cannot handle are dropped.
pub fn confirm(cands: &[RelationCandidate]) -> Vec<Discovery> {
    cands
        .par_iter()
        .map(|c| -> Result<Option<Discovery>, ProveError> {
            let outcomes = prove(&c.identity)?;
            let proven = matches!(summarize(&outcomes), Some((ProofStatus::Proven, _)));
            Ok(proven.then(|| Discovery {
                identity: c.identity.clone(),
                outcome: outcomes.into_iter().next().expect("one instance"),
            }))
        })
        .filter_map(|r| r.ok().flatten())
        .collect()
}

fn claimed(class: Class) -> ClaimedClass {
    match class {
        Class::HomogeneousCubic => ClaimedClass::HomogeneousCubic,
        Class::NonHomogeneousCubic => ClaimedClass::NonhomogeneousCubic,
        Class::GeneralFamily => ClaimedClass::General,
        Class::Other(_) => ClaimedClass::Warmup,
    }
}

/// Discoveries as catalog records, classified by their own degree profile.
pub fn to_catalog(discoveries: &[Discovery]) -> Catalog {
    let entries = discoveries
        .iter()
        .map(|d| {
            let mut identity = d.identity.clone();
            identity.meta.claimed_class = Some(claimed(classify(&identity)));
            CatalogEntry::from_identity(identity)
        })
        .collect();
    Catalog {
        header: vec![crate::catalog::MAGIC.to_string()],
        exclusions: Vec::new(),
        entries,
    }
}

/// Short text form of a candidate's relation, e.g. `F[n+1]^3 + ... = ...`.
pub fn describe(c: &RelationCandidate) -> String {
    crate::dsl::render_sides(&c.identity)
}

/// Coefficients as machine integers when they fit.
pub fn small_coeffs(c: &RelationCandidate) -> Option<Vec<i64>> {
    c.coeffs.iter().map(ToPrimitive::to_i64).collect()
}

/// Canonical text of every basis element, in column order.
pub fn basis_labels(basis: &Basis) -> Vec<String> {
    basis.monomials.iter().map(render_expr).collect()
}

/// Parse `lo..hi` with optional signs.
pub fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let bad = || format!("bad range `{s}` (expected LO..HI)");
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Parse `triple:0,signed:0..6,fib:1,one,sign`.
pub fn parse_targets(s: &str) -> Result<Vec<Target>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (kind, arg) = match item.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (item, None),
        };
        let offsets = |arg: Option<&str>| -> Result<Vec<i64>, String> {
            let a = arg.ok_or_else(|| format!("target `{kind}` needs an offset"))?;
            if a.contains("..") {
                let (lo, hi) = parse_range(a)?;
                Ok((lo..=hi).collect())
            } else {
                a.parse()
                    .map(|c| vec![c])
                    .map_err(|_| format!("bad offset `{a}`"))
            }
        };
        match kind {
            "triple" => out.extend(offsets(arg)?.into_iter().map(Target::Triple)),
            "signed" => out.extend(offsets(arg)?.into_iter().map(Target::SignedFib)),
            "fib" => out.extend(offsets(arg)?.into_iter().map(Target::Fib)),
            "one" => out.push(Target::One),
            "sign" => out.push(Target::Sign),
            other => {
                return Err(format!(
                    "unknown target `{other}` (triple, signed, fib, one, sign)"
                ))
            }
        }
    }
    Ok(out)
}

impl FromStr for Products {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cubes" => Ok(Products::Cubes),
            "split12" => Ok(Products::Split12),
            "distinct" => Ok(Products::Distinct),
            "all" => Ok(Products::All),
            other => Err(format!("unknown products `{other}` (cubes, split12, distinct, all)")),
        }
    }
}
