//! Exact evaluation and falsification sweeps.
//!
//! Expressions are compiled once into a slot-addressed tree so that the
//! sweep loop does no name lookups. Values stay integral until a rational
//! constant forces a fraction.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::dsl::{self, binomial, DslError, Expr, Identity, LinForm};
use crate::sequences::{Memo, SeqError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error(transparent)]
    Sequence(#[from] SeqError),
    #[error("negative exponent {0}")]
    NegativeExponent(i64),
    #[error("index {0} is out of the supported range")]
    IndexTooLarge(i64),
    #[error(transparent)]
    Dsl(#[from] DslError),
}

/// Largest index any atom may be evaluated at; beyond this a sweep is a
/// user error rather than a computation.
const MAX_INDEX: i64 = 1_000_000;

#[derive(Debug, Clone)]
enum Num {
    Int(BigInt),
    Rat(BigRational),
}

impl Num {
    fn zero() -> Num {
        Num::Int(BigInt::zero())
    }

    fn one() -> Num {
        Num::Int(BigInt::one())
    }

    fn from_rational(r: &BigRational) -> Num {
        if r.is_integer() {
            Num::Int(r.numer().clone())
        } else {
            Num::Rat(r.clone())
        }
    }

    fn into_rational(self) -> BigRational {
        match self {
            Num::Int(i) => BigRational::from_integer(i),
            Num::Rat(r) => r,
        }
    }

    fn settle(r: BigRational) -> Num {
        if r.is_integer() {
            Num::Int(r.to_integer())
        } else {
            Num::Rat(r)
        }
    }

    fn add(self, other: Num) -> Num {
        match (self, other) {
            (Num::Int(a), Num::Int(b)) => Num::Int(a + b),
            (a, b) => Num::settle(a.into_rational() + b.into_rational()),
        }
    }

    fn mul(self, other: Num) -> Num {
        match (self, other) {
            (Num::Int(a), Num::Int(b)) => Num::Int(a * b),
            (a, b) => Num::settle(a.into_rational() * b.into_rational()),
        }
    }

    fn neg(self) -> Num {
        match self {
            Num::Int(a) => Num::Int(-a),
            Num::Rat(r) => Num::Rat(-r),
        }
    }

    fn pow(self, e: u32) -> Num {
        match self {
            Num::Int(a) => Num::Int(num_traits::pow(a, e as usize)),
            Num::Rat(r) => Num::Rat(dsl_rational_pow(&r, e)),
        }
    }
}

fn dsl_rational_pow(r: &BigRational, e: u32) -> BigRational {
    BigRational::new(
        num_traits::pow(r.numer().clone(), e as usize),
        num_traits::pow(r.denom().clone(), e as usize),
    )
}

/// A linear form over variable slots.
#[derive(Debug, Clone)]
struct SlotLin {
    terms: Vec<(Vec<usize>, i64)>,
    constant: i64,
}

impl SlotLin {
    fn eval(&self, slots: &[i64]) -> i64 {
        let mut acc = self.constant;
        for (vars, c) in &self.terms {
            let mut p = *c;
            for &v in vars {
                p *= slots[v];
            }
            acc += p;
        }
        acc
    }
}

#[derive(Debug, Clone)]
enum Node {
    Const(Num),
    Fib(SlotLin),
    Lucas(SlotLin),
    KFib(SlotLin, SlotLin),
    GenFib(i64, i64, SlotLin),
    Sign(SlotLin),
    Binom(SlotLin, SlotLin),
    Var(usize),
    Pow(Box<Node>, SlotLin),
    Neg(Box<Node>),
    Add(Vec<Node>),
    Mul(Vec<Node>),
    Sum {
        slot: usize,
        lower: SlotLin,
        upper: SlotLin,
        body: Box<Node>,
    },
}

struct Compiler {
    names: Vec<String>,
    scope: Vec<(String, usize)>,
}

impl Compiler {
    fn lookup(&self, name: &str) -> Result<usize, EvalError> {
        self.scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
            .ok_or_else(|| EvalError::Unbound(name.to_string()))
    }

    fn lin(&self, l: &LinForm) -> Result<SlotLin, EvalError> {
        let mut terms = Vec::new();
        for (vars, c) in l.terms() {
            let slots = vars
                .iter()
                .map(|v| self.lookup(v))
                .collect::<Result<Vec<_>, _>>()?;
            terms.push((slots, c));
        }
        Ok(SlotLin {
            terms,
            constant: l.constant_term(),
        })
    }

    fn compile(&mut self, e: &Expr) -> Result<Node, EvalError> {
        Ok(match e {
            Expr::Fib(i) => Node::Fib(self.lin(i)?),
            Expr::Lucas(i) => Node::Lucas(self.lin(i)?),
            Expr::KFib { k, index } => Node::KFib(self.lin(k)?, self.lin(index)?),
            Expr::GenFib { h0, h1, index } => Node::GenFib(*h0, *h1, self.lin(index)?),
            Expr::Sign(s) => Node::Sign(self.lin(s)?),
            Expr::Binom(a, b) => Node::Binom(self.lin(a)?, self.lin(b)?),
            Expr::Const(c) => Node::Const(Num::from_rational(c)),
            Expr::Var(v) => Node::Var(self.lookup(v)?),
            Expr::Pow(b, k) => Node::Pow(Box::new(self.compile(b)?), self.lin(k)?),
            Expr::Neg(x) => Node::Neg(Box::new(self.compile(x)?)),
            Expr::Add(xs) => Node::Add(xs.iter().map(|x| self.compile(x)).collect::<Result<_, _>>()?),
            Expr::Mul(xs) => Node::Mul(xs.iter().map(|x| self.compile(x)).collect::<Result<_, _>>()?),
            Expr::Sum {
                var,
                lower,
                upper,
                body,
            } => {
                let lower = self.lin(lower)?;
                let upper = self.lin(upper)?;
                let slot = self.names.len();
                self.names.push(var.clone());
                self.scope.push((var.clone(), slot));
                let body = self.compile(body);
                self.scope.pop();
                Node::Sum {
                    slot,
                    lower,
                    upper,
                    body: Box::new(body?),
                }
            }
        })
    }
}

fn checked_index(i: i64) -> Result<i64, EvalError> {
    if i.abs() > MAX_INDEX {
        Err(EvalError::IndexTooLarge(i))
    } else {
        Ok(i)
    }
}

impl Node {
    fn eval(&self, slots: &mut [i64], memo: &mut Memo) -> Result<Num, EvalError> {
        Ok(match self {
            Node::Const(c) => c.clone(),
            Node::Fib(i) => Num::Int(memo.fib(checked_index(i.eval(slots))?)),
            Node::Lucas(i) => Num::Int(memo.lucas(checked_index(i.eval(slots))?)?),
            Node::KFib(k, i) => Num::Int(memo.k_fib(k.eval(slots), checked_index(i.eval(slots))?)?),
            Node::GenFib(h0, h1, i) => Num::Int(memo.gen_fib(*h0, *h1, checked_index(i.eval(slots))?)),
            Node::Sign(s) => {
                if s.eval(slots).is_even() {
                    Num::one()
                } else {
                    Num::Int(-BigInt::one())
                }
            }
            Node::Binom(a, b) => Num::Int(binomial(a.eval(slots), b.eval(slots))),
            Node::Var(s) => Num::Int(BigInt::from(slots[*s])),
            Node::Pow(b, k) => {
                let k = k.eval(slots);
                if k < 0 {
                    return Err(EvalError::NegativeExponent(k));
                }
                b.eval(slots, memo)?.pow(k as u32)
            }
            Node::Neg(x) => x.eval(slots, memo)?.neg(),
            Node::Add(xs) => {
                let mut acc = Num::zero();
                for x in xs {
                    acc = acc.add(x.eval(slots, memo)?);
                }
                acc
            }
            Node::Mul(xs) => {
                let mut acc = Num::one();
                for x in xs {
                    acc = acc.mul(x.eval(slots, memo)?);
                }
                acc
            }
            Node::Sum {
                slot,
                lower,
                upper,
                body,
            } => {
                let (lo, hi) = (lower.eval(slots), upper.eval(slots));
                let mut acc = Num::zero();
                for k in lo..=hi {
                    slots[*slot] = k;
                    acc = acc.add(body.eval(slots, memo)?);
                }
                acc
            }
        })
    }
}

/// An identity compiled against a fixed variable order.
pub struct Compiled {
    vars: Vec<String>,
    slot_count: usize,
    sides: Vec<Node>,
}

impl Compiled {
    pub fn new(sides: &[Expr], vars: &[String]) -> Result<Compiled, EvalError> {
        let mut c = Compiler {
            names: vars.to_vec(),
            scope: vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect(),
        };
        let nodes = sides
            .iter()
            .map(|s| c.compile(s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Compiled {
            vars: vars.to_vec(),
            slot_count: c.names.len(),
            sides: nodes,
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Exact values of every side at one assignment (in `vars` order).
    pub fn eval_sides(&self, values: &[i64], memo: &mut Memo) -> Result<Vec<BigRational>, EvalError> {
        let mut slots = vec![0i64; self.slot_count];
        slots[..values.len()].copy_from_slice(values);
        self.sides
            .iter()
            .map(|s| s.eval(&mut slots, memo).map(Num::into_rational))
            .collect()
    }

    /// First adjacent pair that differs, with both values.
    fn first_mismatch(
        &self,
        slots: &mut [i64],
        memo: &mut Memo,
    ) -> Result<Option<(usize, Num, Num)>, EvalError> {
        let mut prev = self.sides[0].eval(slots, memo)?;
        for (i, side) in self.sides.iter().enumerate().skip(1) {
            let cur = side.eval(slots, memo)?;
            let equal = match (&prev, &cur) {
                (Num::Int(a), Num::Int(b)) => a == b,
                (a, b) => a.clone().into_rational() == b.clone().into_rational(),
            };
            if !equal {
                return Ok(Some((i - 1, prev, cur)));
            }
            prev = cur;
        }
        Ok(None)
    }
}

/// Evaluate a parameter-free expression exactly.
pub fn eval_expr(e: &Expr, env: &BTreeMap<String, i64>) -> Result<BigRational, EvalError> {
    let vars: Vec<String> = env.keys().cloned().collect();
    let values: Vec<i64> = env.values().copied().collect();
    let compiled = Compiled::new(std::slice::from_ref(e), &vars)?;
    let mut memo = Memo::new();
    Ok(compiled.eval_sides(&values, &mut memo)?.remove(0))
}

/// Inclusive range swept for one index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexRange {
    pub var: String,
    pub start: i64,
    pub end: i64,
}

impl IndexRange {
    pub fn len(&self) -> u64 {
        (self.end - self.start + 1).max(0) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// How far to sweep each index of an identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sweep {
    /// `per_index` consecutive values from each lower bound, shrunk so the
    /// Cartesian product stays under `max_assignments`.
    Consecutive { per_index: u64, max_assignments: u64 },
    /// From each lower bound up to a fixed inclusive end (empty if the bound
    /// is already past it).
    UpTo(i64),
    /// Explicit ranges keyed by variable; unlisted variables fall back to
    /// the default length.
    Explicit(Vec<IndexRange>),
}

pub const DEFAULT_SWEEP_LEN: u64 = 300;
pub const DEFAULT_MAX_ASSIGNMENTS: u64 = 1_000_000;

impl Default for Sweep {
    fn default() -> Self {
        Sweep::Consecutive {
            per_index: DEFAULT_SWEEP_LEN,
            max_assignments: DEFAULT_MAX_ASSIGNMENTS,
        }
    }
}

impl Sweep {
    pub fn with_len(per_index: u64) -> Sweep {
        Sweep::Consecutive {
            per_index,
            max_assignments: DEFAULT_MAX_ASSIGNMENTS,
        }
    }

    /// Ranges for a parameter-free identity.
    pub fn ranges(&self, id: &Identity) -> Vec<IndexRange> {
        let vars = id.index_vars();
        let d = vars.len() as u32;
        vars.iter()
            .map(|v| {
                let start = id.lower_bound(v);
                let end = match self {
                    Sweep::Consecutive {
                        per_index,
                        max_assignments,
                    } => start + per_index_len(*per_index, *max_assignments, d) as i64 - 1,
                    Sweep::UpTo(end) => *end,
                    Sweep::Explicit(rs) => match rs.iter().find(|r| &r.var == v) {
                        Some(r) => return r.clone(),
                        None => start + DEFAULT_SWEEP_LEN as i64 - 1,
                    },
                };
                IndexRange {
                    var: v.clone(),
                    start,
                    end,
                }
            })
            .collect()
    }
}

/// Largest length `l <= per_index` with `l^d <= cap`.
fn per_index_len(per_index: u64, cap: u64, d: u32) -> u64 {
    if d <= 1 {
        return per_index.min(cap.max(1));
    }
    let mut l = per_index;
    while l > 1 && l.checked_pow(d).is_none_or(|p| p > cap) {
        l -= 1;
    }
    l
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    AllEqual,
    CounterexampleAt {
        /// Parameter bindings followed by index values.
        assignment: Vec<(String, i64)>,
        /// Index of the first side of the failing adjacent pair.
        pair: usize,
        left: BigRational,
        right: BigRational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub id: String,
    /// Ranges of the first instance (all instances share their lengths).
    pub ranges: Vec<IndexRange>,
    /// Number of parameter instances checked (1 without parameters).
    pub instances: usize,
    /// Total assignments evaluated across instances.
    pub assignments: u64,
    pub status: CheckStatus,
    pub elapsed: Duration,
}

impl CheckReport {
    pub fn all_equal(&self) -> bool {
        self.status == CheckStatus::AllEqual
    }
}

const CHUNK: u64 = 2048;

fn assignment_at(ranges: &[IndexRange], mut linear: u64, out: &mut [i64]) {
    for (slot, r) in ranges.iter().enumerate().rev() {
        let len = r.len();
        out[slot] = r.start + (linear % len) as i64;
        linear /= len;
    }
}

/// Sweep one parameter-free identity; returns the first counterexample in
/// lexicographic order of the index values.
fn sweep_instance(
    id: &Identity,
    ranges: &[IndexRange],
) -> Result<(u64, Option<(Vec<i64>, usize, BigRational, BigRational)>), EvalError> {
    let vars: Vec<String> = ranges.iter().map(|r| r.var.clone()).collect();
    let compiled = Compiled::new(&id.sides, &vars)?;
    let total: u64 = if ranges.iter().any(IndexRange::is_empty) {
        0
    } else {
        ranges.iter().map(IndexRange::len).product()
    };
    let chunks = total.div_ceil(CHUNK);
    let found = (0..chunks)
        .into_par_iter()
        .map_init(Memo::new, |memo, ci| {
            let mut slots = vec![0i64; compiled.slot_count];
            let end = ((ci + 1) * CHUNK).min(total);
            for linear in ci * CHUNK..end {
                assignment_at(ranges, linear, &mut slots[..ranges.len()]);
                if let Some((pair, l, r)) = compiled.first_mismatch(&mut slots, memo)? {
                    let values = slots[..ranges.len()].to_vec();
                    return Ok(Some((values, pair, l.into_rational(), r.into_rational())));
                }
            }
            Ok(None)
        })
        .find_first(|r: &Result<Option<_>, EvalError>| !matches!(r, Ok(None)));
    match found {
        None => Ok((total, None)),
        Some(r) => r.map(|hit| (total, hit)),
    }
}

/// Exact falsification sweep over every adjacent side pair. Families are
/// checked on every instance of their parameter grid.
pub fn check_identity(id: &Identity, sweep: &Sweep) -> Result<CheckReport, EvalError> {
    let started = Instant::now();
    let grid = dsl::param_grid(id);
    let mut first_ranges = None;
    let mut assignments = 0;
    let mut status = CheckStatus::AllEqual;
    for bindings in &grid {
        let inst = if id.params.is_empty() {
            id.clone()
        } else {
            dsl::substitute(id, bindings)?
        };
        let ranges = sweep.ranges(&inst);
        let (count, hit) = sweep_instance(&inst, &ranges)?;
        assignments += count;
        first_ranges.get_or_insert(ranges.clone());
        if let Some((values, pair, left, right)) = hit {
            let mut assignment: Vec<(String, i64)> =
                bindings.iter().map(|(k, v)| (k.clone(), *v)).collect();
            assignment.extend(ranges.iter().map(|r| r.var.clone()).zip(values));
            status = CheckStatus::CounterexampleAt {
                assignment,
                pair,
                left,
                right,
            };
            break;
        }
    }
    Ok(CheckReport {
        id: id.meta.id.clone(),
        ranges: first_ranges.unwrap_or_default(),
        instances: grid.len(),
        assignments,
        status,
        elapsed: started.elapsed(),
    })
}

/// Exact side values of a (possibly parameterized) identity at a full
/// assignment of parameters and indices.
pub fn eval_identity(id: &Identity, env: &BTreeMap<String, i64>) -> Result<Vec<BigRational>, EvalError> {
    let vars: Vec<String> = env.keys().cloned().collect();
    let values: Vec<i64> = env.values().copied().collect();
    let compiled = Compiled::new(&id.sides, &vars)?;
    compiled.eval_sides(&values, &mut Memo::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_expr, parse_identity};
    use crate::sequences::fib;

    fn env(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    #[test]
    fn sum_of_squares_at_five() {
        let lhs = parse_expr("Sum(k, 0, n, F[k]^2)").unwrap();
        let rhs = parse_expr("F[n]*F[n+1]").unwrap();
        assert_eq!(eval_expr(&lhs, &env(&[("n", 5)])).unwrap(), int(40));
        assert_eq!(eval_expr(&rhs, &env(&[("n", 5)])).unwrap(), int(40));
    }

    #[test]
    fn empty_sum_is_zero() {
        let e = parse_expr("Sum(k, 1, 0, F[k]^3)").unwrap();
        assert_eq!(eval_expr(&e, &BTreeMap::new()).unwrap(), int(0));
    }

    #[test]
    fn lucas_cubic_at_five() {
        let e = parse_expr("F[n+1]^3 + F[n]^3 - F[n-1]^3").unwrap();
        let v = eval_expr(&e, &env(&[("n", 5)])).unwrap();
        assert_eq!(v, int(610));
        assert_eq!(v, BigRational::from_integer(fib(15)));
    }

    #[test]
    fn unbound_and_negative_exponent() {
        let e = parse_expr("F[m]").unwrap();
        assert_eq!(
            eval_expr(&e, &env(&[("n", 1)])),
            Err(EvalError::Unbound("m".into()))
        );
        let e = parse_expr("F[n]^(n-3)").unwrap();
        assert_eq!(
            eval_expr(&e, &env(&[("n", 1)])),
            Err(EvalError::NegativeExponent(-2))
        );
    }

    #[test]
    fn corrupted_identity_counterexample() {
        let id = parse_identity("F[n+1]^3 + F[n]^3 - F[n-1]^3 = F[3n+1] ; n>=1").unwrap();
        let r = check_identity(&id, &Sweep::default()).unwrap();
        assert_eq!(
            r.status,
            CheckStatus::CounterexampleAt {
                assignment: vec![("n".into(), 1)],
                pair: 0,
                left: int(2),
                right: int(3)
            }
        );
    }

    #[test]
    fn default_sweep_shapes() {
        let one = parse_identity("F[n] = F[n] ; n >= 4").unwrap();
        let r = Sweep::default().ranges(&one);
        assert_eq!(r[0], IndexRange { var: "n".into(), start: 4, end: 303 });
        let three = parse_identity("F[r+s+t] = F[r+s+t] ; r >= 1, s >= 1, t >= 1").unwrap();
        let r = Sweep::default().ranges(&three);
        assert!(r.iter().all(|x| x.len() == 100));
        assert_eq!(per_index_len(300, 1_000_000, 4), 31);
        assert_eq!(per_index_len(300, 1_000_000, 2), 300);
    }

    #[test]
    fn lexicographically_first_counterexample() {
        // fails whenever m >= 1 and n >= 1; first failing pair is (m, n) = (1, 1)
        let id = parse_identity("F[m]*F[n] = 0 ; m >= 0, n >= 0").unwrap();
        let r = check_identity(&id, &Sweep::with_len(50)).unwrap();
        match r.status {
            CheckStatus::CounterexampleAt { assignment, .. } => {
                assert_eq!(assignment, vec![("m".into(), 1), ("n".into(), 1)])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn chains_compare_adjacent_pairs() {
        let id = parse_identity("F[n+2] = F[n+1] + F[n] = F[n+3] - F[n+1] ; n >= 0").unwrap();
        assert!(check_identity(&id, &Sweep::default()).unwrap().all_equal());
        let bad = parse_identity("F[n+2] = F[n+1] + F[n] = F[n+3] ; n >= 0").unwrap();
        match check_identity(&bad, &Sweep::default()).unwrap().status {
            CheckStatus::CounterexampleAt { pair, assignment, .. } => {
                assert_eq!(pair, 1);
                assert_eq!(assignment, vec![("n".into(), 0)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rational_constants_stay_exact() {
        let id = parse_identity("1/2*F[2n] = 1/2*F[n]*L[n]").unwrap();
        assert!(check_identity(&id, &Sweep::with_len(60)).unwrap().all_equal());
    }
}
