use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::lin::LinForm;

/// One side of an identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    /// `F[i]`
    Fib(LinForm),
    /// `L[i]`
    Lucas(LinForm),
    /// `Fk{k}[i]`, the k-Fibonacci numbers.
    KFib { k: LinForm, index: LinForm },
    /// `H{h0,h1}[i]`, Fibonacci recurrence with arbitrary start.
    GenFib { h0: i64, h1: i64, index: LinForm },
    /// `(-1)^(e)`
    Sign(LinForm),
    /// `C(n, k)`
    Binom(LinForm, LinForm),
    Const(BigRational),
    /// A parameter or summation variable used as a value.
    Var(String),
    Pow(Box<Expr>, LinForm),
    Neg(Box<Expr>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Sum {
        var: String,
        lower: LinForm,
        upper: LinForm,
        body: Box<Expr>,
    },
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Const(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn fib(index: LinForm) -> Expr {
        Expr::Fib(index)
    }

    pub fn pow(base: Expr, e: u32) -> Expr {
        Expr::Pow(Box::new(base), LinForm::constant(e as i64))
    }

    /// Turns a linear form into a value expression (used when a variable that
    /// appears as `Var` is replaced).
    pub fn from_lin(lin: &LinForm) -> Expr {
        if let Some(c) = lin.as_const() {
            return Expr::int(c);
        }
        if let Some(v) = lin.as_var() {
            return Expr::Var(v.to_string());
        }
        let mut terms = Vec::new();
        for (vars, c) in lin.terms() {
            let mut factors = vec![Expr::int(c)];
            factors.extend(vars.iter().map(|v| Expr::Var(v.clone())));
            terms.push(Expr::Mul(factors));
        }
        if lin.constant_term() != 0 {
            terms.push(Expr::int(lin.constant_term()));
        }
        Expr::Add(terms)
    }

    /// Variables that are not bound by an enclosing `Sum`.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Fib(i) | Expr::Lucas(i) | Expr::Sign(i) | Expr::GenFib { index: i, .. } => {
                out.extend(i.vars())
            }
            Expr::KFib { k, index } => {
                out.extend(k.vars());
                out.extend(index.vars());
            }
            Expr::Binom(a, b) => {
                out.extend(a.vars());
                out.extend(b.vars());
            }
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Pow(b, e) => {
                b.collect_free(out);
                out.extend(e.vars());
            }
            Expr::Neg(x) => x.collect_free(out),
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| x.collect_free(out)),
            Expr::Sum {
                var,
                lower,
                upper,
                body,
            } => {
                out.extend(lower.vars());
                out.extend(upper.vars());
                let mut inner = body.free_vars();
                inner.remove(var);
                out.extend(inner);
            }
        }
    }

    pub fn contains_sum(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Sum { .. }))
    }

    /// True if `pred` holds for this node or any descendant.
    pub fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Pow(b, _) | Expr::Neg(b) => b.any(pred),
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().any(|x| x.any(pred)),
            Expr::Sum { body, .. } => body.any(pred),
            _ => false,
        }
    }

    /// Bottom-up rewrite.
    pub fn map(&self, f: &mut dyn FnMut(Expr) -> Expr) -> Expr {
        let rebuilt = match self {
            Expr::Pow(b, e) => Expr::Pow(Box::new(b.map(f)), e.clone()),
            Expr::Neg(x) => Expr::Neg(Box::new(x.map(f))),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.map(f)).collect()),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.map(f)).collect()),
            Expr::Sum {
                var,
                lower,
                upper,
                body,
            } => Expr::Sum {
                var: var.clone(),
                lower: lower.clone(),
                upper: upper.clone(),
                body: Box::new(body.map(f)),
            },
            leaf => leaf.clone(),
        };
        f(rebuilt)
    }

    /// Replace variables everywhere (index forms, exponents, limits and
    /// `Var` leaves). Summation variables shadow the map inside their body.
    pub fn substitute(&self, map: &BTreeMap<String, LinForm>) -> Expr {
        let s = |l: &LinForm| l.substitute(map);
        match self {
            Expr::Fib(i) => Expr::Fib(s(i)),
            Expr::Lucas(i) => Expr::Lucas(s(i)),
            Expr::Sign(i) => Expr::Sign(s(i)),
            Expr::KFib { k, index } => Expr::KFib {
                k: s(k),
                index: s(index),
            },
            Expr::GenFib { h0, h1, index } => Expr::GenFib {
                h0: *h0,
                h1: *h1,
                index: s(index),
            },
            Expr::Binom(a, b) => Expr::Binom(s(a), s(b)),
            Expr::Const(c) => Expr::Const(c.clone()),
            Expr::Var(v) => match map.get(v) {
                Some(l) => Expr::from_lin(l),
                None => Expr::Var(v.clone()),
            },
            Expr::Pow(b, e) => Expr::Pow(Box::new(b.substitute(map)), s(e)),
            Expr::Neg(x) => Expr::Neg(Box::new(x.substitute(map))),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.substitute(map)).collect()),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.substitute(map)).collect()),
            Expr::Sum {
                var,
                lower,
                upper,
                body,
            } => {
                let mut inner = map.clone();
                inner.remove(var);
                Expr::Sum {
                    var: var.clone(),
                    lower: s(lower),
                    upper: s(upper),
                    body: Box::new(body.substitute(&inner)),
                }
            }
        }
    }
}

/// Lower bound on a variable: the maximum of one or more forms over
/// parameters (usually a single integer).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Condition {
    pub var: String,
    pub bound: Vec<LinForm>,
}

impl Condition {
    pub fn at_least(var: &str, bound: i64) -> Self {
        Condition {
            var: var.to_string(),
            bound: vec![LinForm::constant(bound)],
        }
    }

    pub fn const_bound(&self) -> Option<i64> {
        self.bound.iter().map(|b| b.as_const()).collect::<Option<Vec<_>>>()?.into_iter().max()
    }

    pub fn eval_bound(&self, lookup: impl Fn(&str) -> Option<i64> + Copy) -> Result<i64, String> {
        let mut best = i64::MIN;
        for b in &self.bound {
            best = best.max(b.eval(lookup)?);
        }
        Ok(best)
    }
}

/// A symbolic parameter with its inclusive instantiation range.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamDecl {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
}

/// Where the source tables place an identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimedClass {
    HomogeneousCubic,
    NonhomogeneousCubic,
    General,
    Warmup,
}

impl ClaimedClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ClaimedClass::HomogeneousCubic => "homogeneous-cubic",
            ClaimedClass::NonhomogeneousCubic => "nonhomogeneous-cubic",
            ClaimedClass::General => "general",
            ClaimedClass::Warmup => "warmup",
        }
    }
}

impl FromStr for ClaimedClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "homogeneous-cubic" => ClaimedClass::HomogeneousCubic,
            "nonhomogeneous-cubic" => ClaimedClass::NonhomogeneousCubic,
            "general" => ClaimedClass::General,
            "warmup" => ClaimedClass::Warmup,
            other => return Err(format!("unknown class `{other}`")),
        })
    }
}

impl fmt::Display for ClaimedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Meta {
    pub id: String,
    pub year: Option<i32>,
    pub authors: String,
    pub paper_tag: String,
    pub claimed_class: Option<ClaimedClass>,
    pub rediscovered: Vec<String>,
}

/// An equality chain `sides[0] = sides[1] = ...` with its validity domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Identity {
    pub sides: Vec<Expr>,
    pub conditions: Vec<Condition>,
    pub params: Vec<ParamDecl>,
    pub meta: Meta,
}

impl Identity {
    pub fn new(sides: Vec<Expr>) -> Self {
        Identity {
            sides,
            conditions: Vec::new(),
            params: Vec::new(),
            meta: Meta::default(),
        }
    }

    pub fn with_condition(mut self, var: &str, bound: i64) -> Self {
        self.conditions.push(Condition::at_least(var, bound));
        self
    }

    pub fn id(&self) -> &str {
        &self.meta.id
    }

    pub fn is_param(&self, name: &str) -> bool {
        self.params.iter().any(|p| p.name == name)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.sides.iter().flat_map(|s| s.free_vars()).collect()
    }

    /// Free variables that are not parameters, in sorted order.
    pub fn index_vars(&self) -> Vec<String> {
        self.free_vars()
            .into_iter()
            .filter(|v| !self.is_param(v))
            .collect()
    }

    pub fn has_sums(&self) -> bool {
        self.sides.iter().any(Expr::contains_sum)
    }

    pub fn condition(&self, var: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.var == var)
    }

    /// Lower bound of an index; unconditioned indices start at 0.
    pub fn lower_bound(&self, var: &str) -> i64 {
        self.condition(var)
            .and_then(Condition::const_bound)
            .unwrap_or(0)
    }

    /// Adjacent side pairs compared by checks and proofs.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, &Expr, &Expr)> {
        self.sides.windows(2).enumerate().map(|(i, w)| (i, &w[0], &w[1]))
    }
}
