use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Integer combination of index variables, as written inside `F[...]`.
///
/// Terms are keyed by a sorted list of variable names so that parameter
/// products such as `k*n` can be written before the parameter is bound.
/// Once every parameter is instantiated each remaining term has degree one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LinForm {
    terms: BTreeMap<Vec<String>, i64>,
    constant: i64,
}

impl LinForm {
    pub fn constant(c: i64) -> Self {
        LinForm {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(name: &str) -> Self {
        Self::monomial(1, vec![name.to_string()])
    }

    pub fn monomial(coeff: i64, mut vars: Vec<String>) -> Self {
        let mut out = LinForm::default();
        if vars.is_empty() {
            out.constant = coeff;
        } else if coeff != 0 {
            vars.sort();
            out.terms.insert(vars, coeff);
        }
        out
    }

    pub fn constant_term(&self) -> i64 {
        self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[String], i64)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn as_const(&self) -> Option<i64> {
        self.terms.is_empty().then_some(self.constant)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant == 0
    }

    /// The single variable `x` if this form is exactly `x`.
    pub fn as_var(&self) -> Option<&str> {
        if self.constant != 0 || self.terms.len() != 1 {
            return None;
        }
        let (vars, c) = self.terms.iter().next()?;
        (*c == 1 && vars.len() == 1).then(|| vars[0].as_str())
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.terms.keys().flatten().cloned().collect()
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.terms.keys().any(|k| k.iter().any(|v| v == name))
    }

    pub fn coeff_of(&self, name: &str) -> i64 {
        self.terms.get(&vec![name.to_string()]).copied().unwrap_or(0)
    }

    /// Coefficients over `order` plus the constant, when every term is a
    /// single variable drawn from `order`.
    pub fn linear_over(&self, order: &[String]) -> Option<(Vec<i64>, i64)> {
        let mut coeffs = vec![0; order.len()];
        for (vars, c) in &self.terms {
            if vars.len() != 1 {
                return None;
            }
            let slot = order.iter().position(|o| o == &vars[0])?;
            coeffs[slot] = *c;
        }
        Some((coeffs, self.constant))
    }

    fn add_term(&mut self, vars: Vec<String>, c: i64) {
        if c == 0 {
            return;
        }
        if vars.is_empty() {
            self.constant += c;
            return;
        }
        let entry = self.terms.entry(vars).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.terms.retain(|_, v| *v != 0);
        }
    }

    pub fn add(&self, other: &LinForm) -> LinForm {
        let mut out = self.clone();
        out.constant += other.constant;
        for (k, v) in &other.terms {
            out.add_term(k.clone(), *v);
        }
        out
    }

    pub fn sub(&self, other: &LinForm) -> LinForm {
        self.add(&other.scale(-1))
    }

    pub fn add_const(&self, c: i64) -> LinForm {
        let mut out = self.clone();
        out.constant += c;
        out
    }

    pub fn scale(&self, c: i64) -> LinForm {
        if c == 0 {
            return LinForm::default();
        }
        LinForm {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
            constant: self.constant * c,
        }
    }

    pub fn mul(&self, other: &LinForm) -> LinForm {
        let mut out = LinForm::constant(self.constant * other.constant);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * other.constant);
        }
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v * self.constant);
        }
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                let mut vars = ka.clone();
                vars.extend(kb.iter().cloned());
                vars.sort();
                out.add_term(vars, va * vb);
            }
        }
        out
    }

    /// Replace variables by forms; unmapped variables are kept.
    pub fn substitute(&self, map: &BTreeMap<String, LinForm>) -> LinForm {
        let mut out = LinForm::constant(self.constant);
        for (vars, c) in &self.terms {
            let mut prod = LinForm::constant(*c);
            for v in vars {
                let factor = map.get(v).cloned().unwrap_or_else(|| LinForm::var(v));
                prod = prod.mul(&factor);
            }
            out = out.add(&prod);
        }
        out
    }

    pub fn eval(&self, lookup: impl Fn(&str) -> Option<i64>) -> Result<i64, String> {
        let mut acc = self.constant;
        for (vars, c) in &self.terms {
            let mut prod = *c;
            for v in vars {
                prod *= lookup(v).ok_or_else(|| v.clone())?;
            }
            acc += prod;
        }
        Ok(acc)
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pos = self.terms.iter().filter(|(_, c)| **c > 0);
        let neg = self.terms.iter().filter(|(_, c)| **c < 0);
        let mut first = true;
        for (vars, c) in pos.chain(neg) {
            let mag = c.unsigned_abs();
            if *c < 0 {
                f.write_str("-")?;
            } else if !first {
                f.write_str("+")?;
            }
            if mag != 1 {
                write!(f, "{mag}")?;
            }
            f.write_str(&vars.join("*"))?;
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant > 0 {
            write!(f, "+{}", self.constant)
        } else if self.constant < 0 {
            write!(f, "{}", self.constant)
        } else {
            Ok(())
        }
    }
}
