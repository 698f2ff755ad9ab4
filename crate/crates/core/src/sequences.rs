//! Exact Fibonacci-family sequences.
//!
//! Everything here is arbitrary precision. [`Memo`] is a single-owner cache
//! used by hot loops (the evaluator keeps one per worker); the free functions
//! go through a process-wide cache guarded by a mutex.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqError {
    #[error("Lucas numbers are only defined here for n >= 0 (got {0})")]
    NegativeLucasIndex(i64),
    #[error("k-Fibonacci parameter must be >= 1 (got {0})")]
    BadK(i64),
    #[error("k-Fibonacci index must be >= 0 (got {0})")]
    NegativeKFibIndex(i64),
}

/// Memoized sequence tables. Entries are only ever appended, and every
/// appended value is a pure function of its key.
#[derive(Debug, Default, Clone)]
pub struct Memo {
    fib: Vec<BigInt>,
    lucas: Vec<BigInt>,
    kfib: HashMap<i64, Vec<BigInt>>,
}

impl Memo {
    pub fn new() -> Self {
        Self::default()
    }

    fn fib_nonneg(&mut self, n: usize) -> &BigInt {
        if self.fib.is_empty() {
            self.fib.push(BigInt::zero());
            self.fib.push(BigInt::one());
        }
        while self.fib.len() <= n {
            let len = self.fib.len();
            let next = &self.fib[len - 1] + &self.fib[len - 2];
            self.fib.push(next);
        }
        &self.fib[n]
    }

    /// F(n) for any integer n, using F(-n) = (-1)^(n+1) F(n).
    pub fn fib(&mut self, n: i64) -> BigInt {
        let v = self.fib_nonneg(n.unsigned_abs() as usize).clone();
        if n < 0 && n % 2 == 0 {
            -v
        } else {
            v
        }
    }

    pub fn lucas(&mut self, n: i64) -> Result<BigInt, SeqError> {
        if n < 0 {
            return Err(SeqError::NegativeLucasIndex(n));
        }
        if self.lucas.is_empty() {
            self.lucas.push(BigInt::from(2));
            self.lucas.push(BigInt::one());
        }
        let n = n as usize;
        while self.lucas.len() <= n {
            let len = self.lucas.len();
            let next = &self.lucas[len - 1] + &self.lucas[len - 2];
            self.lucas.push(next);
        }
        Ok(self.lucas[n].clone())
    }

    pub fn k_fib(&mut self, k: i64, n: i64) -> Result<BigInt, SeqError> {
        if k < 1 {
            return Err(SeqError::BadK(k));
        }
        if n < 0 {
            return Err(SeqError::NegativeKFibIndex(n));
        }
        let table = self
            .kfib
            .entry(k)
            .or_insert_with(|| vec![BigInt::zero(), BigInt::one()]);
        let n = n as usize;
        let kb = BigInt::from(k);
        while table.len() <= n {
            let len = table.len();
            let next = &kb * &table[len - 1] + &table[len - 2];
            table.push(next);
        }
        Ok(table[n].clone())
    }

    /// H(n) with H(0) = h0, H(1) = h1. Negative n runs the recurrence
    /// backwards, which agrees with H(n) = h0 F(n-1) + h1 F(n).
    pub fn gen_fib(&mut self, h0: i64, h1: i64, n: i64) -> BigInt {
        BigInt::from(h0) * self.fib(n - 1) + BigInt::from(h1) * self.fib(n)
    }
}

fn global() -> &'static Mutex<Memo> {
    static CACHE: OnceLock<Mutex<Memo>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Memo::new()))
}

fn with_global<T>(f: impl FnOnce(&mut Memo) -> T) -> T {
    // A poisoned cache still only holds correct values.
    let mut guard = global().lock().unwrap_or_else(|e| e.into_inner());
    f(&mut guard)
}

/// Fibonacci number F(n), F(0) = 0, F(1) = 1, any integer n.
pub fn fib(n: i64) -> BigInt {
    with_global(|m| m.fib(n))
}

/// Lucas number L(n), L(0) = 2, L(1) = 1.
pub fn lucas(n: i64) -> Result<BigInt, SeqError> {
    with_global(|m| m.lucas(n))
}

/// k-Fibonacci number: F(k,n+2) = k F(k,n+1) + F(k,n), F(k,0) = 0, F(k,1) = 1.
pub fn k_fib(k: i64, n: i64) -> Result<BigInt, SeqError> {
    with_global(|m| m.k_fib(k, n))
}

/// Fibonacci recurrence with arbitrary initial conditions.
pub fn gen_fib(h0: i64, h1: i64, n: i64) -> BigInt {
    with_global(|m| m.gen_fib(h0, h1, n))
}

/// Plain iterative Fibonacci without any cache.
pub fn fib_uncached(n: i64) -> BigInt {
    let m = n.unsigned_abs();
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for _ in 0..m {
        let next = &a + &b;
        a = std::mem::replace(&mut b, next);
    }
    if n < 0 && n % 2 == 0 {
        -a
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn anchors() {
        assert_eq!(fib(14), b(377));
        assert_eq!(fib(0), b(0));
        assert_eq!(fib(-4), b(-3));
        assert_eq!(lucas(0).unwrap(), b(2));
        assert_eq!(lucas(1).unwrap(), b(1));
        assert_eq!(lucas(10).unwrap(), b(123));
        assert_eq!(k_fib(2, 5).unwrap(), b(29));
        assert_eq!(k_fib(3, 0).unwrap(), b(0));
        assert_eq!(gen_fib(0, 1, 10), b(55));
        assert_eq!(gen_fib(2, 1, 4), b(7));
        assert_eq!(gen_fib(5, 5, 0), b(5));
    }

    #[test]
    fn negative_indices_follow_recurrence() {
        // F(-3) = F(-4) + F(-5) unrolled: 2 = -3 + 5
        assert_eq!(fib(-3), fib(-4) + fib(-5));
        for n in -40..40 {
            assert_eq!(fib(n + 1), fib(n) + fib(n - 1), "n = {n}");
        }
    }

    #[test]
    fn domain_errors() {
        assert_eq!(lucas(-1), Err(SeqError::NegativeLucasIndex(-1)));
        assert_eq!(k_fib(0, 3), Err(SeqError::BadK(0)));
        assert_eq!(k_fib(-2, 3), Err(SeqError::BadK(-2)));
        assert_eq!(k_fib(2, -1), Err(SeqError::NegativeKFibIndex(-1)));
    }

    #[test]
    fn gen_fib_negative_runs_backwards() {
        for n in -20..20 {
            assert_eq!(gen_fib(2, 1, n + 1), gen_fib(2, 1, n) + gen_fib(2, 1, n - 1));
        }
        assert_eq!(gen_fib(2, 1, -1), b(-1));
    }

    #[test]
    fn memo_matches_uncached() {
        let mut memo = Memo::new();
        for n in (-120..600).rev() {
            assert_eq!(memo.fib(n), fib_uncached(n));
        }
    }
}
