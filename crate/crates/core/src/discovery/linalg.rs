//! Fraction-free integer elimination.
//!
//! Rows are kept primitive (content 1) after every combination, so entries
//! stay small without ever leaving ℤ.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Divide by the gcd of the entries; the first nonzero entry becomes positive.
pub fn make_primitive(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return;
    }
    let flip = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    for x in v.iter_mut() {
        *x = &*x / &g;
        if flip {
            *x = -&*x;
        }
    }
}

/// Row echelon basis built incrementally; `pivots[i]` is the leading column
/// of `rows[i]`.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    pub rows: Vec<Vec<BigInt>>,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Eliminate every pivot column from `v`.
    fn reduce(&self, mut v: Vec<BigInt>) -> Vec<BigInt> {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero() {
                continue;
            }
            let a = row[p].clone();
            let b = v[p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                *x = &a * &*x - &b * r;
            }
            make_primitive(&mut v);
        }
        v
    }

    /// Add a row; returns false if it was already in the span.
    pub fn insert(&mut self, v: Vec<BigInt>) -> bool {
        let v = self.reduce(v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        // Keep the basis fully reduced: clear column p from earlier rows.
        for row in &mut self.rows {
            if row[p].is_zero() {
                continue;
            }
            let a = v[p].clone();
            let b = row[p].clone();
            for (x, r) in row.iter_mut().zip(&v) {
                *x = &a * &*x - &b * r;
            }
            make_primitive(row);
        }
        self.rows.push(v);
        self.pivots.push(p);
        true
    }

    /// Integer basis of the nullspace of the rows, one primitive vector per
    /// free column, in column order.
    pub fn nullspace(&self, ncols: usize) -> Vec<Vec<BigInt>> {
        let lcm = self
            .rows
            .iter()
            .zip(&self.pivots)
            .fold(BigInt::one(), |l, (r, &p)| l.lcm(&r[p]));
        (0..ncols)
            .filter(|c| !self.pivots.contains(c))
            .map(|f| {
                let mut x = vec![BigInt::zero(); ncols];
                x[f] = lcm.clone();
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    x[p] = -(&row[f] * &lcm) / &row[p];
                }
                make_primitive(&mut x);
                x
            })
            .collect()
    }
}

pub fn echelon(rows: impl IntoIterator<Item = Vec<BigInt>>) -> Echelon {
    let mut e = Echelon::default();
    for r in rows {
        e.insert(r);
    }
    e
}

/// Indices of a maximal independent subset of `rows`, in order.
pub fn independent_rows(rows: &[Vec<BigInt>]) -> Vec<usize> {
    let mut e = Echelon::default();
    (0..rows.len()).filter(|&i| e.insert(rows[i].clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn rank_and_nullspace() {
        let e = echelon([v(&[1, 2, 3]), v(&[2, 4, 6]), v(&[1, 0, 1])]);
        assert_eq!(e.rank(), 2);
        let ns = e.nullspace(3);
        assert_eq!(ns, vec![v(&[1, 1, -1])]);
    }

    #[test]
    fn primitive_normalization() {
        let mut x = v(&[0, -4, 6, 2]);
        make_primitive(&mut x);
        assert_eq!(x, v(&[0, 2, -3, -1]));
    }

    #[test]
    fn independent_row_selection() {
        let rows = [v(&[1, 1]), v(&[2, 2]), v(&[0, 1]), v(&[5, 7])];
        assert_eq!(independent_rows(&rows), vec![0, 2]);
    }
}
