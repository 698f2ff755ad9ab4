//! Three arrangements of Fibonacci cubes built by iterating affine maps
//! `C[n+1] = M[n]·C[n] + b[n]` from the unit cube, in exact arithmetic.
//!
//! Every `M[n]` is `F[n+1]/F[n]` times a signed axis permutation, so images
//! of axis-aligned boxes stay axis-aligned and the n-th box has side `F[n]`.

mod export;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::sequences::fib;

pub use export::{export, from_json, ExportFormat};

pub type Q = BigRational;
pub type Vec3 = [Q; 3];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TilingError {
    #[error("unknown map {0} (expected 1, 2 or 3)")]
    BadMap(u8),
    #[error("step must be >= 1 (got {0})")]
    BadStep(i64),
    #[error("need at least one box")]
    NoBoxes,
    #[error("unknown export format `{0}` (expected json or obj)")]
    UnknownFormat(String),
    #[error("malformed geometry: {0}")]
    Malformed(String),
}

fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// `F[n+1]/F[n]`.
pub fn scale_factor(n: i64) -> Q {
    Q::new(fib(n + 1), fib(n))
}

/// One map of a sequence: `x ↦ matrix·x + offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineStep {
    pub map: u8,
    pub n: i64,
    pub matrix: [[Q; 3]; 3],
    pub offset: Vec3,
}

impl AffineStep {
    pub fn apply(&self, x: &Vec3) -> Vec3 {
        std::array::from_fn(|i| {
            (0..3).fold(self.offset[i].clone(), |acc, j| acc + &self.matrix[i][j] * &x[j])
        })
    }

    /// `Mᵀ·M`.
    pub fn gram(&self) -> [[Q; 3]; 3] {
        let m = &self.matrix;
        std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..3).fold(Q::zero(), |acc, k| acc + &m[k][i] * &m[k][j]))
        })
    }

    pub fn det(&self) -> Q {
        let m = &self.matrix;
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
            - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    }
}

fn diag(r: &Q, signs: [i64; 3]) -> [[Q; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { r * q(signs[i]) } else { Q::zero() })
    })
}

/// The n-th map of sequence `map`.
pub fn affine_step(map: u8, n: i64) -> Result<AffineStep, TilingError> {
    if !(1..=3).contains(&map) {
        return Err(TilingError::BadMap(map));
    }
    if n < 1 {
        return Err(TilingError::BadStep(n));
    }
    let r = scale_factor(n);
    let even = n % 2 == 0;
    let s = if even { 1 } else { -1 }; // (-1)^n
    let one = Q::one();
    let zero = || [Q::zero(), Q::zero(), Q::zero()];
    let (matrix, offset) = match map {
        1 => (
            diag(&r, [-s, -s, s]),
            if even {
                [&one + &r, &one + &r, &one - &r]
            } else {
                zero()
            },
        ),
        2 => {
            let perm = [[0, -1, 0], [0, 0, 1], [-1, 0, 0]];
            (
                std::array::from_fn(|i| std::array::from_fn(|j| &r * q(perm[i][j]))),
                [r.clone(), -r.clone(), r.clone()],
            )
        }
        _ => (
            diag(&r, [1, -s, s]),
            if even {
                [&one - &r, &one + &r, &one - &r]
            } else {
                zero()
            },
        ),
    };
    Ok(AffineStep {
        map,
        n,
        matrix,
        offset,
    })
}

/// Axis-aligned box `[min, max]`, the n-th of its arrangement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cuboid {
    pub n: u32,
    pub min: Vec3,
    pub max: Vec3,
}

impl Cuboid {
    pub fn unit() -> Cuboid {
        Cuboid {
            n: 1,
            min: [Q::zero(), Q::zero(), Q::zero()],
            max: [Q::one(), Q::one(), Q::one()],
        }
    }

    /// Edge lengths along x, y, z.
    pub fn extents(&self) -> Vec3 {
        std::array::from_fn(|i| &self.max[i] - &self.min[i])
    }

    /// Side length when the box is a cube.
    pub fn side(&self) -> Option<Q> {
        let [a, b, c] = self.extents();
        (a == b && b == c).then_some(a)
    }

    pub fn center(&self) -> Vec3 {
        let two = q(2);
        std::array::from_fn(|i| (&self.min[i] + &self.max[i]) / &two)
    }

    /// Whether the open interiors of two boxes intersect.
    pub fn interiors_overlap(&self, other: &Cuboid) -> bool {
        (0..3).all(|i| {
            let lo = (&self.min[i]).max(&other.min[i]);
            let hi = (&self.max[i]).min(&other.max[i]);
            lo < hi
        })
    }

    /// Image under an affine step, corners re-sorted.
    pub fn mapped(&self, step: &AffineStep) -> Cuboid {
        let a = step.apply(&self.min);
        let b = step.apply(&self.max);
        let (min, max) = {
            let mut lo = a.clone();
            let mut hi = b.clone();
            for i in 0..3 {
                if a[i] > b[i] {
                    lo[i] = b[i].clone();
                    hi[i] = a[i].clone();
                }
            }
            (lo, hi)
        };
        Cuboid {
            n: self.n + 1,
            min,
            max,
        }
    }
}

impl fmt::Display for Cuboid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}: ", self.n)?;
        for i in 0..3 {
            if i > 0 {
                f.write_str(" x ")?;
            }
            write!(f, "[{}, {}]", self.min[i], self.max[i])?;
        }
        Ok(())
    }
}

/// The first `count` boxes of arrangement `map`, starting from the unit cube.
pub fn generate(map: u8, count: usize) -> Result<Vec<Cuboid>, TilingError> {
    if count == 0 {
        return Err(TilingError::NoBoxes);
    }
    let mut boxes = vec![Cuboid::unit()];
    for n in 1..count as i64 {
        let step = affine_step(map, n)?;
        let next = boxes[boxes.len() - 1].mapped(&step);
        boxes.push(next);
    }
    if boxes.len() == 1 {
        // Validate the map id even when no step is taken.
        affine_step(map, 1)?;
    }
    Ok(boxes)
}

/// Exact geometric facts about an arrangement, plus float diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingReport {
    pub map: u8,
    /// `(n, side)`; `None` if a box is not a cube.
    #[serde(serialize_with = "ser_sides")]
    pub sides: Vec<(u32, Option<Q>)>,
    /// Every side equals the Fibonacci number of its position.
    pub sides_are_fibonacci: bool,
    /// Every center satisfies x = y.
    pub coplanar_x_eq_y: bool,
    pub interiors_disjoint: bool,
    /// First overlapping pair `(i, j)`, in lexicographic order.
    pub first_overlap: Option<(u32, u32)>,
    /// `|c[n+2] - c[n+1]| / |c[n] - c[n-1]|`.
    pub two_step_ratios: Vec<f64>,
}

fn ser_sides<S: serde::Serializer>(sides: &[(u32, Option<Q>)], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(sides.len()))?;
    for (n, side) in sides {
        seq.serialize_element(&(n, side.as_ref().map(|q| q.to_string())))?;
    }
    seq.end()
}

fn norm(v: &Vec3) -> f64 {
    let sq: Q = v.iter().map(|x| x * x).sum();
    sq.to_f64().unwrap_or(f64::INFINITY).sqrt()
}

fn first_overlap(boxes: &[Cuboid]) -> Option<(u32, u32)> {
    let pairs: Vec<(usize, usize)> = (0..boxes.len())
        .flat_map(|i| (i + 1..boxes.len()).map(move |j| (i, j)))
        .collect();
    pairs
        .par_iter()
        .find_first(|&&(i, j)| boxes[i].interiors_overlap(&boxes[j]))
        .map(|&(i, j)| (boxes[i].n, boxes[j].n))
}

pub fn analyze(boxes: &[Cuboid], map: u8) -> PackingReport {
    let sides: Vec<(u32, Option<Q>)> = boxes.iter().map(|b| (b.n, b.side())).collect();
    let sides_are_fibonacci = sides
        .iter()
        .all(|(n, s)| s.as_ref().is_some_and(|s| s.is_integer() && *s.numer() == fib(*n as i64)));
    let centers: Vec<Vec3> = boxes.iter().map(Cuboid::center).collect();
    let coplanar_x_eq_y = centers.iter().all(|c| c[0] == c[1]);
    let overlap = first_overlap(boxes);
    let steps: Vec<f64> = centers
        .windows(2)
        .map(|w| norm(&std::array::from_fn(|i| &w[1][i] - &w[0][i])))
        .collect();
    let two_step_ratios = steps
        .windows(3)
        .map(|w| if w[0] == 0.0 { f64::INFINITY } else { w[2] / w[0] })
        .collect();
    PackingReport {
        map,
        sides,
        sides_are_fibonacci,
        coplanar_x_eq_y,
        interiors_disjoint: overlap.is_none(),
        first_overlap: overlap,
        two_step_ratios,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn r(p: i64, d: i64) -> Q {
        Q::new(p.into(), d.into())
    }

    fn v(xs: [(i64, i64); 3]) -> Vec3 {
        xs.map(|(p, d)| r(p, d))
    }

    #[test]
    fn first_step_of_map_one() {
        let s = affine_step(1, 1).unwrap();
        assert_eq!(s.matrix, diag(&q(1), [1, 1, -1]));
        assert_eq!(s.offset, v([(0, 1), (0, 1), (0, 1)]));
    }

    #[test]
    fn even_step_of_map_one() {
        let s = affine_step(1, 2).unwrap();
        assert_eq!(s.matrix, diag(&q(1), [-2, -2, 2]));
        assert_eq!(s.offset, v([(3, 1), (3, 1), (-1, 1)]));
    }

    #[test]
    fn permutation_step_of_map_two() {
        let s = affine_step(2, 3).unwrap();
        let h = r(3, 2);
        let z = Q::zero();
        assert_eq!(
            s.matrix,
            [
                [z.clone(), -h.clone(), z.clone()],
                [z.clone(), z.clone(), h.clone()],
                [-h.clone(), z.clone(), z.clone()]
            ]
        );
        assert_eq!(s.offset, v([(3, 2), (-3, 2), (3, 2)]));
    }

    #[test]
    fn bad_inputs() {
        assert_eq!(affine_step(4, 1), Err(TilingError::BadMap(4)));
        assert_eq!(affine_step(1, 0), Err(TilingError::BadStep(0)));
        assert_eq!(generate(0, 1), Err(TilingError::BadMap(0)));
        assert_eq!(generate(1, 0), Err(TilingError::NoBoxes));
    }

    #[test]
    fn first_boxes_of_map_one() {
        let b = generate(1, 3).unwrap();
        assert_eq!(b[1].min, v([(0, 1), (0, 1), (-1, 1)]));
        assert_eq!(b[1].max, v([(1, 1), (1, 1), (0, 1)]));
        assert_eq!(b[2].min, v([(1, 1), (1, 1), (-3, 1)]));
        assert_eq!(b[2].max, v([(3, 1), (3, 1), (-1, 1)]));
    }

    #[test]
    fn centers_of_map_one() {
        let b = generate(1, 5).unwrap();
        let centers: Vec<Vec3> = b.iter().map(Cuboid::center).collect();
        assert_eq!(
            centers,
            vec![
                v([(1, 2), (1, 2), (1, 2)]),
                v([(1, 2), (1, 2), (-1, 2)]),
                v([(2, 1), (2, 1), (-2, 1)]),
                v([(3, 1), (3, 1), (3, 1)]),
                v([(-7, 3), (-7, 3), (13, 3)]),
            ]
        );
        let rep = analyze(&b, 1);
        assert!(rep.coplanar_x_eq_y);
        assert!(rep.interiors_disjoint);
        assert!(rep.sides_are_fibonacci);
    }

    #[test]
    fn single_box_report() {
        let rep = analyze(&generate(2, 1).unwrap(), 2);
        assert!(rep.interiors_disjoint);
        assert!(rep.two_step_ratios.is_empty());
    }

    #[test]
    fn overlap_detection() {
        let a = Cuboid::unit();
        let mut b = Cuboid::unit();
        b.n = 2;
        b.min[0] = r(1, 2);
        b.max[0] = r(3, 2);
        assert!(a.interiors_overlap(&b));
        b.min[0] = q(1);
        b.max[0] = q(2);
        assert!(!a.interiors_overlap(&b));
        assert_eq!(first_overlap(&[a.clone(), a]), Some((1, 1)));
    }

    #[test]
    fn sides_follow_fibonacci() {
        for map in 1..=3 {
            let rep = analyze(&generate(map, 40).unwrap(), map);
            assert!(rep.sides_are_fibonacci, "map {map}");
        }
    }

    #[test]
    fn matrices_are_scaled_orthogonal() {
        for map in 1..=3 {
            for n in 1..=40 {
                let s = affine_step(map, n).unwrap();
                let r = scale_factor(n);
                let r2 = &r * &r;
                assert_eq!(s.gram(), diag(&r2, [1, 1, 1]));
                assert_eq!(s.det().abs(), &r2 * &r);
            }
        }
    }

    #[test]
    fn map_one_stays_on_diagonal_plane() {
        assert!(analyze(&generate(1, 40).unwrap(), 1).coplanar_x_eq_y);
        assert!(!analyze(&generate(2, 5).unwrap(), 2).coplanar_x_eq_y);
    }

    #[test]
    fn first_fifteen_boxes_are_disjoint() {
        for map in 1..=3 {
            let rep = analyze(&generate(map, 15).unwrap(), map);
            assert!(rep.interiors_disjoint, "map {map}: {:?}", rep.first_overlap);
        }
    }

    #[test]
    fn two_step_ratio_tends_to_golden_square() {
        let phi2 = (3.0 + 5f64.sqrt()) / 2.0;
        for map in 1..=3 {
            let rep = analyze(&generate(map, 60).unwrap(), map);
            let last = *rep.two_step_ratios.last().unwrap();
            assert!((last - phi2).abs() < 1e-4, "map {map}: {last}");
        }
    }
}
