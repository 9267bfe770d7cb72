//! Vector-level building blocks: decreasing arrangement, the partition of a
//! rearranged vector into blocks of size `s = k/2`, and Rademacher sign
//! patterns with the diagonal action `D_ξ x`.

use std::ops::Range;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, Stream};

pub fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::param(format!("entry {i} is not finite"))),
        None => Ok(()),
    }
}

pub fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    norm_sq(x).sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A bijection on `0..n`. Position `i` of a permuted vector holds the entry
/// that was at `indices[i]` in the original.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    indices: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            indices: (0..n).collect(),
        }
    }

    pub fn from_indices(indices: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; indices.len()];
        for &i in &indices {
            if i >= indices.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::param(format!("index {i} breaks the bijection")));
            }
        }
        Ok(Permutation { indices })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn is_identity(&self) -> bool {
        self.indices.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Gathers `x` into permuted order.
    pub fn apply<T: Copy>(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.len() {
            return Err(Error::dim(format!(
                "permutation of length {} applied to length {}",
                self.len(),
                x.len()
            )));
        }
        Ok(self.indices.iter().map(|&i| x[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (pos, &src) in self.indices.iter().enumerate() {
            inv[src] = pos;
        }
        Permutation { indices: inv }
    }
}

/// Sorts `x` by nonincreasing magnitude. Ties keep their original order.
pub fn decreasing_arrangement(x: &[f64]) -> Result<(Vec<f64>, Permutation)> {
    if x.is_empty() {
        return Err(Error::dim("decreasing arrangement of an empty vector"));
    }
    check_finite(x)?;
    let mut indices: Vec<usize> = (0..x.len()).collect();
    // sort_by is stable
    indices.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()));
    let perm = Permutation { indices };
    let arranged = perm.apply(x)?;
    Ok((arranged, perm))
}

pub fn is_decreasing(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0].abs() >= w[1].abs())
}

/// Partition of `0..n` into `⌈n/s⌉` consecutive blocks of length `s`; the
/// last block may be shorter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStructure {
    n: usize,
    block_size: usize,
}

impl BlockStructure {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Number of blocks `R`.
    pub fn count(&self) -> usize {
        self.n.div_ceil(self.block_size)
    }

    /// Zero-based index range of block `j` (block 0 is the leading block).
    pub fn range(&self, j: usize) -> Range<usize> {
        let start = j * self.block_size;
        start..(start + self.block_size).min(self.n)
    }

    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.count()).map(|j| self.range(j))
    }

    pub fn block_of(&self, index: usize) -> usize {
        index / self.block_size
    }

    /// `j ∼ ℓ`: both indices fall in the same block.
    pub fn same_block(&self, j: usize, l: usize) -> bool {
        self.block_of(j) == self.block_of(l)
    }

    /// The coarse split into the leading block and everything after it.
    pub fn head_tail(&self) -> (Range<usize>, Range<usize>) {
        let head = self.range(0);
        let tail = head.end..self.n;
        (head, tail)
    }
}

pub fn block_partition(n: usize, s: usize) -> Result<BlockStructure> {
    if n == 0 {
        return Err(Error::param("block partition of an empty index set"));
    }
    if s == 0 {
        return Err(Error::param("block size must be positive"));
    }
    Ok(BlockStructure {
        n,
        block_size: s.min(n),
    })
}

/// A Rademacher sequence `ξ ∈ {−1, +1}^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignPattern {
    signs: Vec<f64>,
    seed: Option<u64>,
}

impl SignPattern {
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed, Stream::Signs);
        let signs = (0..n)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        SignPattern {
            signs,
            seed: Some(seed),
        }
    }

    pub fn all_positive(n: usize) -> Self {
        SignPattern {
            signs: vec![1.0; n],
            seed: None,
        }
    }

    pub fn from_signs(signs: Vec<f64>) -> Result<Self> {
        if let Some(v) = signs.iter().find(|&&v| v != 1.0 && v != -1.0) {
            return Err(Error::param(format!("sign entry {v} is not ±1")));
        }
        Ok(SignPattern { signs, seed: None })
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.signs
    }

    pub fn negated(&self) -> Self {
        SignPattern {
            signs: self.signs.iter().map(|v| -v).collect(),
            seed: None,
        }
    }
}

/// `D_ξ x`.
pub fn apply_sign_diagonal(x: &[f64], signs: &SignPattern) -> Result<Vec<f64>> {
    if x.len() != signs.len() {
        return Err(Error::dim(format!(
            "vector of length {} with sign pattern of length {}",
            x.len(),
            signs.len()
        )));
    }
    Ok(x.iter().zip(&signs.signs).map(|(v, s)| v * s).collect())
}

/// A finite point set `E ⊂ ℝ^N` with at least one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = match points.first() {
            Some(p) if !p.is_empty() => p.len(),
            Some(_) => return Err(Error::dim("points must have positive dimension")),
            None => return Err(Error::param("a point set needs at least one point")),
        };
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::dim(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            check_finite(p)?;
        }
        Ok(PointSet { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec<f64>> {
        self.points
    }

    /// All nonzero differences `x_i − x_j`, `i < j`.
    pub fn pairwise_differences(&self) -> Result<PointSet> {
        if self.len() < 2 {
            return Err(Error::param(
                "pairwise differences need at least two points",
            ));
        }
        let mut diffs = Vec::with_capacity(self.len() * (self.len() - 1) / 2);
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d: Vec<f64> = self.points[i]
                    .iter()
                    .zip(&self.points[j])
                    .map(|(a, b)| a - b)
                    .collect();
                if d.iter().any(|&v| v != 0.0) {
                    diffs.push(d);
                }
            }
        }
        if diffs.is_empty() {
            return Err(Error::param("all points coincide"));
        }
        PointSet::new(diffs)
    }

    /// Points as the columns of an `N × p` matrix.
    pub fn to_columns(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.len(), |r, c| self.points[c][r])
    }

    pub fn from_columns(m: &DMatrix<f64>) -> Result<PointSet> {
        PointSet::new(
            m.column_iter()
                .map(|c| c.iter().copied().collect())
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_based(p: &Permutation) -> Vec<usize> {
        p.as_slice().iter().map(|i| i + 1).collect()
    }

    #[test]
    fn arrangement_examples() {
        let (y, p) = decreasing_arrangement(&[3.0, -5.0, 1.0]).unwrap();
        assert_eq!(y, vec![-5.0, 3.0, 1.0]);
        assert_eq!(one_based(&p), vec![2, 1, 3]);

        let (y, p) = decreasing_arrangement(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(y, vec![1.0, 1.0, 1.0]);
        assert!(p.is_identity());

        let (y, p) = decreasing_arrangement(&[0.0, 0.0, 7.0, 0.0]).unwrap();
        assert_eq!(y, vec![7.0, 0.0, 0.0, 0.0]);
        assert_eq!(one_based(&p), vec![3, 1, 2, 4]);
    }

    #[test]
    fn arrangement_rejects_empty_and_nan() {
        assert!(matches!(
            decreasing_arrangement(&[]),
            Err(Error::Dimension(_))
        ));
        assert!(decreasing_arrangement(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn partition_examples() {
        let b = block_partition(7, 2).unwrap();
        assert_eq!(b.count(), 4);
        assert_eq!(b.ranges().collect::<Vec<_>>(), vec![0..2, 2..4, 4..6, 6..7]);

        let b = block_partition(6, 3).unwrap();
        assert_eq!(b.ranges().collect::<Vec<_>>(), vec![0..3, 3..6]);

        let b = block_partition(5, 5).unwrap();
        assert_eq!(b.ranges().collect::<Vec<_>>(), vec![0..5]);
        assert_eq!(b.head_tail(), (0..5, 5..5));
    }

    #[test]
    fn oversized_block_degenerates_to_one_block() {
        let b = block_partition(3, 10).unwrap();
        assert_eq!(b.count(), 1);
        assert_eq!(b.range(0), 0..3);
        assert!(matches!(block_partition(3, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn sign_diagonal_examples() {
        let plus = SignPattern::all_positive(3);
        assert_eq!(
            apply_sign_diagonal(&[1.0, 2.0, 3.0], &plus).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        let mixed = SignPattern::from_signs(vec![-1.0, 1.0, -1.0]).unwrap();
        assert_eq!(
            apply_sign_diagonal(&[1.0, 2.0, 3.0], &mixed).unwrap(),
            vec![-1.0, 2.0, -3.0]
        );
        assert!(matches!(
            apply_sign_diagonal(&[1.0], &mixed),
            Err(Error::Dimension(_))
        ));
        assert!(SignPattern::from_signs(vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn point_set_validation_and_differences() {
        assert!(matches!(PointSet::new(vec![]), Err(Error::Parameter(_))));
        assert!(matches!(
            PointSet::new(vec![vec![1.0, 2.0], vec![1.0]]),
            Err(Error::Dimension(_))
        ));
        let e = PointSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let d = e.pairwise_differences().unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.points()[0], vec![1.0, -1.0]);
        let single = PointSet::new(vec![vec![1.0]]).unwrap();
        assert!(single.pairwise_differences().is_err());
        let dup = PointSet::new(vec![vec![2.0], vec![2.0]]).unwrap();
        assert!(dup.pairwise_differences().is_err());
        assert_eq!(PointSet::from_columns(&e.to_columns()).unwrap(), e);
    }

    #[test]
    fn random_signs_are_reproducible() {
        let a = SignPattern::random(64, 9);
        let b = SignPattern::random(64, 9);
        assert_eq!(a, b);
        assert!(a.as_slice().iter().all(|&v| v == 1.0 || v == -1.0));
        assert_ne!(a, SignPattern::random(64, 10));
    }

    proptest! {
        #[test]
        fn arrangement_is_sorted_norm_preserving_and_idempotent(
            x in prop::collection::vec(-10.0f64..10.0, 1..40)
        ) {
            let (y, p) = decreasing_arrangement(&x).unwrap();
            prop_assert!(is_decreasing(&y));
            prop_assert_eq!(p.apply(&x).unwrap(), y.clone());
            prop_assert!((norm(&x) - norm(&y)).abs() <= 1e-12 * (1.0 + norm(&x)));
            let (z, q) = decreasing_arrangement(&y).unwrap();
            prop_assert_eq!(z, y);
            prop_assert!(q.is_identity());
        }

        #[test]
        fn blocks_cover_the_index_set(n in 1usize..200, s in 1usize..50) {
            let b = block_partition(n, s).unwrap();
            prop_assert_eq!(b.count(), n.div_ceil(s.min(n)));
            prop_assert_eq!(b.ranges().map(|r| r.len()).sum::<usize>(), n);
            let mut next = 0;
            for (j, r) in b.ranges().enumerate() {
                prop_assert_eq!(r.start, next);
                if j + 1 < b.count() {
                    prop_assert_eq!(r.len(), s.min(n));
                }
                next = r.end;
            }
        }

        #[test]
        fn sign_diagonal_is_a_norm_preserving_involution(
            x in prop::collection::vec(-10.0f64..10.0, 1..40),
            seed in any::<u64>(),
        ) {
            let xi = SignPattern::random(x.len(), seed);
            let y = apply_sign_diagonal(&x, &xi).unwrap();
            prop_assert_eq!(norm_sq(&y), norm_sq(&x));
            prop_assert_eq!(apply_sign_diagonal(&y, &xi).unwrap(), x);
        }
    }
}
