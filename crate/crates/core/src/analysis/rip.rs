//! Restricted isometry constants.
//!
//! `δ_k = max_{|S| = k} max(σ_max(Φ_S)² − 1, 1 − σ_min(Φ_S)²)`, the smallest
//! `δ` with `(1−δ)‖x‖² ≤ ‖Φx‖² ≤ (1+δ)‖x‖²` for every `k`-sparse `x`.

use nalgebra::DMatrix;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, Stream};

/// Default cap on the number of supports exact enumeration will visit.
pub const DEFAULT_SUPPORT_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RipMethod {
    Exact,
    /// Maximum over sampled supports; a lower bound on `δ_k`.
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    pub k: usize,
    pub delta: f64,
    pub method: RipMethod,
    /// Zero-based support attaining `delta`.
    pub witness: Vec<usize>,
    /// Number of supports evaluated.
    pub supports: u64,
}

pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn check_order(phi: &DMatrix<f64>, k: usize) -> Result<()> {
    if k == 0 || k > phi.ncols() {
        return Err(Error::param(format!(
            "sparsity order {k} outside 1..={}",
            phi.ncols()
        )));
    }
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("matrix has non-finite entries"));
    }
    Ok(())
}

/// `max(σ_max² − 1, 1 − σ_min²)` of the column submatrix `Φ_S`.
pub fn support_distortion(phi: &DMatrix<f64>, support: &[usize]) -> Result<f64> {
    if let Some(&j) = support.iter().find(|&&j| j >= phi.ncols()) {
        return Err(Error::dim(format!("column {j} out of range")));
    }
    Ok(submatrix_distortion(&phi.select_columns(support)))
}

fn submatrix_distortion(sub: &DMatrix<f64>) -> f64 {
    let sv = sub.singular_values();
    let max = sv.max();
    // with more columns than rows the restriction has a kernel
    let min = if sub.ncols() > sub.nrows() {
        0.0
    } else {
        sv.min()
    };
    (max * max - 1.0).max(1.0 - min * min)
}

/// Advances `support` to the next `k`-subset of `0..n` in lexicographic order.
pub(crate) fn next_combination(support: &mut [usize], n: usize) -> bool {
    let k = support.len();
    for i in (0..k).rev() {
        if support[i] < n - k + i {
            support[i] += 1;
            for j in i + 1..k {
                support[j] = support[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn rip_constant_exact(phi: &DMatrix<f64>, k: usize) -> Result<RipEstimate> {
    rip_constant_exact_with_cap(phi, k, DEFAULT_SUPPORT_CAP)
}

/// Exact `δ_k` by enumerating every size-`k` support.
pub fn rip_constant_exact_with_cap(phi: &DMatrix<f64>, k: usize, cap: u128) -> Result<RipEstimate> {
    check_order(phi, k)?;
    let n = phi.ncols();
    let count = binomial(n, k).filter(|&c| c <= cap).ok_or_else(|| {
        Error::Resource(format!(
            "C({n}, {k}) supports exceed the enumeration cap of {cap}; use the monte-carlo estimate"
        ))
    })?;
    let mut support: Vec<usize> = (0..k).collect();
    let mut sub = DMatrix::zeros(phi.nrows(), k);
    let mut best = f64::NEG_INFINITY;
    let mut witness = support.clone();
    loop {
        for (c, &j) in support.iter().enumerate() {
            sub.set_column(c, &phi.column(j));
        }
        let d = submatrix_distortion(&sub);
        if d > best {
            best = d;
            witness.copy_from_slice(&support);
        }
        if !next_combination(&mut support, n) {
            break;
        }
    }
    Ok(RipEstimate {
        k,
        delta: best.max(0.0),
        method: RipMethod::Exact,
        witness,
        supports: count as u64,
    })
}

/// Running maximum of the support criterion over `trials` uniformly sampled
/// supports. Never exceeds the exact constant.
pub fn rip_constant_lower_bound(
    phi: &DMatrix<f64>,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<RipEstimate> {
    check_order(phi, k)?;
    if trials == 0 {
        return Err(Error::param("monte-carlo RIP needs at least one trial"));
    }
    let n = phi.ncols();
    let mut rng = seed::rng(seed, Stream::Supports);
    let mut best = f64::NEG_INFINITY;
    let mut witness = Vec::new();
    for _ in 0..trials {
        let mut support = index::sample(&mut rng, n, k).into_vec();
        support.sort_unstable();
        let d = submatrix_distortion(&phi.select_columns(&support));
        if d > best {
            best = d;
            witness = support;
        }
    }
    Ok(RipEstimate {
        k,
        delta: best.max(0.0),
        method: RipMethod::MonteCarlo,
        witness,
        supports: trials as u64,
    })
}

/// Certified upper bound on `δ_k` from Gershgorin discs of the Gram matrix:
/// every `k × k` principal submatrix has its eigenvalues within
/// `‖Φ_j‖² ± (sum of the k−1 largest |⟨Φ_j, Φ_l⟩|, l ≠ j)`.
pub fn rip_upper_bound_gershgorin(phi: &DMatrix<f64>, k: usize) -> Result<f64> {
    check_order(phi, k)?;
    let gram = phi.tr_mul(phi);
    let n = phi.ncols();
    let mut bound: f64 = 0.0;
    let mut off = Vec::with_capacity(n);
    for j in 0..n {
        off.clear();
        off.extend((0..n).filter(|&l| l != j).map(|l| gram[(j, l)].abs()));
        off.sort_unstable_by(|a, b| b.total_cmp(a));
        let radius: f64 = off.iter().take(k - 1).sum();
        bound = bound.max((gram[(j, j)] - 1.0).abs() + radius);
    }
    Ok(bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = seed::rng(seed, Stream::MatrixEntries);
        let s = 1.0 / (m as f64).sqrt();
        DMatrix::from_fn(m, n, |_, _| s * rng.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn identity_has_zero_constant() {
        let id = DMatrix::<f64>::identity(5, 5);
        for k in 1..=5 {
            assert_eq!(rip_constant_exact(&id, k).unwrap().delta, 0.0);
        }
    }

    #[test]
    fn analytic_small_cases() {
        let ones = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let e = rip_constant_exact(&ones, 2).unwrap();
        assert!((e.delta - 1.0).abs() < 1e-12);
        assert_eq!(e.witness, vec![0, 1]);

        let two = DMatrix::from_row_slice(1, 1, &[2.0]);
        assert!((rip_constant_exact(&two, 1).unwrap().delta - 3.0).abs() < 1e-12);
    }

    #[test]
    fn enumeration_cap_is_a_resource_error() {
        let phi = gaussian(10, 40, 1);
        assert!(matches!(
            rip_constant_exact_with_cap(&phi, 5, 1000),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            rip_constant_exact(&phi, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            rip_constant_exact(&phi, 41),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn combinations_are_enumerated_exactly_once() {
        let mut s = vec![0, 1, 2];
        let mut count = 1;
        while next_combination(&mut s, 7) {
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            count += 1;
        }
        assert_eq!(count, 35);
        assert_eq!(binomial(40, 4), Some(91_390));
        assert_eq!(binomial(3, 5), Some(0));
    }

    #[test]
    fn exhaustive_sampling_recovers_exact_constant() {
        let phi = gaussian(4, 6, 2);
        for k in 1..=3 {
            let exact = rip_constant_exact(&phi, k).unwrap();
            let mc = rip_constant_lower_bound(&phi, k, 5000, 3).unwrap();
            assert_eq!(mc.delta, exact.delta);
        }
    }

    #[test]
    fn full_support_sampling_equals_exact() {
        let phi = gaussian(5, 7, 4);
        let exact = rip_constant_exact(&phi, 7).unwrap();
        let mc = rip_constant_lower_bound(&phi, 7, 1, 0).unwrap();
        assert_eq!(mc.delta, exact.delta);
        assert_eq!(mc.witness, exact.witness);
    }

    #[test]
    fn monte_carlo_is_monotone_in_trials_and_below_exact() {
        let phi = gaussian(8, 16, 5);
        let exact = rip_constant_exact(&phi, 3).unwrap().delta;
        let mut prev = 0.0;
        for trials in [1, 5, 25, 125, 625] {
            let d = rip_constant_lower_bound(&phi, 3, trials, 9).unwrap().delta;
            assert!(d >= prev);
            assert!(d <= exact);
            prev = d;
        }
    }

    #[test]
    fn gershgorin_bound_dominates_exact_constant() {
        for seed in 0..10 {
            let phi = gaussian(12, 16, seed);
            for k in 1..=3 {
                let exact = rip_constant_exact(&phi, k).unwrap().delta;
                assert!(exact <= rip_upper_bound_gershgorin(&phi, k).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn exact_constant_is_monotone_in_order() {
        for seed in 0..20 {
            let phi = gaussian(8, 16, seed);
            let d: Vec<f64> = (1..=4)
                .map(|k| rip_constant_exact(&phi, k).unwrap().delta)
                .collect();
            assert!(d.windows(2).all(|w| w[0] <= w[1] + 1e-12), "{d:?}");
        }
    }
}
