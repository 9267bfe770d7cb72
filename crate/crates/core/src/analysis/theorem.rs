//! Parameter formulas and checks for the embedding theorem: a matrix with
//! RIP of order `k ≥ 40 ln(4p/η)` and level `δ ≤ ε/4`, with random column
//! signs, embeds any `p` points with distortion `ε` with probability `1 − η`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::estimates::expansion_terms_dense;
use crate::constructions::{BatchMode, LinearOperator};
use crate::error::{Error, Result};
use crate::primitives::{norm, norm_sq, PointSet, SignPattern};
use crate::seed::{self, Stream};

/// The constants fixed by the proof.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremConstants {
    pub tau: f64,
    pub gamma: f64,
    pub k_factor: f64,
    pub s_factor: f64,
}

impl TheoremConstants {
    pub const PROOF: TheoremConstants = TheoremConstants {
        tau: 0.55,
        gamma: 0.1,
        k_factor: 40.0,
        s_factor: 20.0,
    };

    /// Bound on `|term2|` in units of `δ` once the conditions hold.
    pub const SECOND_TERM_FACTOR: f64 = 0.2;
    /// Bound on `|term3|` in units of `δ` once the conditions hold.
    pub const THIRD_TERM_FACTOR: f64 = 0.55;
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::param(format!("{name}={v} must lie in (0, 1)")));
    }
    Ok(())
}

/// `s = ⌈20 ln(4p/η)⌉` and `k = 2s`.
pub fn min_sparsity_for_points(p: usize, eta: f64) -> Result<(usize, usize)> {
    if p == 0 {
        return Err(Error::param("p must be positive"));
    }
    check_unit_interval("eta", eta)?;
    let s = (TheoremConstants::PROOF.s_factor * (4.0 * p as f64 / eta).ln()).ceil() as usize;
    Ok((2 * s, s))
}

/// RIP level sufficient for distortion `ε`: `δ = ε/4`.
pub fn required_delta(epsilon: f64) -> Result<f64> {
    check_unit_interval("epsilon", epsilon)?;
    Ok(epsilon / 4.0)
}

/// The two admissibility conditions on `δ` that make each union-bounded
/// cross-term failure probability at most `η/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProofConditions {
    /// `(ε/4) √(8γ² s / ln(4p/η))`.
    pub second_term_limit: f64,
    /// `(ε/4) min(√(τ² s / (4 ln(4p/η))), (96/65) τ s / (16 ln(4p/η)))`.
    pub third_term_limit: f64,
}

impl ProofConditions {
    pub fn new(epsilon: f64, s: usize, p: usize, eta: f64) -> Result<Self> {
        check_unit_interval("epsilon", epsilon)?;
        check_unit_interval("eta", eta)?;
        if s == 0 || p == 0 {
            return Err(Error::param("s and p must be positive"));
        }
        let TheoremConstants { tau, gamma, .. } = TheoremConstants::PROOF;
        let log_term = (4.0 * p as f64 / eta).ln();
        let sf = s as f64;
        Ok(ProofConditions {
            second_term_limit: epsilon / 4.0 * (8.0 * gamma * gamma * sf / log_term).sqrt(),
            third_term_limit: epsilon / 4.0
                * (tau * tau * sf / (4.0 * log_term))
                    .sqrt()
                    .min(96.0 / 65.0 * tau * sf / (16.0 * log_term)),
        })
    }

    pub fn satisfied_by(&self, delta: f64) -> bool {
        delta <= self.second_term_limit && delta <= self.third_term_limit
    }
}

/// Largest relative squared-norm deviation `|‖Φy‖² − ‖y‖²| / ‖y‖²` over the
/// nonzero vectors of the set (points, or their pairwise differences).
pub fn distortion<Op: LinearOperator + ?Sized>(
    op: &Op,
    points: &PointSet,
    mode: BatchMode,
) -> Result<f64> {
    if points.dim() != op.input_dim() {
        return Err(Error::dim(format!(
            "points of dimension {} for an operator with N={}",
            points.dim(),
            op.input_dim()
        )));
    }
    let source = match mode {
        BatchMode::Direct => points.clone(),
        BatchMode::PairwiseDifferences => points.pairwise_differences()?,
    };
    let nonzero: Vec<Vec<f64>> = source
        .into_points()
        .into_iter()
        .filter(|y| y.iter().any(|&v| v != 0.0))
        .collect();
    if nonzero.is_empty() {
        return Err(Error::param("every vector in the set is zero"));
    }
    let set = PointSet::new(nonzero)?;
    let images = op.apply_columns(&set.to_columns())?;
    Ok(set
        .points()
        .iter()
        .zip(images.column_iter())
        .map(|(y, img)| {
            let before = norm_sq(y);
            (img.norm_squared() - before).abs() / before
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofTermReport {
    pub s: usize,
    pub delta: f64,
    pub trials: usize,
    /// Draws with `|term2| > 0.2δ`.
    pub second_term_exceedances: usize,
    /// Draws with `|term3| > 0.55δ`.
    pub third_term_exceedances: usize,
    pub max_abs_second: f64,
    pub max_abs_third: f64,
    pub eta: f64,
    pub slack: f64,
    pub pass: bool,
}

impl ProofTermReport {
    pub fn combined_rate(&self) -> f64 {
        (self.second_term_exceedances + self.third_term_exceedances) as f64 / self.trials as f64
    }
}

/// Draws random unit `x` and signs `ξ` and counts how often the cross terms
/// of the expansion leave `0.2δ` and `0.55δ`. Passes when the combined
/// exceedance rate is at most `η + 3/√trials`.
///
/// `delta` must be a valid RIP level of order `2s` for `phi` (exact, or a
/// certified upper bound).
pub fn proof_term_check(
    phi: &DMatrix<f64>,
    delta: f64,
    s: usize,
    eta: f64,
    trials: usize,
    seed: u64,
) -> Result<ProofTermReport> {
    check_unit_interval("eta", eta)?;
    if trials == 0 {
        return Err(Error::param("proof-term check needs at least one trial"));
    }
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::param(format!("delta={delta} must be nonnegative")));
    }
    let n = phi.ncols();
    let draws: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let trial_seed = seed::derive(seed, i as u64);
            let mut rng = seed::rng(trial_seed, Stream::Points);
            let raw: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let nx = norm(&raw);
            let x: Vec<f64> = raw.iter().map(|v| v / nx).collect();
            let xi = SignPattern::random(n, trial_seed);
            expansion_terms_dense(phi, xi.as_slice(), &x, s).map(|t| (t.term2.abs(), t.term3.abs()))
        })
        .collect::<Result<_>>()?;
    let second = draws
        .iter()
        .filter(|d| d.0 > TheoremConstants::SECOND_TERM_FACTOR * delta)
        .count();
    let third = draws
        .iter()
        .filter(|d| d.1 > TheoremConstants::THIRD_TERM_FACTOR * delta)
        .count();
    let slack = 3.0 / (trials as f64).sqrt();
    let rate = (second + third) as f64 / trials as f64;
    Ok(ProofTermReport {
        s,
        delta,
        trials,
        second_term_exceedances: second,
        third_term_exceedances: third,
        max_abs_second: draws.iter().map(|d| d.0).fold(0.0, f64::max),
        max_abs_third: draws.iter().map(|d| d.1).fold(0.0, f64::max),
        eta,
        slack,
        pass: rate <= eta + slack,
    })
}
