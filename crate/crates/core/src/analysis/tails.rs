//! Rademacher tail bounds and their Monte-Carlo validation.

use nalgebra::DMatrix;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::norms::{frobenius_norm, spectral_norm};
use crate::error::{Error, Result};
use crate::primitives::norm_sq;
use crate::seed::{self, Stream};

/// Trials per independently seeded chunk.
const CHUNK: usize = 4096;

pub const MIN_TAIL_TRIALS: usize = 1000;

/// Hoeffding: `P(|⟨ξ, x⟩| > t) ≤ 2 exp(−t² / (2‖x‖²))`.
pub fn hoeffding_bound(x: &[f64], t: f64) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::param(format!("threshold t={t} must be positive")));
    }
    let energy = norm_sq(x);
    if energy == 0.0 {
        return Err(Error::param("Hoeffding bound of the zero vector"));
    }
    Ok(2.0 * (-t * t / (2.0 * energy)).exp())
}

/// Rademacher chaos:
/// `P(|ξᵀXξ| > t) ≤ 2 exp(−(1/64) min((96/65) t / ‖X‖, t² / ‖X‖_F²))`.
pub fn chaos_bound(x: &DMatrix<f64>, t: f64) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::param(format!("threshold t={t} must be positive")));
    }
    if !x.is_square() {
        return Err(Error::dim("chaos matrix must be square"));
    }
    if x.diagonal().iter().any(|&d| d != 0.0) {
        return Err(Error::param("chaos matrix must have a zero diagonal"));
    }
    let op = spectral_norm(x, 1e-12)?;
    let fro = frobenius_norm(x);
    // a zero matrix gives infinite ratios and a zero bound
    let exponent = (96.0 / 65.0 * t / op).min(t * t / (fro * fro)) / 64.0;
    Ok(2.0 * (-exponent).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub enum TailInstance {
    /// `|⟨ξ, x⟩|`.
    Hoeffding(Vec<f64>),
    /// `|ξᵀXξ|` with zero-diagonal `X`.
    Chaos(DMatrix<f64>),
}

impl TailInstance {
    pub fn bound(&self, t: f64) -> Result<f64> {
        match self {
            TailInstance::Hoeffding(x) => hoeffding_bound(x, t),
            TailInstance::Chaos(x) => chaos_bound(x, t),
        }
    }

    fn dim(&self) -> usize {
        match self {
            TailInstance::Hoeffding(x) => x.len(),
            TailInstance::Chaos(x) => x.nrows(),
        }
    }

    fn statistic(&self, xi: &[f64], scratch: &mut [f64]) -> f64 {
        match self {
            TailInstance::Hoeffding(x) => x.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>().abs(),
            TailInstance::Chaos(x) => {
                scratch.iter_mut().for_each(|v| *v = 0.0);
                // column-major: accumulate X ξ one column at a time
                for (col, &s) in x.column_iter().zip(xi) {
                    for (acc, v) in scratch.iter_mut().zip(col.iter()) {
                        *acc += s * v;
                    }
                }
                xi.iter()
                    .zip(scratch.iter())
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    .abs()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub t: f64,
    pub trials: usize,
    pub exceedances: usize,
    pub empirical: f64,
    pub bound: f64,
    /// `3/√trials`.
    pub slack: f64,
    pub pass: bool,
}

fn fill_signs(rng: &mut impl RngCore, xi: &mut [f64]) {
    for chunk in xi.chunks_mut(64) {
        let bits = rng.next_u64();
        for (i, v) in chunk.iter_mut().enumerate() {
            *v = if bits >> i & 1 == 1 { 1.0 } else { -1.0 };
        }
    }
}

/// Fraction of `trials` Rademacher draws whose statistic exceeds `t`,
/// compared with `min(1, bound) + 3/√trials`. Trials are split into fixed
/// chunks seeded from `(seed, chunk index)`, so the result does not depend
/// on how the chunks are scheduled.
pub fn tail_check(instance: &TailInstance, t: f64, trials: usize, seed: u64) -> Result<TailCheck> {
    if trials < MIN_TAIL_TRIALS {
        return Err(Error::param(format!(
            "tail checks need at least {MIN_TAIL_TRIALS} trials, got {trials}"
        )));
    }
    let bound = instance.bound(t)?;
    let n = instance.dim();
    let chunks = trials.div_ceil(CHUNK);
    let exceedances: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed::rng(seed::derive(seed, c as u64), Stream::Tail);
            let count = CHUNK.min(trials - c * CHUNK);
            let mut xi = vec![0.0; n];
            let mut scratch = vec![0.0; n];
            (0..count)
                .filter(|_| {
                    fill_signs(&mut rng, &mut xi);
                    instance.statistic(&xi, &mut scratch) > t
                })
                .count()
        })
        .sum();
    let empirical = exceedances as f64 / trials as f64;
    let slack = 3.0 / (trials as f64).sqrt();
    Ok(TailCheck {
        t,
        trials,
        exceedances,
        empirical,
        bound,
        slack,
        pass: empirical <= bound.min(1.0) + slack,
    })
}
