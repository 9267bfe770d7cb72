//! Seeded embedding experiments: single trials, failure rates with binomial
//! intervals, minimal embedding dimension search and log-log scaling fits.
//!
//! Trial `i` of a batch draws its matrix, sign and data seeds from
//! `seed::derive(root, i)` mixed with the configured seeds, so a batch can
//! run on any number of threads and still aggregate to the same numbers.

use std::time::Instant;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::theorem::distortion;
use crate::constructions::{
    build_partial_circulant, build_partial_fourier, build_partial_hadamard_with, build_subgaussian,
    randomize_signs, BatchMode, EmbeddingOperator, Sampling, Variant,
};
use crate::error::{Error, Result};
use crate::primitives::{norm, PointSet};
use crate::seed::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum Construction {
    Gaussian,
    Rademacher,
    Hadamard {
        sampling: Sampling,
    },
    Fourier,
    Circulant {
        variant: Variant,
    },
    /// The `N × N` identity; only valid with `m = N`.
    Identity,
}

impl Construction {
    pub fn build(&self, m: usize, n: usize, seed: u64) -> Result<EmbeddingOperator> {
        match *self {
            Construction::Gaussian => build_subgaussian(m, n, Variant::Gaussian, seed),
            Construction::Rademacher => build_subgaussian(m, n, Variant::Rademacher, seed),
            Construction::Hadamard { sampling } => {
                build_partial_hadamard_with(m, n, sampling, seed)
            }
            Construction::Fourier => build_partial_fourier(m, n, seed),
            Construction::Circulant { variant } => build_partial_circulant(m, n, variant, seed),
            Construction::Identity => {
                if m != n {
                    return Err(Error::param(format!(
                        "identity construction needs m = N, got m={m}, N={n}"
                    )));
                }
                EmbeddingOperator::identity(n)
            }
        }
    }

    /// Rounds `m` to the nearest admissible value at or above it.
    fn admissible_m(&self, m: usize) -> usize {
        match self {
            Construction::Fourier => m + m % 2,
            _ => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PointsetKind {
    /// Standard normal points scaled to unit norm.
    GaussianUnit,
    /// `support` random coordinates set to ±1, then normalized.
    Sparse { support: usize },
    /// Standard normal points, intended for pairwise-difference embedding.
    PairwiseCloud,
}

pub fn generate_pointset(kind: PointsetKind, p: usize, n: usize, seed: u64) -> Result<PointSet> {
    if p == 0 || n == 0 {
        return Err(Error::param(format!("need p, N ≥ 1, got p={p}, N={n}")));
    }
    let mut rng = seed::rng(seed, Stream::Points);
    let points = match kind {
        PointsetKind::GaussianUnit => (0..p)
            .map(|_| {
                let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let nx = norm(&x);
                x.into_iter().map(|v| v / nx).collect()
            })
            .collect(),
        PointsetKind::Sparse { support } => {
            if support == 0 || support > n {
                return Err(Error::param(format!(
                    "support size {support} outside 1..={n}"
                )));
            }
            let value = 1.0 / (support as f64).sqrt();
            (0..p)
                .map(|_| {
                    let mut x = vec![0.0; n];
                    for j in index::sample(&mut rng, n, support) {
                        x[j] = if rng.random::<bool>() { value } else { -value };
                    }
                    x
                })
                .collect()
        }
        PointsetKind::PairwiseCloud => (0..p)
            .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
            .collect(),
    };
    PointSet::new(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub epsilon: f64,
    pub eta: f64,
    pub construction: Construction,
    pub pointset: PointsetKind,
    pub mode: BatchMode,
    pub matrix_seed: u64,
    pub sign_seed: u64,
    pub data_seed: u64,
}

impl TrialConfig {
    /// Unit Gaussian points embedded directly, default seeds.
    pub fn new(n: usize, m: usize, p: usize, epsilon: f64, construction: Construction) -> Self {
        TrialConfig {
            n,
            m,
            p,
            epsilon,
            eta: 0.1,
            construction,
            pointset: PointsetKind::GaussianUnit,
            mode: BatchMode::Direct,
            matrix_seed: 1,
            sign_seed: 2,
            data_seed: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.p == 0 {
            return Err(Error::param("N, m and p must be positive"));
        }
        // ε = 1 is admitted: it only constrains the upper deviation
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::param(format!(
                "epsilon={} must lie in (0, 1]",
                self.epsilon
            )));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::param(format!("eta={} must lie in (0, 1)", self.eta)));
        }
        if self.mode == BatchMode::PairwiseDifferences && self.p < 2 {
            return Err(Error::param("pairwise mode needs p ≥ 2"));
        }
        Ok(())
    }

    /// The configuration of trial `index` in a batch rooted at `root`.
    pub fn for_trial(&self, root: u64, index: u64) -> TrialConfig {
        let t = seed::derive(root, index);
        TrialConfig {
            matrix_seed: seed::derive(self.matrix_seed, t),
            sign_seed: seed::derive(self.sign_seed, t),
            data_seed: seed::derive(self.data_seed, t),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub max_distortion: f64,
    pub success: bool,
    pub wall_time: f64,
}

pub fn run_trial(cfg: &TrialConfig) -> Result<TrialResult> {
    cfg.validate()?;
    let start = Instant::now();
    let op = randomize_signs(
        cfg.construction.build(cfg.m, cfg.n, cfg.matrix_seed)?,
        cfg.sign_seed,
    );
    let points = generate_pointset(cfg.pointset, cfg.p, cfg.n, cfg.data_seed)?;
    let max_distortion = distortion(&op, &points, cfg.mode)?;
    Ok(TrialResult {
        max_distortion,
        success: max_distortion <= cfg.epsilon,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(failures: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let phat = failures as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (phat + z * z / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if failures == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if failures == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub failures: usize,
    pub trials: usize,
    pub rate: f64,
    pub interval: (f64, f64),
    pub max_distortion: f64,
}

impl RateEstimate {
    pub fn success_rate(&self) -> f64 {
        1.0 - self.rate
    }
}

/// Runs `trials` independent trials of `cfg` and reports the fraction that
/// exceeded distortion `ε`.
pub fn failure_rate(cfg: &TrialConfig, trials: usize, root_seed: u64) -> Result<RateEstimate> {
    cfg.validate()?;
    if trials == 0 {
        return Err(Error::param("failure rate needs at least one trial"));
    }
    let results: Vec<TrialResult> = (0..trials as u64)
        .into_par_iter()
        .map(|i| run_trial(&cfg.for_trial(root_seed, i)))
        .collect::<Result<_>>()?;
    let failures = results.iter().filter(|r| !r.success).count();
    Ok(RateEstimate {
        failures,
        trials,
        rate: failures as f64 / trials as f64,
        interval: wilson_interval(failures, trials),
        max_distortion: results.iter().map(|r| r.max_distortion).fold(0.0, f64::max),
    })
}

/// [`failure_rate`] on a dedicated pool of `jobs` worker threads.
pub fn failure_rate_with_jobs(
    cfg: &TrialConfig,
    trials: usize,
    root_seed: u64,
    jobs: usize,
) -> Result<RateEstimate> {
    with_jobs(jobs, || failure_rate(cfg, trials, root_seed))?
}

pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub m: usize,
    pub failures: usize,
    pub trials: usize,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalM {
    pub m: usize,
    /// Every probe in evaluation order.
    pub probes: Vec<Probe>,
}

impl MinimalM {
    pub fn accepted_probe(&self) -> Option<&Probe> {
        self.probes.iter().rev().find(|p| p.m == self.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRange {
    pub min: usize,
    pub max: usize,
}

/// Smallest `m` in `range` whose empirical success rate reaches
/// `target_success`: doubling from `range.min` until a success, then
/// bisection of the bracket down to `resolution_divisor`-ths of its width.
/// Every probe reuses `root_seed`, so probes at different `m` share data and
/// sign draws.
pub fn minimal_m(
    template: &TrialConfig,
    target_success: f64,
    range: SearchRange,
    trials: usize,
    root_seed: u64,
) -> Result<MinimalM> {
    minimal_m_with_resolution(template, target_success, range, trials, root_seed, 16)
}

pub fn minimal_m_with_resolution(
    template: &TrialConfig,
    target_success: f64,
    range: SearchRange,
    trials: usize,
    root_seed: u64,
    resolution_divisor: usize,
) -> Result<MinimalM> {
    if range.min == 0 || range.min > range.max {
        return Err(Error::param(format!(
            "invalid m range {}..={}",
            range.min, range.max
        )));
    }
    if resolution_divisor == 0 {
        return Err(Error::param("resolution divisor must be positive"));
    }
    let construction = template.construction;
    let mut probes = Vec::new();
    if target_success <= 0.0 {
        return Ok(MinimalM {
            m: range.min,
            probes,
        });
    }
    let probe = |m: usize, probes: &mut Vec<Probe>| -> Result<bool> {
        let cfg = TrialConfig {
            m,
            ..template.clone()
        };
        let est = failure_rate(&cfg, trials, root_seed)?;
        let p = Probe {
            m,
            failures: est.failures,
            trials,
            success_rate: est.success_rate(),
        };
        let ok = p.success_rate >= target_success;
        probes.push(p);
        Ok(ok)
    };

    let out_of_range = |probes: Vec<Probe>| Error::Range {
        message: format!(
            "success rate {target_success} not reached for m ≤ {}",
            range.max
        ),
        probes,
    };
    let mut lo = None;
    let mut m = construction.admissible_m(range.min);
    let hi = loop {
        if m > range.max {
            return Err(out_of_range(probes));
        }
        if probe(m, &mut probes)? {
            break m;
        }
        lo = Some(m);
        if m >= range.max {
            return Err(out_of_range(probes));
        }
        m = construction.admissible_m((2 * m).min(range.max));
    };
    let Some(mut lo) = lo else {
        return Ok(MinimalM { m: hi, probes });
    };
    let mut hi = hi;
    let resolution = ((hi - lo) / resolution_divisor).max(1);
    while hi - lo > resolution {
        let mid = construction.admissible_m(lo + (hi - lo) / 2);
        if mid >= hi || mid <= lo {
            break;
        }
        if probe(mid, &mut probes)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(MinimalM { m: hi, probes })
}

/// Least-squares slope of `ln m*` against `ln ε`.
pub fn scaling_exponent(epsilons: &[f64], minimal_ms: &[f64]) -> Result<f64> {
    if epsilons.len() != minimal_ms.len() {
        return Err(Error::dim("ε list and m* list differ in length"));
    }
    if epsilons
        .iter()
        .chain(minimal_ms)
        .any(|&v| !(v > 0.0 && v.is_finite()))
    {
        return Err(Error::param("ε and m* values must be positive and finite"));
    }
    let mut distinct = epsilons.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::param(
            "scaling fit needs at least 3 distinct ε values",
        ));
    }
    let xs: Vec<f64> = epsilons.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = minimal_ms.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::param("ε values have zero variance"));
    }
    Ok(sxy / sxx)
}

/// Fits `P(fail) ≈ A exp(−c ε² m)` by least squares on `ln rate` versus
/// `ε² m`, returning the empirical decay constant `c`. Points with zero
/// observed failures carry no information about the rate and are skipped.
pub fn concentration_decay_rate(epsilon: f64, ms: &[usize], rates: &[f64]) -> Result<f64> {
    if ms.len() != rates.len() {
        return Err(Error::dim("m list and rate list differ in length"));
    }
    let pts: Vec<(f64, f64)> = ms
        .iter()
        .zip(rates)
        .filter(|(_, &r)| r > 0.0)
        .map(|(&m, &r)| (epsilon * epsilon * m as f64, r.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::param(
            "decay fit needs at least two points with failures",
        ));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::param("m values have zero variance"));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(-sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    M,
    Epsilon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    /// Embedding dimension the rate was measured at.
    pub m: usize,
    pub failures: usize,
    pub trials: usize,
    pub rate: f64,
    pub interval: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: Axis,
    pub points: Vec<SweepPoint>,
    /// Log-log slope of minimal `m` against `ε`, for ε sweeps with a fit.
    pub slope: Option<f64>,
}

/// Failure rate at each `m` with everything else from `template`.
pub fn sweep_m(
    template: &TrialConfig,
    ms: &[usize],
    trials: usize,
    root_seed: u64,
) -> Result<SweepReport> {
    if ms.is_empty() {
        return Err(Error::param("empty m range"));
    }
    let points = ms
        .iter()
        .map(|&m| {
            let cfg = TrialConfig {
                m,
                ..template.clone()
            };
            let est = failure_rate(&cfg, trials, root_seed)?;
            Ok(SweepPoint {
                value: m as f64,
                m,
                failures: est.failures,
                trials,
                rate: est.rate,
                interval: est.interval,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepReport {
        axis: Axis::M,
        points,
        slope: None,
    })
}

/// Minimal `m` reaching success `1 − η` at each `ε`; each record carries the
/// failure statistics of the accepted probe. With `fit`, the log-log slope
/// over all points is attached.
pub fn sweep_epsilon(
    template: &TrialConfig,
    epsilons: &[f64],
    range: SearchRange,
    trials: usize,
    root_seed: u64,
    fit: bool,
) -> Result<SweepReport> {
    if epsilons.is_empty() {
        return Err(Error::param("empty ε range"));
    }
    let mut points = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        let cfg = TrialConfig {
            epsilon,
            ..template.clone()
        };
        cfg.validate()?;
        let found = minimal_m(&cfg, 1.0 - cfg.eta, range, trials, root_seed)?;
        let (failures, trials) = found
            .accepted_probe()
            .map(|p| (p.failures, p.trials))
            .unwrap_or((0, 0));
        points.push(SweepPoint {
            value: epsilon,
            m: found.m,
            failures,
            trials,
            rate: if trials == 0 {
                0.0
            } else {
                failures as f64 / trials as f64
            },
            interval: wilson_interval(failures, trials),
        });
    }
    let slope = if fit {
        let eps: Vec<f64> = points.iter().map(|p| p.value).collect();
        let ms: Vec<f64> = points.iter().map(|p| p.m as f64).collect();
        Some(scaling_exponent(&eps, &ms)?)
    } else {
        None
    };
    Ok(SweepReport {
        axis: Axis::Epsilon,
        points,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormal(n: usize) -> TrialConfig {
        TrialConfig::new(
            n,
            n,
            10,
            0.1,
            Construction::Hadamard {
                sampling: Sampling::WithoutReplacement,
            },
        )
    }

    #[test]
    fn gaussian_unit_points_are_normalized() {
        let e = generate_pointset(PointsetKind::GaussianUnit, 20, 33, 4).unwrap();
        for x in e.points() {
            assert!((norm(x) - 1.0).abs() <= 1e-12);
        }
        assert_eq!(
            e,
            generate_pointset(PointsetKind::GaussianUnit, 20, 33, 4).unwrap()
        );
    }

    #[test]
    fn unit_sparse_points_are_signed_basis_vectors() {
        let e = generate_pointset(PointsetKind::Sparse { support: 1 }, 15, 9, 1).unwrap();
        for x in e.points() {
            assert_eq!(x.iter().filter(|&&v| v != 0.0).count(), 1);
            assert!(x.iter().all(|&v| v == 0.0 || v.abs() == 1.0));
        }
        assert!(generate_pointset(PointsetKind::Sparse { support: 10 }, 1, 9, 1).is_err());
    }

    #[test]
    fn full_orthonormal_transform_never_fails() {
        let r = run_trial(&orthonormal(64)).unwrap();
        assert!(r.max_distortion <= 1e-12);
        assert!(r.success);
        let est = failure_rate(&orthonormal(64), 20, 0).unwrap();
        assert_eq!(est.failures, 0);
        assert_eq!(est.rate, 0.0);
    }

    #[test]
    fn basis_vector_under_rademacher_has_no_distortion() {
        let cfg = TrialConfig {
            pointset: PointsetKind::Sparse { support: 1 },
            p: 1,
            ..TrialConfig::new(50, 7, 1, 0.1, Construction::Rademacher)
        };
        assert!(run_trial(&cfg).unwrap().max_distortion <= 1e-12);
    }

    #[test]
    fn single_trial_rate_is_zero_or_one() {
        let cfg = TrialConfig::new(64, 4, 5, 0.2, Construction::Gaussian);
        let est = failure_rate(&cfg, 1, 3).unwrap();
        assert!(est.rate == 0.0 || est.rate == 1.0);
    }

    #[test]
    fn failure_rate_is_reproducible_and_job_count_independent() {
        let cfg = TrialConfig::new(64, 16, 20, 0.5, Construction::Fourier);
        let a = failure_rate_with_jobs(&cfg, 40, 9, 1).unwrap();
        let b = failure_rate_with_jobs(&cfg, 40, 9, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.failures > 0 && a.failures < 40, "{a:?}");
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        for (f, t) in [(0, 10), (3, 10), (10, 10), (50, 200)] {
            let (lo, hi) = wilson_interval(f, t);
            let p = f as f64 / t as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
    }

    #[test]
    fn vacuous_target_returns_range_minimum() {
        let cfg = TrialConfig::new(64, 1, 5, 0.3, Construction::Gaussian);
        let r = minimal_m(&cfg, 0.0, SearchRange { min: 3, max: 64 }, 10, 0).unwrap();
        assert_eq!(r.m, 3);
        assert!(r.probes.is_empty());
    }

    #[test]
    fn orthonormal_family_found_at_or_below_n() {
        let r = minimal_m(
            &orthonormal(32),
            1.0,
            SearchRange { min: 1, max: 32 },
            10,
            0,
        )
        .unwrap();
        assert!(r.m <= 32);
        assert!(r.accepted_probe().unwrap().success_rate >= 1.0);
    }

    #[test]
    fn unreachable_target_reports_probe_history() {
        let cfg = TrialConfig::new(64, 1, 20, 0.05, Construction::Gaussian);
        match minimal_m(&cfg, 0.99, SearchRange { min: 2, max: 8 }, 20, 0) {
            Err(Error::Range { probes, .. }) => {
                assert_eq!(
                    probes.iter().map(|p| p.m).collect::<Vec<_>>(),
                    vec![2, 4, 8]
                );
            }
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn fourier_search_only_probes_even_m() {
        let cfg = TrialConfig::new(64, 2, 10, 0.5, Construction::Fourier);
        let r = minimal_m(&cfg, 0.9, SearchRange { min: 3, max: 512 }, 30, 1).unwrap();
        assert!(r.probes.iter().all(|p| p.m % 2 == 0));
        assert_eq!(r.m % 2, 0);
    }

    #[test]
    fn scaling_exponent_synthetic() {
        let eps = [0.2, 0.3, 0.5, 0.8];
        let inv_sq: Vec<f64> = eps.iter().map(|e| 7.0 / (e * e)).collect();
        assert!((scaling_exponent(&eps, &inv_sq).unwrap() + 2.0).abs() < 1e-12);
        assert!(scaling_exponent(&eps, &[5.0; 4]).unwrap().abs() < 1e-12);
        assert!(scaling_exponent(&[0.2, 0.3], &[1.0, 2.0]).is_err());
        assert!(scaling_exponent(&[0.2, 0.2, 0.3], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn decay_rate_recovers_synthetic_constant() {
        let ms = [10, 20, 40, 80];
        let rates: Vec<f64> = ms
            .iter()
            .map(|&m| 2.0 * (-0.3 * 0.25 * m as f64).exp())
            .collect();
        assert!((concentration_decay_rate(0.5, &ms, &rates).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn sweep_over_single_orthonormal_point() {
        let r = sweep_m(&orthonormal(16), &[16], 10, 0).unwrap();
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.points[0].rate, 0.0);
    }
}
