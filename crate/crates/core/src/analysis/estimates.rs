//! Block-level norm estimates for RIP matrices and the three-term energy
//! expansion of `‖ΦD_ξx‖²` over a block decomposition of `x`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::norms::{frobenius_norm, spectral_norm};
use crate::analysis::rip::{binomial, next_combination, rip_constant_exact};
use crate::constructions::{LinearOperator, SignedOperator};
use crate::error::{Error, Result};
use crate::primitives::{block_partition, decreasing_arrangement, is_decreasing, norm, norm_sq};
use crate::DETERMINISTIC_SLACK;

const NORM_TOL: f64 = 1e-12;

/// Cap on `N` for materializing the dense `N × N` chaos matrix.
pub const CHAOS_MATRIX_CAP: usize = 2048;

/// `‖Φ_Jᵀ Φ_L‖` for disjoint column sets `J` and `L`.
pub fn disjoint_block_coherence(phi: &DMatrix<f64>, j: &[usize], l: &[usize]) -> Result<f64> {
    let n = phi.ncols();
    if let Some(&i) = j.iter().chain(l).find(|&&i| i >= n) {
        return Err(Error::dim(format!("column {i} out of range for N={n}")));
    }
    if j.iter().any(|a| l.contains(a)) {
        return Err(Error::param("index sets overlap"));
    }
    if j.is_empty() || l.is_empty() {
        return Ok(0.0);
    }
    let cross = phi.select_columns(j).tr_mul(&phi.select_columns(l));
    spectral_norm(&cross, NORM_TOL)
}

fn check_prop_inputs(phi: &DMatrix<f64>, x: &[f64], s: usize, b: &[f64]) -> Result<()> {
    let n = phi.ncols();
    if x.len() != n {
        return Err(Error::dim(format!(
            "x has length {}, Φ has {n} columns",
            x.len()
        )));
    }
    if s == 0 || s > n {
        return Err(Error::param(format!("block size {s} outside 1..={n}")));
    }
    if n > CHAOS_MATRIX_CAP {
        return Err(Error::Resource(format!(
            "N={n} exceeds the dense chaos-matrix cap of {CHAOS_MATRIX_CAP}"
        )));
    }
    if b.len() != s || b.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::param("b must be a ±1 vector of length s"));
    }
    if !is_decreasing(x) {
        return Err(Error::param("x is not in decreasing arrangement"));
    }
    if norm(x) > 1.0 + NORM_TOL {
        return Err(Error::param("x must satisfy ‖x‖₂ ≤ 1"));
    }
    Ok(())
}

/// The chaos matrix `C` and vector `v` built from `x` in decreasing
/// arrangement:
///
/// * `C_{jl} = x_j ⟨Φ_j, Φ_l⟩ x_l` when `j`, `l` lie in different blocks,
///   neither in the first; zero otherwise.
/// * `v = D_{x♭} Φ♭ᵀ Φ_1 D_{x_1} b`, padded with zeros on the first block.
pub fn prop_c_quantities(
    phi: &DMatrix<f64>,
    x: &[f64],
    s: usize,
    b: &[f64],
) -> Result<(DMatrix<f64>, Vec<f64>)> {
    check_prop_inputs(phi, x, s, b)?;
    let n = phi.ncols();
    let blocks = block_partition(n, s)?;
    let gram = phi.tr_mul(phi);
    let c = DMatrix::from_fn(n, n, |j, l| {
        if j < s || l < s || blocks.same_block(j, l) {
            0.0
        } else {
            // evaluate in canonical order so C is exactly symmetric
            let (a, b) = (j.min(l), j.max(l));
            x[a] * gram[(a, b)] * x[b]
        }
    });
    let v = (0..n)
        .map(|j| {
            if j < s {
                0.0
            } else {
                x[j] * (0..s).map(|i| gram[(j, i)] * x[i] * b[i]).sum::<f64>()
            }
        })
        .collect();
    Ok((c, v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropCReport {
    pub s: usize,
    /// RIP level of order `2s` the bounds are measured against.
    pub delta: f64,
    pub norm_c_spectral: f64,
    pub norm_c_frobenius: f64,
    pub norm_v: f64,
    /// `(δ/s, δ/√s, δ/√s)`.
    pub bounds: [f64; 3],
    pub pass: [bool; 3],
}

impl PropCReport {
    pub fn all_pass(&self) -> bool {
        self.pass.iter().all(|&p| p)
    }
}

/// Checks `‖C‖ ≤ δ/s`, `‖C‖_F ≤ δ/√s`, `‖v‖₂ ≤ δ/√s` against a caller
/// supplied `δ` (any valid RIP level of order `2s`).
pub fn prop_c_check_with_delta(
    phi: &DMatrix<f64>,
    x: &[f64],
    s: usize,
    b: &[f64],
    delta: f64,
) -> Result<PropCReport> {
    let (c, v) = prop_c_quantities(phi, x, s, b)?;
    let measured = [spectral_norm(&c, NORM_TOL)?, frobenius_norm(&c), norm(&v)];
    let sf = s as f64;
    let bounds = [delta / sf, delta / sf.sqrt(), delta / sf.sqrt()];
    let pass = [0, 1, 2].map(|i| measured[i] <= bounds[i] + DETERMINISTIC_SLACK);
    Ok(PropCReport {
        s,
        delta,
        norm_c_spectral: measured[0],
        norm_c_frobenius: measured[1],
        norm_v: measured[2],
        bounds,
        pass,
    })
}

/// As [`prop_c_check_with_delta`], with `δ` the exact constant of order `2s`.
pub fn prop_c_check(phi: &DMatrix<f64>, x: &[f64], s: usize, b: &[f64]) -> Result<PropCReport> {
    let order = (2 * s).min(phi.ncols());
    let delta = rip_constant_exact(phi, order)?.delta;
    prop_c_check_with_delta(phi, x, s, b, delta)
}

/// The three terms of `‖ΦD_ξx‖²` after rearranging `x` decreasingly and
/// splitting it into blocks `x_(1), …, x_(R)` of size `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerms {
    /// `Σ_J ‖Φ_(J) D_{x_(J)} ξ_(J)‖²`.
    pub term1: f64,
    /// `2 ξ_(1)ᵀ D_{x_(1)} Φ_(1)ᵀ Φ_(♭) D_{x_(♭)} ξ_(♭)`.
    pub term2: f64,
    /// `Σ_{J≠L≥2} ⟨Φ_(J) D_{x_(J)} ξ_(J), Φ_(L) D_{x_(L)} ξ_(L)⟩ = ⟨ξ, Cξ⟩`.
    pub term3: f64,
    /// `‖ΦD_ξx‖²`.
    pub total: f64,
}

impl ExpansionTerms {
    pub fn residual(&self) -> f64 {
        (self.term1 + self.term2 + self.term3 - self.total).abs()
    }
}

fn block_images(phi: &DMatrix<f64>, signs: &[f64], x: &[f64], s: usize) -> Result<Vec<Vec<f64>>> {
    let (_, perm) = decreasing_arrangement(x)?;
    let order = perm.as_slice();
    let blocks = block_partition(x.len(), s)?;
    let m = phi.nrows();
    Ok(blocks
        .ranges()
        .map(|range| {
            let mut acc = vec![0.0; m];
            for &j in &order[range] {
                let w = x[j] * signs[j];
                for (a, p) in acc.iter_mut().zip(phi.column(j).iter()) {
                    *a += w * p;
                }
            }
            acc
        })
        .collect())
}

fn combine(images: &[Vec<f64>], total: f64) -> ExpansionTerms {
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(p, q)| p * q).sum() };
    let term1 = images.iter().map(|a| norm_sq(a)).sum();
    let term2 = 2.0 * images[1..].iter().map(|a| dot(&images[0], a)).sum::<f64>();
    let mut term3 = 0.0;
    for j in 1..images.len() {
        for l in j + 1..images.len() {
            term3 += 2.0 * dot(&images[j], &images[l]);
        }
    }
    ExpansionTerms {
        term1,
        term2,
        term3,
        total,
    }
}

/// Expansion terms for an explicit `Φ` and signs; `total` is evaluated
/// directly as `‖Φ(ξ ∘ x)‖²`.
pub fn expansion_terms_dense(
    phi: &DMatrix<f64>,
    signs: &[f64],
    x: &[f64],
    s: usize,
) -> Result<ExpansionTerms> {
    if x.len() != phi.ncols() || signs.len() != phi.ncols() {
        return Err(Error::dim(format!(
            "x has length {}, signs {}, Φ has {} columns",
            x.len(),
            signs.len(),
            phi.ncols()
        )));
    }
    let images = block_images(phi, signs, x, s)?;
    let signed = nalgebra::DVector::from_iterator(x.len(), x.iter().zip(signs).map(|(a, b)| a * b));
    let total = (phi * signed).norm_squared();
    Ok(combine(&images, total))
}

/// Expansion terms for `Φ·D_ξ`. The blocks use the dense form of the base
/// operator; `total` comes from the operator's fast apply path.
pub fn expansion_terms(op: &SignedOperator, x: &[f64], s: usize) -> Result<ExpansionTerms> {
    if x.len() != op.input_dim() {
        return Err(Error::dim(format!(
            "x has length {}, operator has N={}",
            x.len(),
            op.input_dim()
        )));
    }
    let phi = op.base().densify()?;
    let images = block_images(&phi, op.signs().as_slice(), x, s)?;
    let total = norm_sq(&op.apply(x)?);
    Ok(combine(&images, total))
}

/// Cap on the number of support pairs [`max_disjoint_coherence`] visits.
pub const DEFAULT_PAIR_CAP: u128 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceScan {
    pub s: usize,
    /// Unordered pairs of disjoint size-`s` supports visited.
    pub pairs: u64,
    pub max_coherence: f64,
    pub witness: (Vec<usize>, Vec<usize>),
}

/// Largest singular value of a 2×2 matrix `[[a, b], [c, d]]`.
fn spectral_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let f = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    ((f + (f * f - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
}

/// `max ‖Φ_Jᵀ Φ_L‖` over every unordered pair of disjoint supports of size
/// `s`. Smaller supports need no separate visit: their cross matrices are
/// submatrices of some size-`s` pair's.
pub fn max_disjoint_coherence(phi: &DMatrix<f64>, s: usize, cap: u128) -> Result<CoherenceScan> {
    let n = phi.ncols();
    if s == 0 || 2 * s > n {
        return Err(Error::param(format!(
            "need 1 ≤ s and 2s ≤ N={n}, got s={s}"
        )));
    }
    let count = binomial(n, s)
        .and_then(|a| binomial(n - s, s).and_then(|b| a.checked_mul(b)))
        .map(|c| c / 2)
        .filter(|&c| c <= cap)
        .ok_or_else(|| {
            Error::Resource(format!(
                "disjoint pairs of {s}-supports in N={n} exceed the cap of {cap}"
            ))
        })?;
    let gram = phi.tr_mul(phi);
    let mut best = f64::NEG_INFINITY;
    let mut witness = (Vec::new(), Vec::new());
    let mut j: Vec<usize> = (0..s).collect();
    let mut cross = DMatrix::zeros(s, s);
    loop {
        let mut l: Vec<usize> = (0..s).collect();
        loop {
            // each unordered pair once: L must start after J does
            if l[0] > j[0] && !l.iter().any(|a| j.contains(a)) {
                let value = match s {
                    1 => gram[(j[0], l[0])].abs(),
                    2 => spectral_2x2(
                        gram[(j[0], l[0])],
                        gram[(j[0], l[1])],
                        gram[(j[1], l[0])],
                        gram[(j[1], l[1])],
                    ),
                    _ => {
                        for (r, &a) in j.iter().enumerate() {
                            for (c, &b) in l.iter().enumerate() {
                                cross[(r, c)] = gram[(a, b)];
                            }
                        }
                        cross.singular_values().max()
                    }
                };
                if value > best {
                    best = value;
                    witness = (j.clone(), l.clone());
                }
            }
            if !next_combination(&mut l, n) {
                break;
            }
        }
        if !next_combination(&mut j, n) {
            break;
        }
    }
    Ok(CoherenceScan {
        s,
        pairs: count as u64,
        max_coherence: best,
        witness,
    })
}
