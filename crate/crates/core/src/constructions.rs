//! Embedding operator families and their composition with random column
//! signs, `Φ·D_ξ`.
//!
//! Every family is normalized so that `E‖Φx‖² = ‖x‖²` over the matrix draw:
//!
//! | family            | stored structure         | scale     | apply          |
//! |-------------------|--------------------------|-----------|----------------|
//! | subgaussian       | `m × N` unit-variance    | `1/√m`    | dense product  |
//! | partial Hadamard  | `m` sampled rows         | `1/√m`    | FWHT + gather  |
//! | partial Fourier   | `m/2` sampled frequencies| `√(2/m)`  | DFT + gather   |
//! | partial circulant | generator row            | `1/√m`    | FFT convolution|
//!
//! [`LinearOperator::densify`] builds the explicit matrix straight from the
//! definition of each family, never through the fast apply path, so it can
//! serve as an oracle for it.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::{PointSet, SignPattern};
use crate::seed::{self, Stream};
use crate::transforms::{self, hadamard_entry, twiddle, ComplexVector};

/// Default cap on the number of entries [`LinearOperator::densify`] will
/// materialize.
pub const DEFAULT_DENSIFY_CAP: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Gaussian,
    Rademacher,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    #[default]
    WithReplacement,
    WithoutReplacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    SubgaussianGaussian,
    SubgaussianRademacher,
    PartialHadamard,
    PartialFourier,
    PartialCirculant,
    /// A caller-supplied dense matrix.
    Explicit,
}

#[derive(Debug, Clone)]
enum Structure {
    Dense(DMatrix<f64>),
    Rows(Vec<usize>),
    Frequencies(Vec<usize>),
    Circulant {
        generator: Vec<f64>,
        kernel_spectrum: ComplexVector,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchMode {
    Direct,
    PairwiseDifferences,
}

/// A linear map `ℝ^N → ℝ^m` with a fast apply and an explicit dense form.
pub trait LinearOperator: Sync {
    fn output_dim(&self) -> usize;

    fn input_dim(&self) -> usize;

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn densify_with_cap(&self, cap: usize) -> Result<DMatrix<f64>>;

    fn densify(&self) -> Result<DMatrix<f64>> {
        self.densify_with_cap(DEFAULT_DENSIFY_CAP)
    }

    /// Applies the operator to every column of an `N × p` matrix.
    fn apply_columns(&self, columns: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_columns(self.input_dim(), columns)?;
        let mut out = DMatrix::zeros(self.output_dim(), columns.ncols());
        for (j, col) in columns.column_iter().enumerate() {
            let image = self.apply(col.as_slice())?;
            out.column_mut(j).copy_from_slice(&image);
        }
        Ok(out)
    }
}

fn check_input(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::dim(format!(
            "operator expects input of length {n}, got {}",
            x.len()
        )));
    }
    Ok(())
}

fn check_columns(n: usize, columns: &DMatrix<f64>) -> Result<()> {
    if columns.nrows() != n {
        return Err(Error::dim(format!(
            "operator expects inputs of length {n}, got {}",
            columns.nrows()
        )));
    }
    Ok(())
}

fn check_cap(m: usize, n: usize, cap: usize) -> Result<()> {
    match m.checked_mul(n) {
        Some(entries) if entries <= cap => Ok(()),
        _ => Err(Error::Resource(format!(
            "dense form of a {m}×{n} operator exceeds the cap of {cap} entries"
        ))),
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::param(format!(
            "dimensions must be positive, got m={m}, N={n}"
        )));
    }
    Ok(())
}

fn draw(rng: &mut impl Rng, variant: Variant) -> f64 {
    match variant {
        Variant::Gaussian => rng.sample(StandardNormal),
        Variant::Rademacher => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingOperator {
    kind: OperatorKind,
    m: usize,
    n: usize,
    seed: Option<u64>,
    structure: Structure,
    scale: f64,
}

/// Dense `m × N` matrix with i.i.d. entries of variance `1/m`.
///
/// Entries are drawn row-major from one stream, so for a fixed seed the
/// unscaled matrix at a smaller `m` is a row prefix of the one at larger `m`.
pub fn build_subgaussian(
    m: usize,
    n: usize,
    variant: Variant,
    seed: u64,
) -> Result<EmbeddingOperator> {
    check_dims(m, n)?;
    let mut rng = seed::rng(seed, Stream::MatrixEntries);
    let entries = DMatrix::from_row_iterator(m, n, (0..m * n).map(|_| draw(&mut rng, variant)));
    Ok(EmbeddingOperator {
        kind: match variant {
            Variant::Gaussian => OperatorKind::SubgaussianGaussian,
            Variant::Rademacher => OperatorKind::SubgaussianRademacher,
        },
        m,
        n,
        seed: Some(seed),
        structure: Structure::Dense(entries),
        scale: 1.0 / (m as f64).sqrt(),
    })
}

/// Partial Hadamard matrix with rows sampled i.i.d. uniformly.
pub fn build_partial_hadamard(m: usize, n: usize, seed: u64) -> Result<EmbeddingOperator> {
    build_partial_hadamard_with(m, n, Sampling::WithReplacement, seed)
}

pub fn build_partial_hadamard_with(
    m: usize,
    n: usize,
    sampling: Sampling,
    seed: u64,
) -> Result<EmbeddingOperator> {
    check_dims(m, n)?;
    if !n.is_power_of_two() {
        return Err(Error::param(format!(
            "Hadamard size N={n} is not a power of 2"
        )));
    }
    let mut rng = seed::rng(seed, Stream::RowIndices);
    let rows = match sampling {
        Sampling::WithReplacement => (0..m).map(|_| rng.random_range(0..n)).collect(),
        Sampling::WithoutReplacement => {
            if m > n {
                return Err(Error::param(format!(
                    "cannot sample {m} distinct rows out of {n}"
                )));
            }
            index::sample(&mut rng, n, m).into_vec()
        }
    };
    Ok(EmbeddingOperator {
        kind: OperatorKind::PartialHadamard,
        m,
        n,
        seed: Some(seed),
        structure: Structure::Rows(rows),
        scale: 1.0 / (m as f64).sqrt(),
    })
}

/// Partial Fourier matrix: `m/2` frequencies sampled i.i.d., each
/// contributing a cosine row and a negative sine row scaled by `√(2/m)`.
pub fn build_partial_fourier(m: usize, n: usize, seed: u64) -> Result<EmbeddingOperator> {
    check_dims(m, n)?;
    if !m.is_multiple_of(2) {
        return Err(Error::param(format!(
            "partial Fourier needs even m, got {m}"
        )));
    }
    if n < 2 {
        return Err(Error::param("partial Fourier needs N ≥ 2"));
    }
    let mut rng = seed::rng(seed, Stream::RowIndices);
    let freqs = (0..m / 2).map(|_| rng.random_range(0..n)).collect();
    Ok(EmbeddingOperator {
        kind: OperatorKind::PartialFourier,
        m,
        n,
        seed: Some(seed),
        structure: Structure::Frequencies(freqs),
        scale: (2.0 / m as f64).sqrt(),
    })
}

/// First `m` rows of a random circulant matrix; row `j` is the generator
/// rotated right by `j` positions.
pub fn build_partial_circulant(
    m: usize,
    n: usize,
    variant: Variant,
    seed: u64,
) -> Result<EmbeddingOperator> {
    check_dims(m, n)?;
    if m > n {
        return Err(Error::param(format!(
            "partial circulant needs m ≤ N, got m={m}, N={n}"
        )));
    }
    let mut rng = seed::rng(seed, Stream::Generator);
    let generator: Vec<f64> = (0..n).map(|_| draw(&mut rng, variant)).collect();
    // out_j = Σ_l g[(l − j) mod N] x_l is a convolution with c[i] = g[−i mod N].
    let kernel: Vec<f64> = (0..n).map(|i| generator[(n - i) % n]).collect();
    let kernel_spectrum = transforms::dft(&kernel)?;
    Ok(EmbeddingOperator {
        kind: OperatorKind::PartialCirculant,
        m,
        n,
        seed: Some(seed),
        structure: Structure::Circulant {
            generator,
            kernel_spectrum,
        },
        scale: 1.0 / (m as f64).sqrt(),
    })
}

impl EmbeddingOperator {
    /// Wraps an explicit matrix; the operator applies it unscaled.
    pub fn from_dense(matrix: DMatrix<f64>) -> Result<Self> {
        check_dims(matrix.nrows(), matrix.ncols())?;
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("matrix has non-finite entries"));
        }
        Ok(EmbeddingOperator {
            kind: OperatorKind::Explicit,
            m: matrix.nrows(),
            n: matrix.ncols(),
            seed: None,
            structure: Structure::Dense(matrix),
            scale: 1.0,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_dense(DMatrix::identity(n, n))
    }

    /// Multiplies the normalization by `factor`.
    pub fn scaled(mut self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::param(format!(
                "scale factor {factor} must be positive"
            )));
        }
        self.scale *= factor;
        Ok(self)
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Sampled Hadamard rows or Fourier frequencies, zero-based.
    pub fn sampled_indices(&self) -> Option<&[usize]> {
        match &self.structure {
            Structure::Rows(r) | Structure::Frequencies(r) => Some(r),
            _ => None,
        }
    }

    pub fn generator(&self) -> Option<&[f64]> {
        match &self.structure {
            Structure::Circulant { generator, .. } => Some(generator),
            _ => None,
        }
    }
}

impl LinearOperator for EmbeddingOperator {
    fn output_dim(&self) -> usize {
        self.m
    }

    fn input_dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_input(self.n, x)?;
        let s = self.scale;
        let out = match &self.structure {
            Structure::Dense(a) => {
                let y = a * DVector::from_column_slice(x);
                y.iter().map(|v| v * s).collect()
            }
            Structure::Rows(rows) => {
                let h = transforms::fwht(x)?;
                rows.iter().map(|&r| s * h[r]).collect()
            }
            Structure::Frequencies(freqs) => {
                let mut out = Vec::with_capacity(self.m);
                if self.n.is_power_of_two() {
                    let spectrum = transforms::dft(x)?;
                    for &f in freqs {
                        out.push(s * spectrum[f].re);
                        out.push(s * spectrum[f].im);
                    }
                } else {
                    // only m/2 coefficients are needed; O(mN) beats the naive full DFT
                    for &f in freqs {
                        let c: num_complex::Complex64 = x
                            .iter()
                            .enumerate()
                            .map(|(l, v)| twiddle(f, l, self.n) * v)
                            .sum();
                        out.push(s * c.re);
                        out.push(s * c.im);
                    }
                }
                out
            }
            Structure::Circulant {
                kernel_spectrum, ..
            } => {
                let full = transforms::circular_convolve_with_spectrum(kernel_spectrum, x)?;
                full[..self.m].iter().map(|v| s * v).collect()
            }
        };
        Ok(out)
    }

    fn apply_columns(&self, columns: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_columns(self.n, columns)?;
        match &self.structure {
            Structure::Dense(a) => Ok(a * columns * self.scale),
            _ => {
                let mut out = DMatrix::zeros(self.m, columns.ncols());
                for (j, col) in columns.column_iter().enumerate() {
                    let image = self.apply(col.as_slice())?;
                    out.column_mut(j).copy_from_slice(&image);
                }
                Ok(out)
            }
        }
    }

    fn densify_with_cap(&self, cap: usize) -> Result<DMatrix<f64>> {
        check_cap(self.m, self.n, cap)?;
        let (m, n, s) = (self.m, self.n, self.scale);
        Ok(match &self.structure {
            Structure::Dense(a) => a * s,
            Structure::Rows(rows) => DMatrix::from_fn(m, n, |i, l| s * hadamard_entry(rows[i], l)),
            Structure::Frequencies(freqs) => DMatrix::from_fn(m, n, |i, l| {
                let w = twiddle(freqs[i / 2], l, n);
                s * if i % 2 == 0 { w.re } else { w.im }
            }),
            Structure::Circulant { generator, .. } => {
                DMatrix::from_fn(m, n, |j, l| s * generator[(l + n - j) % n])
            }
        })
    }
}

/// `Φ·D_ξ`: a base operator with independently seeded column signs.
#[derive(Debug, Clone)]
pub struct SignedOperator {
    base: EmbeddingOperator,
    signs: SignPattern,
}

/// Draws `ξ` from `seed`, independent of the base operator's seed.
pub fn randomize_signs(op: EmbeddingOperator, seed: u64) -> SignedOperator {
    let signs = SignPattern::random(op.n, seed);
    SignedOperator { base: op, signs }
}

impl SignedOperator {
    pub fn new(base: EmbeddingOperator, signs: SignPattern) -> Result<Self> {
        if signs.len() != base.n {
            return Err(Error::dim(format!(
                "sign pattern of length {} for an operator with N={}",
                signs.len(),
                base.n
            )));
        }
        Ok(SignedOperator { base, signs })
    }

    pub fn base(&self) -> &EmbeddingOperator {
        &self.base
    }

    pub fn signs(&self) -> &SignPattern {
        &self.signs
    }
}

impl LinearOperator for SignedOperator {
    fn output_dim(&self) -> usize {
        self.base.m
    }

    fn input_dim(&self) -> usize {
        self.base.n
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let signed = crate::primitives::apply_sign_diagonal(x, &self.signs)?;
        self.base.apply(&signed)
    }

    fn apply_columns(&self, columns: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_columns(self.base.n, columns)?;
        let mut signed = columns.clone();
        for (mut row, &s) in signed.row_iter_mut().zip(self.signs.as_slice()) {
            row *= s;
        }
        self.base.apply_columns(&signed)
    }

    fn densify_with_cap(&self, cap: usize) -> Result<DMatrix<f64>> {
        let mut dense = self.base.densify_with_cap(cap)?;
        for (mut col, &s) in dense.column_iter_mut().zip(self.signs.as_slice()) {
            col *= s;
        }
        Ok(dense)
    }
}

/// Maps a point set, either pointwise or through all pairwise differences.
pub fn apply_batch<Op: LinearOperator + ?Sized>(
    op: &Op,
    points: &PointSet,
    mode: BatchMode,
) -> Result<PointSet> {
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
    PointSet::from_columns(&op.apply_columns(&source.to_columns())?)
}
