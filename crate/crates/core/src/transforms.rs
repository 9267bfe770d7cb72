//! Unnormalized fast transforms and their O(N²) reference implementations.
//!
//! Conventions: the Hadamard matrix is the Sylvester one,
//! `H[j][l] = (−1)^popcount(j & l)`; the DFT is `X_f = Σ_l x_l e^{−2πi f l / N}`
//! and its inverse is the conjugate transform divided by `N`. All scaling
//! needed to make an operator an isometry in expectation lives in
//! [`crate::constructions`].

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub type ComplexVector = Vec<Complex64>;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn require_power_of_two(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::param(format!("length {n} is not a power of 2")));
    }
    Ok(())
}

/// `H[row][col]` of the Sylvester-Hadamard matrix.
#[inline]
pub fn hadamard_entry(row: usize, col: usize) -> f64 {
    if (row & col).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// In-place butterfly Walsh-Hadamard transform.
pub fn fwht_in_place(data: &mut [f64]) -> Result<()> {
    require_power_of_two(data.len())?;
    let n = data.len();
    let mut half = 1;
    while half < n {
        for chunk in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = chunk.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (sum, dif) = (*a + *b, *a - *b);
                *a = sum;
                *b = dif;
            }
        }
        half *= 2;
    }
    Ok(())
}

pub fn fwht(x: &[f64]) -> Result<Vec<f64>> {
    let mut out = x.to_vec();
    fwht_in_place(&mut out)?;
    Ok(out)
}

pub fn naive_hadamard_multiply(x: &[f64]) -> Result<Vec<f64>> {
    require_power_of_two(x.len())?;
    Ok((0..x.len())
        .map(|row| {
            x.iter()
                .enumerate()
                .map(|(col, v)| hadamard_entry(row, col) * v)
                .sum()
        })
        .collect())
}

/// `e^{−2πi f l / N}` with the phase reduced mod `N` before conversion to
/// floating point.
#[inline]
pub(crate) fn twiddle(f: usize, l: usize, n: usize) -> Complex64 {
    let k = ((f as u128 * l as u128) % n as u128) as f64;
    let angle = -2.0 * PI * k / n as f64;
    Complex64::new(angle.cos(), angle.sin())
}

/// In-place FFT of any length, planned and cached per thread. `inverse`
/// flips the twiddle sign and does not divide by `N`.
pub fn fft_in_place(data: &mut [Complex64], inverse: bool) -> Result<()> {
    if data.is_empty() {
        return Err(Error::dim("FFT of an empty vector"));
    }
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let plan = if inverse {
            planner.plan_fft_inverse(data.len())
        } else {
            planner.plan_fft_forward(data.len())
        };
        plan.process(data);
    });
    Ok(())
}

pub fn dft_naive_complex(x: &[Complex64], inverse: bool) -> ComplexVector {
    let n = x.len();
    (0..n)
        .map(|f| {
            x.iter()
                .enumerate()
                .map(|(l, v)| {
                    let w = twiddle(f, l, n);
                    v * if inverse { w.conj() } else { w }
                })
                .sum()
        })
        .collect()
}

pub fn dft_naive(x: &[f64]) -> Result<ComplexVector> {
    if x.is_empty() {
        return Err(Error::dim("DFT of an empty vector"));
    }
    let cx: ComplexVector = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(dft_naive_complex(&cx, false))
}

fn transform_complex(x: &[Complex64], inverse: bool) -> ComplexVector {
    let mut out = x.to_vec();
    fft_in_place(&mut out, inverse).expect("length checked by callers");
    out
}

/// Unnormalized DFT via the FFT.
pub fn dft(x: &[f64]) -> Result<ComplexVector> {
    if x.is_empty() {
        return Err(Error::dim("DFT of an empty vector"));
    }
    let cx: ComplexVector = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(transform_complex(&cx, false))
}

pub fn inverse_dft(spectrum: &[Complex64]) -> Result<ComplexVector> {
    if spectrum.is_empty() {
        return Err(Error::dim("inverse DFT of an empty vector"));
    }
    let scale = 1.0 / spectrum.len() as f64;
    Ok(transform_complex(spectrum, true)
        .into_iter()
        .map(|v| v * scale)
        .collect())
}

/// `out_j = Σ_l c_{(j−l) mod N} x_l` computed from a precomputed `dft(c)`.
pub fn circular_convolve_with_spectrum(spectrum: &[Complex64], x: &[f64]) -> Result<Vec<f64>> {
    if spectrum.len() != x.len() {
        return Err(Error::dim(format!(
            "kernel spectrum of length {} with input of length {}",
            spectrum.len(),
            x.len()
        )));
    }
    let xs = dft(x)?;
    let product: ComplexVector = spectrum.iter().zip(&xs).map(|(a, b)| a * b).collect();
    Ok(inverse_dft(&product)?.into_iter().map(|v| v.re).collect())
}

pub fn circular_convolve(c: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if c.len() != x.len() {
        return Err(Error::dim(format!(
            "convolution of lengths {} and {}",
            c.len(),
            x.len()
        )));
    }
    circular_convolve_with_spectrum(&dft(c)?, x)
}

pub fn circular_convolve_direct(c: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if c.len() != x.len() {
        return Err(Error::dim(format!(
            "convolution of lengths {} and {}",
            c.len(),
            x.len()
        )));
    }
    let n = c.len();
    Ok((0..n)
        .map(|j| (0..n).map(|l| c[(j + n - l) % n] * x[l]).sum())
        .collect())
}
