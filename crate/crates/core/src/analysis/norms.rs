use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::seed::{self, Stream};

/// Matrices whose smaller side is at most this use a full SVD.
pub const SVD_DIMENSION_LIMIT: usize = 512;

const POWER_ITERATION_CAP: usize = 200_000;

pub fn frobenius_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("matrix has non-finite entries"));
    }
    Ok(())
}

/// Largest singular value, `sup_{‖x‖=1} ‖Mx‖`.
pub fn spectral_norm(m: &DMatrix<f64>, tol: f64) -> Result<f64> {
    if m.nrows().min(m.ncols()) <= SVD_DIMENSION_LIMIT {
        spectral_norm_svd(m)
    } else {
        spectral_norm_power(m, tol)
    }
}

pub fn spectral_norm_svd(m: &DMatrix<f64>) -> Result<f64> {
    check_finite(m)?;
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(m.singular_values().max())
}

/// Power iteration on `MᵀM` from a fixed pseudo-random start vector; stops
/// once the Rayleigh quotient changes by less than `tol` relatively.
pub fn spectral_norm_power(m: &DMatrix<f64>, tol: f64) -> Result<f64> {
    check_finite(m)?;
    if m.is_empty() || m.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let mut rng = seed::rng(0, Stream::Vectors);
    let mut v = DVector::from_fn(m.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATION_CAP {
        let mv = m * &v;
        let next = mv.norm_squared();
        let mut w = m.tr_mul(&mv);
        let wn = w.norm();
        if wn == 0.0 {
            // start vector fell in the kernel
            return Ok(next.sqrt());
        }
        w /= wn;
        v = w;
        if (next - lambda).abs() <= tol * next {
            return Ok(next.sqrt());
        }
        lambda = next;
    }
    Err(Error::Numeric(format!(
        "power iteration did not reach tolerance {tol} in {POWER_ITERATION_CAP} steps"
    )))
}
