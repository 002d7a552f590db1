//! Reconstruction quality metrics.

use crate::error::{Error, Result};
use crate::signals::{Field, Image2D};

fn check_same_shape<F: Field>(a: &F, b: &F) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::Shape(format!(
            "operands have shapes {:?} and {:?}",
            a.dims(),
            b.dims()
        )));
    }
    Ok(())
}

/// Mean of squared entrywise differences.
pub fn mse<F: Field>(a: &F, b: &F) -> Result<f64> {
    check_same_shape(a, b)?;
    Ok(mse_slices(a.values(), b.values()))
}

pub(crate) fn mse_slices(a: &[f64], b: &[f64]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    sum / a.len() as f64
}

/// `10 log10(peak^2 / mse)`; `+inf` when the MSE is zero.
pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

pub fn psnr<F: Field>(a: &F, b: &F, peak: f64) -> Result<f64> {
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "peak must be positive and finite, got {peak}"
        )));
    }
    Ok(psnr_from_mse(mse(a, b)?, peak))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub mse: f64,
    pub psnr_db: f64,
    pub peak: f64,
}

impl MetricReport {
    pub fn compare<F: Field>(estimate: &F, truth: &F, peak: f64) -> Result<Self> {
        let mse = mse(estimate, truth)?;
        Ok(Self {
            mse,
            psnr_db: psnr(estimate, truth, peak)?,
            peak,
        })
    }
}

/// Pixels whose forward-difference gradient magnitude exceeds `tol`.
///
/// Differences past the last column/row are taken as zero.
pub fn nonzero_gradient_count(img: &Image2D, tol: f64) -> usize {
    let (rows, cols) = (img.rows(), img.cols());
    let mut count = 0;
    for r in 0..rows {
        for c in 0..cols {
            let v = img.get(r, c);
            let dx = if c + 1 < cols { img.get(r, c + 1) - v } else { 0.0 };
            let dy = if r + 1 < rows { img.get(r + 1, c) - v } else { 0.0 };
            if (dx * dx + dy * dy).sqrt() > tol {
                count += 1;
            }
        }
    }
    count
}

/// `||curr - prev|| / ||prev||`, with 0 when both are zero and `+inf` when
/// only `prev` is.
pub fn relative_change<F: Field>(prev: &F, curr: &F) -> Result<f64> {
    check_same_shape(prev, curr)?;
    Ok(relative_change_slices(prev.values(), curr.values()))
}

pub(crate) fn relative_change_slices(prev: &[f64], curr: &[f64]) -> f64 {
    let diff: f64 = prev
        .iter()
        .zip(curr)
        .map(|(p, c)| (c - p) * (c - p))
        .sum::<f64>()
        .sqrt();
    let denom = norm(prev);
    if denom == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / denom
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
