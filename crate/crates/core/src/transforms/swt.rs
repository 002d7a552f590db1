//! One level of the undecimated (stationary) Haar transform with periodic
//! extension.
//!
//! Forward: `a[i] = (x[i] + x[i+1]) / sqrt(2)`, `d[i] = (x[i] - x[i+1]) / sqrt(2)`.
//! The inverse averages the two shift-consistent reconstructions, which makes
//! it the canonical dual of the (tight, bound 2) analysis frame. In 2D the
//! transform runs along rows first, then columns.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use crate::error::{Error, Result};
use crate::signals::{Field, Image2D, Signal1D};

/// Name of a coefficient subband. Approximation bands are never listed here:
/// thresholding only ever touches detail bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subband {
    /// 1D detail band.
    Detail,
    /// Low-pass along rows, high-pass along columns.
    Lh,
    /// High-pass along rows, low-pass along columns.
    Hl,
    Hh,
}

impl Subband {
    pub fn name(self) -> &'static str {
        match self {
            Subband::Detail => "detail",
            Subband::Lh => "lh",
            Subband::Hl => "hl",
            Subband::Hh => "hh",
        }
    }
}

impl fmt::Display for Subband {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Subband {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "detail" => Ok(Subband::Detail),
            "lh" => Ok(Subband::Lh),
            "hl" => Ok(Subband::Hl),
            "hh" => Ok(Subband::Hh),
            other => Err(Error::Parse(format!("unknown subband '{other}'"))),
        }
    }
}

/// Access to the detail subbands of a coefficient set.
pub trait SubbandSet {
    fn detail_subbands(&self) -> &'static [Subband];
    fn subband(&self, which: Subband) -> Option<&[f64]>;
    fn subband_mut(&mut self, which: Subband) -> Option<&mut [f64]>;
    /// Number of samples in the signal the coefficients came from.
    fn source_len(&self) -> usize;
}

/// Signals with a 1-level stationary Haar decomposition.
pub trait SwtDomain: Field {
    type Coeffs: SubbandSet + Clone;

    fn swt_forward(&self) -> Self::Coeffs;
    fn swt_inverse(coeffs: &Self::Coeffs) -> Result<Self>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwtCoeffs1D {
    pub approx: Vec<f64>,
    pub detail: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwtCoeffs2D {
    pub ll: Image2D,
    pub lh: Image2D,
    pub hl: Image2D,
    pub hh: Image2D,
}

#[derive(Clone, Copy)]
enum Axis {
    /// Neighbor is the next column in the same row.
    AlongRows,
    /// Neighbor is the next row in the same column.
    AlongCols,
}

#[inline]
fn neighbor_next(i: usize, rows: usize, cols: usize, axis: Axis) -> usize {
    let (r, c) = (i / cols, i % cols);
    match axis {
        Axis::AlongRows => r * cols + (c + 1) % cols,
        Axis::AlongCols => ((r + 1) % rows) * cols + c,
    }
}

#[inline]
fn neighbor_prev(i: usize, rows: usize, cols: usize, axis: Axis) -> usize {
    let (r, c) = (i / cols, i % cols);
    match axis {
        Axis::AlongRows => r * cols + (c + cols - 1) % cols,
        Axis::AlongCols => ((r + rows - 1) % rows) * cols + c,
    }
}

fn analyze(x: &[f64], rows: usize, cols: usize, axis: Axis) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![0.0; x.len()];
    let mut hi = vec![0.0; x.len()];
    for i in 0..x.len() {
        let j = neighbor_next(i, rows, cols, axis);
        lo[i] = (x[i] + x[j]) * FRAC_1_SQRT_2;
        hi[i] = (x[i] - x[j]) * FRAC_1_SQRT_2;
    }
    (lo, hi)
}

fn synthesize(lo: &[f64], hi: &[f64], rows: usize, cols: usize, axis: Axis) -> Vec<f64> {
    (0..lo.len())
        .map(|i| {
            let p = neighbor_prev(i, rows, cols, axis);
            0.5 * FRAC_1_SQRT_2 * ((lo[i] + hi[i]) + (lo[p] - hi[p]))
        })
        .collect()
}

pub fn swt1_forward(x: &Signal1D) -> SwtCoeffs1D {
    let (approx, detail) = analyze(x.samples(), 1, x.len(), Axis::AlongRows);
    SwtCoeffs1D { approx, detail }
}

pub fn swt1_inverse(c: &SwtCoeffs1D) -> Result<Signal1D> {
    if c.approx.len() != c.detail.len() {
        return Err(Error::Shape(format!(
            "approximation has {} coefficients, detail has {}",
            c.approx.len(),
            c.detail.len()
        )));
    }
    let n = c.approx.len();
    if n < 2 {
        return Err(Error::InvalidSize(format!(
            "need at least 2 coefficients per subband, got {n}"
        )));
    }
    Ok(Signal1D::from_vec_unchecked(synthesize(
        &c.approx,
        &c.detail,
        1,
        n,
        Axis::AlongRows,
    )))
}

pub fn swt2_forward(x: &Image2D) -> SwtCoeffs2D {
    let (rows, cols) = (x.rows(), x.cols());
    let (lo, hi) = analyze(x.pixels(), rows, cols, Axis::AlongRows);
    let (ll, lh) = analyze(&lo, rows, cols, Axis::AlongCols);
    let (hl, hh) = analyze(&hi, rows, cols, Axis::AlongCols);
    let wrap = |v| Image2D::from_vec_unchecked(rows, cols, v);
    SwtCoeffs2D {
        ll: wrap(ll),
        lh: wrap(lh),
        hl: wrap(hl),
        hh: wrap(hh),
    }
}

pub fn swt2_inverse(c: &SwtCoeffs2D) -> Result<Image2D> {
    let dims = c.ll.dims();
    for (name, band) in [("lh", &c.lh), ("hl", &c.hl), ("hh", &c.hh)] {
        if band.dims() != dims {
            return Err(Error::Shape(format!(
                "subband {name} is {:?}, ll is {:?}",
                band.dims(),
                dims
            )));
        }
    }
    let (rows, cols) = dims;
    let lo = synthesize(c.ll.pixels(), c.lh.pixels(), rows, cols, Axis::AlongCols);
    let hi = synthesize(c.hl.pixels(), c.hh.pixels(), rows, cols, Axis::AlongCols);
    let x = synthesize(&lo, &hi, rows, cols, Axis::AlongRows);
    Ok(Image2D::from_vec_unchecked(rows, cols, x))
}

impl SubbandSet for SwtCoeffs1D {
    fn detail_subbands(&self) -> &'static [Subband] {
        &[Subband::Detail]
    }

    fn subband(&self, which: Subband) -> Option<&[f64]> {
        match which {
            Subband::Detail => Some(&self.detail),
            _ => None,
        }
    }

    fn subband_mut(&mut self, which: Subband) -> Option<&mut [f64]> {
        match which {
            Subband::Detail => Some(&mut self.detail),
            _ => None,
        }
    }

    fn source_len(&self) -> usize {
        self.approx.len()
    }
}

impl SubbandSet for SwtCoeffs2D {
    fn detail_subbands(&self) -> &'static [Subband] {
        &[Subband::Lh, Subband::Hl, Subband::Hh]
    }

    fn subband(&self, which: Subband) -> Option<&[f64]> {
        match which {
            Subband::Lh => Some(self.lh.values()),
            Subband::Hl => Some(self.hl.values()),
            Subband::Hh => Some(self.hh.values()),
            Subband::Detail => None,
        }
    }

    fn subband_mut(&mut self, which: Subband) -> Option<&mut [f64]> {
        match which {
            Subband::Lh => Some(self.lh.values_mut()),
            Subband::Hl => Some(self.hl.values_mut()),
            Subband::Hh => Some(self.hh.values_mut()),
            Subband::Detail => None,
        }
    }

    fn source_len(&self) -> usize {
        self.ll.len()
    }
}

impl SwtDomain for Signal1D {
    type Coeffs = SwtCoeffs1D;

    fn swt_forward(&self) -> SwtCoeffs1D {
        swt1_forward(self)
    }

    fn swt_inverse(coeffs: &SwtCoeffs1D) -> Result<Self> {
        swt1_inverse(coeffs)
    }
}

impl SwtDomain for Image2D {
    type Coeffs = SwtCoeffs2D;

    fn swt_forward(&self) -> SwtCoeffs2D {
        swt2_forward(self)
    }

    fn swt_inverse(coeffs: &SwtCoeffs2D) -> Result<Self> {
        swt2_inverse(coeffs)
    }
}
