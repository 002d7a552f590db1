use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

fn check_pow2(len: usize, what: &str) -> Result<()> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidSize(format!(
            "{what} must be a power of two, got {len}"
        )));
    }
    Ok(())
}

/// Planned unitary 1D transform for a fixed length.
#[derive(Clone)]
pub struct Fft1 {
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft1 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft1").field("len", &self.len).finish()
    }
}

impl Fft1 {
    pub fn new(len: usize) -> Result<Self> {
        check_pow2(len, "DFT length")?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            len,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn process(&self, data: &mut [Complex64], inverse: bool) -> Result<()> {
        if data.len() != self.len {
            return Err(Error::Shape(format!(
                "length-{} transform given {} entries",
                self.len,
                data.len()
            )));
        }
        if inverse {
            self.inv.process(data);
        } else {
            self.fwd.process(data);
        }
        let scale = 1.0 / (self.len as f64).sqrt();
        data.iter_mut().for_each(|v| *v *= scale);
        Ok(())
    }
}

/// Unitary 1D DFT. The inverse uses the conjugate kernel with the same
/// `1/sqrt(n)` scaling.
pub fn dft1(x: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    let plan = Fft1::new(x.len())?;
    let mut out = x.to_vec();
    plan.process(&mut out, inverse)?;
    Ok(out)
}

/// Row-major grid of complex values.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidSize(format!(
                "grid dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} grid needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("grid entries must be finite".into()));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![Complex64::new(0.0, 0.0); rows * cols])
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.cols + col]
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }
}

/// Planned unitary 2D transform for a fixed grid size.
///
/// Rows are transformed first, then columns (via a transpose), and the result
/// is scaled by `1/sqrt(rows * cols)`.
#[derive(Clone)]
pub struct Fft2 {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        check_pow2(rows, "row count")?;
        check_pow2(cols, "column count")?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Transform `data` (row-major, `rows * cols` entries) in place.
    pub fn process(&self, data: &mut [Complex64], inverse: bool) -> Result<()> {
        let (rows, cols) = (self.rows, self.cols);
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} transform given {} entries",
                data.len()
            )));
        }
        let (row_plan, col_plan) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        // rustfft transforms each consecutive chunk of the plan length
        row_plan.process(data);
        let mut transposed = vec![Complex64::new(0.0, 0.0); rows * cols];
        transpose(data, &mut transposed, rows, cols);
        col_plan.process(&mut transposed);
        transpose(&transposed, data, cols, rows);
        let scale = 1.0 / ((rows * cols) as f64).sqrt();
        data.iter_mut().for_each(|v| *v *= scale);
        Ok(())
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// Unitary 2D DFT (rows, then columns).
pub fn dft2(x: &ComplexGrid, inverse: bool) -> Result<ComplexGrid> {
    let plan = Fft2::new(x.rows, x.cols)?;
    let mut entries = x.entries.clone();
    plan.process(&mut entries, inverse)?;
    Ok(ComplexGrid {
        rows: x.rows,
        cols: x.cols,
        entries,
    })
}
