//! Linear observation operators `K` and their adjoints `K*`.
//!
//! [`Selection1D`] picks a random subset of samples (its adjoint zero-fills).
//! [`RadialFourier`] reads a unitary 2D DFT along radial lines through the
//! frequency origin (its adjoint zero-fills, inverts and keeps the real part).
//! Both satisfy `K K* = I` on the data they produce, which the
//! data-restoring step of the solvers relies on.

use std::fmt::Debug;

use num_complex::Complex64;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signals::{Field, Image2D, Signal1D};
use crate::transforms::Fft2;

/// Scalar type of a measurement vector.
pub trait MeasurementScalar: Copy + Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn norm_sqr(self) -> f64;
    /// `Re(conj(self) * other)`.
    fn re_dot(self, other: Self) -> f64;
    fn is_finite(self) -> bool;
}

impl MeasurementScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn re_dot(self, other: Self) -> f64 {
        self * other
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl MeasurementScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn re_dot(self, other: Self) -> f64 {
        self.re * other.re + self.im * other.im
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Measurement vector `g`, ordered as its operator enumerates samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T> {
    values: Vec<T>,
}

impl<T: MeasurementScalar> Observation<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!(
                "observations have {} and {} values",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    /// `self - other`.
    pub fn residual(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.sub(*b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.add(*b))
                .collect(),
        ))
    }

    /// Real part of the inner product.
    pub fn re_inner(&self, other: &Self) -> Result<f64> {
        self.check_len(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.re_dot(*b))
            .sum())
    }
}

/// A linear map from the object domain to measurements, with its adjoint.
pub trait LinearOperator: Sync {
    type Domain: Field;
    type Scalar: MeasurementScalar;

    fn forward(&self, f: &Self::Domain) -> Result<Observation<Self::Scalar>>;
    fn adjoint(&self, g: &Observation<Self::Scalar>) -> Result<Self::Domain>;
    fn measurement_len(&self) -> usize;
}

/// Sorted, duplicate-free sample positions in `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingPattern1D {
    n: usize,
    indices: Vec<usize>,
}

impl SamplingPattern1D {
    pub fn new(n: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() || indices.len() > n {
            return Err(Error::InvalidCount(format!(
                "pattern needs 1..={n} indices, got {}",
                indices.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "pattern indices must be strictly increasing".into(),
            ));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::InvalidParameter(format!(
                    "index {last} out of range for length {n}"
                )));
            }
        }
        Ok(Self { n, indices })
    }

    /// Every position `0..n`.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(n, (0..n).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// `m` distinct positions drawn uniformly from `[0, n)`, returned sorted.
pub fn make_random_pattern(n: usize, m: usize, seed: u64) -> Result<SamplingPattern1D> {
    if m < 1 || m > n {
        return Err(Error::InvalidCount(format!(
            "sample count must satisfy 1 <= m <= n, got m={m}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices = index::sample(&mut rng, n, m).into_vec();
    indices.sort_unstable();
    SamplingPattern1D::new(n, indices)
}

/// Coordinate selection: `K f = f[indices]`.
#[derive(Debug, Clone)]
pub struct Selection1D {
    pattern: SamplingPattern1D,
}

impl Selection1D {
    pub fn new(pattern: SamplingPattern1D) -> Self {
        Self { pattern }
    }

    pub fn pattern(&self) -> &SamplingPattern1D {
        &self.pattern
    }
}

impl LinearOperator for Selection1D {
    type Domain = Signal1D;
    type Scalar = f64;

    fn forward(&self, f: &Signal1D) -> Result<Observation<f64>> {
        if f.len() != self.pattern.n {
            return Err(Error::Shape(format!(
                "pattern is for length {}, signal has {}",
                self.pattern.n,
                f.len()
            )));
        }
        let s = f.samples();
        Ok(Observation::new(
            self.pattern.indices.iter().map(|&i| s[i]).collect(),
        ))
    }

    fn adjoint(&self, g: &Observation<f64>) -> Result<Signal1D> {
        if g.len() != self.pattern.len() {
            return Err(Error::Shape(format!(
                "pattern has {} samples, observation has {}",
                self.pattern.len(),
                g.len()
            )));
        }
        let mut out = vec![0.0; self.pattern.n];
        for (&i, &v) in self.pattern.indices.iter().zip(g.values()) {
            out[i] = v;
        }
        if out.len() < 2 {
            return Err(Error::InvalidSize(format!(
                "signal length must be >= 2, pattern is for {}",
                out.len()
            )));
        }
        Ok(Signal1D::from_vec_unchecked(out))
    }

    fn measurement_len(&self) -> usize {
        self.pattern.len()
    }
}

/// Hermitian-symmetric set of DFT cells on an `n x n` grid.
///
/// Cells are stored in DFT index order (row = vertical frequency `v mod n`,
/// column = horizontal frequency `u mod n`); measurements enumerate the true
/// cells row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadialMask {
    n: usize,
    cells: Vec<bool>,
    order: Vec<usize>,
}

impl RadialMask {
    /// Build from an arbitrary cell grid, checking the mask invariants.
    pub fn from_cells(n: usize, cells: Vec<bool>) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidSize(format!(
                "mask side must be a power of two >= 2, got {n}"
            )));
        }
        if cells.len() != n * n {
            return Err(Error::Shape(format!(
                "{n}x{n} mask needs {} cells, got {}",
                n * n,
                cells.len()
            )));
        }
        if !cells[0] {
            return Err(Error::InvalidParameter("mask must contain the DC cell".into()));
        }
        for r in 0..n {
            for c in 0..n {
                if cells[r * n + c] != cells[mate(r, c, n)] {
                    return Err(Error::InvalidParameter(format!(
                        "mask is not Hermitian-symmetric at cell ({r}, {c})"
                    )));
                }
            }
        }
        let order = (0..n * n).filter(|&i| cells[i]).collect();
        Ok(Self { n, cells, order })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    /// Flat indices of the sampled cells, in measurement order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn count(&self) -> usize {
        self.order.len()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.n + col]
    }

    /// Centered frequency coordinates `(u, v)` of a flat cell index, each in
    /// `[-n/2, n/2)`.
    pub fn centered_coords(&self, flat: usize) -> (i64, i64) {
        let n = self.n as i64;
        let center = |k: i64| if k < n / 2 { k } else { k - n };
        let (r, c) = ((flat / self.n) as i64, (flat % self.n) as i64);
        (center(c), center(r))
    }

    /// Flat cell index for centered coordinates `(u, v)`.
    pub fn flat_index(&self, u: i64, v: i64) -> usize {
        let n = self.n as i64;
        (v.rem_euclid(n) * n + u.rem_euclid(n)) as usize
    }
}

fn mate(r: usize, c: usize, n: usize) -> usize {
    ((n - r) % n) * n + (n - c) % n
}

/// Radial-line mask with `k_lines` equally spaced angles `j*pi/k_lines`.
///
/// Each line is rasterized by rounding along its dominant axis, then every
/// cell's negated-frequency mate is added and DC is forced on.
pub fn make_radial_mask(n: usize, k_lines: usize) -> Result<RadialMask> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidSize(format!(
            "mask side must be a power of two >= 2, got {n}"
        )));
    }
    if k_lines < 1 {
        return Err(Error::InvalidCount("need at least one radial line".into()));
    }
    let half = (n / 2) as i64;
    let ni = n as i64;
    let mut cells = vec![false; n * n];
    let mut mark = |u: i64, v: i64| {
        cells[(v.rem_euclid(ni) * ni + u.rem_euclid(ni)) as usize] = true;
    };
    for j in 0..k_lines {
        let theta = j as f64 * std::f64::consts::PI / k_lines as f64;
        let (s, c) = theta.sin_cos();
        for t in -half..half {
            if c.abs() >= s.abs() {
                mark(t, (t as f64 * s / c).round() as i64);
            } else {
                mark((t as f64 * c / s).round() as i64, t);
            }
        }
    }
    let mut sym = cells.clone();
    for r in 0..n {
        for col in 0..n {
            if cells[r * n + col] {
                sym[mate(r, col, n)] = true;
            }
        }
    }
    sym[0] = true;
    RadialMask::from_cells(n, sym)
}

/// Masked unitary 2D DFT of a real image.
#[derive(Debug, Clone)]
pub struct RadialFourier {
    mask: RadialMask,
    fft: Fft2,
}

impl RadialFourier {
    pub fn new(mask: RadialMask) -> Result<Self> {
        let fft = Fft2::new(mask.n, mask.n)?;
        Ok(Self { mask, fft })
    }

    pub fn mask(&self) -> &RadialMask {
        &self.mask
    }
}

impl LinearOperator for RadialFourier {
    type Domain = Image2D;
    type Scalar = Complex64;

    fn forward(&self, f: &Image2D) -> Result<Observation<Complex64>> {
        let n = self.mask.n;
        if f.dims() != (n, n) {
            return Err(Error::Shape(format!(
                "mask is {n}x{n}, image is {}x{}",
                f.rows(),
                f.cols()
            )));
        }
        let mut buf: Vec<Complex64> = f
            .pixels()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.fft.process(&mut buf, false)?;
        Ok(Observation::new(
            self.mask.order.iter().map(|&i| buf[i]).collect(),
        ))
    }

    fn adjoint(&self, g: &Observation<Complex64>) -> Result<Image2D> {
        let n = self.mask.n;
        if g.len() != self.mask.count() {
            return Err(Error::Shape(format!(
                "mask has {} cells, observation has {}",
                self.mask.count(),
                g.len()
            )));
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
        for (&i, &v) in self.mask.order.iter().zip(g.values()) {
            buf[i] = v;
        }
        self.fft.process(&mut buf, true)?;
        Ok(Image2D::from_vec_unchecked(
            n,
            n,
            buf.iter().map(|z| z.re).collect(),
        ))
    }

    fn measurement_len(&self) -> usize {
        self.mask.count()
    }
}
