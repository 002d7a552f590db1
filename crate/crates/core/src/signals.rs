//! Test signals, the Shepp-Logan phantom and additive white Gaussian noise.
//!
//! [`Signal1D`] and [`Image2D`] are the two object-domain containers. Both
//! implement [`Field`], the flat real-valued view that metrics, noise
//! injection and the solvers work through.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Flat, row-major access to the real samples of a signal or image.
pub trait Field: Clone + std::fmt::Debug {
    fn values(&self) -> &[f64];
    fn values_mut(&mut self) -> &mut [f64];
    /// `(rows, cols)`; a 1D signal of length n reports `(1, n)`.
    fn dims(&self) -> (usize, usize);

    fn len(&self) -> usize {
        self.values().len()
    }

    fn is_empty(&self) -> bool {
        self.values().is_empty()
    }

    /// Same shape as `self`, with the given values.
    fn with_values(&self, values: Vec<f64>) -> Result<Self>;
}

/// Real-valued 1D signal with at least two samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal1D {
    samples: Vec<f64>,
}

impl Signal1D {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidSize(format!(
                "signal needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "signal sample {i} is not finite"
            )));
        }
        Ok(Self { samples })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    pub(crate) fn from_vec_unchecked(samples: Vec<f64>) -> Self {
        debug_assert!(samples.len() >= 2);
        Self { samples }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.samples
    }
}

impl Field for Signal1D {
    fn values(&self) -> &[f64] {
        &self.samples
    }

    fn values_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    fn dims(&self) -> (usize, usize) {
        (1, self.samples.len())
    }

    fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.samples.len() {
            return Err(Error::Shape(format!(
                "expected {} samples, got {}",
                self.samples.len(),
                values.len()
            )));
        }
        Ok(Self { samples: values })
    }
}

/// Real-valued image stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image2D {
    rows: usize,
    cols: usize,
    pixels: Vec<f64>,
}

impl Image2D {
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidSize(format!(
                "image dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if pixels.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} image needs {} pixels, got {}",
                rows * cols,
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "pixel ({}, {}) is not finite",
                i / cols,
                i % cols
            )));
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::filled(rows, cols, 0.0)
    }

    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, pixels: Vec<f64>) -> Self {
        debug_assert_eq!(pixels.len(), rows * cols);
        Self { rows, cols, pixels }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.cols + col]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.pixels
    }

    /// Copy with every pixel clamped to `[lo, hi]`.
    pub fn clipped(&self, lo: f64, hi: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            pixels: self.pixels.iter().map(|v| v.clamp(lo, hi)).collect(),
        }
    }
}

impl Field for Image2D {
    fn values(&self) -> &[f64] {
        &self.pixels
    }

    fn values_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.pixels.len() {
            return Err(Error::Shape(format!(
                "expected {} pixels, got {}",
                self.pixels.len(),
                values.len()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            pixels: values,
        })
    }
}

/// Sign with `sgn(0) = 0`; `f64::signum` maps zero to one.
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Donoho-Johnstone HeaviSine sampled at `t_i = (i + 1) / n`.
pub fn gen_heavisine(n: usize) -> Result<Signal1D> {
    if n < 2 {
        return Err(Error::InvalidSize(format!(
            "HeaviSine needs n >= 2, got {n}"
        )));
    }
    let samples = (0..n)
        .map(|i| {
            let t = (i + 1) as f64 / n as f64;
            4.0 * (4.0 * PI * t).sin() - sgn(t - 0.3) - sgn(0.72 - t)
        })
        .collect();
    Ok(Signal1D::from_vec_unchecked(samples))
}

/// One ellipse of a phantom, in normalized `[-1, 1]^2` coordinates with `y`
/// pointing up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseSpec {
    /// Additive intensity.
    pub intensity: f64,
    /// Semi-axis along the (rotated) x direction.
    pub a: f64,
    /// Semi-axis along the (rotated) y direction.
    pub b: f64,
    pub x0: f64,
    pub y0: f64,
    /// Counter-clockwise rotation in degrees.
    pub phi_deg: f64,
}

impl EllipseSpec {
    pub const fn new(intensity: f64, a: f64, b: f64, x0: f64, y0: f64, phi_deg: f64) -> Self {
        Self {
            intensity,
            a,
            b,
            x0,
            y0,
            phi_deg,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.phi_deg.to_radians().sin_cos();
        let dx = x - self.x0;
        let dy = y - self.y0;
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        (u / self.a).powi(2) + (v / self.b).powi(2) <= 1.0
    }
}

/// The classic (unmodified) 10-ellipse Shepp-Logan table.
pub const SHEPP_LOGAN: [EllipseSpec; 10] = [
    EllipseSpec::new(1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    EllipseSpec::new(-0.98, 0.6624, 0.8740, 0.0, -0.0184, 0.0),
    EllipseSpec::new(-0.02, 0.11, 0.31, 0.22, 0.0, -18.0),
    EllipseSpec::new(-0.02, 0.16, 0.41, -0.22, 0.0, 18.0),
    EllipseSpec::new(0.01, 0.21, 0.25, 0.0, 0.35, 0.0),
    EllipseSpec::new(0.01, 0.046, 0.046, 0.0, 0.1, 0.0),
    EllipseSpec::new(0.01, 0.046, 0.046, 0.0, -0.1, 0.0),
    EllipseSpec::new(0.01, 0.046, 0.023, -0.08, -0.605, 0.0),
    EllipseSpec::new(0.01, 0.023, 0.023, 0.0, -0.606, 0.0),
    EllipseSpec::new(0.01, 0.023, 0.046, 0.06, -0.605, 0.0),
];

/// Rasterize a sum of ellipses on an `n x n` grid, sampling at pixel centers.
///
/// Pixel `(r, c)` maps to `x = (c + 0.5) * 2/n - 1`, `y = 1 - (r + 0.5) * 2/n`.
/// No clipping is applied.
pub fn render_ellipses(n: usize, ellipses: &[EllipseSpec]) -> Result<Image2D> {
    if n == 0 {
        return Err(Error::InvalidSize("phantom size must be positive".into()));
    }
    if let Some(e) = ellipses.iter().find(|e| !(e.a > 0.0 && e.b > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "ellipse semi-axes must be positive, got a={}, b={}",
            e.a, e.b
        )));
    }
    let step = 2.0 / n as f64;
    let mut pixels = vec![0.0; n * n];
    for (r, row) in pixels.chunks_exact_mut(n).enumerate() {
        let y = 1.0 - (r as f64 + 0.5) * step;
        for (c, px) in row.iter_mut().enumerate() {
            let x = (c as f64 + 0.5) * step - 1.0;
            *px = ellipses
                .iter()
                .filter(|e| e.contains(x, y))
                .map(|e| e.intensity)
                .sum();
        }
    }
    Ok(Image2D::from_vec_unchecked(n, n, pixels))
}

/// `n x n` Shepp-Logan phantom, clipped to `[0, 1]`.
pub fn gen_shepp_logan(n: usize) -> Result<Image2D> {
    if n < 16 {
        return Err(Error::InvalidSize(format!(
            "phantom needs n >= 16, got {n}"
        )));
    }
    Ok(render_ellipses(n, &SHEPP_LOGAN)?.clipped(0.0, 1.0))
}

/// Standard deviation of the noise whose PSNR against a unit peak is
/// `noise_psnr_db`.
pub fn awgn_sigma(noise_psnr_db: f64) -> f64 {
    10f64.powf(-noise_psnr_db / 20.0)
}

/// Add i.i.d. zero-mean Gaussian noise with `sigma = 10^(-dB/20)` (peak 1).
///
/// Deterministic in `seed`.
pub fn add_awgn<F: Field>(x: &F, noise_psnr_db: f64, seed: u64) -> Result<F> {
    if !noise_psnr_db.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise level must be finite, got {noise_psnr_db}"
        )));
    }
    let sigma = awgn_sigma(noise_psnr_db);
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidParameter(format!("noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = x.clone();
    for v in out.values_mut() {
        *v += normal.sample(&mut rng);
    }
    Ok(out)
}

/// Random real signal whose unitary DFT is supported on centered bins
/// `|k| <= band`.
pub fn gen_bandlimited(n: usize, band: usize, seed: u64) -> Result<Signal1D> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("need n >= 2, got {n}")));
    }
    if band == 0 || 2 * band >= n {
        return Err(Error::InvalidParameter(format!(
            "band must satisfy 1 <= band < n/2, got band={band}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let dc: f64 = normal.sample(&mut rng);
    let coeffs: Vec<(f64, f64)> = (0..band)
        .map(|_| (normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    let samples = (0..n)
        .map(|j| {
            coeffs
                .iter()
                .enumerate()
                .fold(dc, |acc, (k, &(a, b))| {
                    let w = 2.0 * PI * ((k + 1) * j) as f64 / n as f64;
                    acc + a * w.cos() + b * w.sin()
                })
        })
        .collect();
    Ok(Signal1D::from_vec_unchecked(samples))
}
